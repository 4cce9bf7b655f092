// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/stk.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/logging.hpp"
#include "citss/rng.hpp"

namespace citss::stk {
namespace {

using nlohmann::ordered_json;

// One-shot instructional prompt for keyphrase extraction. `{T}` is replaced
// with the flattened context.
const char* const kExtractionPrompt =
    R"PROMPT(You are provided a context from a paper P, and please ignore the #CITATION_TAG. Your task is to identify scientific keyphrases from the context. Each scientific keyphrase belongs to one of the following classes:

- [Task]: The scientific problem or research focus addressed in the paper. It outlines the specific objectives or questions that the study aims to answer.

- [Material]: All materials utilized in the study, such as experimental tools, datasets, and the objects or subjects of investigation. It details the resources of the research.

- [Technique]: The specific methods, models, frameworks, or systems. It identifies the approaches taken to analyze data or solve problems.

- [Process]: It describes a sequence of steps or operations involved in a particular procedure, algorithm, or workflow. It emphasizes the procedural aspects.

- [Measure]: This class pertains to the metrics, indicators, or criteria used to assess or quantify the outcomes of the study.

- [Concept]: This category encompasses scientific keyphrases that do not fit into the aforementioned classes. It may include phenomena, theoretical terms, or entities relevant to the field of study.

Output your answer only in JSON format and be consistent with the text in the original context. Specifically, if there is any keyphrase of a certain class, use the class label as the key and the list of keyphrases as the value.

Here is an example: "The framework represents a generalization of several predecessor NLG systems based on Meaning-Text Theory: FoG (Kittredge and Polgu~re, 1991), LFS (Iordanskaja et al., 1992), and JOYCE (Rambow and Korelsky, 1992). The framework was originally developed for the realization of deep-syntactic structures in NLG ( #CITATION_TAG )"

Output:{'Technique': ['NLG systems', 'FoG', 'LFS', 'JOYCE', 'Meaning-Text Theory'], 'Concept':['deep-syntactic structures']}

Here is the context:{T})PROMPT";

/// Extracts the balanced {...} block starting at `begin`, tolerating single-
/// or double-quoted strings with backslash escapes. Returns npos-length when
/// unbalanced.
std::size_t balanced_object_end(const std::string& text, std::size_t begin) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\' && i + 1 < text.size())
        ++i;
      else if (c == quote)
        quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

/// Rewrites single-quoted strings as double-quoted JSON strings.
std::string normalize_quotes(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\' && i + 1 < text.size()) {
        const char next = text[i + 1];
        if (quote == '\'' && next == '\'') {
          out += '\'';  // \' inside a single-quoted string is a plain quote
        } else {
          out += c;
          out += next;
        }
        ++i;
      } else if (c == quote) {
        out += '"';
        quote = 0;
      } else if (c == '"' && quote == '\'') {
        out += "\\\"";
      } else {
        out += c;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      out += '"';
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<StkMention> mentions_from_json(const ordered_json& object) {
  std::vector<StkMention> mentions;
  for (const auto& [key, value] : object.items()) {
    StkType type;
    if (!parse_type(key, type)) {
      log::warn("dropping unknown keyphrase type `" + key + "`");
      continue;
    }
    const auto push = [&](const ordered_json& entry) {
      if (!entry.is_string()) {
        log::warn("dropping non-string keyphrase under `" + key + "`");
        return;
      }
      const std::string surface = entry.get<std::string>();
      if (!surface.empty()) mentions.push_back({surface, type});
    };
    if (value.is_array())
      for (const auto& entry : value) push(entry);
    else
      push(value);
  }
  return mentions;
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  bool changed = false;
  for (char c : id) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
        c == '-') {
      out += c;
    } else {
      out += '_';
      changed = true;
    }
  }
  if (out.size() > 80) {
    out.resize(80);
    changed = true;
  }
  if (changed) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%08llx",
                  static_cast<unsigned long long>(fnv1a64(id) & 0xffffffffULL));
    out += "-";
    out += buf;
  }
  return out;
}

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

const std::array<StkType, kTypeCount>& all_types() {
  static const std::array<StkType, kTypeCount> types = {
      StkType::Task,    StkType::Material, StkType::Technique,
      StkType::Process, StkType::Measure,  StkType::Concept};
  return types;
}

std::string to_string(StkType type) {
  switch (type) {
    case StkType::Task: return "Task";
    case StkType::Material: return "Material";
    case StkType::Technique: return "Technique";
    case StkType::Process: return "Process";
    case StkType::Measure: return "Measure";
    case StkType::Concept: return "Concept";
  }
  return "Concept";
}

bool parse_type(const std::string& name, StkType& out) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (StkType t : all_types()) {
    std::string label = to_string(t);
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (n == label) {
      out = t;
      return true;
    }
  }
  return false;
}

void StkBase::add_sample(const std::string& sample_id,
                         std::vector<StkMention> mentions) {
  for (const auto& m : mentions) {
    auto& pool = global_[m.type];
    const auto it = std::lower_bound(pool.begin(), pool.end(), m.surface);
    if (it == pool.end() || *it != m.surface) pool.insert(it, m.surface);
  }
  per_sample_[sample_id] = std::move(mentions);
}

const std::vector<StkMention>& StkBase::mentions_for(
    const std::string& sample_id) const {
  static const std::vector<StkMention> empty;
  const auto it = per_sample_.find(sample_id);
  return it == per_sample_.end() ? empty : it->second;
}

bool StkBase::has_sample(const std::string& sample_id) const {
  return per_sample_.count(sample_id) > 0;
}

const std::vector<std::string>& StkBase::pool(StkType type) const {
  static const std::vector<std::string> empty;
  const auto it = global_.find(type);
  return it == global_.end() ? empty : it->second;
}

std::size_t StkBase::total_mentions() const {
  std::size_t n = 0;
  for (const auto& [id, mentions] : per_sample_) n += mentions.size();
  return n;
}

bool StkBase::verify_global() const {
  std::map<StkType, std::vector<std::string>> rebuilt;
  for (const auto& [id, mentions] : per_sample_)
    for (const auto& m : mentions) {
      auto& pool = rebuilt[m.type];
      const auto it = std::lower_bound(pool.begin(), pool.end(), m.surface);
      if (it == pool.end() || *it != m.surface) pool.insert(it, m.surface);
    }
  // Empty pools are equivalent to absent pools.
  auto normalized = [](const std::map<StkType, std::vector<std::string>>& m) {
    std::map<StkType, std::vector<std::string>> out;
    for (const auto& [k, v] : m)
      if (!v.empty()) out[k] = v;
    return out;
  };
  return normalized(rebuilt) == normalized(global_);
}

void StkBase::save(const std::string& path) const {
  ordered_json j;
  auto& samples = j["per_sample"];
  for (const auto& [id, mentions] : per_sample_) {
    ordered_json list = ordered_json::array();
    for (const auto& m : mentions)
      list.push_back({{"surface", m.surface}, {"type", to_string(m.type)}});
    samples[id] = std::move(list);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write STK base: " + path);
  out << j.dump(2) << "\n";
}

StkBase StkBase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open STK base: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const ordered_json::exception& e) {
    throw Error("malformed STK base " + path + ": " + e.what());
  }
  StkBase base;
  if (!j.contains("per_sample"))
    throw Error("malformed STK base " + path + ": missing per_sample");
  for (const auto& [id, list] : j["per_sample"].items()) {
    std::vector<StkMention> mentions;
    for (const auto& entry : list) {
      StkType type;
      if (!parse_type(entry.at("type").get<std::string>(), type))
        throw Error("malformed STK base " + path + ": bad type for `" + id +
                    "`");
      mentions.push_back({entry.at("surface").get<std::string>(), type});
    }
    base.add_sample(id, std::move(mentions));
  }
  return base;
}

std::string build_extraction_prompt(const corpus::CitationContext& context,
                                    bool* warned_empty) {
  const std::string flattened = context.flattened();
  if (warned_empty) *warned_empty = false;
  if (flattened.empty()) {
    log::warn("building extraction prompt for empty context `" +
              context.sample_id + "`");
    if (warned_empty) *warned_empty = true;
  }
  const std::string& tmpl = extraction_prompt_template();
  const auto pos = tmpl.find("{T}");
  std::string prompt = tmpl;
  prompt.replace(pos, 3, flattened);
  return prompt;
}

const std::string& extraction_prompt_template() {
  static const std::string tmpl = kExtractionPrompt;
  return tmpl;
}

std::vector<StkMention> parse_stk_response(const std::string& raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string::npos;
       pos = raw.find('{', pos + 1)) {
    const std::size_t end = balanced_object_end(raw, pos);
    if (end == std::string::npos) continue;
    const std::string candidate =
        normalize_quotes(raw.substr(pos, end - pos));
    ordered_json parsed =
        ordered_json::parse(candidate, /*cb=*/nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) continue;
    return mentions_from_json(parsed);
  }
  throw ParseError("no JSON object found in model reply", raw);
}

std::vector<StkMention> filter_mentions(
    std::vector<StkMention> mentions, const corpus::CitationContext& context) {
  const std::string flattened = context.flattened();
  std::vector<StkMention> kept;
  for (auto& m : mentions) {
    if (flattened.find(m.surface) == std::string::npos) continue;
    const bool duplicate =
        std::any_of(kept.begin(), kept.end(),
                    [&](const StkMention& k) { return k.surface == m.surface; });
    if (duplicate) continue;  // first-listed type wins
    kept.push_back(std::move(m));
  }
  return kept;
}

std::uint64_t prompt_hash(const std::string& prompt) {
  return fnv1a64(prompt);
}

std::filesystem::path cache_file(const std::filesystem::path& dir,
                                 const std::string& sample_id,
                                 std::uint64_t hash) {
  return dir / (sanitize_id(sample_id) + "-" + hex16(hash) + ".json");
}

namespace {

struct FetchTask {
  const corpus::CitationContext* context;
  std::string prompt;
  std::uint64_t hash;
  std::filesystem::path file;
  std::vector<StkMention> mentions;  // parsed, pre-filter
  bool ok = false;
  std::string error;
};

void run_fetch(FetchTask& task, service::TextGenClient& client, int retries,
               std::mutex& io_mutex) {
  std::string last_error = "no attempts made";
  for (int attempt = 0; attempt < std::max(1, retries); ++attempt) {
    std::string raw;
    try {
      raw = client.complete(task.prompt);
      task.mentions = parse_stk_response(raw);
    } catch (const ParseError& e) {
      last_error = std::string("parse: ") + e.what();
      continue;
    } catch (const Error& e) {
      last_error = std::string("service: ") + e.what();
      continue;
    }
    ordered_json j;
    j["id"] = task.context->sample_id;
    j["prompt_hash"] = hex16(task.hash);
    j["raw"] = raw;
    ordered_json list = ordered_json::array();
    for (const auto& m : task.mentions)
      list.push_back({{"surface", m.surface}, {"type", to_string(m.type)}});
    j["mentions"] = std::move(list);
    {
      std::lock_guard<std::mutex> lock(io_mutex);
      std::ofstream out(task.file);
      if (out) out << j.dump(2) << "\n";
    }
    task.ok = true;
    return;
  }
  task.error = last_error;
}

}  // namespace

StkBase extract_stks(const corpus::DatasetSplit& data,
                     service::TextGenClient* client,
                     const ExtractOptions& options, ExtractReport* report) {
  if (options.cache_dir.empty())
    throw Error("extract_stks requires a cache directory");
  std::filesystem::create_directories(options.cache_dir);

  ExtractReport stats;
  std::vector<FetchTask> pending;
  StkBase base;
  std::vector<std::pair<std::string, std::string>> failures;

  for (const auto& ctx : data.train) {
    FetchTask task;
    task.context = &ctx;
    task.prompt = build_extraction_prompt(ctx);
    task.hash = prompt_hash(task.prompt);
    task.file = cache_file(options.cache_dir, ctx.sample_id, task.hash);
    if (std::filesystem::exists(task.file)) {
      std::ifstream in(task.file);
      ordered_json j;
      try {
        in >> j;
        std::vector<StkMention> mentions;
        for (const auto& entry : j.at("mentions")) {
          StkType type;
          if (!parse_type(entry.at("type").get<std::string>(), type))
            throw Error("bad type");
          mentions.push_back({entry.at("surface").get<std::string>(), type});
        }
        base.add_sample(ctx.sample_id, filter_mentions(std::move(mentions), ctx));
        ++stats.cached;
        continue;
      } catch (const std::exception&) {
        log::warn("discarding unreadable cache entry " + task.file.string());
        std::filesystem::remove(task.file);
      }
    }
    pending.push_back(std::move(task));
  }

  if (!pending.empty() && client != nullptr) {
    std::mutex io_mutex;
    const int workers = std::max(
        1, std::min<int>(options.max_inflight,
                         static_cast<int>(pending.size())));
    if (workers == 1) {
      for (auto& task : pending)
        run_fetch(task, *client, options.retries, io_mutex);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          const auto worker_client = client->clone();
          for (std::size_t i = next.fetch_add(1); i < pending.size();
               i = next.fetch_add(1))
            run_fetch(pending[i], *worker_client, options.retries, io_mutex);
        });
      }
      for (auto& t : threads) t.join();
    }
  }

  for (auto& task : pending) {
    if (task.ok) {
      base.add_sample(task.context->sample_id,
                      filter_mentions(std::move(task.mentions), *task.context));
      ++stats.fetched;
    } else {
      if (task.error.empty())
        task.error = "no text-generation client and no cache entry";
      base.add_sample(task.context->sample_id, {});
      failures.emplace_back(task.context->sample_id, task.error);
      ++stats.failed;
      log::warn("STK extraction failed for `" + task.context->sample_id +
                "`: " + task.error);
    }
  }

  if (!options.failure_report.empty() && !failures.empty()) {
    std::ofstream out(options.failure_report);
    for (const auto& [id, error] : failures) {
      ordered_json j;
      j["id"] = id;
      j["error"] = error;
      out << j.dump() << "\n";
    }
  }
  if (report) *report = stats;
  return base;
}

StkStats compute_stats(const StkBase& base) {
  StkStats stats;
  std::array<std::size_t, kTypeCount> counts{};
  for (const auto& [id, mentions] : base.per_sample())
    for (const auto& m : mentions) {
      ++stats.total;
      ++counts[static_cast<int>(m.type)];
    }
  const double n = std::max<std::size_t>(1, base.sample_count());
  for (int t = 0; t < kTypeCount; ++t)
    stats.avg_per_sample[t] = static_cast<double>(counts[t]) / n;
  return stats;
}

std::string stats_table(const StkStats& stats) {
  std::ostringstream out;
  out << "Type-agnostic total: " << stats.total << "\n";
  out << "Average mentions per sample by type:\n";
  for (int t = 0; t < kTypeCount; ++t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-10s %.2f\n",
                  to_string(all_types()[t]).c_str(), stats.avg_per_sample[t]);
    out << buf;
  }
  return out.str();
}

}  // namespace citss::stk
