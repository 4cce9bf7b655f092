// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/rng.hpp"

namespace citss::corpus {
namespace {

using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::size_t count_occurrences(const std::string& text, const std::string& sub) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(sub); pos != std::string::npos;
       pos = text.find(sub, pos + sub.size()))
    ++count;
  return count;
}

[[noreturn]] void record_error(const std::string& path, int lineno,
                               const std::string& what) {
  throw Error(path + ":" + std::to_string(lineno) + ": malformed record: " +
              what);
}

struct RawRecord {
  CitationContext context;
  std::string split;
};

RawRecord parse_record(const std::string& path, int lineno,
                       const std::string& line, DatasetId schema, int l_max,
                       bool require_label) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    record_error(path, lineno, e.what());
  }
  if (!j.is_object()) record_error(path, lineno, "expected a JSON object");
  for (const char* field : {"id", "sentences", "citance_index"})
    if (!j.contains(field))
      record_error(path, lineno, std::string("missing field `") + field + "`");

  CitationContext ctx;
  ctx.dataset = schema;
  if (!j["id"].is_string()) record_error(path, lineno, "`id` must be a string");
  ctx.sample_id = j["id"].get<std::string>();
  if (!j["sentences"].is_array() || j["sentences"].empty())
    record_error(path, lineno, "`sentences` must be a non-empty array");
  for (const auto& s : j["sentences"]) {
    if (!s.is_string())
      record_error(path, lineno, "`sentences` entries must be strings");
    ctx.sentences.push_back(s.get<std::string>());
  }
  if (!j["citance_index"].is_number_integer())
    record_error(path, lineno, "`citance_index` must be an integer");
  ctx.citance_index = j["citance_index"].get<int>();
  if (ctx.citance_index < 0 ||
      ctx.citance_index >= static_cast<int>(ctx.sentences.size()))
    record_error(path, lineno, "`citance_index` out of range");

  const std::size_t anchors = count_occurrences(ctx.citance(), kAnchor);
  if (anchors == 0)
    throw Error(path + ":" + std::to_string(lineno) +
                ": citance without anchor in sample `" + ctx.sample_id + "`");
  if (anchors > 1)
    throw Error(path + ":" + std::to_string(lineno) +
                ": multiple anchors in citance of sample `" + ctx.sample_id +
                "`");

  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_string())
      record_error(path, lineno, "`label` must be a string or null");
    const std::string raw = j["label"].get<std::string>();
    const auto index = LabelSet::standard().index_of(raw, schema);
    if (!index)
      throw Error(path + ":" + std::to_string(lineno) + ": unknown label `" +
                  raw + "`");
    ctx.label = *index;
  } else if (require_label) {
    throw Error(path + ":" + std::to_string(lineno) +
                ": unlabeled record `" + ctx.sample_id + "`");
  }

  // Window to at most l_max sentences on each side of the citance.
  const int lo = std::max(0, ctx.citance_index - l_max);
  const int hi = std::min(static_cast<int>(ctx.sentences.size()),
                          ctx.citance_index + l_max + 1);
  if (lo > 0 || hi < static_cast<int>(ctx.sentences.size())) {
    ctx.sentences = std::vector<std::string>(ctx.sentences.begin() + lo,
                                             ctx.sentences.begin() + hi);
    ctx.citance_index -= lo;
  }

  RawRecord rec;
  rec.context = std::move(ctx);
  rec.split = j.value("split", std::string("train"));
  if (rec.split != "train" && rec.split != "validation" && rec.split != "test")
    record_error(path, lineno, "`split` must be train|validation|test");
  return rec;
}

template <typename Consume>
void for_each_record(const std::string& path, DatasetId schema, int l_max,
                     bool require_label, Consume&& consume) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  std::string line;
  int lineno = 0;
  std::size_t records = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    RawRecord rec = parse_record(path, lineno, line, schema, l_max,
                                 require_label);
    if (!seen_ids.insert(rec.context.sample_id).second)
      throw Error(path + ":" + std::to_string(lineno) +
                  ": duplicate sample id `" + rec.context.sample_id + "`");
    ++records;
    consume(std::move(rec));
  }
  if (records == 0) throw Error(path + ": no records");
}

}  // namespace

DatasetId parse_dataset_id(const std::string& name) {
  const std::string n = lower(name);
  if (n == "acl-arc" || n == "acl_arc" || n == "aclarc") return DatasetId::AclArc;
  if (n == "focal") return DatasetId::Focal;
  if (n == "act2") return DatasetId::Act2;
  if (n == "custom") return DatasetId::Custom;
  throw Error("unknown dataset id `" + name + "`");
}

std::string to_string(DatasetId id) {
  switch (id) {
    case DatasetId::AclArc: return "ACL-ARC";
    case DatasetId::Focal: return "FOCAL";
    case DatasetId::Act2: return "ACT2";
    case DatasetId::Custom: return "custom";
  }
  return "custom";
}

LabelSet::LabelSet()
    : names_{"Background", "Compare/Contrast", "Uses",
             "Motivation", "Extend",           "Future"} {}

const LabelSet& LabelSet::standard() {
  static const LabelSet instance;
  return instance;
}

std::optional<int> LabelSet::index_of(const std::string& raw,
                                      DatasetId schema) const {
  static const std::unordered_map<std::string, int> aliases = {
      {"background", 0},
      {"compare/contrast", 1},
      {"compare_contrast", 1},
      {"comparecontrast", 1},
      {"compareorcontrast", 1},
      {"compares_contrasts", 1},
      {"uses", 2},
      {"use", 2},
      {"motivation", 3},
      {"extend", 4},
      {"extends", 4},
      {"extension", 4},
      {"future", 5},
      {"futurework", 5},
      {"future work", 5},
      {"future_work", 5},
  };
  // FOCAL splits Compare/Contrast into three sentiment sub-classes; they are
  // merged back into one class at load time.
  static const std::unordered_map<std::string, int> focal_aliases = {
      {"similarities", 1}, {"differences", 1}, {"neutrality", 1},
      {"similar", 1},      {"neutral", 1},
  };
  const std::string key = lower(raw);
  if (const auto it = aliases.find(key); it != aliases.end())
    return it->second;
  if (schema == DatasetId::Focal)
    if (const auto it = focal_aliases.find(key); it != focal_aliases.end())
      return it->second;
  return std::nullopt;
}

std::string CitationContext::flattened() const {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out += ' ';
    out += sentences[i];
  }
  return out;
}

std::string normalize_anchor(const std::string& text, std::size_t begin,
                             std::size_t end) {
  if (begin > end || end > text.size())
    throw Error("anchor span [" + std::to_string(begin) + ", " +
                std::to_string(end) + ") out of bounds for text of length " +
                std::to_string(text.size()));
  std::string out;
  out.reserve(text.size());
  out.append(text, 0, begin);
  out.append(kAnchor);
  out.append(text, end, text.size() - end);
  return out;
}

DatasetSplit load_dataset(const std::string& path, DatasetId schema,
                          int l_max) {
  DatasetSplit split;
  for_each_record(path, schema, l_max, /*require_label=*/true,
                  [&](RawRecord rec) {
                    if (rec.split == "train")
                      split.train.push_back(std::move(rec.context));
                    else if (rec.split == "validation")
                      split.validation.push_back(std::move(rec.context));
                    else
                      split.test.push_back(std::move(rec.context));
                  });
  return split;
}

std::vector<CitationContext> load_contexts(const std::string& path,
                                           DatasetId schema, int l_max) {
  std::vector<CitationContext> out;
  for_each_record(path, schema, l_max, /*require_label=*/false,
                  [&](RawRecord rec) { out.push_back(std::move(rec.context)); });
  return out;
}

void save_dataset(const DatasetSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file: " + path);
  const auto dump = [&](const std::vector<CitationContext>& contexts,
                        const char* name) {
    for (const auto& ctx : contexts) {
      json j;
      j["id"] = ctx.sample_id;
      j["sentences"] = ctx.sentences;
      j["citance_index"] = ctx.citance_index;
      if (ctx.label)
        j["label"] = LabelSet::standard().name(*ctx.label);
      else
        j["label"] = nullptr;
      j["split"] = name;
      out << j.dump() << "\n";
    }
  };
  dump(split.train, "train");
  dump(split.validation, "validation");
  dump(split.test, "test");
}

std::pair<std::vector<CitationContext>, std::vector<CitationContext>>
reserve_validation(const std::vector<CitationContext>& train, double fraction,
                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error("validation fraction must lie in (0, 1), got " +
                std::to_string(fraction));
  const int classes = LabelSet::standard().size();
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].label)
      throw Error("reserve_validation requires labeled samples; `" +
                  train[i].sample_id + "` has no label");
    by_class[*train[i].label].push_back(i);
  }

  const std::size_t total =
      static_cast<std::size_t>(fraction * static_cast<double>(train.size()));

  // Largest-remainder apportioning keeps every class within one sample of
  // its exact proportional share.
  std::vector<std::size_t> take(classes, 0);
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int c = 0; c < classes; ++c) {
    const double exact = fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(exact);
    assigned += take[c];
    remainders.emplace_back(exact - static_cast<double>(take[c]), c);
  }
  std::sort(remainders.begin(), remainders.end(), [&](auto a, auto b) {
    if (a.first != b.first) return a.first > b.first;
    return by_class[a.second].size() > by_class[b.second].size();
  });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i) {
    const int c = remainders[i].second;
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }

  std::vector<bool> reserved(train.size(), false);
  for (int c = 0; c < classes; ++c) {
    Rng rng(derive_stream(seed, "class-" + std::to_string(c), 0,
                          "reserve-validation"));
    rng.shuffle(by_class[c]);
    for (std::size_t i = 0; i < take[c]; ++i) reserved[by_class[c][i]] = true;
  }

  std::pair<std::vector<CitationContext>, std::vector<CitationContext>> out;
  for (std::size_t i = 0; i < train.size(); ++i)
    (reserved[i] ? out.second : out.first).push_back(train[i]);
  return out;
}

}  // namespace citss::corpus
