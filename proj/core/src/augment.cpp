// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/logging.hpp"

namespace citss::augment {
namespace {

using corpus::kAnchor;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

struct Span {
  int sentence;
  std::size_t begin;
  std::size_t end;

  bool overlaps(const Span& other) const {
    return sentence == other.sentence && begin < other.end &&
           other.begin < end;
  }
};

struct Occurrence {
  Span span;
  std::size_t mention;  // index into the K_i list
};

/// A single text edit; edits never overlap and are applied back to front.
struct Edit {
  Span span;
  std::string replacement;
};

std::vector<Span> find_anchor_spans(const std::vector<std::string>& sentences) {
  std::vector<Span> spans;
  const std::string anchor = kAnchor;
  for (int s = 0; s < static_cast<int>(sentences.size()); ++s) {
    for (std::size_t pos = sentences[s].find(anchor); pos != std::string::npos;
         pos = sentences[s].find(anchor, pos + anchor.size()))
      spans.push_back({s, pos, pos + anchor.size()});
  }
  return spans;
}

/// Case-sensitive whole-phrase occurrences of `surface`, guarded so that the
/// match does not continue a surrounding word.
std::vector<Span> find_surface_spans(const std::vector<std::string>& sentences,
                                     const std::string& surface) {
  std::vector<Span> spans;
  if (surface.empty()) return spans;
  for (int s = 0; s < static_cast<int>(sentences.size()); ++s) {
    const std::string& text = sentences[s];
    for (std::size_t pos = text.find(surface); pos != std::string::npos;
         pos = text.find(surface, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]) ||
                           !is_word_char(surface.front());
      const std::size_t end = pos + surface.size();
      const bool right_ok = end == text.size() || !is_word_char(text[end]) ||
                            !is_word_char(surface.back());
      if (left_ok && right_ok) spans.push_back({s, pos, end});
    }
  }
  return spans;
}

bool overlaps_any(const Span& span, const std::vector<Span>& spans) {
  return std::any_of(spans.begin(), spans.end(),
                     [&](const Span& other) { return span.overlaps(other); });
}

void apply_edits(std::vector<std::string>& sentences, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    if (a.span.sentence != b.span.sentence)
      return a.span.sentence < b.span.sentence;
    return a.span.begin < b.span.begin;
  });
  for (auto it = edits.rbegin(); it != edits.rend(); ++it)
    sentences[it->span.sentence].replace(it->span.begin,
                                         it->span.end - it->span.begin,
                                         it->replacement);
}

}  // namespace

std::string to_string(PerturbOp op) {
  switch (op) {
    case PerturbOp::Gr: return "Gr";
    case PerturbOp::Lr: return "Lr";
    case PerturbOp::Ab: return "Ab";
  }
  return "Ab";
}

PerturbOp parse_perturb_op(const std::string& name) {
  const std::string n = lower(name);
  if (n == "gr") return PerturbOp::Gr;
  if (n == "lr") return PerturbOp::Lr;
  if (n == "ab") return PerturbOp::Ab;
  throw Error("unknown perturbation op `" + name + "`");
}

OpMode parse_op_mode(const std::string& name) {
  const std::string n = lower(name);
  if (n == "gr" || n == "gr-only") return OpMode::GrOnly;
  if (n == "lr" || n == "lr-only") return OpMode::LrOnly;
  if (n == "ab" || n == "ab-only") return OpMode::AbOnly;
  if (n == "mixed") return OpMode::Mixed;
  throw Error("unknown op mode `" + name + "`");
}

std::string to_string(OpMode mode) {
  switch (mode) {
    case OpMode::GrOnly: return "gr-only";
    case OpMode::LrOnly: return "lr-only";
    case OpMode::AbOnly: return "ab-only";
    case OpMode::Mixed: return "mixed";
  }
  return "mixed";
}

SynonymBase SynonymBase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synonym base: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed synonym base " + path + ": " + e.what());
  }
  SynonymBase base;
  if (j.contains("stopwords")) {
    std::unordered_set<std::string> stopwords;
    for (const auto& w : j["stopwords"]) stopwords.insert(lower(w));
    base.set_stopwords(std::move(stopwords));
  }
  if (!j.contains("synonyms") || !j["synonyms"].is_object())
    throw Error("malformed synonym base " + path + ": missing `synonyms`");
  for (const auto& [word, list] : j["synonyms"].items()) {
    std::vector<std::string> synonyms;
    for (const auto& entry : list) synonyms.push_back(entry.get<std::string>());
    base.add(word, std::move(synonyms));
  }
  return base;
}

void SynonymBase::add(const std::string& word,
                      std::vector<std::string> synonyms) {
  const std::string key = lower(word);
  std::vector<std::string> kept;
  for (auto& s : synonyms) {
    if (lower(s) == key) {
      log::warn("synonym base: dropping self-synonym for `" + key + "`");
      continue;
    }
    kept.push_back(std::move(s));
  }
  if (!kept.empty()) synonyms_[key] = std::move(kept);
}

void SynonymBase::set_stopwords(std::unordered_set<std::string> stopwords) {
  stopwords_ = std::move(stopwords);
}

const std::vector<std::string>* SynonymBase::lookup(
    const std::string& word_lower) const {
  const auto it = synonyms_.find(word_lower);
  return it == synonyms_.end() ? nullptr : &it->second;
}

bool SynonymBase::is_stopword(const std::string& word_lower) const {
  return stopwords_.count(word_lower) > 0;
}

const std::unordered_set<std::string>& SynonymBase::default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",       "about",   "above",    "after",   "again",      "against",
      "all",     "am",      "an",       "and",     "any",        "are",
      "as",      "at",      "be",       "because", "been",       "before",
      "being",   "below",   "between",  "both",    "but",        "by",
      "can",     "cannot",  "could",    "did",     "do",         "does",
      "doing",   "down",    "during",   "each",    "et",         "few",
      "for",     "from",    "further",  "had",     "has",        "have",
      "having",  "he",      "her",      "here",    "hers",       "herself",
      "him",     "himself", "his",      "how",     "i",          "if",
      "in",      "into",    "is",       "it",      "its",        "itself",
      "just",    "me",      "more",     "most",    "my",         "myself",
      "no",      "nor",     "not",      "now",     "of",         "off",
      "on",      "once",    "only",     "or",      "other",      "our",
      "ours",    "out",     "over",     "own",     "same",       "she",
      "should",  "so",      "some",     "such",    "than",       "that",
      "the",     "their",   "theirs",   "them",    "themselves", "then",
      "there",   "these",   "they",     "this",    "those",      "through",
      "to",      "too",     "under",    "until",   "up",         "very",
      "was",     "we",      "were",     "what",    "when",       "where",
      "which",   "while",   "who",      "whom",    "why",        "will",
      "with",    "would",   "you",      "your",    "yours",      "yourself",
  };
  return words;
}

std::string to_string(TransformKind kind) {
  return kind == TransformKind::SC ? "SC" : "KP";
}

std::string TransformedSample::flattened() const {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out += ' ';
    out += sentences[i];
  }
  return out;
}

std::vector<CropRange> sc_candidates(const corpus::CitationContext& context) {
  const int b_orig = context.preceding();
  const int v_orig = context.succeeding();
  std::vector<CropRange> candidates;
  candidates.reserve(static_cast<std::size_t>(b_orig + 1) * (v_orig + 1));
  for (int b = 0; b <= b_orig; ++b)
    for (int v = 0; v <= v_orig; ++v)
      if (b != b_orig || v != v_orig) candidates.push_back({b, v});
  return candidates;
}

TransformedSample sample_sc(const corpus::CitationContext& context, int epoch,
                            Rng& rng) {
  TransformedSample out;
  out.origin_id = context.sample_id;
  out.epoch = epoch;
  out.kind = TransformKind::SC;

  const std::vector<CropRange> candidates = sc_candidates(context);
  if (candidates.empty()) {
    out.sentences = context.sentences;
    out.citance_index = context.citance_index;
    out.degenerate = true;
    return out;
  }
  const CropRange range = candidates[rng.uniform_index(candidates.size())];
  const int lo = context.citance_index - range.b;
  const int hi = context.citance_index + range.v;
  out.sentences.assign(context.sentences.begin() + lo,
                       context.sentences.begin() + hi + 1);
  out.citance_index = range.b;
  return out;
}

PerturbOp schedule_op(int epoch, OpMode mode) {
  switch (mode) {
    case OpMode::GrOnly: return PerturbOp::Gr;
    case OpMode::LrOnly: return PerturbOp::Lr;
    case OpMode::AbOnly: return PerturbOp::Ab;
    case OpMode::Mixed: break;
  }
  switch (((epoch % 3) + 3) % 3) {
    case 0: return PerturbOp::Gr;
    case 1: return PerturbOp::Lr;
    default: return PerturbOp::Ab;
  }
}

TransformedSample kp_transform(const corpus::CitationContext& context,
                               const std::vector<stk::StkMention>& mentions,
                               PerturbOp op, double beta, double gamma,
                               const stk::StkBase& base,
                               const SynonymBase& synonyms, Rng& rng,
                               KpLog* log_out) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw Error("beta must lie in [0, 1], got " + std::to_string(beta));
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw Error("gamma must lie in [0, 1], got " + std::to_string(gamma));

  TransformedSample out;
  out.origin_id = context.sample_id;
  out.kind = TransformKind::KP;
  out.sentences = context.sentences;
  out.citance_index = context.citance_index;

  KpLog log;
  log.mentions_total = static_cast<int>(mentions.size());

  const std::vector<Span> anchor_spans = find_anchor_spans(context.sentences);

  // Every occurrence of every mention; the anchor is never a target.
  std::vector<Occurrence> occurrences;
  for (std::size_t m = 0; m < mentions.size(); ++m)
    for (const Span& span :
         find_surface_spans(context.sentences, mentions[m].surface))
      if (!overlaps_any(span, anchor_spans)) occurrences.push_back({span, m});

  // Overlapping occurrences are resolved longest-first.
  std::vector<std::size_t> order(occurrences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Span& sa = occurrences[a].span;
    const Span& sb = occurrences[b].span;
    const std::size_t la = sa.end - sa.begin;
    const std::size_t lb = sb.end - sb.begin;
    if (la != lb) return la > lb;
    if (sa.sentence != sb.sentence) return sa.sentence < sb.sentence;
    if (sa.begin != sb.begin) return sa.begin < sb.begin;
    return occurrences[a].mention < occurrences[b].mention;
  });
  std::vector<Span> claimed;
  std::vector<std::vector<Span>> chosen(mentions.size());
  for (std::size_t idx : order) {
    const Occurrence& occ = occurrences[idx];
    if (overlaps_any(occ.span, claimed)) continue;
    claimed.push_back(occ.span);
    chosen[occ.mention].push_back(occ.span);
  }
  for (auto& spans : chosen)
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
      if (a.sentence != b.sentence) return a.sentence < b.sentence;
      return a.begin < b.begin;
    });

  // Bernoulli(beta) per mention, in list order, then the replacement draw for
  // Gr/Lr. Abstraction IDs are assigned afterwards by first occurrence.
  enum class Resolved { None, Ab, Direct };
  std::vector<Resolved> resolved(mentions.size(), Resolved::None);
  std::vector<std::string> replacement(mentions.size());
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    if (!rng.bernoulli(beta)) continue;
    if (chosen[m].empty()) continue;  // surface does not occur; nothing to do
    ++log.perturbed;
    PerturbOp effective = op;
    if (op != PerturbOp::Ab) {
      std::vector<std::string> pool;
      if (op == PerturbOp::Gr) {
        for (const std::string& surface : base.pool(mentions[m].type))
          if (surface != mentions[m].surface) pool.push_back(surface);
      } else {
        for (std::size_t k = 0; k < mentions.size(); ++k)
          if (k != m && mentions[k].type == mentions[m].type &&
              mentions[k].surface != mentions[m].surface &&
              std::find(pool.begin(), pool.end(), mentions[k].surface) ==
                  pool.end())
            pool.push_back(mentions[k].surface);
      }
      if (pool.empty()) {
        effective = PerturbOp::Ab;
        ++log.fallback_ab;
      } else {
        replacement[m] = pool[rng.uniform_index(pool.size())];
        resolved[m] = Resolved::Direct;
      }
    }
    if (effective == PerturbOp::Ab) resolved[m] = Resolved::Ab;
  }

  // Number distinct abstracted keyphrases of each type by first occurrence.
  std::vector<std::size_t> ab_mentions;
  for (std::size_t m = 0; m < mentions.size(); ++m)
    if (resolved[m] == Resolved::Ab) ab_mentions.push_back(m);
  std::sort(ab_mentions.begin(), ab_mentions.end(),
            [&](std::size_t a, std::size_t b) {
              const Span& sa = chosen[a].front();
              const Span& sb = chosen[b].front();
              if (sa.sentence != sb.sentence) return sa.sentence < sb.sentence;
              return sa.begin < sb.begin;
            });
  std::array<int, stk::kTypeCount> type_counter{};
  for (std::size_t m : ab_mentions) {
    const int t = static_cast<int>(mentions[m].type);
    replacement[m] =
        stk::to_string(mentions[m].type) + "-" + std::to_string(++type_counter[t]);
  }

  std::vector<Edit> edits;
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    if (resolved[m] == Resolved::None) continue;
    for (const Span& span : chosen[m]) edits.push_back({span, replacement[m]});
  }

  // Synonym replacement on the residue: words outside every mention span and
  // outside the anchor, skipping stopwords and words without synonyms.
  std::vector<Span> all_mention_spans;
  for (const Occurrence& occ : occurrences)
    all_mention_spans.push_back(occ.span);
  for (int s = 0; s < static_cast<int>(context.sentences.size()); ++s) {
    const std::string& text = context.sentences[s];
    std::size_t i = 0;
    while (i < text.size()) {
      if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j])))
        ++j;
      const Span word_span{s, i, j};
      const std::string word = text.substr(i, j - i);
      i = j;
      if (overlaps_any(word_span, all_mention_spans) ||
          overlaps_any(word_span, anchor_spans))
        continue;
      const std::string word_lower = lower(word);
      if (synonyms.is_stopword(word_lower)) continue;
      const std::vector<std::string>* choices = synonyms.lookup(word_lower);
      if (choices == nullptr || choices->empty()) continue;
      if (!rng.bernoulli(gamma)) continue;
      std::string picked = (*choices)[rng.uniform_index(choices->size())];
      if (std::isupper(static_cast<unsigned char>(word.front())) &&
          !picked.empty())
        picked[0] = static_cast<char>(
            std::toupper(static_cast<unsigned char>(picked[0])));
      ++log.synonyms_replaced;
      edits.push_back({word_span, std::move(picked)});
    }
  }

  apply_edits(out.sentences, std::move(edits));
  if (log_out) *log_out = log;
  return out;
}

}  // namespace citss::augment
