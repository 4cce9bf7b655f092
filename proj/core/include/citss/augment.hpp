// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citss/corpus.hpp"
#include "citss/rng.hpp"
#include "citss/stk.hpp"

namespace citss::augment {

/// A crop window: `b` sentences before the citance, `v` after.
struct CropRange {
  int b = 0;
  int v = 0;

  bool operator==(const CropRange&) const = default;
};

/// The three keyphrase perturbation operations: global replacement, local
/// replacement, abstraction.
enum class PerturbOp { Gr, Lr, Ab };

/// Operation scheduling across epochs.
enum class OpMode { GrOnly, LrOnly, AbOnly, Mixed };

std::string to_string(PerturbOp op);
PerturbOp parse_perturb_op(const std::string& name);
OpMode parse_op_mode(const std::string& name);
std::string to_string(OpMode mode);

/// Word -> synonyms lookup plus a stopword set. Lookups are surface-form on
/// the lowercased word. No word may list itself as a synonym.
class SynonymBase {
 public:
  SynonymBase() = default;

  /// Loads `{"synonyms": {word: [word, ...]}, "stopwords": [word, ...]}`.
  /// A missing "stopwords" field falls back to the built-in English list.
  static SynonymBase load(const std::string& path);

  static const std::unordered_set<std::string>& default_stopwords();

  void add(const std::string& word, std::vector<std::string> synonyms);
  void set_stopwords(std::unordered_set<std::string> stopwords);

  /// Synonyms for the lowercased word, or nullptr when none are known.
  const std::vector<std::string>* lookup(const std::string& word_lower) const;
  bool is_stopword(const std::string& word_lower) const;

  std::size_t size() const { return synonyms_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> synonyms_;
  std::unordered_set<std::string> stopwords_ = default_stopwords();
};

enum class TransformKind { SC, KP };

std::string to_string(TransformKind kind);

/// A transformed context: either a crop (SC) or a perturbed copy (KP) of its
/// origin.
struct TransformedSample {
  std::string origin_id;
  int epoch = 0;
  TransformKind kind = TransformKind::SC;
  std::vector<std::string> sentences;
  int citance_index = 0;
  /// Set when SC had no candidate window and returned the original context.
  bool degenerate = false;

  std::string flattened() const;
};

/// All crop ranges (b, v) with 0 <= b <= b_orig, 0 <= v <= v_orig except the
/// original range itself; size (b_orig+1)(v_orig+1)-1. Deterministic order.
std::vector<CropRange> sc_candidates(const corpus::CitationContext& context);

/// Uniform draw over sc_candidates. When the candidate set is empty the
/// original context is returned flagged degenerate.
TransformedSample sample_sc(const corpus::CitationContext& context, int epoch,
                            Rng& rng);

/// Operation for the given epoch: fixed modes return their op, mixed cycles
/// Gr, Lr, Ab by epoch modulo 3.
PerturbOp schedule_op(int epoch, OpMode mode);

/// Bookkeeping emitted by kp_transform.
struct KpLog {
  int mentions_total = 0;
  int perturbed = 0;
  int fallback_ab = 0;   // Gr/Lr with no same-type alternative
  int synonyms_replaced = 0;
};

/// Keyphrase perturbation for one epoch. Each mention in `mentions` is
/// perturbed with probability `beta` using `op`; afterwards every
/// non-stopword word outside all mention spans with known synonyms is
/// replaced with probability `gamma`. All occurrences of a perturbed
/// keyphrase receive the same replacement; the anchor token is never
/// touched. Gr/Lr fall back to abstraction when no same-type alternative
/// exists.
TransformedSample kp_transform(const corpus::CitationContext& context,
                               const std::vector<stk::StkMention>& mentions,
                               PerturbOp op, double beta, double gamma,
                               const stk::StkBase& base,
                               const SynonymBase& synonyms, Rng& rng,
                               KpLog* log = nullptr);

}  // namespace citss::augment
