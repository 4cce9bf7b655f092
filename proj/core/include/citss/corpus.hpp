// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace citss::corpus {

/// The normalized in-text marker of the target citation.
inline constexpr const char* kAnchor = "#CITATION_TAG";

enum class DatasetId { AclArc, Focal, Act2, Custom };

DatasetId parse_dataset_id(const std::string& name);
std::string to_string(DatasetId id);

/// The six citation classes, in the canonical order that defines classifier
/// output indices.
class LabelSet {
 public:
  static const LabelSet& standard();

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

  /// Maps a raw label string to its class index. Matching is
  /// case-insensitive and accepts common release spellings (e.g. "Extends",
  /// "CompareOrContrast"). Under the FOCAL schema the three sentiment
  /// sub-classes fold into Compare/Contrast. Returns nullopt when unknown.
  std::optional<int> index_of(const std::string& raw, DatasetId schema) const;

 private:
  LabelSet();
  std::vector<std::string> names_;
};

/// A citance plus up to l sentences on each side. `sentences[citance_index]`
/// is the citance and contains exactly one occurrence of kAnchor.
struct CitationContext {
  std::string sample_id;
  std::vector<std::string> sentences;
  int citance_index = 0;
  std::optional<int> label;
  DatasetId dataset = DatasetId::Custom;

  int preceding() const { return citance_index; }
  int succeeding() const {
    return static_cast<int>(sentences.size()) - 1 - citance_index;
  }
  const std::string& citance() const { return sentences.at(citance_index); }

  /// Sentences joined with single spaces; the form presented to backbones
  /// and extraction prompts.
  std::string flattened() const;

  bool operator==(const CitationContext&) const = default;
};

struct DatasetSplit {
  std::vector<CitationContext> train;
  std::vector<CitationContext> validation;
  std::vector<CitationContext> test;

  bool operator==(const DatasetSplit&) const = default;
};

/// Replaces [begin, end) of `text` with the anchor token. Every other byte is
/// preserved. Throws when the span is out of bounds.
std::string normalize_anchor(const std::string& text, std::size_t begin,
                             std::size_t end);

/// Loads a JSONL corpus (one record per line, see README for the schema).
/// Contexts are windowed to at most `l_max` sentences on each side of the
/// citance. Labels are required on every record; every citance must contain
/// exactly one anchor.
DatasetSplit load_dataset(const std::string& path, DatasetId schema,
                          int l_max = 3);

/// Loads contexts for prediction; labels may be null.
std::vector<CitationContext> load_contexts(const std::string& path,
                                           DatasetId schema, int l_max = 3);

/// Writes a split back to JSONL. load_dataset(save_dataset(s)) == s whenever
/// l_max covers the stored ranges.
void save_dataset(const DatasetSplit& split, const std::string& path);

/// Moves floor(fraction * |train|) samples into a validation partition,
/// label-stratified as closely as integer rounding permits and deterministic
/// under the seed. Throws unless 0 < fraction < 1.
std::pair<std::vector<CitationContext>, std::vector<CitationContext>>
reserve_validation(const std::vector<CitationContext>& train, double fraction,
                   std::uint64_t seed);

}  // namespace citss::corpus
