// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "citss/corpus.hpp"
#include "citss/text_service.hpp"

namespace citss::stk {

/// Scientific typed keyphrase classes. Closed enumeration.
enum class StkType { Task, Material, Technique, Process, Measure, Concept };

inline constexpr int kTypeCount = 6;

const std::array<StkType, kTypeCount>& all_types();
std::string to_string(StkType type);
/// Case-insensitive; returns false when the name is not one of the six types.
bool parse_type(const std::string& name, StkType& out);

/// One keyphrase mention: a verbatim substring of its owning context plus a
/// type.
struct StkMention {
  std::string surface;
  StkType type = StkType::Concept;

  bool operator==(const StkMention&) const = default;
};

/// Per-sample keyphrase lists plus the global pool partitioned by type. The
/// global pool is always the union of the per-sample entries and is built
/// from training samples only.
class StkBase {
 public:
  void add_sample(const std::string& sample_id,
                  std::vector<StkMention> mentions);

  const std::vector<StkMention>& mentions_for(const std::string& sample_id) const;
  bool has_sample(const std::string& sample_id) const;
  const std::map<std::string, std::vector<StkMention>>& per_sample() const {
    return per_sample_;
  }

  /// Sorted unique surfaces of the given type across all samples.
  const std::vector<std::string>& pool(StkType type) const;

  std::size_t sample_count() const { return per_sample_.size(); }
  std::size_t total_mentions() const;

  /// Recomputes the global pool from per_sample and reports whether it
  /// matched the incrementally maintained one.
  bool verify_global() const;

  void save(const std::string& path) const;
  static StkBase load(const std::string& path);

 private:
  std::map<std::string, std::vector<StkMention>> per_sample_;
  std::map<StkType, std::vector<std::string>> global_;
};

/// Renders the one-shot keyphrase-extraction prompt for a context. When the
/// flattened context is empty the prompt is still produced and
/// `*warned_empty` (if given) is set.
std::string build_extraction_prompt(const corpus::CitationContext& context,
                                    bool* warned_empty = nullptr);

/// The raw prompt template with its `{T}` placeholder.
const std::string& extraction_prompt_template();

/// Extracts typed mentions from the first JSON object found in a model reply.
/// Tolerates prose around the object and single-quoted (Python-style)
/// objects. Unknown type keys and non-string entries are dropped with a
/// warning. Throws ParseError (carrying the raw reply) when no object parses.
std::vector<StkMention> parse_stk_response(const std::string& raw);

/// Drops mentions whose surface does not occur verbatim (case-sensitive) in
/// the context, and keeps the first-listed type for duplicated surfaces.
std::vector<StkMention> filter_mentions(std::vector<StkMention> mentions,
                                        const corpus::CitationContext& context);

struct ExtractOptions {
  std::filesystem::path cache_dir;
  int retries = 3;
  int max_inflight = 1;
  /// When non-empty, failed samples are appended here as JSONL
  /// `{"id": ..., "error": ...}` records.
  std::filesystem::path failure_report;
};

struct ExtractReport {
  std::size_t cached = 0;
  std::size_t fetched = 0;
  std::size_t failed = 0;
};

std::uint64_t prompt_hash(const std::string& prompt);
std::filesystem::path cache_file(const std::filesystem::path& dir,
                                 const std::string& sample_id,
                                 std::uint64_t hash);

/// Builds the STK base over the training split. Results are cached one JSON
/// file per sample, keyed by sample id and prompt hash, so repeated
/// invocations make no remote calls. `client` may be null for cache-only
/// runs. Samples whose retries are exhausted get an empty mention list and a
/// failure-report entry; keyphrase perturbation degrades to synonym-only for
/// them.
StkBase extract_stks(const corpus::DatasetSplit& data,
                     service::TextGenClient* client,
                     const ExtractOptions& options,
                     ExtractReport* report = nullptr);

/// Per-type mention statistics in the shape of the dataset report table:
/// type-agnostic total plus the average number of mentions per sample for
/// each type.
struct StkStats {
  std::size_t total = 0;
  std::array<double, kTypeCount> avg_per_sample{};
};

StkStats compute_stats(const StkBase& base);
std::string stats_table(const StkStats& stats);

}  // namespace citss::stk
