// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "citss/corpus.hpp"
#include "citss/text_service.hpp"

namespace citss::eval {

struct MetricReport {
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<double> per_class_f1;
  int n_samples = 0;
  /// Predictions that could not be decoded (IFP baseline); scored incorrect.
  int invalid = 0;

  std::string to_json() const;
  std::string table() const;
};

/// Fraction of positions where pred == label. Predictions of -1 (undecodable)
/// score as incorrect.
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

/// Unweighted mean over all `classes` of per-class F1. A class absent from
/// both predictions and labels contributes zero.
double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                int classes);

MetricReport compute_metrics(const std::vector<int>& preds,
                             const std::vector<int>& labels, int classes);

/// Two-sided unequal-variance (Welch) t-test p-value. Each side needs at
/// least two runs. When both samples are degenerate (zero variance), returns
/// 1.0 for equal means and 0.0 otherwise.
double t_test(const std::vector<double>& runs_a,
              const std::vector<double>& runs_b);

struct RunAggregate {
  double mean_macro_f1 = 0, std_macro_f1 = 0;
  double mean_accuracy = 0, std_accuracy = 0;
  int run_count = 0;
};

/// Mean and population standard deviation over runs.
RunAggregate aggregate(const std::vector<MetricReport>& runs);

/// Average relative improvement of both metrics over a baseline, in percent.
double imp_percent(double macro, double macro_base, double acc,
                   double acc_base);

/// The instruction-following-prompting baseline prompt, with its `{T}`
/// placeholder.
const std::string& ifp_prompt_template();
std::string build_ifp_prompt(const corpus::CitationContext& context);

/// Maps a model reply to a class index by scanning bracketed labels
/// ("[USES]" and friends). Returns nullopt when no bracket decodes.
std::optional<int> decode_ifp_label(const std::string& reply);

struct IfpResult {
  MetricReport report;
  std::size_t service_failures = 0;
};

/// Training-free baseline: prompts the service per context, decodes the
/// bracketed label, scores against gold labels. Service failures and
/// undecodable replies count as incorrect.
IfpResult ifp_baseline(const std::vector<corpus::CitationContext>& contexts,
                       service::TextGenClient* client);

}  // namespace citss::eval
