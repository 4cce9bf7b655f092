// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/logging.hpp"

namespace citss::eval {
namespace {

using nlohmann::json;

// Instruction-following prompting baseline. `{T}` is replaced with the
// flattened context.
const char* const kIfpPrompt =
    R"(You are provided a context from a paper P citing a paper Q, with the specific citation marked as the '#CITATION_TAG' tag. Please analyze the citation function of the context, which represents the author)"
    "’"
    R"(s motive or purpose for citing Q. The six classes of citation functions are:

- [BACKGROUND]: The cited paper Q provides relevant information or is part of the body of literature in this domain.

- [COMPARES_CONTRASTS]: The citing paper P expresses similarities or differences to, or disagrees with, the cited paper Q.

- [EXTENSION]: The citing paper P extends the data, methods, etc. of the cited paper Q.

- [FUTURE]: The cited paper Q is a potential avenue for future work.

- [MOTIVATION]: The citing paper P is directly motivated by the cited paper Q.

- [USES]: The citing paper P uses the methodology or tools created by the cited paper Q.

Here is the context: "{T}"

Only output the most appropriate class to categorize #CITATION_TAG and enclose the label within square brackets [].)";

int label_from_tag(const std::string& tag) {
  std::string t;
  for (char c : tag) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-') {
      t += '_';
    } else {
      t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  if (t == "BACKGROUND") return 0;
  if (t == "COMPARES_CONTRASTS") return 1;
  if (t == "USES") return 2;
  if (t == "MOTIVATION") return 3;
  if (t == "EXTENSION") return 4;
  if (t == "FUTURE") return 5;
  return -1;
}

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double var_of(const std::vector<double>& xs, double mean, int ddof) {
  double sum = 0.0;
  for (double x : xs) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(static_cast<int>(xs.size()) - ddof);
}

}  // namespace

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw Error("accuracy: predictions and labels differ in length");
  if (preds.empty()) throw Error("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                int classes) {
  return compute_metrics(preds, labels, classes).macro_f1;
}

MetricReport compute_metrics(const std::vector<int>& preds,
                             const std::vector<int>& labels, int classes) {
  if (preds.size() != labels.size())
    throw Error("metrics: predictions and labels differ in length");
  if (preds.empty()) throw Error("metrics: empty input");
  std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
  int invalid = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= classes)
      throw Error("metrics: label out of range");
    const int pred = preds[i];
    if (pred < 0 || pred >= classes) {
      // Undecodable prediction: a miss for the gold class, no false positive.
      ++invalid;
      ++fn[label];
      continue;
    }
    if (pred == label) {
      ++tp[label];
    } else {
      ++fp[pred];
      ++fn[label];
    }
  }
  MetricReport report;
  report.n_samples = static_cast<int>(preds.size());
  report.invalid = invalid;
  report.per_class_f1.resize(classes, 0.0);
  double f1_sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    const double denom_p = static_cast<double>(tp[c] + fp[c]);
    const double denom_r = static_cast<double>(tp[c] + fn[c]);
    const double precision = denom_p > 0 ? tp[c] / denom_p : 0.0;
    const double recall = denom_r > 0 ? tp[c] / denom_r : 0.0;
    const double f1 = (precision + recall) > 0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    report.per_class_f1[c] = f1;
    f1_sum += f1;
  }
  report.macro_f1 = f1_sum / static_cast<double>(classes);
  report.accuracy = accuracy(preds, labels);
  return report;
}

std::string MetricReport::to_json() const {
  json j;
  j["macro_f1"] = macro_f1;
  j["accuracy"] = accuracy;
  j["per_class_f1"] = per_class_f1;
  j["n_samples"] = n_samples;
  if (invalid > 0) j["invalid"] = invalid;
  return j.dump(2);
}

std::string MetricReport::table() const {
  std::ostringstream out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-18s %8.4f\n", "Macro-F1", macro_f1);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-18s %8.4f\n", "Accuracy", accuracy);
  out << buf;
  const auto& names = corpus::LabelSet::standard().names();
  for (std::size_t c = 0; c < per_class_f1.size(); ++c) {
    const std::string row = "F1 " + (c < names.size() ? names[c] : "?");
    std::snprintf(buf, sizeof buf, "%-18s %8.4f\n", row.c_str(),
                  per_class_f1[c]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-18s %8d\n", "Samples", n_samples);
  out << buf;
  if (invalid > 0) {
    std::snprintf(buf, sizeof buf, "%-18s %8d\n", "Invalid", invalid);
    out << buf;
  }
  return out.str();
}

double t_test(const std::vector<double>& runs_a,
              const std::vector<double>& runs_b) {
  if (runs_a.size() < 2 || runs_b.size() < 2)
    throw Error("t_test: each side needs at least two runs");
  const double mean_a = mean_of(runs_a);
  const double mean_b = mean_of(runs_b);
  const double var_a = var_of(runs_a, mean_a, 1);
  const double var_b = var_of(runs_b, mean_b, 1);
  const double n_a = static_cast<double>(runs_a.size());
  const double n_b = static_cast<double>(runs_b.size());
  const double se_sq = var_a / n_a + var_b / n_b;
  if (se_sq <= 0.0) return mean_a == mean_b ? 1.0 : 0.0;
  const double t = (mean_a - mean_b) / std::sqrt(se_sq);
  const double df = se_sq * se_sq /
                    (var_a * var_a / (n_a * n_a * (n_a - 1.0)) +
                     var_b * var_b / (n_b * n_b * (n_b - 1.0)));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

RunAggregate aggregate(const std::vector<MetricReport>& runs) {
  if (runs.empty()) throw Error("aggregate: no runs");
  std::vector<double> macro, acc;
  for (const MetricReport& r : runs) {
    macro.push_back(r.macro_f1);
    acc.push_back(r.accuracy);
  }
  RunAggregate out;
  out.run_count = static_cast<int>(runs.size());
  out.mean_macro_f1 = mean_of(macro);
  out.mean_accuracy = mean_of(acc);
  // Population standard deviation: a single run reports zero spread.
  out.std_macro_f1 = std::sqrt(var_of(macro, out.mean_macro_f1, 0));
  out.std_accuracy = std::sqrt(var_of(acc, out.mean_accuracy, 0));
  return out;
}

double imp_percent(double macro, double macro_base, double acc,
                   double acc_base) {
  if (macro_base == 0.0 || acc_base == 0.0)
    throw Error("imp_percent: baseline metrics must be non-zero");
  const double rel_macro = (macro - macro_base) / macro_base;
  const double rel_acc = (acc - acc_base) / acc_base;
  return 100.0 * 0.5 * (rel_macro + rel_acc);
}

const std::string& ifp_prompt_template() {
  static const std::string tmpl = kIfpPrompt;
  return tmpl;
}

std::string build_ifp_prompt(const corpus::CitationContext& context) {
  const std::string& tmpl = ifp_prompt_template();
  const auto pos = tmpl.find("{T}");
  std::string out = tmpl;
  out.replace(pos, 3, context.flattened());
  return out;
}

std::optional<int> decode_ifp_label(const std::string& reply) {
  for (std::size_t open = reply.find('['); open != std::string::npos;
       open = reply.find('[', open + 1)) {
    const std::size_t close = reply.find(']', open + 1);
    if (close == std::string::npos) break;
    const int label = label_from_tag(trim(reply.substr(open + 1, close - open - 1)));
    if (label >= 0) return label;
  }
  return std::nullopt;
}

IfpResult ifp_baseline(const std::vector<corpus::CitationContext>& contexts,
                       service::TextGenClient* client) {
  if (client == nullptr) throw Error("ifp_baseline requires a client");
  std::vector<int> preds, labels;
  IfpResult result;
  for (const auto& ctx : contexts) {
    if (!ctx.label)
      throw Error("ifp_baseline: sample `" + ctx.sample_id + "` is unlabeled");
    labels.push_back(*ctx.label);
    std::string reply;
    try {
      reply = client->complete(build_ifp_prompt(ctx));
    } catch (const Error& e) {
      ++result.service_failures;
      log::warn("IFP request failed for `" + ctx.sample_id + "`: " + e.what());
      preds.push_back(-1);
      continue;
    }
    const auto label = decode_ifp_label(reply);
    preds.push_back(label.value_or(-1));
  }
  result.report = compute_metrics(preds, labels,
                                  corpus::LabelSet::standard().size());
  return result;
}

}  // namespace citss::eval
