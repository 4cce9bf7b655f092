// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/ablation.hpp"

#include <cstdio>

#include "citss/errors.hpp"
#include "citss/logging.hpp"

namespace citss::eval {
namespace {

struct Setting {
  const char* name;
  bool sc;
  bool kp;
};

// Baseline first; the improvement column is relative to it.
constexpr Setting kSettings[] = {
    {"lambda1,lambda2=0", false, false},
    {"lambda2=0", true, false},
    {"lambda1=0", false, true},
    {"sc+kp", true, true},
};

MetricReport run_metrics_report(const trainer::RunMetrics& metrics) {
  MetricReport report;
  if (metrics.has_test) {
    report.macro_f1 = metrics.test_macro_f1;
    report.accuracy = metrics.test_accuracy;
    report.per_class_f1 = metrics.test_per_class_f1;
  } else {
    report.macro_f1 = metrics.best_val_macro_f1;
    report.accuracy = metrics.best_val_accuracy;
  }
  return report;
}

}  // namespace

std::vector<AblationRow> ablation_suite(const trainer::TrainConfig& base,
                                        const corpus::DatasetSplit& data,
                                        const stk::StkBase& stk_base,
                                        const augment::SynonymBase& synonyms,
                                        const BackboneFactory& factory,
                                        int run_count,
                                        std::uint64_t base_seed) {
  if (run_count < 1) throw Error("ablation_suite: run_count must be positive");
  std::vector<AblationRow> rows;
  for (const Setting& setting : kSettings) {
    trainer::TrainConfig config = base;
    if (!setting.sc) config.weights.lambda1 = 0.0;
    if (!setting.kp) config.weights.lambda2 = 0.0;
    std::vector<MetricReport> runs;
    for (int r = 0; r < run_count; ++r) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
      config.seed = seed;
      auto bb = factory(seed);
      log::info(std::string("ablation `") + setting.name + "` run " +
                std::to_string(r));
      auto [ckpt, metrics] = trainer::train(config, data, stk_base, synonyms,
                                            *bb);
      runs.push_back(run_metrics_report(metrics));
    }
    rows.push_back({setting.name, aggregate(runs), std::nullopt});
  }
  const RunAggregate& baseline = rows.front().agg;
  for (std::size_t i = 1; i < rows.size(); ++i)
    rows[i].imp_pct =
        imp_percent(rows[i].agg.mean_macro_f1, baseline.mean_macro_f1,
                    rows[i].agg.mean_accuracy, baseline.mean_accuracy);
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows,
                        std::ostream& out) {
  out << "setting,macro_f1_mean,macro_f1_std,accuracy_mean,accuracy_std,"
         "imp_pct\n";
  char buf[160];
  for (const AblationRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,",
                  row.setting.c_str(), row.agg.mean_macro_f1,
                  row.agg.std_macro_f1, row.agg.mean_accuracy,
                  row.agg.std_accuracy);
    out << buf;
    if (row.imp_pct) {
      std::snprintf(buf, sizeof buf, "%.1f", *row.imp_pct);
      out << buf;
    } else {
      out << "-";
    }
    out << "\n";
  }
}

}  // namespace citss::eval
