// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>

#include "citss/eval.hpp"
#include "citss/trainer.hpp"

namespace citss::eval {

struct AblationRow {
  std::string setting;
  RunAggregate agg;
  std::optional<double> imp_pct;  // empty for the baseline row
};

using BackboneFactory =
    std::function<std::unique_ptr<backbone::Backbone>(std::uint64_t seed)>;

/// Runs the four settings {lambda1=lambda2=0, lambda2=0, lambda1=0, both}
/// with `run_count` seeds each (seed r = base_seed + r, shared across
/// settings) and reports mean +- std plus the average relative improvement
/// of both metrics over the no-contrastive baseline. Rows use test metrics
/// when a test split is present, validation metrics otherwise.
std::vector<AblationRow> ablation_suite(const trainer::TrainConfig& base,
                                        const corpus::DatasetSplit& data,
                                        const stk::StkBase& stk_base,
                                        const augment::SynonymBase& synonyms,
                                        const BackboneFactory& factory,
                                        int run_count, std::uint64_t base_seed);

void write_ablation_csv(const std::vector<AblationRow>& rows,
                        std::ostream& out);

}  // namespace citss::eval
