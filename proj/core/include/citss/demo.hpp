// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "citss/augment.hpp"
#include "citss/corpus.hpp"
#include "citss/stk.hpp"

namespace citss::demo {

/// Parameters of the synthetic demo corpus. Contexts are built from
/// label-specific citance templates around typed keyphrases, padded with
/// noise sentences that mention other citations. Training keyphrases are
/// partially label-correlated while validation/test draws are independent,
/// so models that shortcut through keyphrases generalize measurably worse.
struct DemoSpec {
  corpus::DatasetId shape = corpus::DatasetId::AclArc;
  int train = 1399;
  int validation = 246;
  int test = 284;
  std::array<double, 6> label_mix = {0.513, 0.181, 0.037, 0.036, 0.046, 0.187};
  int max_side = 3;        // up to this many noise sentences per side
  double spurious = 0.75;  // train-time keyphrase/label correlation
  double label_noise = 0.03;

  /// The published ACL-ARC split sizes and class mix.
  static DemoSpec acl_arc();
  /// ACL-ARC before validation reservation: the full 1645-sample training
  /// pool plus the test split.
  static DemoSpec acl_arc_pool();
  /// The published FOCAL split sizes and class mix.
  static DemoSpec focal();
  /// Small uniform corpus for fast tests.
  static DemoSpec toy(int train_samples);
};

struct DemoBundle {
  corpus::DatasetSplit split;
  stk::StkBase stk;  // planted mentions, training samples only
  augment::SynonymBase synonyms;
};

DemoBundle generate(const DemoSpec& spec, std::uint64_t seed);

/// The synonym entries planted in demo contexts, as a loadable SynonymBase.
augment::SynonymBase demo_synonyms();

/// Writes corpus.jsonl, stk_cache/ (extraction cache format), stk_base.json
/// and synonyms.json under dir.
void write_bundle(const DemoBundle& bundle, const std::filesystem::path& dir);

}  // namespace citss::demo
