// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "citss/augment.hpp"
#include "citss/backbone.hpp"
#include "citss/config.hpp"
#include "citss/corpus.hpp"
#include "citss/head.hpp"
#include "citss/stk.hpp"

namespace citss::trainer {

/// Which trainable parameters the decoupled weight-decay penalty covers.
enum class PntScope { All, HeadOnly };

struct TrainConfig {
  int l = 3;
  double beta = 0.6;
  double gamma = 0.1;
  augment::OpMode op_mode = augment::OpMode::Mixed;
  head::LossWeights weights;
  int d = 1024;
  int d_z = 256;
  int batch_size = 4;
  double lr = 2e-5;
  int max_epochs = 10;
  int patience = 0;  // 0 means max_epochs (pure best-checkpoint selection)
  double dropout = 0.0;
  double grad_clip = 0.0;  // 0 disables clipping
  PntScope pnt_scope = PntScope::All;
  std::uint64_t seed = 1;
  corpus::DatasetId dataset = corpus::DatasetId::Custom;

  std::string backbone_name = "hashed-encoder";
  backbone::HashedEncoderConfig backbone_config;
  backbone::PromptTemplate prompt = backbone::PromptTemplate::builtin_p1();

  std::uint64_t config_hash = 0;  // stamped into checkpoints

  /// Reads every field from a resolved Config (see the key registry).
  static TrainConfig from_config(const Config& config);

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double l_cls = 0, l_sc = 0, l_kp = 0, l_pnt = 0, total = 0;
  double val_macro_f1 = 0, val_accuracy = 0;

  bool operator==(const EpochRecord&) const = default;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_macro_f1 = 0, best_val_accuracy = 0;
  bool has_test = false;
  double test_macro_f1 = 0, test_accuracy = 0;
  std::vector<double> test_per_class_f1;

  std::string to_json() const;
  std::string to_csv() const;

  bool operator==(const RunMetrics&) const = default;
};

/// Adapter and classifier parameters plus backbone state, stamped with the
/// originating configuration hash.
struct Checkpoint {
  head::AdapterParams adapter;
  head::ClassifierParams classifier;
  std::string backbone_state;
  std::uint64_t config_hash = 0;
  int d_x = 0;

  void save(const std::filesystem::path& dir) const;
  static Checkpoint load(const std::filesystem::path& dir);
};

/// Fine-tunes backbone + adapter + classifier. Per batch: one forward for
/// the originals and, when the corresponding lambda is positive, one for the
/// SC positives and one for the KP positives. After every epoch the
/// validation split is scored and the checkpoint maximizing
/// Macro-F1 + Accuracy is kept. Test metrics, when a test split is present,
/// are computed at the best checkpoint.
std::pair<Checkpoint, RunMetrics> train(const TrainConfig& config,
                                        const corpus::DatasetSplit& data,
                                        const stk::StkBase& stk_base,
                                        const augment::SynonymBase& synonyms,
                                        backbone::Backbone& bb);

/// Inference: forwards the original context only (one backbone pass per
/// sample), argmax of the classifier. Throws when the checkpoint does not
/// match the backbone configuration.
std::vector<int> predict(const Checkpoint& checkpoint, backbone::Backbone& bb,
                         const std::vector<corpus::CitationContext>& contexts,
                         const backbone::PromptTemplate& prompt,
                         int batch_size = 16);

}  // namespace citss::trainer
