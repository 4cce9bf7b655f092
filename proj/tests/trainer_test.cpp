// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/trainer.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "citss/demo.hpp"
#include "citss/errors.hpp"
#include "citss/eval.hpp"
#include "support/temp_dir.hpp"

using namespace citss;
using trainer::Checkpoint;
using trainer::RunMetrics;
using trainer::TrainConfig;

namespace {

TrainConfig desk_config() {
  TrainConfig config;
  config.weights = {0.2, 0.1, 0.01, 1.0, 1.0};
  config.d = 16;
  config.d_z = 8;
  config.batch_size = 4;
  config.lr = 0.02;
  config.max_epochs = 2;
  config.seed = 7;
  config.backbone_config.hidden = 32;
  config.backbone_config.vocab = 512;
  config.backbone_config.max_len = 96;
  return config;
}

std::unique_ptr<backbone::Backbone> make_bb(const TrainConfig& config) {
  return backbone::make_backbone("hashed-encoder", config.backbone_config,
                                 config.seed);
}

}  // namespace

TEST_CASE("training runs end to end and tracks the best epoch") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(24), 5);
  TrainConfig config = desk_config();
  config.max_epochs = 4;
  auto bb = make_bb(config);
  const auto [ckpt, metrics] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);

  REQUIRE(!metrics.epochs.empty());
  CHECK(metrics.epochs.size() <= 4);
  double best = -1.0;
  int best_epoch = -1;
  for (const auto& e : metrics.epochs) {
    const double score = e.val_macro_f1 + e.val_accuracy;
    if (score > best) {
      best = score;
      best_epoch = e.epoch;
    }
    CHECK(e.l_sc != 0.0);  // contrastive streams were active
    CHECK(e.l_kp != 0.0);
  }
  CHECK(metrics.best_epoch == best_epoch);
  CHECK(metrics.best_val_macro_f1 + metrics.best_val_accuracy ==
        doctest::Approx(best));
  CHECK(ckpt.d_x == 32);

  // csv has a header plus one row per epoch
  std::istringstream csv(metrics.to_csv());
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == static_cast<int>(metrics.epochs.size()) + 1);
}

TEST_CASE("backbone forward counts match the strategy configuration") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(32), 9);
  const std::size_t n = bundle.split.train.size();
  const std::size_t v = bundle.split.validation.size();
  REQUIRE(n == 32);

  const auto run = [&](double lambda1, double lambda2) {
    TrainConfig config = desk_config();
    config.max_epochs = 1;
    config.weights.lambda1 = lambda1;
    config.weights.lambda2 = lambda2;
    auto bb = make_bb(config);
    trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);
    return bb->forward_count();
  };

  // per training step: 3|B| forwards with both strategies, 2|B| with one,
  // |B| with none; plus one validation pass per epoch.
  CHECK(run(0.2, 0.1) == 3 * n + v);
  CHECK(run(0.2, 0.0) == 2 * n + v);
  CHECK(run(0.0, 0.1) == 2 * n + v);
  CHECK(run(0.0, 0.0) == 1 * n + v);

  SUBCASE("a single full-size batch gives the per-step counts directly") {
    TrainConfig config = desk_config();
    config.max_epochs = 1;
    config.batch_size = static_cast<int>(n);
    auto bb = make_bb(config);
    trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);
    CHECK(bb->forward_count() == 3 * n + v);
  }
}

TEST_CASE("contrastive losses vanish from the records when disabled") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(12), 3);
  TrainConfig config = desk_config();
  config.max_epochs = 1;
  config.weights.lambda1 = 0.0;
  config.weights.lambda2 = 0.0;
  auto bb = make_bb(config);
  const auto [ckpt, metrics] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);
  for (const auto& e : metrics.epochs) {
    CHECK(e.l_sc == 0.0);
    CHECK(e.l_kp == 0.0);
    CHECK(e.l_cls > 0.0);
  }
}

TEST_CASE("prediction makes exactly one forward pass per sample") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(16), 21);
  TrainConfig config = desk_config();
  auto bb = make_bb(config);
  const auto [ckpt, metrics] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);

  const auto before = bb->forward_count();
  const auto preds = trainer::predict(ckpt, *bb, bundle.split.validation,
                                      config.prompt);
  CHECK(preds.size() == bundle.split.validation.size());
  CHECK(bb->forward_count() - before == bundle.split.validation.size());

  SUBCASE("empty input, empty output") {
    CHECK(trainer::predict(ckpt, *bb, {}, config.prompt).empty());
  }

  SUBCASE("batch size does not change predictions") {
    const auto one =
        trainer::predict(ckpt, *bb, bundle.split.validation, config.prompt, 1);
    const auto seven =
        trainer::predict(ckpt, *bb, bundle.split.validation, config.prompt, 7);
    CHECK(one == preds);
    CHECK(seven == preds);
  }
}

TEST_CASE("the same seed reproduces identical run metrics") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(20), 13);
  TrainConfig config = desk_config();
  config.max_epochs = 3;

  auto bb1 = make_bb(config);
  const auto [ckpt1, metrics1] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb1);
  auto bb2 = make_bb(config);
  const auto [ckpt2, metrics2] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb2);

  CHECK(metrics1 == metrics2);
  CHECK(metrics1.to_json() == metrics2.to_json());
  CHECK(metrics1.to_csv() == metrics2.to_csv());
  CHECK(ckpt1.backbone_state == ckpt2.backbone_state);
  CHECK(ckpt1.adapter.W1 == ckpt2.adapter.W1);
  CHECK(ckpt1.classifier.W3 == ckpt2.classifier.W3);
}

TEST_CASE("checkpoints round-trip through disk") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(12), 2);
  TrainConfig config = desk_config();
  auto bb = make_bb(config);
  const auto [ckpt, metrics] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);

  testing::TempDir dir;
  ckpt.save(dir.file("checkpoint"));
  const Checkpoint loaded = Checkpoint::load(dir.file("checkpoint"));
  CHECK(loaded.config_hash == ckpt.config_hash);
  CHECK(loaded.adapter.W1 == ckpt.adapter.W1);
  CHECK(loaded.classifier.b3 == ckpt.classifier.b3);

  const auto a =
      trainer::predict(ckpt, *bb, bundle.split.validation, config.prompt);
  const auto b =
      trainer::predict(loaded, *bb, bundle.split.validation, config.prompt);
  CHECK(a == b);

  SUBCASE("a mismatched backbone is rejected") {
    backbone::HashedEncoderConfig other = config.backbone_config;
    other.hidden = 16;
    auto wrong = backbone::make_backbone("hashed-encoder", other, 1);
    CHECK_THROWS_WITH_AS(
        trainer::predict(loaded, *wrong, bundle.split.validation,
                         config.prompt),
        doctest::Contains("incompatible"), Error);
  }
}

TEST_CASE("degenerate inputs are rejected up front") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(8), 1);
  TrainConfig config = desk_config();
  auto bb = make_bb(config);

  corpus::DatasetSplit no_train = bundle.split;
  no_train.train.clear();
  CHECK_THROWS_WITH_AS(
      trainer::train(config, no_train, bundle.stk, bundle.synonyms, *bb),
      doctest::Contains("empty training split"), Error);

  corpus::DatasetSplit no_val = bundle.split;
  no_val.validation.clear();
  CHECK_THROWS_AS(
      trainer::train(config, no_val, bundle.stk, bundle.synonyms, *bb), Error);
}

TEST_CASE("early stopping halts patience epochs after the best one") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(16), 4);
  TrainConfig config = desk_config();
  config.max_epochs = 5;
  config.patience = 1;
  auto bb = make_bb(config);
  const auto [ckpt, metrics] =
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb);
  const int last = metrics.epochs.back().epoch;
  CHECK(last == std::min(config.max_epochs - 1,
                         metrics.best_epoch + config.patience));
}

TEST_CASE("a diverging run aborts with a diagnostic batch dump") {
  const auto bundle = demo::generate(demo::DemoSpec::toy(4), 6);
  TrainConfig config = desk_config();
  config.lr = 1e30;
  config.max_epochs = 10;
  auto bb = make_bb(config);
  CHECK_THROWS_AS(
      trainer::train(config, bundle.split, bundle.stk, bundle.synonyms, *bb),
      NonFiniteLossError);
}

TEST_CASE("the shipped ACL-ARC config carries the published settings") {
  const std::string root = CITSS_SOURCE_DIR;
  Config raw = Config::load(root + "/configs/acl_arc.cfg");
  // config paths are relative to the repository root; anchor the prompt file
  // so the test can run from any working directory
  raw.apply_override("backbone.prompt_file=" + root + "/prompts/p1_mask.txt");
  const TrainConfig config = TrainConfig::from_config(raw);
  CHECK(config.weights.lambda1 == 0.2);
  CHECK(config.weights.lambda2 == 0.1);
  CHECK(config.weights.tau1 == 1.0);
  CHECK(config.weights.tau2 == 1.0);
  CHECK(config.weights.omega == 0.01);
  CHECK(config.batch_size == 4);
  CHECK(config.d == 1024);
  CHECK(config.d_z == 256);
  CHECK(config.beta == 0.6);
  CHECK(config.gamma == 0.1);
  CHECK(config.lr == 2e-5);
  CHECK(config.l == 3);
  CHECK(config.max_epochs == 10);
  CHECK(config.dataset == corpus::DatasetId::AclArc);
}

TEST_CASE("prompt template files match the built-in prompts") {
  const std::string root = CITSS_SOURCE_DIR;
  const auto p1 = backbone::PromptTemplate::from_file(
      root + "/prompts/p1_mask.txt", backbone::Readout::MaskPosition);
  CHECK(p1.body == backbone::PromptTemplate::builtin_p1().body);

  const auto p2 = backbone::PromptTemplate::from_file(
      root + "/prompts/p2_eol.txt", backbone::Readout::LastPosition);
  CHECK(p2.body == backbone::PromptTemplate::builtin_p2().body);

  std::ifstream stk_file(root + "/prompts/stk_extraction.txt",
                         std::ios::binary);
  std::ostringstream stk_buf;
  stk_buf << stk_file.rdbuf();
  std::string stk_body = stk_buf.str();
  while (!stk_body.empty() && stk_body.back() == '\n') stk_body.pop_back();
  CHECK(stk_body == stk::extraction_prompt_template());

  std::ifstream ifp_file(root + "/prompts/ifp_baseline.txt", std::ios::binary);
  std::ostringstream ifp_buf;
  ifp_buf << ifp_file.rdbuf();
  std::string ifp_body = ifp_buf.str();
  while (!ifp_body.empty() && ifp_body.back() == '\n') ifp_body.pop_back();
  CHECK(ifp_body == eval::ifp_prompt_template());
}
