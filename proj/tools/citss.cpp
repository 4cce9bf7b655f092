// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0
//
// citss: contrastive fine-tuning for citation classification.
// Subcommands: extract-stk, augment-preview, train, evaluate, predict,
// ablation, ifp-baseline. Every run writes its resolved config snapshot and
// log into a fresh run directory. Exit codes: 0 ok, 1 runtime error, 2 usage.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "citss/ablation.hpp"
#include "citss/augment.hpp"
#include "citss/backbone.hpp"
#include "citss/config.hpp"
#include "citss/corpus.hpp"
#include "citss/demo.hpp"
#include "citss/errors.hpp"
#include "citss/eval.hpp"
#include "citss/head.hpp"
#include "citss/logging.hpp"
#include "citss/stk.hpp"
#include "citss/text_service.hpp"
#include "citss/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace citss;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<long long> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* config =
      cmd->add_option("--config", args.config_path, "config file (key = value)");
  if (config_required) config->required();
  cmd->add_option("--set", args.overrides,
                  "override a config key, key=value (repeatable)");
  cmd->add_option("--out", args.out, "run directory (default runs/<stamp>)");
  cmd->add_option("--seed", args.seed, "override train.seed");
}

Config resolve_config(const CommonArgs& args) {
  Config config = Config::load(args.config_path);
  for (const std::string& assignment : args.overrides)
    config.apply_override(assignment);
  if (args.seed) config.set("train.seed", std::to_string(*args.seed));
  return config;
}

fs::path make_run_dir(const Config& config, const std::string& out_override) {
  fs::path dir;
  if (!out_override.empty()) {
    dir = out_override;
  } else {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    char hash[12];
    std::snprintf(hash, sizeof hash, "%08llx",
                  static_cast<unsigned long long>(config.hash() & 0xffffffff));
    dir = fs::path("runs") / (std::string(stamp) + "-" + hash);
    for (int suffix = 2; fs::exists(dir); ++suffix)
      dir = fs::path("runs") /
            (std::string(stamp) + "-" + hash + "-" + std::to_string(suffix));
  }
  fs::create_directories(dir);
  std::ofstream snapshot(dir / "config.snapshot");
  snapshot << config.snapshot();
  log::set_file((dir / "log.txt").string());
  return dir;
}

corpus::DatasetSplit load_split(const Config& config) {
  const std::string path = config.get("dataset.path");
  if (path.empty()) throw ConfigError("dataset.path is not configured");
  const auto schema = corpus::parse_dataset_id(config.get("dataset.id"));
  corpus::DatasetSplit split =
      corpus::load_dataset(path, schema, config.get_int("context.l"));
  const double fraction = config.get_double("dataset.val_fraction");
  if (split.validation.empty() && !split.train.empty() && fraction > 0.0 &&
      fraction < 1.0) {
    log::info("no validation split in corpus; reserving " +
              std::to_string(fraction) + " of training data");
    auto [train, validation] = corpus::reserve_validation(
        split.train, fraction,
        static_cast<std::uint64_t>(config.get_i64("train.seed")));
    split.train = std::move(train);
    split.validation = std::move(validation);
  }
  return split;
}

augment::SynonymBase load_synonyms(const Config& config) {
  const std::string path = config.get("augment.synonyms");
  if (path.empty()) {
    log::warn("augment.synonyms not set; synonym replacement is a no-op");
    return augment::SynonymBase{};
  }
  return augment::SynonymBase::load(path);
}

std::unique_ptr<service::TextGenClient> make_client(const Config& config,
                                                    bool required) {
  if (config.empty("service.url")) {
    if (required)
      throw ConfigError("service.url is not configured");
    return nullptr;
  }
  service::ServiceConfig cfg;
  cfg.url = config.get("service.url");
  cfg.model = config.get("service.model");
  cfg.timeout_s = config.get_double("service.timeout_s");
  cfg.temperature = config.get_double("service.temperature");
  const std::string key_env = config.get("service.api_key_env");
  if (const char* key = std::getenv(key_env.c_str()); key != nullptr)
    cfg.api_key = key;
  return service::make_http_client(cfg);
}

stk::StkBase load_stk(const Config& config, const corpus::DatasetSplit& split,
                      bool allow_remote) {
  if (!config.empty("stk.base_file"))
    return stk::StkBase::load(config.get("stk.base_file"));
  if (config.empty("stk.cache_dir")) {
    log::warn("no stk.base_file or stk.cache_dir; keyphrase perturbation "
              "degrades to synonym-only");
    return stk::StkBase{};
  }
  stk::ExtractOptions options;
  options.cache_dir = config.get("stk.cache_dir");
  options.retries = config.get_int("stk.retries");
  options.max_inflight = config.get_int("stk.max_inflight");
  const auto client = allow_remote ? make_client(config, false) : nullptr;
  return stk::extract_stks(split, client.get(), options);
}

int cmd_extract_stk(const CommonArgs& args) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const corpus::DatasetSplit split = load_split(config);

  stk::ExtractOptions options;
  options.cache_dir = config.empty("stk.cache_dir")
                          ? run_dir / "stk_cache"
                          : fs::path(config.get("stk.cache_dir"));
  options.retries = config.get_int("stk.retries");
  options.max_inflight = config.get_int("stk.max_inflight");
  options.failure_report = run_dir / "failures.jsonl";

  const auto client = make_client(config, /*required=*/false);
  if (client == nullptr)
    log::info("service.url empty: running in cache-only mode");
  stk::ExtractReport report;
  const stk::StkBase base =
      stk::extract_stks(split, client.get(), options, &report);
  base.save((run_dir / "stk_base.json").string());

  const stk::StkStats stats = stk::compute_stats(base);
  const std::string table = stk::stats_table(stats);
  std::ofstream(run_dir / "stats.txt") << table;
  std::cout << table;
  log::info("extract-stk: " + std::to_string(report.cached) + " cached, " +
            std::to_string(report.fetched) + " fetched, " +
            std::to_string(report.failed) + " failed");
  std::cout << "stk base written to " << (run_dir / "stk_base.json").string()
            << "\n";
  return 0;
}

int cmd_augment_preview(const CommonArgs& args, const std::string& strategy,
                        int epoch, const std::string& op_name,
                        std::optional<double> beta,
                        std::optional<double> gamma, int limit) {
  Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const corpus::DatasetSplit split = load_split(config);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(config.get_i64("train.seed"));
  const double beta_eff = beta.value_or(config.get_double("augment.beta"));
  const double gamma_eff = gamma.value_or(config.get_double("augment.gamma"));

  std::ofstream out(run_dir / "transforms.jsonl");
  const auto emit = [&](const augment::TransformedSample& ts) {
    nlohmann::json j;
    j["origin_id"] = ts.origin_id;
    j["epoch"] = ts.epoch;
    j["kind"] = augment::to_string(ts.kind);
    j["sentences"] = ts.sentences;
    j["citance_index"] = ts.citance_index;
    if (ts.degenerate) j["degenerate"] = true;
    out << j.dump() << "\n";
  };

  int produced = 0;
  if (strategy == "sc") {
    for (const auto& ctx : split.train) {
      if (limit > 0 && produced >= limit) break;
      Rng rng(derive_stream(seed, ctx.sample_id, epoch, "sc"));
      auto ts = augment::sample_sc(ctx, epoch, rng);
      ts.epoch = epoch;
      emit(ts);
      ++produced;
    }
  } else if (strategy == "kp") {
    const stk::StkBase stk_base =
        load_stk(config, split, /*allow_remote=*/false);
    const augment::SynonymBase synonyms = load_synonyms(config);
    const augment::OpMode mode = augment::parse_op_mode(
        op_name.empty() ? config.get("augment.op") : op_name);
    const augment::PerturbOp op = augment::schedule_op(epoch, mode);
    for (const auto& ctx : split.train) {
      if (limit > 0 && produced >= limit) break;
      Rng rng(derive_stream(seed, ctx.sample_id, epoch, "kp"));
      auto ts = augment::kp_transform(ctx, stk_base.mentions_for(ctx.sample_id),
                                      op, beta_eff, gamma_eff, stk_base,
                                      synonyms, rng);
      ts.epoch = epoch;
      emit(ts);
      ++produced;
    }
  } else {
    throw ConfigError("--strategy must be sc or kp, got `" + strategy + "`");
  }
  std::cout << "wrote " << produced << " transforms to "
            << (run_dir / "transforms.jsonl").string() << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const trainer::TrainConfig tc = trainer::TrainConfig::from_config(config);
  const corpus::DatasetSplit split = load_split(config);
  const stk::StkBase stk_base =
      tc.weights.lambda2 > 0.0 ? load_stk(config, split, /*allow_remote=*/true)
                               : stk::StkBase{};
  const augment::SynonymBase synonyms = load_synonyms(config);
  auto bb = backbone::make_backbone(tc.backbone_name, tc.backbone_config,
                                    tc.seed);

  const auto [checkpoint, metrics] =
      trainer::train(tc, split, stk_base, synonyms, *bb);

  checkpoint.save(run_dir / "checkpoint");
  std::ofstream(run_dir / "metrics.json") << metrics.to_json() << "\n";
  std::ofstream(run_dir / "epochs.csv") << metrics.to_csv();
  log::info("best epoch " + std::to_string(metrics.best_epoch) +
            ": val_macro_f1=" + std::to_string(metrics.best_val_macro_f1) +
            " val_accuracy=" + std::to_string(metrics.best_val_accuracy));
  if (metrics.has_test)
    log::info("test: macro_f1=" + std::to_string(metrics.test_macro_f1) +
              " accuracy=" + std::to_string(metrics.test_accuracy));
  std::cout << "run directory: " << run_dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& checkpoint_dir) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const trainer::TrainConfig tc = trainer::TrainConfig::from_config(config);
  const corpus::DatasetSplit split = load_split(config);
  if (split.test.empty()) throw Error("corpus has no test split to evaluate");

  const trainer::Checkpoint checkpoint =
      trainer::Checkpoint::load(checkpoint_dir);
  auto bb = backbone::make_backbone(tc.backbone_name, tc.backbone_config,
                                    tc.seed);
  const std::vector<int> preds =
      trainer::predict(checkpoint, *bb, split.test, tc.prompt, tc.batch_size);
  std::vector<int> labels;
  for (const auto& ctx : split.test) labels.push_back(*ctx.label);
  const eval::MetricReport report =
      eval::compute_metrics(preds, labels, corpus::LabelSet::standard().size());

  std::ofstream(run_dir / "report.json") << report.to_json() << "\n";
  std::ofstream(run_dir / "report.txt") << report.table();
  std::cout << report.table();
  return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& checkpoint_dir,
                const std::string& input) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const trainer::TrainConfig tc = trainer::TrainConfig::from_config(config);
  const auto contexts = corpus::load_contexts(
      input, corpus::parse_dataset_id(config.get("dataset.id")), tc.l);

  const trainer::Checkpoint checkpoint =
      trainer::Checkpoint::load(checkpoint_dir);
  auto bb = backbone::make_backbone(tc.backbone_name, tc.backbone_config,
                                    tc.seed);
  const std::vector<int> preds =
      trainer::predict(checkpoint, *bb, contexts, tc.prompt, tc.batch_size);

  std::ofstream out(run_dir / "predictions.jsonl");
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    nlohmann::json j;
    j["id"] = contexts[i].sample_id;
    j["label"] = corpus::LabelSet::standard().name(preds[i]);
    out << j.dump() << "\n";
  }
  std::cout << "wrote " << contexts.size() << " predictions to "
            << (run_dir / "predictions.jsonl").string() << "\n";
  return 0;
}

int cmd_ablation(const CommonArgs& args, std::optional<int> runs_override) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const trainer::TrainConfig tc = trainer::TrainConfig::from_config(config);
  const corpus::DatasetSplit split = load_split(config);
  const stk::StkBase stk_base = load_stk(config, split, /*allow_remote=*/true);
  const augment::SynonymBase synonyms = load_synonyms(config);
  const int runs = runs_override.value_or(config.get_int("eval.runs"));

  const auto factory = [&](std::uint64_t seed) {
    return backbone::make_backbone(tc.backbone_name, tc.backbone_config, seed);
  };
  const auto rows = eval::ablation_suite(tc, split, stk_base, synonyms,
                                         factory, runs, tc.seed);

  std::ofstream csv(run_dir / "ablation.csv");
  eval::write_ablation_csv(rows, csv);
  eval::write_ablation_csv(rows, std::cout);
  if (runs < 5)
    std::cout << "note: " << runs
              << " runs per setting; significance tests at this count are "
                 "low-powered\n";
  std::cout << "ablation table written to "
            << (run_dir / "ablation.csv").string() << "\n";
  return 0;
}

int cmd_ifp_baseline(const CommonArgs& args, int limit) {
  const Config config = resolve_config(args);
  const fs::path run_dir = make_run_dir(config, args.out);
  const corpus::DatasetSplit split = load_split(config);
  if (split.test.empty()) throw Error("corpus has no test split to evaluate");
  std::vector<corpus::CitationContext> contexts = split.test;
  if (limit > 0 && static_cast<int>(contexts.size()) > limit)
    contexts.resize(limit);

  const auto client = make_client(config, /*required=*/true);
  const eval::IfpResult result = eval::ifp_baseline(contexts, client.get());

  std::ofstream(run_dir / "report.json") << result.report.to_json() << "\n";
  std::ofstream(run_dir / "report.txt") << result.report.table();
  std::cout << result.report.table();
  if (result.service_failures > 0)
    std::cout << "service failures: " << result.service_failures << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive fine-tuning for citation classification"};
  app.require_subcommand(1);

  CommonArgs extract_args;
  auto* extract = app.add_subcommand(
      "extract-stk", "extract typed keyphrases over the training split");
  add_common(extract, extract_args);

  CommonArgs preview_args;
  std::string strategy, preview_op;
  int preview_epoch = 0;
  int preview_limit = 0;
  std::optional<double> preview_beta, preview_gamma;
  auto* preview = app.add_subcommand(
      "augment-preview", "emit SC or KP transforms for inspection");
  add_common(preview, preview_args);
  preview->add_option("--strategy", strategy, "sc or kp")->required();
  preview->add_option("--epoch", preview_epoch, "epoch the transform is for");
  preview->add_option("--op", preview_op, "gr|lr|ab|mixed (kp only)");
  preview->add_option("--beta", preview_beta, "keyphrase perturbation rate");
  preview->add_option("--gamma", preview_gamma, "synonym replacement rate");
  preview->add_option("--limit", preview_limit, "max transforms to emit");

  CommonArgs train_args;
  auto* train = app.add_subcommand("train", "fine-tune on a labeled corpus");
  add_common(train, train_args);

  CommonArgs eval_args;
  std::string eval_checkpoint;
  auto* evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on the test split");
  add_common(evaluate, eval_args);
  evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")
      ->required();

  CommonArgs predict_args;
  std::string predict_checkpoint, predict_input;
  auto* predict =
      app.add_subcommand("predict", "label contexts with a checkpoint");
  add_common(predict, predict_args);
  predict
      ->add_option("--checkpoint", predict_checkpoint, "checkpoint directory")
      ->required();
  predict->add_option("--input", predict_input, "JSONL contexts to label")
      ->required();

  CommonArgs ablation_args;
  std::optional<int> ablation_runs;
  auto* ablation = app.add_subcommand(
      "ablation", "run the contrastive-term ablation grid");
  add_common(ablation, ablation_args);
  ablation->add_option("--runs", ablation_runs, "seeds per setting");

  CommonArgs ifp_args;
  int ifp_limit = 0;
  auto* ifp = app.add_subcommand(
      "ifp-baseline", "training-free instruction-following baseline");
  add_common(ifp, ifp_args);
  ifp->add_option("--limit", ifp_limit, "cap the number of test samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (extract->parsed()) return cmd_extract_stk(extract_args);
    if (preview->parsed())
      return cmd_augment_preview(preview_args, strategy, preview_epoch,
                                 preview_op, preview_beta, preview_gamma,
                                 preview_limit);
    if (train->parsed()) return cmd_train(train_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args, eval_checkpoint);
    if (predict->parsed())
      return cmd_predict(predict_args, predict_checkpoint, predict_input);
    if (ablation->parsed()) return cmd_ablation(ablation_args, ablation_runs);
    if (ifp->parsed()) return cmd_ifp_baseline(ifp_args, ifp_limit);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "run `citss --help` for usage\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
