// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0
//
// Drives the citss binary end to end: argument handling, run-directory
// layout, overrides, replay determinism, and the preview/predict flows.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "citss/rng.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define REQUIRE(cond, what)                                                  \
  do {                                                                       \
    if (!(cond)) {                                                           \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << what   \
                << "\n";                                                     \
      ++g_failures;                                                          \
    }                                                                        \
  } while (0)

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& command) {
  const fs::path capture =
      fs::temp_directory_path() /
      ("citss-cli-out-" + std::to_string(::getpid()) + ".txt");
  const std::string full = command + " > " + capture.string() + " 2>&1";
  const int status = std::system(full.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  fs::remove(capture);
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string desk_config(const fs::path& demo_dir) {
  std::ostringstream cfg;
  cfg << "dataset.id = custom\n"
      << "dataset.path = " << (demo_dir / "corpus.jsonl").string() << "\n"
      << "stk.cache_dir = " << (demo_dir / "stk_cache").string() << "\n"
      << "augment.synonyms = " << (demo_dir / "synonyms.json").string() << "\n"
      << "backbone.hidden = 32\n"
      << "backbone.vocab = 512\n"
      << "adapter.d = 16\n"
      << "adapter.d_z = 8\n"
      << "train.batch_size = 8\n"
      << "train.lr = 0.02\n"
      << "train.max_epochs = 2\n"
      << "train.seed = 3\n";
  return cfg.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: citss_cli_tests <citss-binary> <demo-data-binary>\n";
    return 2;
  }
  const std::string citss = argv[1];
  const std::string demo_tool = argv[2];

  citss::testing::TempDir dir("citss-cli");
  const fs::path demo_dir = dir.file("demo");

  // --- bad invocations ------------------------------------------------
  {
    const auto r = run(citss + " no-such-subcommand");
    REQUIRE(r.exit_code == 2, "unknown subcommand must exit 2");
  }
  {
    const auto r = run(citss + " train");
    REQUIRE(r.exit_code == 2, "missing --config must exit 2");
  }
  {
    const auto r = run(citss + " train --config " +
                       (dir.path() / "absent.cfg").string());
    REQUIRE(r.exit_code == 2, "missing config file must exit 2");
    REQUIRE(r.output.find("usage") != std::string::npos,
            "usage hint expected, got: " + r.output);
  }

  // --- demo data ------------------------------------------------------
  {
    const auto r = run(demo_tool + " --out " + demo_dir.string() +
                       " --shape toy --toy-size 32 --seed 5");
    REQUIRE(r.exit_code == 0, "demo data generation failed: " + r.output);
    REQUIRE(fs::exists(demo_dir / "corpus.jsonl"), "corpus.jsonl missing");
    REQUIRE(fs::exists(demo_dir / "synonyms.json"), "synonyms.json missing");
    REQUIRE(fs::is_directory(demo_dir / "stk_cache"), "stk_cache missing");
  }
  const fs::path cfg_path = dir.write("desk.cfg", desk_config(demo_dir));
  const std::string corpus_before = read_file(demo_dir / "corpus.jsonl");

  // --- train: run directory layout ------------------------------------
  const fs::path run_a = dir.file("run-a");
  {
    const auto r = run(citss + " train --config " + cfg_path.string() +
                       " --seed 1 --out " + run_a.string());
    REQUIRE(r.exit_code == 0, "train failed: " + r.output);
    for (const char* artifact : {"config.snapshot", "metrics.json",
                                 "epochs.csv", "log.txt"})
      REQUIRE(fs::exists(run_a / artifact),
              std::string("missing run artifact ") + artifact);
    REQUIRE(fs::is_directory(run_a / "checkpoint"), "missing checkpoint dir");
    REQUIRE(fs::exists(run_a / "checkpoint" / "adapter.json"),
            "missing adapter.json");
  }

  // --- overrides land in the snapshot ----------------------------------
  {
    const fs::path run_o = dir.file("run-override");
    const auto r = run(citss + " train --config " + cfg_path.string() +
                       " --seed 1 --set loss.lambda1=0 --set loss.lambda2=0" +
                       " --out " + run_o.string());
    REQUIRE(r.exit_code == 0, "override train failed: " + r.output);
    const std::string snapshot = read_file(run_o / "config.snapshot");
    REQUIRE(snapshot.find("loss.lambda1 = 0\n") != std::string::npos,
            "lambda1 override missing from snapshot");
    REQUIRE(snapshot.find("loss.lambda2 = 0\n") != std::string::npos,
            "lambda2 override missing from snapshot");
  }
  {
    const auto r = run(citss + " train --config " + cfg_path.string() +
                       " --set not.a.key=1 --out " +
                       dir.file("run-bad").string());
    REQUIRE(r.exit_code == 2, "unknown override key must exit 2");
  }

  // --- replay: snapshot + seed fully determine the outputs -------------
  {
    const fs::path run_b = dir.file("run-b");
    const auto r = run(citss + " train --config " + cfg_path.string() +
                       " --seed 1 --out " + run_b.string());
    REQUIRE(r.exit_code == 0, "replay train failed: " + r.output);
    REQUIRE(read_file(run_a / "metrics.json") ==
                read_file(run_b / "metrics.json"),
            "metrics.json differs across identical runs");
    REQUIRE(read_file(run_a / "epochs.csv") == read_file(run_b / "epochs.csv"),
            "epochs.csv differs across identical runs");
    REQUIRE(read_file(run_a / "config.snapshot") ==
                read_file(run_b / "config.snapshot"),
            "config.snapshot differs across identical runs");
    REQUIRE(read_file(run_a / "checkpoint" / "adapter.json") ==
                read_file(run_b / "checkpoint" / "adapter.json"),
            "checkpoint differs across identical runs");
  }

  // --- runtime errors exit 1 -------------------------------------------
  {
    // the toy demo corpus has no test split, so evaluate must fail cleanly
    const auto r = run(citss + " evaluate --config " + cfg_path.string() +
                       " --checkpoint " + (run_a / "checkpoint").string() +
                       " --out " + dir.file("run-eval-fail").string());
    REQUIRE(r.exit_code == 1, "evaluate without a test split must exit 1");
    REQUIRE(r.output.find("error") != std::string::npos,
            "diagnostic expected on runtime error");
  }

  // --- augment-preview -------------------------------------------------
  for (const std::string strategy : {"sc", "kp"}) {
    const fs::path run_p = dir.file("preview-" + strategy);
    const auto r = run(citss + " augment-preview --config " +
                       cfg_path.string() + " --strategy " + strategy +
                       " --epoch 2 --seed 9 --beta 1 --gamma 0.5 --op mixed" +
                       " --limit 8 --out " + run_p.string());
    REQUIRE(r.exit_code == 0, strategy + " preview failed: " + r.output);
    std::ifstream in(run_p / "transforms.jsonl");
    std::string line;
    int lines = 0;
    int abstracted = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      REQUIRE(j.at("kind").get<std::string>() ==
                  (strategy == "sc" ? "SC" : "KP"),
              "unexpected transform kind");
      REQUIRE(j.at("epoch").get<int>() == 2, "unexpected epoch");
      for (const auto& sentence : j.at("sentences"))
        for (const char* token :
             {"Task-", "Material-", "Technique-", "Process-", "Measure-",
              "Concept-"})
          if (sentence.get<std::string>().find(token) != std::string::npos)
            ++abstracted;
      ++lines;
    }
    REQUIRE(lines == 8, "expected 8 transforms, got " + std::to_string(lines));
    if (strategy == "kp")
      // epoch 2 under the mixed schedule selects abstraction; with beta 1
      // every planted mention turns into a numbered type token.
      REQUIRE(abstracted > 0, "epoch-2 mixed KP preview shows no type tokens");
  }

  // --- evaluate requires a test split; predict works on raw contexts ---
  {
    const fs::path run_p = dir.file("run-predict");
    const auto r = run(citss + " predict --config " + cfg_path.string() +
                       " --checkpoint " + (run_a / "checkpoint").string() +
                       " --input " + (demo_dir / "corpus.jsonl").string() +
                       " --out " + run_p.string());
    REQUIRE(r.exit_code == 0, "predict failed: " + r.output);
    std::ifstream in(run_p / "predictions.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      REQUIRE(j.contains("id") && j.contains("label"),
              "prediction record incomplete");
      ++lines;
    }
    REQUIRE(lines == 40, "expected 40 predictions (32 train + 8 validation), "
                         "got " + std::to_string(lines));
  }

  // --- ablation emits the four-row table -------------------------------
  {
    const fs::path run_ab = dir.file("run-ablation");
    const auto r = run(citss + " ablation --config " + cfg_path.string() +
                       " --runs 1 --set train.max_epochs=1 --out " +
                       run_ab.string());
    REQUIRE(r.exit_code == 0, "ablation failed: " + r.output);
    const std::string csv = read_file(run_ab / "ablation.csv");
    REQUIRE(csv.find("setting,macro_f1_mean") != std::string::npos,
            "ablation csv header missing");
    REQUIRE(csv.find("lambda1,lambda2=0") != std::string::npos,
            "baseline row missing");
    REQUIRE(csv.find("sc+kp") != std::string::npos, "combined row missing");
    REQUIRE(csv.find(",-") != std::string::npos,
            "baseline improvement must print as -");
  }

  // --- inputs are never mutated ----------------------------------------
  REQUIRE(read_file(demo_dir / "corpus.jsonl") == corpus_before,
          "corpus file was modified by a subcommand");

  if (g_failures == 0) {
    std::cout << "cli integration: all checks passed\n";
    return 0;
  }
  std::cerr << "cli integration: " << g_failures << " failing checks\n";
  return 1;
}
