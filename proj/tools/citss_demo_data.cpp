// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0
//
// citss-demo-data: writes a synthetic corpus bundle (corpus.jsonl, STK cache,
// stk_base.json, synonyms.json) so the pipeline can be exercised without any
// external dataset or LLM service.

#include <CLI11.hpp>

#include <iostream>

#include "citss/demo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic demo corpus bundle"};
  std::string out = "data/demo";
  std::string shape = "acl-arc";
  std::uint64_t seed = 7;
  int toy_size = 64;
  app.add_option("--out", out, "output directory");
  app.add_option("--shape", shape,
                 "acl-arc | acl-arc-pool | focal | toy");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--toy-size", toy_size, "training samples for --shape toy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    citss::demo::DemoSpec spec;
    if (shape == "acl-arc")
      spec = citss::demo::DemoSpec::acl_arc();
    else if (shape == "acl-arc-pool")
      spec = citss::demo::DemoSpec::acl_arc_pool();
    else if (shape == "focal")
      spec = citss::demo::DemoSpec::focal();
    else if (shape == "toy")
      spec = citss::demo::DemoSpec::toy(toy_size);
    else {
      std::cerr << "unknown shape `" << shape << "`\n";
      return 2;
    }
    const auto bundle = citss::demo::generate(spec, seed);
    citss::demo::write_bundle(bundle, out);
    std::cout << "wrote " << bundle.split.train.size() << "/"
              << bundle.split.validation.size() << "/"
              << bundle.split.test.size() << " train/validation/test samples"
              << " and " << bundle.stk.total_mentions() << " planted mentions"
              << " to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
