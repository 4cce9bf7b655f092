// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/corpus.hpp"

#include <doctest.h>

#include <map>

#include "citss/demo.hpp"
#include "citss/errors.hpp"
#include "citss/rng.hpp"
#include "support/temp_dir.hpp"

using namespace citss;
using corpus::CitationContext;
using corpus::DatasetId;

namespace {

std::string record(const std::string& id, const std::string& citance,
                   const std::string& label, const std::string& split) {
  return "{\"id\": \"" + id + "\", \"sentences\": [\"" + citance +
         "\"], \"citance_index\": 0, \"label\": \"" + label +
         "\", \"split\": \"" + split + "\"}\n";
}

}  // namespace

TEST_CASE("normalize_anchor replaces exactly the span") {
  CHECK(corpus::normalize_anchor("as shown in [12]", 12, 16) ==
        "as shown in #CITATION_TAG");
  CHECK(corpus::normalize_anchor("see (Smith, 2019)", 4, 17) ==
        "see #CITATION_TAG");
  // Empty span at the start prefixes the anchor.
  CHECK(corpus::normalize_anchor("xy", 0, 0) == "#CITATION_TAGxy");
  CHECK_THROWS_AS(corpus::normalize_anchor("abc", 2, 9), Error);
  CHECK_THROWS_AS(corpus::normalize_anchor("abc", 3, 2), Error);
}

TEST_CASE("label parsing accepts release spellings and rejects junk") {
  const auto& labels = corpus::LabelSet::standard();
  REQUIRE(labels.size() == 6);
  CHECK(labels.name(0) == "Background");
  CHECK(labels.name(1) == "Compare/Contrast");
  CHECK(labels.name(5) == "Future");
  CHECK(labels.index_of("background", DatasetId::AclArc) == 0);
  CHECK(labels.index_of("CompareOrContrast", DatasetId::AclArc) == 1);
  CHECK(labels.index_of("Extends", DatasetId::AclArc) == 4);
  CHECK(labels.index_of("FUTURE", DatasetId::Act2) == 5);
  // FOCAL sentiment sub-classes merge into Compare/Contrast.
  CHECK(labels.index_of("Similarities", DatasetId::Focal) == 1);
  CHECK(labels.index_of("Differences", DatasetId::Focal) == 1);
  CHECK(labels.index_of("Neutrality", DatasetId::Focal) == 1);
  CHECK(!labels.index_of("Similarities", DatasetId::AclArc));
  CHECK(!labels.index_of("banana", DatasetId::AclArc));
}

TEST_CASE("load_dataset parses records and validates anchors") {
  testing::TempDir dir;
  std::string body;
  body += record("a", "We use X from #CITATION_TAG .", "Uses", "train");
  body += record("b", "Cited by #CITATION_TAG .", "background", "validation");
  body += record("c", "See #CITATION_TAG .", "Future", "test");
  const auto path = dir.write("corpus.jsonl", body);

  const auto split = corpus::load_dataset(path.string(), DatasetId::Custom);
  REQUIRE(split.train.size() == 1);
  REQUIRE(split.validation.size() == 1);
  REQUIRE(split.test.size() == 1);
  CHECK(split.train[0].sample_id == "a");
  CHECK(split.train[0].label == 2);
  CHECK(split.validation[0].label == 0);
  CHECK(split.test[0].label == 5);
}

TEST_CASE("load_dataset windows long contexts to l_max") {
  testing::TempDir dir;
  const auto path = dir.write(
      "corpus.jsonl",
      R"({"id": "w", "sentences": ["s0", "s1", "s2", "s3", "c #CITATION_TAG", "s5", "s6"], "citance_index": 4, "label": "Uses", "split": "train"})"
      "\n");
  const auto split = corpus::load_dataset(path.string(), DatasetId::Custom, 2);
  REQUIRE(split.train.size() == 1);
  const auto& ctx = split.train[0];
  CHECK(ctx.sentences ==
        std::vector<std::string>{"s2", "s3", "c #CITATION_TAG", "s5", "s6"});
  CHECK(ctx.citance_index == 2);
  CHECK(ctx.preceding() == 2);
  CHECK(ctx.succeeding() == 2);
}

TEST_CASE("load_dataset error paths carry line numbers and ids") {
  testing::TempDir dir;

  SUBCASE("empty file") {
    const auto path = dir.write("empty.jsonl", "");
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains("no records"), Error);
  }
  SUBCASE("malformed json names the line") {
    const auto path = dir.write(
        "bad.jsonl",
        record("a", "ok #CITATION_TAG", "Uses", "train") + "{not json\n");
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains(":2:"), Error);
  }
  SUBCASE("unknown label names the value") {
    const auto path = dir.write(
        "label.jsonl", record("a", "ok #CITATION_TAG", "Banana", "train"));
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains("Banana"), Error);
  }
  SUBCASE("citance without anchor names the sample") {
    const auto path =
        dir.write("anchor.jsonl", record("s17", "no anchor here", "Uses",
                                         "train"));
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains("s17"), Error);
  }
  SUBCASE("duplicate ids rejected") {
    const auto path = dir.write(
        "dup.jsonl", record("a", "x #CITATION_TAG", "Uses", "train") +
                         record("a", "y #CITATION_TAG", "Uses", "test"));
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains("duplicate"), Error);
  }
  SUBCASE("unlabeled record rejected for dataset loads") {
    const auto path = dir.write(
        "null.jsonl",
        R"({"id": "u", "sentences": ["x #CITATION_TAG"], "citance_index": 0, "label": null, "split": "train"})"
        "\n");
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path.string(), DatasetId::Custom),
                         doctest::Contains("unlabeled"), Error);
    // but fine for prediction inputs
    CHECK(corpus::load_contexts(path.string(), DatasetId::Custom).size() == 1);
  }
}

TEST_CASE("save/load round trip preserves the split structurally") {
  testing::TempDir dir;
  const auto bundle = demo::generate(demo::DemoSpec::toy(24), 7);
  const auto path = dir.file("roundtrip.jsonl");
  corpus::save_dataset(bundle.split, path.string());
  const auto loaded =
      corpus::load_dataset(path.string(), DatasetId::Custom, /*l_max=*/3);
  CHECK(loaded == bundle.split);
}

TEST_CASE("loaded citances contain exactly one anchor") {
  testing::TempDir dir;
  const auto bundle = demo::generate(demo::DemoSpec::toy(40), 3);
  const auto path = dir.file("demo.jsonl");
  corpus::save_dataset(bundle.split, path.string());
  const auto loaded = corpus::load_dataset(path.string(), DatasetId::Custom);
  for (const auto* part :
       {&loaded.train, &loaded.validation, &loaded.test}) {
    for (const auto& ctx : *part) {
      std::size_t count = 0;
      const std::string& citance = ctx.citance();
      for (std::size_t pos = citance.find(corpus::kAnchor);
           pos != std::string::npos;
           pos = citance.find(corpus::kAnchor, pos + 1))
        ++count;
      CHECK(count == 1);
    }
  }
}

TEST_CASE("demo corpus reproduces the published split sizes") {
  const auto acl = demo::generate(demo::DemoSpec::acl_arc(), 1);
  CHECK(acl.split.train.size() == 1399);
  CHECK(acl.split.validation.size() == 246);
  CHECK(acl.split.test.size() == 284);

  const auto focal = demo::generate(demo::DemoSpec::focal(), 1);
  CHECK(focal.split.train.size() == 2617);
  CHECK(focal.split.validation.size() == 660);
  CHECK(focal.split.test.size() == 889);
}

TEST_CASE("reserve_validation sizes, determinism, stratification") {
  SUBCASE("100 records at 0.15 give 15") {
    const auto bundle = demo::generate(demo::DemoSpec::toy(100), 11);
    auto [train2, val] = corpus::reserve_validation(bundle.split.train, 0.15, 5);
    CHECK(val.size() == 15);
    CHECK(train2.size() == 85);
  }

  SUBCASE("the 1645-sample pool yields the published 1399/246 partition") {
    const auto bundle = demo::generate(demo::DemoSpec::acl_arc_pool(), 11);
    REQUIRE(bundle.split.train.size() == 1645);
    auto [train2, val] =
        corpus::reserve_validation(bundle.split.train, 0.15, 5);
    CHECK(val.size() == 246);
    CHECK(train2.size() == 1399);
  }

  SUBCASE("same seed, same partition") {
    const auto bundle = demo::generate(demo::DemoSpec::toy(60), 2);
    const auto a = corpus::reserve_validation(bundle.split.train, 0.15, 9);
    const auto b = corpus::reserve_validation(bundle.split.train, 0.15, 9);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }

  SUBCASE("per-class counts stay within one of the exact share") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<CitationContext> pool;
      const int n = 40 + static_cast<int>(rng.uniform_index(160));
      for (int i = 0; i < n; ++i) {
        CitationContext ctx;
        ctx.sample_id = "t" + std::to_string(trial) + "-" + std::to_string(i);
        ctx.sentences = {"x #CITATION_TAG ."};
        ctx.label = static_cast<int>(rng.uniform_index(6));
        pool.push_back(std::move(ctx));
      }
      const double fraction = 0.1 + 0.2 * rng.next_double();
      auto [train2, val] = corpus::reserve_validation(pool, fraction, trial);
      CHECK(val.size() ==
            static_cast<std::size_t>(fraction * static_cast<double>(n)));
      std::map<int, int> total, reserved;
      for (const auto& c : pool) ++total[*c.label];
      for (const auto& c : val) ++reserved[*c.label];
      for (const auto& [label, count] : total) {
        const double exact = fraction * count;
        CHECK(reserved[label] >= static_cast<int>(exact) - 1);
        CHECK(reserved[label] <= static_cast<int>(exact) + 1);
      }
    }
  }

  SUBCASE("fraction out of range throws") {
    const auto bundle = demo::generate(demo::DemoSpec::toy(10), 1);
    CHECK_THROWS_AS(corpus::reserve_validation(bundle.split.train, 0.0, 1),
                    Error);
    CHECK_THROWS_AS(corpus::reserve_validation(bundle.split.train, 1.0, 1),
                    Error);
  }
}
