// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/backbone.hpp"

#include <doctest.h>

#include "citss/errors.hpp"
#include "support/temp_dir.hpp"

using namespace citss;
using backbone::BackboneKind;
using backbone::HashedEncoder;
using backbone::HashedEncoderConfig;
using backbone::PromptTemplate;
using backbone::Readout;
using backbone::RenderedPrompt;

namespace {

corpus::CitationContext make_context(std::vector<std::string> sentences,
                                     int citance_index,
                                     const std::string& id = "s") {
  corpus::CitationContext ctx;
  ctx.sample_id = id;
  ctx.sentences = std::move(sentences);
  ctx.citance_index = citance_index;
  return ctx;
}

HashedEncoderConfig small_config() {
  HashedEncoderConfig config;
  config.hidden = 16;
  config.vocab = 256;
  config.max_len = 64;
  return config;
}

}  // namespace

TEST_CASE("render_prompt joins sentences and substitutes at {T}") {
  const auto p1 = PromptTemplate::builtin_p1();
  CHECK(backbone::render_prompt(p1, make_context({"A.", "B."}, 0)) ==
        "A. B.. [MASK].");

  const auto p2 = PromptTemplate::builtin_p2();
  const std::string rendered =
      backbone::render_prompt(p2, make_context({"Ctx #CITATION_TAG ."}, 0));
  const std::string tail = "Only output one word as the answer:";
  REQUIRE(rendered.size() >= tail.size());
  CHECK(rendered.substr(rendered.size() - tail.size()) == tail);

  PromptTemplate identity{"{T}", Readout::LastPosition};
  CHECK(backbone::render_prompt(identity, make_context({"Just this."}, 0)) ==
        "Just this.");

  PromptTemplate broken{"no placeholder", Readout::LastPosition};
  CHECK_THROWS_AS(
      backbone::render_prompt(broken, make_context({"x"}, 0)), Error);
}

TEST_CASE("prompt templates validate placeholder and mask counts") {
  PromptTemplate p = PromptTemplate::builtin_p1();
  CHECK_NOTHROW(p.validate());
  PromptTemplate twice{"{T} and {T}. [MASK].", Readout::MaskPosition};
  CHECK_THROWS_AS(twice.validate(), Error);
  PromptTemplate no_mask{"{T}.", Readout::MaskPosition};
  CHECK_THROWS_AS(no_mask.validate(), Error);
  PromptTemplate two_masks{"{T}. [MASK]. [MASK].", Readout::MaskPosition};
  CHECK_THROWS_AS(two_masks.validate(), Error);
  // fine for last-position readout
  PromptTemplate eol{"{T}.", Readout::LastPosition};
  CHECK_NOTHROW(eol.validate());
}

TEST_CASE("templates load from files with trailing newlines stripped") {
  testing::TempDir dir;
  const auto path = dir.write("p1.txt", "{T}. [MASK].\n");
  const auto tmpl =
      PromptTemplate::from_file(path.string(), Readout::MaskPosition);
  CHECK(tmpl.body == "{T}. [MASK].");
}

TEST_CASE("render_for_encode records the citance geometry") {
  const auto ctx = make_context(
      {"Left one.", "Cite #CITATION_TAG here.", "Right one."}, 1, "geo");
  const auto rendered =
      backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx);
  CHECK(rendered.sample_id == "geo");
  CHECK(rendered.text.substr(rendered.citance_begin,
                             rendered.citance_end - rendered.citance_begin) ==
        "Cite #CITATION_TAG here.");
  CHECK(rendered.context_begin == 0);  // P1 has no prefix
  CHECK(rendered.text.substr(rendered.context_end) == ". [MASK].");
}

TEST_CASE("encoder readout sits on the mask token, decoder on the last") {
  const auto ctx = make_context({"Some words #CITATION_TAG ."}, 0);
  const auto rendered =
      backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx);

  HashedEncoder encoder(small_config(), 3);
  std::unique_ptr<backbone::EncodeTrace> trace;
  encoder.encode_batch({rendered}, &trace);
  const auto& t = dynamic_cast<const HashedEncoder::Trace&>(*trace);
  REQUIRE(t.readout_position.size() == 1);
  CHECK(t.token_ids[0][t.readout_position[0]] == HashedEncoder::kMaskId);

  HashedEncoderConfig dec_config = small_config();
  dec_config.kind = BackboneKind::Decoder;
  HashedEncoder decoder(dec_config, 3);
  const auto eol = backbone::render_for_encode(
      PromptTemplate{"{T} Answer:", Readout::LastPosition}, ctx);
  std::unique_ptr<backbone::EncodeTrace> dtrace;
  decoder.encode_batch({eol}, &dtrace);
  const auto& dt = dynamic_cast<const HashedEncoder::Trace&>(*dtrace);
  CHECK(dt.readout_position[0] ==
        static_cast<int>(dt.token_ids[0].size()) - 1);
}

TEST_CASE("evaluation-mode encodes are bitwise stable") {
  const auto ctx = make_context({"Stable input #CITATION_TAG ."}, 0);
  const auto rendered =
      backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx);
  HashedEncoder bb(small_config(), 11);
  const Eigen::VectorXd a = bb.encode(rendered);
  const Eigen::VectorXd b = bb.encode(rendered);
  CHECK(a == b);
  CHECK(a.size() == 16);
}

TEST_CASE("batch encode returns one row per input of width d_x") {
  HashedEncoder bb(small_config(), 2);
  std::vector<RenderedPrompt> batch;
  for (int i = 0; i < 5; ++i)
    batch.push_back(backbone::render_for_encode(
        PromptTemplate::builtin_p1(),
        make_context({"Sentence " + std::to_string(i) + " #CITATION_TAG ."},
                     0)));
  const Eigen::MatrixXd X = bb.encode_batch(batch, nullptr);
  CHECK(X.rows() == 5);
  CHECK(X.cols() == bb.hidden_size());
  CHECK(bb.forward_count() == 5);
}

TEST_CASE("left context is truncated before anything else") {
  // A long left context, nothing on the right. With a window that only fits
  // the citance and the template suffix, the encoding must equal that of the
  // same sample without any left context.
  std::string left;
  for (int i = 0; i < 50; ++i) left += "filler" + std::to_string(i) + " ";
  const auto long_ctx =
      make_context({left, "The citance #CITATION_TAG ."}, 1, "long");
  const auto short_ctx =
      make_context({"The citance #CITATION_TAG ."}, 0, "long");

  HashedEncoderConfig config = small_config();
  config.max_len = 6;  // citance (4 tokens) + "[MASK]" + "." after splitting
  HashedEncoder bb(config, 5);
  const auto p1 = PromptTemplate::builtin_p1();
  const Eigen::VectorXd truncated =
      bb.encode(backbone::render_for_encode(p1, long_ctx));
  const Eigen::VectorXd direct =
      bb.encode(backbone::render_for_encode(p1, short_ctx));
  CHECK(truncated == direct);
}

TEST_CASE("a citance that cannot fit the window names the sample") {
  std::string huge;
  for (int i = 0; i < 100; ++i) huge += "word" + std::to_string(i) + " ";
  huge += "#CITATION_TAG .";
  const auto ctx = make_context({huge}, 0, "sample-42");
  HashedEncoderConfig config = small_config();
  config.max_len = 8;
  HashedEncoder bb(config, 1);
  CHECK_THROWS_WITH_AS(
      bb.encode(backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx)),
      doctest::Contains("sample-42"), Error);
}

TEST_CASE("the low-rank wrapper changes neither shape nor readout") {
  const auto ctx = make_context({"Wrapped input #CITATION_TAG ."}, 0);
  const auto rendered =
      backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx);

  HashedEncoderConfig plain = small_config();
  HashedEncoderConfig wrapped = small_config();
  wrapped.wrapper.enabled = true;
  wrapped.wrapper.rank = 4;
  wrapped.wrapper.alpha = 4;

  HashedEncoder base(plain, 7);
  HashedEncoder lora(wrapped, 7);
  // The delta starts at zero, so outputs coincide exactly.
  CHECK(base.encode(rendered) == lora.encode(rendered));

  std::vector<backbone::ParamRef> params;
  lora.collect_params(params);
  REQUIRE(params.size() == 2);
  CHECK(params[0].name == "backbone.lora_a");
  CHECK(params[1].name == "backbone.lora_b");

  // Gradients flow into the wrapper parameters only.
  std::unique_ptr<backbone::EncodeTrace> trace;
  const Eigen::MatrixXd X = lora.encode_batch({rendered}, &trace);
  lora.backward(*trace, Eigen::MatrixXd::Ones(1, X.cols()));
  double grad_norm = 0;
  for (const auto& p : params)
    grad_norm +=
        Eigen::Map<const Eigen::VectorXd>(p.grad, p.size).squaredNorm();
  CHECK(grad_norm > 0.0);
}

TEST_CASE("frozen backbones expose no parameters and skip backward") {
  HashedEncoderConfig config = small_config();
  config.trainable = false;
  HashedEncoder bb(config, 1);
  std::vector<backbone::ParamRef> params;
  bb.collect_params(params);
  CHECK(params.empty());
}

TEST_CASE("state round-trips through save/load") {
  const auto ctx = make_context({"Round trip #CITATION_TAG ."}, 0);
  const auto rendered =
      backbone::render_for_encode(PromptTemplate::builtin_p1(), ctx);
  HashedEncoder a(small_config(), 19);
  const std::string state = a.save_state();

  HashedEncoder b(small_config(), 77);  // different init
  CHECK(a.encode(rendered) != b.encode(rendered));
  b.load_state(state);
  CHECK(a.encode(rendered) == b.encode(rendered));

  HashedEncoderConfig other = small_config();
  other.hidden = 32;
  HashedEncoder c(other, 1);
  CHECK_THROWS_AS(c.load_state(state), Error);
}

TEST_CASE("make_backbone resolves registry names") {
  const auto enc = backbone::make_backbone("hashed-encoder", small_config(), 1);
  CHECK(enc->kind() == BackboneKind::Encoder);
  const auto dec = backbone::make_backbone("hashed-decoder", small_config(), 1);
  CHECK(dec->kind() == BackboneKind::Decoder);
  CHECK_THROWS_AS(backbone::make_backbone("bert-base", small_config(), 1),
                  Error);
}
