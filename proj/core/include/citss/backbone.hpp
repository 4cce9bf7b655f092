// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "citss/augment.hpp"
#include "citss/corpus.hpp"

namespace citss::backbone {

/// Where the representation is read out: encoders read the hidden state at
/// the mask token, decoders at the last position after instructing a
/// one-word answer.
enum class Readout { MaskPosition, LastPosition };

enum class BackboneKind { Encoder, Decoder };

BackboneKind parse_kind(const std::string& name);
std::string to_string(BackboneKind kind);

/// A prompt body with a single `{T}` placeholder. Mask-position templates
/// must contain the mask token exactly once.
struct PromptTemplate {
  std::string body;
  Readout readout = Readout::MaskPosition;
  std::string mask_token = "[MASK]";

  /// Throws unless the template is well-formed.
  void validate() const;

  /// Reads the body from a UTF-8 file; trailing newlines are stripped.
  static PromptTemplate from_file(const std::string& path, Readout readout,
                                  std::string mask_token = "[MASK]");

  /// The null template for mask readout and the instruction template for
  /// last-position readout.
  static PromptTemplate builtin_p1();
  static PromptTemplate builtin_p2();
};

/// Substitutes the flattened context at `{T}`. Sentences join with single
/// spaces. Throws when the placeholder is missing.
std::string render_prompt(const PromptTemplate& tmpl,
                          const corpus::CitationContext& context);
std::string render_prompt(const PromptTemplate& tmpl,
                          const augment::TransformedSample& sample);

/// A rendered prompt plus the character geometry the encoder needs for
/// window truncation: tokens strictly inside the left context are dropped
/// first, then tokens strictly inside the right context; the citance and the
/// prompt body are never dropped.
struct RenderedPrompt {
  std::string text;
  std::size_t context_begin = 0;
  std::size_t citance_begin = 0;
  std::size_t citance_end = 0;
  std::size_t context_end = 0;
  std::string sample_id;
};

RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const std::vector<std::string>& sentences,
                                 int citance_index,
                                 const std::string& sample_id);
RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const corpus::CitationContext& context);
RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const augment::TransformedSample& sample);

/// A named view over one trainable tensor, used by the optimizer.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::ptrdiff_t size = 0;
};

/// Opaque per-batch state handed back to `backward`.
struct EncodeTrace {
  virtual ~EncodeTrace() = default;
};

/// The backbone contract: a rendered prompt in, one hidden-state vector out.
/// The framework never looks inside.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual BackboneKind kind() const = 0;
  virtual int hidden_size() const = 0;
  virtual bool trainable() const = 0;

  /// Encodes a batch; rows are samples. When `trace` is non-null the call
  /// records what `backward` needs for gradient flow.
  virtual Eigen::MatrixXd encode_batch(const std::vector<RenderedPrompt>& batch,
                                       std::unique_ptr<EncodeTrace>* trace) = 0;

  /// Accumulates parameter gradients for dL/dX of a traced batch. No-op for
  /// frozen backbones.
  virtual void backward(const EncodeTrace& trace,
                        const Eigen::MatrixXd& d_output) = 0;

  virtual void collect_params(std::vector<ParamRef>& out) = 0;

  virtual std::string save_state() const = 0;
  virtual void load_state(const std::string& state) = 0;

  Eigen::VectorXd encode(const RenderedPrompt& prompt);

  /// Number of per-sample forward passes since construction.
  std::uint64_t forward_count() const { return forwards_; }

 protected:
  void note_forwards(std::size_t n) { forwards_ += n; }

 private:
  std::uint64_t forwards_ = 0;
};

/// Optional low-rank adaptation of the embedding table: the base table is
/// frozen and a rank-r delta (alpha/r scaled) carries all gradients. The
/// encode interface is unchanged.
struct WrapperConfig {
  bool enabled = false;
  int rank = 16;
  double alpha = 16.0;
};

struct HashedEncoderConfig {
  BackboneKind kind = BackboneKind::Encoder;
  int hidden = 64;
  int vocab = 4096;  // hash buckets, including the reserved mask id 0
  int max_len = 160;
  bool trainable = true;
  std::string mask_token = "[MASK]";
  WrapperConfig wrapper;
};

/// Desk-scale backbone: whitespace tokens hashed into an embedding table;
/// the hidden state at position p is E[token_p] plus the mean embedding of
/// the window. Runs on CPU and trains by plain backprop, which is all the
/// test suite needs; full-scale backbones are configuration choices behind
/// the same interface.
class HashedEncoder final : public Backbone {
 public:
  HashedEncoder(const HashedEncoderConfig& config, std::uint64_t seed);

  BackboneKind kind() const override { return config_.kind; }
  int hidden_size() const override { return config_.hidden; }
  bool trainable() const override { return config_.trainable; }

  Eigen::MatrixXd encode_batch(const std::vector<RenderedPrompt>& batch,
                               std::unique_ptr<EncodeTrace>* trace) override;
  void backward(const EncodeTrace& trace,
                const Eigen::MatrixXd& d_output) override;
  void collect_params(std::vector<ParamRef>& out) override;
  std::string save_state() const override;
  void load_state(const std::string& state) override;

  const HashedEncoderConfig& config() const { return config_; }

  /// Tokens after window truncation; exposed for the readout tests.
  struct Trace : EncodeTrace {
    std::vector<std::vector<std::uint32_t>> token_ids;
    std::vector<int> readout_position;
  };

  static constexpr std::uint32_t kMaskId = 0;
  std::vector<std::uint32_t> tokenize(const RenderedPrompt& prompt) const;

 private:
  Eigen::VectorXd effective_row(std::uint32_t id) const;

  HashedEncoderConfig config_;
  Eigen::MatrixXd embeddings_;       // vocab x hidden
  Eigen::MatrixXd embeddings_grad_;
  Eigen::MatrixXd lora_a_, lora_a_grad_;  // vocab x rank
  Eigen::MatrixXd lora_b_, lora_b_grad_;  // rank x hidden
};

/// Builds a backbone by registry name ("hashed-encoder", "hashed-decoder").
std::unique_ptr<Backbone> make_backbone(const std::string& name,
                                        const HashedEncoderConfig& config,
                                        std::uint64_t seed);

}  // namespace citss::backbone
