// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/backbone.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citss/errors.hpp"

namespace citss::backbone {
namespace {

using nlohmann::json;

std::size_t count_occurrences(const std::string& text, const std::string& sub) {
  if (sub.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = text.find(sub); pos != std::string::npos;
       pos = text.find(sub, pos + sub.size()))
    ++count;
  return count;
}

std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out += ' ';
    out += sentences[i];
  }
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c =
      r == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  return m;
}

struct TokenSpan {
  std::string text;
  std::size_t begin;
  std::size_t end;
};

/// Whitespace tokenization, with the mask literal always split out as its own
/// token so the readout rule can identify it exactly.
std::vector<TokenSpan> split_tokens(const std::string& text,
                                    const std::string& mask_token) {
  std::vector<TokenSpan> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    // Split the mask literal out of the raw chunk.
    std::size_t pos = i;
    while (pos < j) {
      const std::size_t mask_at =
          mask_token.empty() ? std::string::npos : text.find(mask_token, pos);
      if (mask_at == std::string::npos || mask_at >= j) {
        tokens.push_back({text.substr(pos, j - pos), pos, j});
        break;
      }
      if (mask_at > pos)
        tokens.push_back({text.substr(pos, mask_at - pos), pos, mask_at});
      tokens.push_back({mask_token, mask_at, mask_at + mask_token.size()});
      pos = mask_at + mask_token.size();
      if (pos == j) break;
    }
    i = j;
  }
  return tokens;
}

}  // namespace

BackboneKind parse_kind(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "encoder") return BackboneKind::Encoder;
  if (n == "decoder") return BackboneKind::Decoder;
  throw Error("unknown backbone kind `" + name + "`");
}

std::string to_string(BackboneKind kind) {
  return kind == BackboneKind::Encoder ? "encoder" : "decoder";
}

void PromptTemplate::validate() const {
  const std::size_t placeholders = count_occurrences(body, "{T}");
  if (placeholders != 1)
    throw Error("prompt template must contain `{T}` exactly once, found " +
                std::to_string(placeholders));
  if (readout == Readout::MaskPosition) {
    const std::size_t masks = count_occurrences(body, mask_token);
    if (masks != 1)
      throw Error("mask-position template must contain `" + mask_token +
                  "` exactly once, found " + std::to_string(masks));
  }
}

PromptTemplate PromptTemplate::from_file(const std::string& path,
                                         Readout readout,
                                         std::string mask_token) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open prompt template: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string body = buf.str();
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r'))
    body.pop_back();
  PromptTemplate tmpl{std::move(body), readout, std::move(mask_token)};
  tmpl.validate();
  return tmpl;
}

PromptTemplate PromptTemplate::builtin_p1() {
  PromptTemplate tmpl;
  tmpl.body = "{T}. [MASK].";
  tmpl.readout = Readout::MaskPosition;
  return tmpl;
}

PromptTemplate PromptTemplate::builtin_p2() {
  PromptTemplate tmpl;
  tmpl.body =
      "You are provided a context from a paper P citing a paper Q, with the "
      "specific citation marked as the \"#CITATION_TAG\" tag. Please analyze "
      "the citation function of the context which represents the author’s "
      "motive or purpose for citing Q. Here is the context:“{T}\". Only "
      "output one word as the answer:";
  tmpl.readout = Readout::LastPosition;
  return tmpl;
}

namespace {

std::string render_text(const PromptTemplate& tmpl, const std::string& flat) {
  const auto pos = tmpl.body.find("{T}");
  if (pos == std::string::npos)
    throw Error("prompt template has no `{T}` placeholder");
  std::string out = tmpl.body;
  out.replace(pos, 3, flat);
  return out;
}

RenderedPrompt render_geometry(const PromptTemplate& tmpl,
                               const std::vector<std::string>& sentences,
                               int citance_index,
                               const std::string& sample_id) {
  const auto pos = tmpl.body.find("{T}");
  if (pos == std::string::npos)
    throw Error("prompt template has no `{T}` placeholder");
  std::string before;
  for (int i = 0; i < citance_index; ++i) {
    if (i > 0) before += ' ';
    before += sentences[i];
  }
  const std::string& citance = sentences.at(citance_index);
  const std::string flat = join_sentences(sentences);

  RenderedPrompt out;
  out.sample_id = sample_id;
  out.text = tmpl.body;
  out.text.replace(pos, 3, flat);
  out.context_begin = pos;
  out.citance_begin = pos + before.size() + (before.empty() ? 0 : 1);
  out.citance_end = out.citance_begin + citance.size();
  out.context_end = pos + flat.size();
  return out;
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl,
                          const corpus::CitationContext& context) {
  return render_text(tmpl, context.flattened());
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const augment::TransformedSample& sample) {
  return render_text(tmpl, sample.flattened());
}

RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const std::vector<std::string>& sentences,
                                 int citance_index,
                                 const std::string& sample_id) {
  return render_geometry(tmpl, sentences, citance_index, sample_id);
}

RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const corpus::CitationContext& context) {
  return render_geometry(tmpl, context.sentences, context.citance_index,
                         context.sample_id);
}

RenderedPrompt render_for_encode(const PromptTemplate& tmpl,
                                 const augment::TransformedSample& sample) {
  return render_geometry(tmpl, sample.sentences, sample.citance_index,
                         sample.origin_id);
}

Eigen::VectorXd Backbone::encode(const RenderedPrompt& prompt) {
  const Eigen::MatrixXd batch = encode_batch({prompt}, nullptr);
  return batch.row(0).transpose();
}

HashedEncoder::HashedEncoder(const HashedEncoderConfig& config,
                             std::uint64_t seed)
    : config_(config) {
  if (config_.hidden <= 0 || config_.vocab <= 1 || config_.max_len <= 0)
    throw Error("backbone dimensions must be positive");
  Rng rng(derive_stream(seed, "hashed-encoder", 0, "backbone-init"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
  embeddings_.resize(config_.vocab, config_.hidden);
  for (Eigen::Index r = 0; r < embeddings_.rows(); ++r)
    for (Eigen::Index c = 0; c < embeddings_.cols(); ++c)
      embeddings_(r, c) = scale * rng.normal();
  embeddings_grad_ = Eigen::MatrixXd::Zero(config_.vocab, config_.hidden);
  if (config_.wrapper.enabled) {
    if (config_.wrapper.rank <= 0) throw Error("wrapper rank must be positive");
    const double a_scale = 1.0 / std::sqrt(static_cast<double>(config_.wrapper.rank));
    lora_a_.resize(config_.vocab, config_.wrapper.rank);
    for (Eigen::Index r = 0; r < lora_a_.rows(); ++r)
      for (Eigen::Index c = 0; c < lora_a_.cols(); ++c)
        lora_a_(r, c) = a_scale * rng.normal();
    lora_b_ = Eigen::MatrixXd::Zero(config_.wrapper.rank, config_.hidden);
    lora_a_grad_ = Eigen::MatrixXd::Zero(config_.vocab, config_.wrapper.rank);
    lora_b_grad_ = Eigen::MatrixXd::Zero(config_.wrapper.rank, config_.hidden);
  }
}

std::vector<std::uint32_t> HashedEncoder::tokenize(
    const RenderedPrompt& prompt) const {
  const std::vector<TokenSpan> tokens =
      split_tokens(prompt.text, config_.mask_token);

  enum class Zone { Protected, LeftContext, RightContext };
  std::vector<Zone> zones(tokens.size(), Zone::Protected);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].begin >= prompt.context_begin &&
        tokens[i].end <= prompt.citance_begin)
      zones[i] = Zone::LeftContext;
    else if (tokens[i].begin >= prompt.citance_end &&
             tokens[i].end <= prompt.context_end)
      zones[i] = Zone::RightContext;
  }

  std::size_t kept = tokens.size();
  std::vector<bool> dropped(tokens.size(), false);
  const std::size_t limit = static_cast<std::size_t>(config_.max_len);
  // Drop left-context tokens first (leftmost first), then right-context
  // tokens (rightmost first). The citance and prompt body always survive.
  for (std::size_t i = 0; kept > limit && i < tokens.size(); ++i)
    if (zones[i] == Zone::LeftContext) {
      dropped[i] = true;
      --kept;
    }
  for (std::size_t i = tokens.size(); kept > limit && i > 0; --i)
    if (zones[i - 1] == Zone::RightContext) {
      dropped[i - 1] = true;
      --kept;
    }
  if (kept > limit)
    throw Error("context window exceeded for sample `" + prompt.sample_id +
                "`: citance and prompt need " + std::to_string(kept) +
                " tokens, window is " + std::to_string(limit));

  std::vector<std::uint32_t> ids;
  ids.reserve(kept);
  const std::uint64_t buckets = static_cast<std::uint64_t>(config_.vocab) - 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (dropped[i]) continue;
    if (tokens[i].text == config_.mask_token)
      ids.push_back(kMaskId);
    else
      ids.push_back(
          static_cast<std::uint32_t>(1 + fnv1a64(tokens[i].text) % buckets));
  }
  return ids;
}

Eigen::VectorXd HashedEncoder::effective_row(std::uint32_t id) const {
  Eigen::VectorXd row = embeddings_.row(id).transpose();
  if (config_.wrapper.enabled)
    row += (config_.wrapper.alpha / config_.wrapper.rank) *
           (lora_a_.row(id) * lora_b_).transpose();
  return row;
}

Eigen::MatrixXd HashedEncoder::encode_batch(
    const std::vector<RenderedPrompt>& batch,
    std::unique_ptr<EncodeTrace>* trace) {
  Eigen::MatrixXd output(static_cast<Eigen::Index>(batch.size()),
                         config_.hidden);
  auto local = std::make_unique<Trace>();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<std::uint32_t> ids = tokenize(batch[i]);
    if (ids.empty())
      throw Error("empty prompt for sample `" + batch[i].sample_id + "`");

    int readout = -1;
    if (config_.kind == BackboneKind::Encoder) {
      for (std::size_t p = 0; p < ids.size(); ++p)
        if (ids[p] == kMaskId) readout = static_cast<int>(p);
      if (readout < 0)
        throw Error("no mask token in rendered prompt for sample `" +
                    batch[i].sample_id + "`");
    } else {
      readout = static_cast<int>(ids.size()) - 1;
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(config_.hidden);
    for (std::uint32_t id : ids) mean += effective_row(id);
    mean /= static_cast<double>(ids.size());
    output.row(i) =
        (effective_row(ids[static_cast<std::size_t>(readout)]) + mean)
            .transpose();

    local->token_ids.push_back(std::move(ids));
    local->readout_position.push_back(readout);
  }
  note_forwards(batch.size());
  if (trace) *trace = std::move(local);
  return output;
}

void HashedEncoder::backward(const EncodeTrace& trace,
                             const Eigen::MatrixXd& d_output) {
  if (!config_.trainable) return;
  const auto& t = dynamic_cast<const Trace&>(trace);
  const double lora_scale =
      config_.wrapper.enabled ? config_.wrapper.alpha / config_.wrapper.rank
                              : 0.0;
  for (std::size_t i = 0; i < t.token_ids.size(); ++i) {
    const auto& ids = t.token_ids[i];
    const Eigen::VectorXd g = d_output.row(static_cast<Eigen::Index>(i));
    const double inv_n = 1.0 / static_cast<double>(ids.size());
    const auto accumulate = [&](std::uint32_t id, const Eigen::VectorXd& grad) {
      if (config_.wrapper.enabled) {
        lora_a_grad_.row(id) += lora_scale * (lora_b_ * grad).transpose();
        lora_b_grad_ += lora_scale * lora_a_.row(id).transpose() * grad.transpose();
      } else {
        embeddings_grad_.row(id) += grad.transpose();
      }
    };
    accumulate(ids[static_cast<std::size_t>(t.readout_position[i])], g);
    const Eigen::VectorXd shared = g * inv_n;
    for (std::uint32_t id : ids) accumulate(id, shared);
  }
}

void HashedEncoder::collect_params(std::vector<ParamRef>& out) {
  if (!config_.trainable) return;
  if (config_.wrapper.enabled) {
    out.push_back({"backbone.lora_a", lora_a_.data(), lora_a_grad_.data(),
                   lora_a_.size()});
    out.push_back({"backbone.lora_b", lora_b_.data(), lora_b_grad_.data(),
                   lora_b_.size()});
  } else {
    out.push_back({"backbone.embeddings", embeddings_.data(),
                   embeddings_grad_.data(), embeddings_.size()});
  }
}

std::string HashedEncoder::save_state() const {
  json j;
  j["name"] = config_.kind == BackboneKind::Encoder ? "hashed-encoder"
                                                    : "hashed-decoder";
  j["hidden"] = config_.hidden;
  j["vocab"] = config_.vocab;
  j["max_len"] = config_.max_len;
  j["mask_token"] = config_.mask_token;
  j["wrapper_enabled"] = config_.wrapper.enabled;
  if (config_.wrapper.enabled) {
    j["wrapper_rank"] = config_.wrapper.rank;
    j["wrapper_alpha"] = config_.wrapper.alpha;
    j["lora_a"] = matrix_to_json(lora_a_);
    j["lora_b"] = matrix_to_json(lora_b_);
  }
  j["embeddings"] = matrix_to_json(embeddings_);
  return j.dump();
}

void HashedEncoder::load_state(const std::string& state) {
  json j;
  try {
    j = json::parse(state);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed backbone state: ") + e.what());
  }
  if (j.value("hidden", -1) != config_.hidden ||
      j.value("vocab", -1) != config_.vocab ||
      j.value("wrapper_enabled", false) != config_.wrapper.enabled)
    throw Error("backbone state is incompatible with this configuration");
  embeddings_ = matrix_from_json(j.at("embeddings"));
  if (config_.wrapper.enabled) {
    lora_a_ = matrix_from_json(j.at("lora_a"));
    lora_b_ = matrix_from_json(j.at("lora_b"));
  }
}

std::unique_ptr<Backbone> make_backbone(const std::string& name,
                                        const HashedEncoderConfig& config,
                                        std::uint64_t seed) {
  HashedEncoderConfig effective = config;
  if (name == "hashed-encoder")
    effective.kind = BackboneKind::Encoder;
  else if (name == "hashed-decoder")
    effective.kind = BackboneKind::Decoder;
  else
    throw Error("unknown backbone `" + name +
                "` (known: hashed-encoder, hashed-decoder)");
  return std::make_unique<HashedEncoder>(effective, seed);
}

}  // namespace citss::backbone
