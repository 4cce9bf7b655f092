// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/eval.hpp"
#include "citss/logging.hpp"

namespace citss::trainer {
namespace {

using backbone::ParamRef;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
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

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& entries) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = entries.at(i).get<double>();
  return v;
}

/// First-order adaptive optimizer with decoupled weight decay.
class AdamW {
 public:
  struct Slot {
    ParamRef ref;
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    bool decay = true;
  };

  AdamW(std::vector<ParamRef> params, PntScope scope) {
    for (ParamRef& ref : params) {
      Slot slot;
      slot.decay = scope == PntScope::All ||
                   ref.name.rfind("backbone.", 0) != 0;
      slot.m = Eigen::VectorXd::Zero(ref.size);
      slot.v = Eigen::VectorXd::Zero(ref.size);
      slot.ref = std::move(ref);
      slots_.push_back(std::move(slot));
    }
  }

  void zero_grads() {
    for (Slot& s : slots_)
      Eigen::Map<Eigen::VectorXd>(s.ref.grad, s.ref.size).setZero();
  }

  /// The decayed-parameter penalty 0.5 * sum ||theta||^2, reported as l_pnt.
  double weight_penalty() const {
    double sum = 0.0;
    for (const Slot& s : slots_) {
      if (!s.decay) continue;
      sum += Eigen::Map<const Eigen::VectorXd>(s.ref.value, s.ref.size)
                 .squaredNorm();
    }
    return 0.5 * sum;
  }

  void step(double lr, double weight_decay, double grad_clip) {
    ++t_;
    double clip_scale = 1.0;
    if (grad_clip > 0.0) {
      double norm_sq = 0.0;
      for (const Slot& s : slots_)
        norm_sq += Eigen::Map<const Eigen::VectorXd>(s.ref.grad, s.ref.size)
                       .squaredNorm();
      const double norm = std::sqrt(norm_sq);
      if (norm > grad_clip) clip_scale = grad_clip / norm;
    }
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (Slot& s : slots_) {
      Eigen::Map<Eigen::VectorXd> value(s.ref.value, s.ref.size);
      Eigen::Map<const Eigen::VectorXd> grad(s.ref.grad, s.ref.size);
      s.m = kBeta1 * s.m + (1.0 - kBeta1) * clip_scale * grad;
      s.v = kBeta2 * s.v +
            (1.0 - kBeta2) * (clip_scale * grad.array()).square().matrix();
      const Eigen::ArrayXd m_hat = s.m.array() / bc1;
      const Eigen::ArrayXd v_hat = s.v.array() / bc2;
      Eigen::ArrayXd update = m_hat / (v_hat.sqrt() + kEps);
      if (s.decay && weight_decay > 0.0) update += weight_decay * value.array();
      value.array() -= lr * update;
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<Slot> slots_;
  long t_ = 0;
};

std::vector<ParamRef> head_params(head::AdapterParams& adapter,
                                  head::AdapterGrads& a_grads,
                                  head::ClassifierParams& classifier,
                                  head::ClassifierGrads& c_grads) {
  std::vector<ParamRef> refs;
  refs.push_back({"adapter.W1", adapter.W1.data(), a_grads.W1.data(),
                  adapter.W1.size()});
  refs.push_back({"adapter.b1", adapter.b1.data(), a_grads.b1.data(),
                  adapter.b1.size()});
  refs.push_back({"adapter.W2", adapter.W2.data(), a_grads.W2.data(),
                  adapter.W2.size()});
  refs.push_back({"adapter.b2", adapter.b2.data(), a_grads.b2.data(),
                  adapter.b2.size()});
  refs.push_back({"classifier.W3", classifier.W3.data(), c_grads.W3.data(),
                  classifier.W3.size()});
  refs.push_back({"classifier.b3", classifier.b3.data(), c_grads.b3.data(),
                  classifier.b3.size()});
  return refs;
}

/// Inference-only pass with explicit parameters; used for validation scoring
/// and by predict. Touches neither transforms nor contrastive terms.
std::vector<int> classify_contexts(
    const head::AdapterParams& adapter, const head::ClassifierParams& classifier,
    backbone::Backbone& bb, const std::vector<corpus::CitationContext>& contexts,
    const backbone::PromptTemplate& prompt, int batch_size) {
  std::vector<int> preds;
  preds.reserve(contexts.size());
  for (std::size_t begin = 0; begin < contexts.size();
       begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(contexts.size(), begin + static_cast<std::size_t>(batch_size));
    std::vector<backbone::RenderedPrompt> rendered;
    rendered.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
      rendered.push_back(backbone::render_for_encode(prompt, contexts[i]));
    const Eigen::MatrixXd X = bb.encode_batch(rendered, nullptr);
    const Eigen::MatrixXd Z = head::adapter_forward_batch(X, adapter);
    const Eigen::MatrixXd P = head::classify_batch(Z, classifier);
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      Eigen::Index argmax = 0;
      P.row(r).maxCoeff(&argmax);
      preds.push_back(static_cast<int>(argmax));
    }
  }
  return preds;
}

std::vector<int> gold_labels(const std::vector<corpus::CitationContext>& contexts,
                             const char* split_name) {
  std::vector<int> labels;
  labels.reserve(contexts.size());
  for (const auto& ctx : contexts) {
    if (!ctx.label)
      throw Error(std::string("unlabeled sample `") + ctx.sample_id +
                  "` in " + split_name + " split");
    labels.push_back(*ctx.label);
  }
  return labels;
}

}  // namespace

TrainConfig TrainConfig::from_config(const Config& c) {
  TrainConfig t;
  t.l = c.get_int("context.l");
  t.beta = c.get_double("augment.beta");
  t.gamma = c.get_double("augment.gamma");
  t.op_mode = augment::parse_op_mode(c.get("augment.op"));
  t.weights.lambda1 = c.get_double("loss.lambda1");
  t.weights.lambda2 = c.get_double("loss.lambda2");
  t.weights.omega = c.get_double("loss.omega");
  t.weights.tau1 = c.get_double("loss.tau1");
  t.weights.tau2 = c.get_double("loss.tau2");
  const std::string scope = c.get("loss.pnt_scope");
  if (scope == "all")
    t.pnt_scope = PntScope::All;
  else if (scope == "head")
    t.pnt_scope = PntScope::HeadOnly;
  else
    throw ConfigError("loss.pnt_scope must be all|head, got `" + scope + "`");
  t.d = c.get_int("adapter.d");
  t.d_z = c.get_int("adapter.d_z");
  t.dropout = c.get_double("adapter.dropout");
  t.batch_size = c.get_int("train.batch_size");
  t.lr = c.get_double("train.lr");
  t.max_epochs = c.get_int("train.max_epochs");
  t.patience = c.get_int("train.patience");
  t.grad_clip = c.get_double("train.grad_clip");
  t.seed = static_cast<std::uint64_t>(c.get_i64("train.seed"));
  t.dataset = corpus::parse_dataset_id(c.get("dataset.id"));

  t.backbone_name = c.get("backbone.name");
  t.backbone_config.kind = backbone::parse_kind(c.get("backbone.kind"));
  t.backbone_config.hidden = c.get_int("backbone.hidden");
  t.backbone_config.vocab = c.get_int("backbone.vocab");
  t.backbone_config.max_len = c.get_int("backbone.max_len");
  t.backbone_config.trainable = c.get_bool("backbone.trainable");
  t.backbone_config.mask_token = c.get("backbone.mask_token");
  t.backbone_config.wrapper.enabled = c.get_bool("backbone.wrapper.enabled");
  t.backbone_config.wrapper.rank = c.get_int("backbone.wrapper.rank");
  t.backbone_config.wrapper.alpha = c.get_double("backbone.wrapper.alpha");

  const backbone::Readout readout =
      t.backbone_config.kind == backbone::BackboneKind::Encoder
          ? backbone::Readout::MaskPosition
          : backbone::Readout::LastPosition;
  if (!c.empty("backbone.prompt_file")) {
    t.prompt = backbone::PromptTemplate::from_file(
        c.get("backbone.prompt_file"), readout, t.backbone_config.mask_token);
  } else if (readout == backbone::Readout::MaskPosition) {
    t.prompt = backbone::PromptTemplate::builtin_p1();
    t.prompt.mask_token = t.backbone_config.mask_token;
  } else {
    t.prompt = backbone::PromptTemplate::builtin_p2();
  }
  t.config_hash = c.hash();
  t.validate();
  return t;
}

void TrainConfig::validate() const {
  weights.validate();
  prompt.validate();
  if (max_epochs < 1) throw Error("train.max_epochs must be at least 1");
  if (batch_size < 1) throw Error("train.batch_size must be at least 1");
  if (!(beta >= 0.0 && beta <= 1.0) || !(gamma >= 0.0 && gamma <= 1.0))
    throw Error("beta and gamma must lie in [0, 1]");
  if (d <= 0 || d_z <= 0) throw Error("adapter dimensions must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw Error("adapter.dropout must lie in [0, 1)");
}

std::string RunMetrics::to_json() const {
  json j;
  j["epochs"] = json::array();
  for (const EpochRecord& e : epochs) {
    json row;
    row["epoch"] = e.epoch;
    row["l_cls"] = e.l_cls;
    row["l_sc"] = e.l_sc;
    row["l_kp"] = e.l_kp;
    row["l_pnt"] = e.l_pnt;
    row["total"] = e.total;
    row["val_macro_f1"] = e.val_macro_f1;
    row["val_accuracy"] = e.val_accuracy;
    j["epochs"].push_back(std::move(row));
  }
  j["best_epoch"] = best_epoch;
  j["best_val_macro_f1"] = best_val_macro_f1;
  j["best_val_accuracy"] = best_val_accuracy;
  if (has_test) {
    j["test"]["macro_f1"] = test_macro_f1;
    j["test"]["accuracy"] = test_accuracy;
    j["test"]["per_class_f1"] = test_per_class_f1;
  }
  return j.dump(2);
}

std::string RunMetrics::to_csv() const {
  std::ostringstream out;
  out << "epoch,l_cls,l_sc,l_kp,l_pnt,total,val_macro_f1,val_accuracy\n";
  for (const EpochRecord& e : epochs)
    out << e.epoch << ',' << format_double(e.l_cls) << ','
        << format_double(e.l_sc) << ',' << format_double(e.l_kp) << ','
        << format_double(e.l_pnt) << ',' << format_double(e.total) << ','
        << format_double(e.val_macro_f1) << ','
        << format_double(e.val_accuracy) << "\n";
  return out.str();
}

void Checkpoint::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    json j;
    j["W1"] = matrix_to_json(adapter.W1);
    j["b1"] = vector_to_json(adapter.b1);
    j["W2"] = matrix_to_json(adapter.W2);
    j["b2"] = vector_to_json(adapter.b2);
    std::ofstream out(dir / "adapter.json");
    if (!out) throw Error("cannot write " + (dir / "adapter.json").string());
    out << j.dump();
  }
  {
    json j;
    j["W3"] = matrix_to_json(classifier.W3);
    j["b3"] = vector_to_json(classifier.b3);
    std::ofstream out(dir / "classifier.json");
    out << j.dump();
  }
  {
    std::ofstream out(dir / "backbone.json");
    out << backbone_state;
  }
  {
    json j;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    j["config_hash"] = buf;
    j["d_x"] = d_x;
    j["labels"] = corpus::LabelSet::standard().names();
    std::ofstream out(dir / "meta.json");
    out << j.dump(2);
  }
}

Checkpoint Checkpoint::load(const std::filesystem::path& dir) {
  const auto read_json = [](const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open checkpoint file " + file.string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error("malformed checkpoint file " + file.string() + ": " +
                  e.what());
    }
    return j;
  };
  Checkpoint ckpt;
  {
    const json j = read_json(dir / "adapter.json");
    ckpt.adapter.W1 = matrix_from_json(j.at("W1"));
    ckpt.adapter.b1 = vector_from_json(j.at("b1"));
    ckpt.adapter.W2 = matrix_from_json(j.at("W2"));
    ckpt.adapter.b2 = vector_from_json(j.at("b2"));
  }
  {
    const json j = read_json(dir / "classifier.json");
    ckpt.classifier.W3 = matrix_from_json(j.at("W3"));
    ckpt.classifier.b3 = vector_from_json(j.at("b3"));
  }
  {
    std::ifstream in(dir / "backbone.json");
    if (!in) throw Error("cannot open checkpoint file " +
                         (dir / "backbone.json").string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ckpt.backbone_state = buf.str();
  }
  {
    const json j = read_json(dir / "meta.json");
    ckpt.config_hash =
        std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    ckpt.d_x = j.at("d_x").get<int>();
  }
  return ckpt;
}

std::pair<Checkpoint, RunMetrics> train(const TrainConfig& config,
                                        const corpus::DatasetSplit& data,
                                        const stk::StkBase& stk_base,
                                        const augment::SynonymBase& synonyms,
                                        backbone::Backbone& bb) {
  config.validate();
  if (data.train.empty()) throw Error("empty training split");
  if (data.validation.empty())
    throw Error("training requires a validation split (reserve one first)");
  const std::vector<int> val_labels = gold_labels(data.validation, "validation");
  const std::vector<int> train_labels = gold_labels(data.train, "train");

  const int classes = corpus::LabelSet::standard().size();
  const int d_x = bb.hidden_size();

  Rng init_rng(derive_stream(config.seed, "head", 0, "init"));
  head::AdapterParams adapter =
      head::AdapterParams::init(d_x, config.d, config.d_z, init_rng);
  head::AdapterGrads adapter_grads = head::AdapterGrads::zeros_like(adapter);
  head::ClassifierParams classifier =
      head::ClassifierParams::init(config.d_z, classes);
  head::ClassifierGrads classifier_grads =
      head::ClassifierGrads::zeros_like(classifier);

  std::vector<ParamRef> params =
      head_params(adapter, adapter_grads, classifier, classifier_grads);
  bb.collect_params(params);
  AdamW optimizer(params, config.pnt_scope);

  const bool use_sc = config.weights.lambda1 > 0.0;
  const bool use_kp = config.weights.lambda2 > 0.0;

  RunMetrics metrics;
  Checkpoint best;
  double best_score = -1.0;

  const std::size_t n_train = data.train.size();
  const int patience =
      config.patience > 0 ? config.patience : config.max_epochs;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const augment::PerturbOp op = augment::schedule_op(epoch, config.op_mode);
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
    Rng shuffle_rng(derive_stream(config.seed, "batch-order", epoch, "shuffle"));
    shuffle_rng.shuffle(order);
    Rng dropout_rng(derive_stream(config.seed, "dropout", epoch, "dropout"));
    Rng* dropout = config.dropout > 0.0 ? &dropout_rng : nullptr;

    EpochRecord record;
    record.epoch = epoch;

    for (std::size_t begin = 0; begin < n_train;
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          n_train, begin + static_cast<std::size_t>(config.batch_size));
      std::vector<const corpus::CitationContext*> batch;
      std::vector<int> labels;
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&data.train[order[i]]);
        labels.push_back(train_labels[order[i]]);
      }

      // Originals.
      std::vector<backbone::RenderedPrompt> rendered;
      for (const auto* ctx : batch)
        rendered.push_back(backbone::render_for_encode(config.prompt, *ctx));
      std::unique_ptr<backbone::EncodeTrace> trace_o;
      const Eigen::MatrixXd X_o = bb.encode_batch(rendered, &trace_o);
      head::AdapterTrace atrace_o;
      const Eigen::MatrixXd Z_o = head::adapter_forward_batch(
          X_o, adapter, &atrace_o, config.dropout, dropout);
      const Eigen::MatrixXd probs = head::classify_batch(Z_o, classifier);
      int clamped = 0;
      const double l_cls = head::cls_loss(probs, labels, &clamped);
      if (clamped > 0)
        log::warn("cross entropy clamped " + std::to_string(clamped) +
                  " probabilities at epoch " + std::to_string(epoch));

      // SC positives.
      Eigen::MatrixXd Z_s;
      head::AdapterTrace atrace_s;
      std::unique_ptr<backbone::EncodeTrace> trace_s;
      double l_sc = 0.0;
      if (use_sc) {
        std::vector<backbone::RenderedPrompt> rendered_sc;
        for (const auto* ctx : batch) {
          Rng rng(derive_stream(config.seed, ctx->sample_id, epoch, "sc"));
          const augment::TransformedSample ts =
              augment::sample_sc(*ctx, epoch, rng);
          rendered_sc.push_back(
              backbone::render_for_encode(config.prompt, ts));
        }
        const Eigen::MatrixXd X_s = bb.encode_batch(rendered_sc, &trace_s);
        Z_s = head::adapter_forward_batch(X_s, adapter, &atrace_s,
                                          config.dropout, dropout);
        l_sc = head::infonce(Z_o, Z_s, config.weights.tau1);
      }

      // KP positives.
      Eigen::MatrixXd Z_k;
      head::AdapterTrace atrace_k;
      std::unique_ptr<backbone::EncodeTrace> trace_k;
      double l_kp = 0.0;
      if (use_kp) {
        std::vector<backbone::RenderedPrompt> rendered_kp;
        for (const auto* ctx : batch) {
          Rng rng(derive_stream(config.seed, ctx->sample_id, epoch, "kp"));
          const augment::TransformedSample ts = augment::kp_transform(
              *ctx, stk_base.mentions_for(ctx->sample_id), op, config.beta,
              config.gamma, stk_base, synonyms, rng);
          rendered_kp.push_back(
              backbone::render_for_encode(config.prompt, ts));
        }
        const Eigen::MatrixXd X_k = bb.encode_batch(rendered_kp, &trace_k);
        Z_k = head::adapter_forward_batch(X_k, adapter, &atrace_k,
                                          config.dropout, dropout);
        l_kp = head::infonce(Z_o, Z_k, config.weights.tau2);
      }

      const double l_pnt = optimizer.weight_penalty();
      const double total =
          head::total_loss(l_cls, l_sc, l_kp, l_pnt, config.weights);
      if (!std::isfinite(total)) {
        std::ostringstream dump;
        dump << "non-finite loss at epoch " << epoch << ": l_cls=" << l_cls
             << " l_sc=" << l_sc << " l_kp=" << l_kp << " l_pnt=" << l_pnt
             << "; batch:";
        for (const auto* ctx : batch) dump << " " << ctx->sample_id;
        throw NonFiniteLossError(dump.str());
      }

      optimizer.zero_grads();

      Eigen::MatrixXd dZ_o =
          head::classifier_backward(Z_o, probs, labels, classifier,
                                    classifier_grads);
      if (use_sc) {
        Eigen::MatrixXd g_o, g_s;
        head::infonce_backward(Z_o, Z_s, config.weights.tau1, g_o, g_s);
        dZ_o += config.weights.lambda1 * g_o;
        const Eigen::MatrixXd dX_s = head::adapter_backward(
            atrace_s, config.weights.lambda1 * g_s, adapter, adapter_grads);
        bb.backward(*trace_s, dX_s);
      }
      if (use_kp) {
        Eigen::MatrixXd g_o, g_k;
        head::infonce_backward(Z_o, Z_k, config.weights.tau2, g_o, g_k);
        dZ_o += config.weights.lambda2 * g_o;
        const Eigen::MatrixXd dX_k = head::adapter_backward(
            atrace_k, config.weights.lambda2 * g_k, adapter, adapter_grads);
        bb.backward(*trace_k, dX_k);
      }
      const Eigen::MatrixXd dX_o =
          head::adapter_backward(atrace_o, dZ_o, adapter, adapter_grads);
      bb.backward(*trace_o, dX_o);

      optimizer.step(config.lr, config.weights.omega, config.grad_clip);

      record.l_cls += l_cls;
      record.l_sc += l_sc;
      record.l_kp += l_kp;
      record.l_pnt = l_pnt;  // latest penalty, not a sum
      record.total += total;
    }

    const std::vector<int> val_preds =
        classify_contexts(adapter, classifier, bb, data.validation,
                          config.prompt, config.batch_size);
    record.val_macro_f1 = eval::macro_f1(val_preds, val_labels, classes);
    record.val_accuracy = eval::accuracy(val_preds, val_labels);
    metrics.epochs.push_back(record);
    log::info("epoch " + std::to_string(epoch) + ": l_cls=" +
              std::to_string(record.l_cls) + " l_sc=" +
              std::to_string(record.l_sc) + " l_kp=" +
              std::to_string(record.l_kp) + " val_macro_f1=" +
              std::to_string(record.val_macro_f1) + " val_acc=" +
              std::to_string(record.val_accuracy));

    const double score = record.val_macro_f1 + record.val_accuracy;
    if (score > best_score) {
      best_score = score;
      best.adapter = adapter;
      best.classifier = classifier;
      best.backbone_state = bb.save_state();
      best.config_hash = config.config_hash;
      best.d_x = d_x;
      metrics.best_epoch = epoch;
      metrics.best_val_macro_f1 = record.val_macro_f1;
      metrics.best_val_accuracy = record.val_accuracy;
    }
    if (epoch - metrics.best_epoch >= patience) break;
  }

  if (!data.test.empty()) {
    const std::vector<int> test_labels = gold_labels(data.test, "test");
    bb.load_state(best.backbone_state);
    const std::vector<int> test_preds =
        classify_contexts(best.adapter, best.classifier, bb, data.test,
                          config.prompt, config.batch_size);
    const eval::MetricReport report =
        eval::compute_metrics(test_preds, test_labels, classes);
    metrics.has_test = true;
    metrics.test_macro_f1 = report.macro_f1;
    metrics.test_accuracy = report.accuracy;
    metrics.test_per_class_f1 = report.per_class_f1;
  }

  return {std::move(best), std::move(metrics)};
}

std::vector<int> predict(const Checkpoint& checkpoint, backbone::Backbone& bb,
                         const std::vector<corpus::CitationContext>& contexts,
                         const backbone::PromptTemplate& prompt,
                         int batch_size) {
  if (checkpoint.d_x != bb.hidden_size())
    throw Error("incompatible checkpoint: expects hidden size " +
                std::to_string(checkpoint.d_x) + ", backbone has " +
                std::to_string(bb.hidden_size()));
  bb.load_state(checkpoint.backbone_state);
  if (contexts.empty()) return {};
  return classify_contexts(checkpoint.adapter, checkpoint.classifier, bb,
                           contexts, prompt, batch_size);
}

}  // namespace citss::trainer
