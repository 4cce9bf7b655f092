// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/head.hpp"

#include <cmath>

#include "citss/errors.hpp"

namespace citss::head {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

Eigen::VectorXd column_sums(const Eigen::MatrixXd& m) {
  return m.colwise().sum().transpose();
}

}  // namespace

double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u * kInvSqrt2)); }

double gelu_grad(double u) {
  const double phi_cdf = 0.5 * (1.0 + std::erf(u * kInvSqrt2));
  const double phi_pdf = kInvSqrt2Pi * std::exp(-0.5 * u * u);
  return phi_cdf + u * phi_pdf;
}

AdapterParams AdapterParams::init(int d_x, int d, int d_z, Rng& rng) {
  if (d_x <= 0 || d <= 0 || d_z <= 0)
    throw Error("adapter dimensions must be positive");
  AdapterParams p;
  p.W1.resize(d, d_x);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d_x));
  for (Eigen::Index r = 0; r < p.W1.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W1.cols(); ++c) p.W1(r, c) = s1 * rng.normal();
  p.b1 = Eigen::VectorXd::Zero(d);
  p.W2.resize(d_z, d);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index r = 0; r < p.W2.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W2.cols(); ++c) p.W2(r, c) = s2 * rng.normal();
  p.b2 = Eigen::VectorXd::Zero(d_z);
  return p;
}

AdapterGrads AdapterGrads::zeros_like(const AdapterParams& p) {
  AdapterGrads g;
  g.W1 = Eigen::MatrixXd::Zero(p.W1.rows(), p.W1.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.W2 = Eigen::MatrixXd::Zero(p.W2.rows(), p.W2.cols());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  return g;
}

void AdapterGrads::set_zero() {
  W1.setZero();
  b1.setZero();
  W2.setZero();
  b2.setZero();
}

Eigen::MatrixXd adapter_forward_batch(const Eigen::MatrixXd& X,
                                      const AdapterParams& params,
                                      AdapterTrace* trace, double dropout,
                                      Rng* rng) {
  if (X.cols() != params.W1.cols())
    throw Error("adapter input has dimension " + std::to_string(X.cols()) +
                ", expected " + std::to_string(params.W1.cols()));
  const Eigen::Index n = X.rows();
  const Eigen::Index d = params.W1.rows();

  Eigen::MatrixXd U = X * params.W1.transpose();
  U.rowwise() += params.b1.transpose();

  Eigen::MatrixXd G = U.unaryExpr([](double u) { return gelu(u); });

  Eigen::MatrixXd mask;
  if (dropout > 0.0 && rng != nullptr) {
    mask.resize(n, d);
    const double keep = 1.0 - dropout;
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        mask(r, c) = rng->bernoulli(dropout) ? 0.0 : 1.0 / keep;
    G = G.cwiseProduct(mask);
  }

  // Row-wise layer normalization with population variance.
  Eigen::MatrixXd Y(n, d);
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = G.row(r).mean();
    const double var = (G.row(r).array() - mean).square().mean();
    const double s = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    inv_std(r) = s;
    Y.row(r) = (G.row(r).array() - mean) * s;
  }

  Eigen::MatrixXd Z = Y * params.W2.transpose();
  Z.rowwise() += params.b2.transpose();

  if (trace) {
    trace->X = X;
    trace->U = std::move(U);
    trace->Y = Y;
    trace->inv_std = std::move(inv_std);
    trace->dropout_mask = std::move(mask);
  }
  return Z;
}

Eigen::VectorXd adapter_forward(const Eigen::VectorXd& x,
                                const AdapterParams& params) {
  return adapter_forward_batch(x.transpose(), params).row(0).transpose();
}

Eigen::MatrixXd adapter_backward(const AdapterTrace& trace,
                                 const Eigen::MatrixXd& dZ,
                                 const AdapterParams& params,
                                 AdapterGrads& grads) {
  const Eigen::Index n = trace.X.rows();
  const Eigen::Index d = params.W1.rows();

  grads.W2 += dZ.transpose() * trace.Y;
  grads.b2 += column_sums(dZ);

  Eigen::MatrixXd dY = dZ * params.W2;

  // Layer-norm backward, row by row.
  Eigen::MatrixXd dG(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = trace.inv_std(r);
    const double mean_dy = dY.row(r).mean();
    const double mean_dy_y = dY.row(r).cwiseProduct(trace.Y.row(r)).mean();
    dG.row(r) =
        s * (dY.row(r).array() - mean_dy - trace.Y.row(r).array() * mean_dy_y);
  }

  if (trace.dropout_mask.size() > 0) dG = dG.cwiseProduct(trace.dropout_mask);

  const Eigen::MatrixXd dU =
      dG.cwiseProduct(trace.U.unaryExpr([](double u) { return gelu_grad(u); }));

  grads.W1 += dU.transpose() * trace.X;
  grads.b1 += column_sums(dU);
  return dU * params.W1;
}

ClassifierParams ClassifierParams::init(int d_z, int classes) {
  if (d_z <= 0 || classes <= 0)
    throw Error("classifier dimensions must be positive");
  ClassifierParams p;
  // Zero init keeps the initial prediction uniform; gradients reach W3
  // through the representations.
  p.W3 = Eigen::MatrixXd::Zero(classes, d_z);
  p.b3 = Eigen::VectorXd::Zero(classes);
  return p;
}

ClassifierGrads ClassifierGrads::zeros_like(const ClassifierParams& p) {
  ClassifierGrads g;
  g.W3 = Eigen::MatrixXd::Zero(p.W3.rows(), p.W3.cols());
  g.b3 = Eigen::VectorXd::Zero(p.b3.size());
  return g;
}

void ClassifierGrads::set_zero() {
  W3.setZero();
  b3.setZero();
}

Eigen::MatrixXd classify_batch(const Eigen::MatrixXd& Z,
                               const ClassifierParams& p) {
  if (Z.cols() != p.W3.cols())
    throw Error("classifier input has dimension " + std::to_string(Z.cols()) +
                ", expected " + std::to_string(p.W3.cols()));
  Eigen::MatrixXd logits = Z * p.W3.transpose();
  logits.rowwise() += p.b3.transpose();
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double max = logits.row(r).maxCoeff();
    Eigen::ArrayXd shifted = (logits.row(r).array() - max).exp();
    probs.row(r) = (shifted / shifted.sum()).matrix();
  }
  return probs;
}

Eigen::VectorXd classify(const Eigen::VectorXd& z, const ClassifierParams& p) {
  return classify_batch(z.transpose(), p).row(0).transpose();
}

double cls_loss(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                int* clamped) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size()))
    throw Error("cls_loss: probs and labels differ in length");
  if (labels.empty()) throw Error("cls_loss: empty batch");
  double loss = 0.0;
  int clamps = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= probs.cols())
      throw Error("cls_loss: label out of range");
    double p = probs(static_cast<Eigen::Index>(i), label);
    if (p < kProbabilityClamp) {
      p = kProbabilityClamp;
      ++clamps;
    }
    loss -= std::log(p);
  }
  if (clamped) *clamped = clamps;
  return loss;
}

Eigen::MatrixXd classifier_backward(const Eigen::MatrixXd& Z,
                                    const Eigen::MatrixXd& probs,
                                    const std::vector<int>& labels,
                                    const ClassifierParams& params,
                                    ClassifierGrads& grads) {
  Eigen::MatrixXd d_logits = probs;
  for (std::size_t i = 0; i < labels.size(); ++i)
    d_logits(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  grads.W3 += d_logits.transpose() * Z;
  grads.b3 += column_sums(d_logits);
  return d_logits * params.W3;
}

double infonce(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zt,
               double tau) {
  if (Z.rows() != Zt.rows() || Z.cols() != Zt.cols())
    throw Error("infonce: batch shapes differ");
  if (Z.rows() == 0) throw Error("infonce: empty batch");
  if (!(tau > 0.0)) throw Error("infonce: temperature must be positive");

  const Eigen::MatrixXd S = (Z * Zt.transpose()) / tau;
  const Eigen::Index n = S.rows();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double max = S.row(i).maxCoeff();
    const double lse = max + std::log((S.row(i).array() - max).exp().sum());
    loss += lse - S(i, i);
  }
  return loss / static_cast<double>(n);
}

void infonce_backward(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zt,
                      double tau, Eigen::MatrixXd& dZ, Eigen::MatrixXd& dZt) {
  if (Z.rows() != Zt.rows() || Z.cols() != Zt.cols())
    throw Error("infonce: batch shapes differ");
  if (Z.rows() == 0) throw Error("infonce: empty batch");
  if (!(tau > 0.0)) throw Error("infonce: temperature must be positive");
  const Eigen::MatrixXd S = (Z * Zt.transpose()) / tau;
  const Eigen::Index n = S.rows();
  Eigen::MatrixXd dS(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double max = S.row(i).maxCoeff();
    Eigen::ArrayXd p = (S.row(i).array() - max).exp();
    p /= p.sum();
    dS.row(i) = p.matrix();
    dS(i, i) -= 1.0;
  }
  dS /= static_cast<double>(n) * tau;
  dZ = dS * Zt;
  dZt = dS.transpose() * Z;
}

void LossWeights::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || omega < 0)
    throw Error("loss weights must be non-negative");
  if (!(tau1 > 0) || !(tau2 > 0))
    throw Error("temperatures must be positive");
}

double total_loss(double l_cls, double l_sc, double l_kp, double l_pnt,
                  const LossWeights& weights) {
  return l_cls + weights.lambda1 * l_sc + weights.lambda2 * l_kp +
         weights.omega * l_pnt;
}

}  // namespace citss::head
