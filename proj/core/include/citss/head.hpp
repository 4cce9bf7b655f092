// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "citss/rng.hpp"

namespace citss::head {

/// Exact Gaussian-CDF GeLU, u * Phi(u), and its derivative. The tanh
/// approximation is deliberately not used.
double gelu(double u);
double gelu_grad(double u);

inline constexpr double kLayerNormEpsilon = 1e-5;
inline constexpr double kProbabilityClamp = 1e-12;

/// Two-layer adapter mapping backbone vectors x (d_x) to task
/// representations z (d_z): z = W2 * LN(GeLU(W1 x + b1)) + b2.
struct AdapterParams {
  Eigen::MatrixXd W1;  // d x d_x
  Eigen::VectorXd b1;  // d
  Eigen::MatrixXd W2;  // d_z x d
  Eigen::VectorXd b2;  // d_z

  static AdapterParams init(int d_x, int d, int d_z, Rng& rng);
  int input_size() const { return static_cast<int>(W1.cols()); }
  int hidden_size() const { return static_cast<int>(W1.rows()); }
  int output_size() const { return static_cast<int>(W2.rows()); }
};

struct AdapterGrads {
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;
  Eigen::VectorXd b2;

  static AdapterGrads zeros_like(const AdapterParams& p);
  void set_zero();
};

/// Per-batch intermediates for the backward pass.
struct AdapterTrace {
  Eigen::MatrixXd X;        // n x d_x
  Eigen::MatrixXd U;        // n x d, pre-activation
  Eigen::MatrixXd Y;        // n x d, layer-normalized
  Eigen::VectorXd inv_std;  // n
  Eigen::MatrixXd dropout_mask;  // n x d, empty when dropout is off
};

/// Forward over a batch (rows are samples). Dropout is applied after the
/// activation when `dropout > 0` and `rng` is given (training mode).
Eigen::MatrixXd adapter_forward_batch(const Eigen::MatrixXd& X,
                                      const AdapterParams& params,
                                      AdapterTrace* trace = nullptr,
                                      double dropout = 0.0,
                                      Rng* rng = nullptr);

Eigen::VectorXd adapter_forward(const Eigen::VectorXd& x,
                                const AdapterParams& params);

/// Accumulates parameter gradients and returns dL/dX.
Eigen::MatrixXd adapter_backward(const AdapterTrace& trace,
                                 const Eigen::MatrixXd& dZ,
                                 const AdapterParams& params,
                                 AdapterGrads& grads);

/// Linear classifier over task representations.
struct ClassifierParams {
  Eigen::MatrixXd W3;  // C x d_z
  Eigen::VectorXd b3;  // C

  static ClassifierParams init(int d_z, int classes);
  int classes() const { return static_cast<int>(W3.rows()); }
};

struct ClassifierGrads {
  Eigen::MatrixXd W3;
  Eigen::VectorXd b3;

  static ClassifierGrads zeros_like(const ClassifierParams& p);
  void set_zero();
};

/// softmax(W3 z + b3); rows sum to one.
Eigen::VectorXd classify(const Eigen::VectorXd& z, const ClassifierParams& p);
Eigen::MatrixXd classify_batch(const Eigen::MatrixXd& Z,
                               const ClassifierParams& p);

/// Sum over the batch of -log p[label]. Probabilities are clamped at 1e-12;
/// `clamped`, when given, counts how often the clamp fired.
double cls_loss(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                int* clamped = nullptr);

/// Accumulates classifier gradients for the summed cross entropy and returns
/// dL/dZ.
Eigen::MatrixXd classifier_backward(const Eigen::MatrixXd& Z,
                                    const Eigen::MatrixXd& probs,
                                    const std::vector<int>& labels,
                                    const ClassifierParams& params,
                                    ClassifierGrads& grads);

/// InfoNCE over a batch of representations and their transforms:
/// -(1/|B|) sum_i log( exp(z_i . zt_i / tau) / sum_j exp(z_i . zt_j / tau) ).
/// Similarity is the raw dot product over tau; no vector normalization.
/// Computed with log-sum-exp stabilization; a batch of one is exactly zero.
double infonce(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zt, double tau);

/// Gradients of infonce with respect to both inputs.
void infonce_backward(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zt,
                      double tau, Eigen::MatrixXd& dZ, Eigen::MatrixXd& dZt);

/// Loss-term weights and temperatures.
struct LossWeights {
  double lambda1 = 0.2;
  double lambda2 = 0.1;
  double omega = 0.01;
  double tau1 = 1.0;
  double tau2 = 1.0;

  void validate() const;
};

/// l_cls + lambda1 * l_sc + lambda2 * l_kp + omega * l_pnt.
double total_loss(double l_cls, double l_sc, double l_kp, double l_pnt,
                  const LossWeights& weights);

}  // namespace citss::head
