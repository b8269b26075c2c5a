#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vqrf/field.hpp"
#include "vqrf/qsim.hpp"

namespace vqrf {

using Rng = std::mt19937_64;

/// Hardware-efficient probe: each layer is RZZ on the nearest-neighbour chain
/// (0,1)..(N-2,N-1), then RZ on every qubit, then RY on every qubit. Slots are
/// layer-major in exactly that order; no slot is shared.
struct AnsatzShape {
  int num_qubits = 10;
  int layers = 5;

  std::size_t params_per_layer() const { return 3 * static_cast<std::size_t>(num_qubits) - 1; }
  std::size_t num_params() const { return params_per_layer() * static_cast<std::size_t>(layers); }
};

Circuit build_ansatz(const AnsatzShape& shape);

struct HeadShape {
  int inputs = 10;
  int hidden1 = 128;
  int hidden2 = 64;
  int outputs = 2;
  double dropout = 0.2;

  std::size_t num_params() const;
};

/// Dense ReLU network inputs -> hidden1 -> hidden2 -> outputs. All weights
/// and biases live in one flat vector (W1, b1, W2, b2, W3, b3; weights
/// row-major, shape out x in).
class Head {
 public:
  explicit Head(HeadShape shape = {});

  const HeadShape& shape() const { return shape_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  void init_glorot(Rng& rng);

  struct Cache {
    Eigen::VectorXd input;
    Eigen::VectorXd pre1, act1, mask1;
    Eigen::VectorXd pre2, act2, mask2;
    Eigen::VectorXd logits;
  };

  /// Inverted dropout is drawn from `rng` only when `training` is set.
  Eigen::VectorXd forward(const Eigen::VectorXd& z, bool training, Rng* rng,
                          Cache* cache = nullptr) const;

  /// Accumulates dL/dparams into `grad` (scaled by `scale`) and returns dL/dz.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::VectorXd& dlogits,
                           std::span<double> grad, double scale = 1.0) const;

 private:
  using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using VecMap = Eigen::Map<const Eigen::VectorXd>;
  struct Offsets {
    std::size_t w1, b1, w2, b2, w3, b3;
  };

  HeadShape shape_;
  Offsets off_{};
  std::vector<double> params_;
};

/// -log softmax(w)_r with max subtraction.
double cross_entropy(const Eigen::VectorXd& logits, int label);
/// d cross_entropy / d logits = softmax(w) - onehot(r).
Eigen::VectorXd cross_entropy_grad(const Eigen::VectorXd& logits, int label);

double mse(double prediction, int label);

enum class LossKind { kCrossEntropy, kMse };

/// Loss of a 2-logit output; for MSE the prediction is softmax(w)_1, the
/// probability of label 1.
double loss_from_logits(const Eigen::VectorXd& logits, int label, LossKind kind);
Eigen::VectorXd loss_grad_from_logits(const Eigen::VectorXd& logits, int label, LossKind kind);

int argmax(const Eigen::VectorXd& logits);

struct Example {
  FieldInteraction field;
  int label = 1;
};

enum class GradientMethod { kAdjoint, kParameterShift };

struct ForwardResult {
  Eigen::VectorXd features;
  Eigen::VectorXd logits;
};

struct BatchGradient {
  double loss = 0.0;  // batch mean
  std::vector<double> d_lambda;
  std::vector<double> d_gamma;
};

/// Variational probe followed by the field interaction, Pauli-Z readout and
/// the classical head.
class HybridModel {
 public:
  HybridModel(AnsatzShape ansatz = {}, HeadShape head = {});

  const Circuit& circuit() const { return circuit_; }
  const AnsatzShape& ansatz_shape() const { return ansatz_shape_; }
  std::span<double> lambda() { return lambda_; }
  std::span<const double> lambda() const { return lambda_; }
  Head& head() { return head_; }
  const Head& head() const { return head_; }

  /// lambda ~ U(-pi/10, pi/10), head Glorot-uniform with zero biases.
  void init(Rng& rng);

  StateVector prepare_probe() const;
  static Eigen::VectorXd sense_probe(const StateVector& probe, const FieldInteraction& fi);
  Eigen::VectorXd sense(const FieldInteraction& fi) const;

  ForwardResult forward(const FieldInteraction& fi) const;

  /// Mean loss and its gradient over a batch. Dropout masks come from `rng`
  /// when `training` is set. The field is data and carries no gradient.
  BatchGradient grad(std::span<const Example> batch, LossKind loss, bool training, Rng* rng,
                     GradientMethod method = GradientMethod::kAdjoint) const;

 private:
  AnsatzShape ansatz_shape_;
  Circuit circuit_;
  std::vector<double> lambda_;
  Head head_;
};

StateVector prepare_probe(const Circuit& ansatz, std::span<const double> lambda);

}  // namespace vqrf
