#include "vqrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vqrf {

Circuit build_ansatz(const AnsatzShape& shape) {
  if (shape.num_qubits < 2 || shape.layers < 1) {
    throw std::invalid_argument("ansatz needs at least two qubits and one layer");
  }
  Circuit c(shape.num_qubits, shape.num_params());
  int slot = 0;
  for (int layer = 0; layer < shape.layers; ++layer) {
    for (int q = 0; q + 1 < shape.num_qubits; ++q) c.add(GateOp::rzz(q, q + 1, 0.0).bound_to(slot++));
    for (int q = 0; q < shape.num_qubits; ++q) c.add(GateOp::rz(q, 0.0).bound_to(slot++));
    for (int q = 0; q < shape.num_qubits; ++q) c.add(GateOp::ry(q, 0.0).bound_to(slot++));
  }
  return c;
}

StateVector prepare_probe(const Circuit& ansatz, std::span<const double> lambda) {
  if (lambda.size() != ansatz.num_params()) {
    throw std::invalid_argument("probe parameters: expected " +
                                std::to_string(ansatz.num_params()) + " values, got " +
                                std::to_string(lambda.size()));
  }
  return ansatz.prepare(lambda);
}

std::size_t HeadShape::num_params() const {
  const auto i = static_cast<std::size_t>(inputs);
  const auto h1 = static_cast<std::size_t>(hidden1);
  const auto h2 = static_cast<std::size_t>(hidden2);
  const auto o = static_cast<std::size_t>(outputs);
  return i * h1 + h1 + h1 * h2 + h2 + h2 * o + o;
}

Head::Head(HeadShape shape) : shape_(shape) {
  if (shape.inputs < 1 || shape.hidden1 < 1 || shape.hidden2 < 1 || shape.outputs < 1) {
    throw std::invalid_argument("head layer sizes must be positive");
  }
  if (shape.dropout < 0.0 || shape.dropout >= 1.0) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  const auto i = static_cast<std::size_t>(shape.inputs);
  const auto h1 = static_cast<std::size_t>(shape.hidden1);
  const auto h2 = static_cast<std::size_t>(shape.hidden2);
  const auto o = static_cast<std::size_t>(shape.outputs);
  off_.w1 = 0;
  off_.b1 = off_.w1 + h1 * i;
  off_.w2 = off_.b1 + h1;
  off_.b2 = off_.w2 + h2 * h1;
  off_.w3 = off_.b2 + h2;
  off_.b3 = off_.w3 + o * h2;
  params_.assign(shape.num_params(), 0.0);
}

void Head::init_glorot(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  auto fill = [&](std::size_t offset, int fan_out, int fan_in) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t k = 0; k < static_cast<std::size_t>(fan_out * fan_in); ++k) {
      params_[offset + k] = u(rng);
    }
  };
  fill(off_.w1, shape_.hidden1, shape_.inputs);
  fill(off_.w2, shape_.hidden2, shape_.hidden1);
  fill(off_.w3, shape_.outputs, shape_.hidden2);
}

namespace {

Eigen::VectorXd dropout_mask(Eigen::Index n, double rate, bool training, Rng* rng) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
  if (!training || rate == 0.0) return mask;
  if (rng == nullptr) throw std::invalid_argument("training forward pass needs an rng");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index k = 0; k < n; ++k) mask[k] = u(*rng) < rate ? 0.0 : keep_scale;
  return mask;
}

}  // namespace

Eigen::VectorXd Head::forward(const Eigen::VectorXd& z, bool training, Rng* rng,
                              Cache* cache) const {
  if (z.size() != shape_.inputs) throw std::invalid_argument("head input has wrong length");
  const MatMap w1(params_.data() + off_.w1, shape_.hidden1, shape_.inputs);
  const VecMap b1(params_.data() + off_.b1, shape_.hidden1);
  const MatMap w2(params_.data() + off_.w2, shape_.hidden2, shape_.hidden1);
  const VecMap b2(params_.data() + off_.b2, shape_.hidden2);
  const MatMap w3(params_.data() + off_.w3, shape_.outputs, shape_.hidden2);
  const VecMap b3(params_.data() + off_.b3, shape_.outputs);

  Eigen::VectorXd pre1 = w1 * z + b1;
  Eigen::VectorXd mask1 = dropout_mask(shape_.hidden1, shape_.dropout, training, rng);
  Eigen::VectorXd act1 = pre1.cwiseMax(0.0).cwiseProduct(mask1);
  Eigen::VectorXd pre2 = w2 * act1 + b2;
  Eigen::VectorXd mask2 = dropout_mask(shape_.hidden2, shape_.dropout, training, rng);
  Eigen::VectorXd act2 = pre2.cwiseMax(0.0).cwiseProduct(mask2);
  Eigen::VectorXd logits = w3 * act2 + b3;
  if (cache != nullptr) {
    cache->input = z;
    cache->pre1 = std::move(pre1);
    cache->act1 = std::move(act1);
    cache->mask1 = std::move(mask1);
    cache->pre2 = std::move(pre2);
    cache->act2 = std::move(act2);
    cache->mask2 = std::move(mask2);
    cache->logits = logits;
  }
  return logits;
}

Eigen::VectorXd Head::backward(const Cache& cache, const Eigen::VectorXd& dlogits,
                               std::span<double> grad, double scale) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("head gradient has wrong length");
  using GradMat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using GradVec = Eigen::Map<Eigen::VectorXd>;
  const MatMap w1(params_.data() + off_.w1, shape_.hidden1, shape_.inputs);
  const MatMap w2(params_.data() + off_.w2, shape_.hidden2, shape_.hidden1);
  const MatMap w3(params_.data() + off_.w3, shape_.outputs, shape_.hidden2);
  GradMat gw1(grad.data() + off_.w1, shape_.hidden1, shape_.inputs);
  GradVec gb1(grad.data() + off_.b1, shape_.hidden1);
  GradMat gw2(grad.data() + off_.w2, shape_.hidden2, shape_.hidden1);
  GradVec gb2(grad.data() + off_.b2, shape_.hidden2);
  GradMat gw3(grad.data() + off_.w3, shape_.outputs, shape_.hidden2);
  GradVec gb3(grad.data() + off_.b3, shape_.outputs);

  gw3.noalias() += scale * dlogits * cache.act2.transpose();
  gb3 += scale * dlogits;
  const Eigen::VectorXd relu2 = (cache.pre2.array() > 0.0).cast<double>().matrix();
  const Eigen::VectorXd dpre2 =
      (w3.transpose() * dlogits).cwiseProduct(cache.mask2).cwiseProduct(relu2);
  gw2.noalias() += scale * dpre2 * cache.act1.transpose();
  gb2 += scale * dpre2;
  const Eigen::VectorXd relu1 = (cache.pre1.array() > 0.0).cast<double>().matrix();
  const Eigen::VectorXd dpre1 =
      (w2.transpose() * dpre2).cwiseProduct(cache.mask1).cwiseProduct(relu1);
  gw1.noalias() += scale * dpre1 * cache.input.transpose();
  gb1 += scale * dpre1;
  return w1.transpose() * dpre1;
}

double cross_entropy(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size()) throw std::invalid_argument("label out of range");
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[label];
}

Eigen::VectorXd cross_entropy_grad(const Eigen::VectorXd& logits, int label) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp().matrix();
  p /= p.sum();
  p[label] -= 1.0;
  return p;
}

double mse(double prediction, int label) {
  const double d = prediction - static_cast<double>(label);
  return d * d;
}

namespace {

double prob_one(const Eigen::VectorXd& logits) {
  if (logits.size() != 2) throw std::invalid_argument("MSE loss expects two logits");
  return 1.0 / (1.0 + std::exp(logits[0] - logits[1]));
}

}  // namespace

double loss_from_logits(const Eigen::VectorXd& logits, int label, LossKind kind) {
  if (kind == LossKind::kCrossEntropy) return cross_entropy(logits, label);
  return mse(prob_one(logits), label);
}

Eigen::VectorXd loss_grad_from_logits(const Eigen::VectorXd& logits, int label, LossKind kind) {
  if (kind == LossKind::kCrossEntropy) return cross_entropy_grad(logits, label);
  const double p = prob_one(logits);
  const double dp = 2.0 * (p - label);
  // dp/dw1 = p(1-p), dp/dw0 = -p(1-p)
  Eigen::VectorXd g(2);
  g << -dp * p * (1 - p), dp * p * (1 - p);
  return g;
}

int argmax(const Eigen::VectorXd& logits) {
  Eigen::Index idx = 0;
  logits.maxCoeff(&idx);
  return static_cast<int>(idx);
}

HybridModel::HybridModel(AnsatzShape ansatz, HeadShape head)
    : ansatz_shape_(ansatz),
      circuit_(build_ansatz(ansatz)),
      lambda_(ansatz.num_params(), 0.0),
      head_(head) {
  if (head.inputs != ansatz.num_qubits) {
    throw std::invalid_argument("head input width must equal the probe qubit count");
  }
}

void HybridModel::init(Rng& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi / 10, std::numbers::pi / 10);
  for (auto& l : lambda_) l = u(rng);
  head_.init_glorot(rng);
}

StateVector HybridModel::prepare_probe() const { return vqrf::prepare_probe(circuit_, lambda_); }

Eigen::VectorXd HybridModel::sense_probe(const StateVector& probe, const FieldInteraction& fi) {
  StateVector s = probe;
  apply_field(s, fi);
  const auto z = expectations_z(s);
  return Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

Eigen::VectorXd HybridModel::sense(const FieldInteraction& fi) const {
  return sense_probe(prepare_probe(), fi);
}

ForwardResult HybridModel::forward(const FieldInteraction& fi) const {
  ForwardResult r;
  r.features = sense(fi);
  r.logits = head_.forward(r.features, false, nullptr);
  return r;
}

BatchGradient HybridModel::grad(std::span<const Example> batch, LossKind loss, bool training,
                                Rng* rng, GradientMethod method) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  BatchGradient out;
  out.d_gamma.assign(head_.num_params(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const StateVector probe = prepare_probe();
  const int n = ansatz_shape_.num_qubits;

  // dL/dz per sample, already divided by the batch size.
  std::vector<std::vector<double>> weights(batch.size());
  std::vector<Mat2> unitaries(batch.size());
  Head::Cache cache;
  for (std::size_t m = 0; m < batch.size(); ++m) {
    const Eigen::VectorXd z = sense_probe(probe, batch[m].field);
    const Eigen::VectorXd logits = head_.forward(z, training, rng, &cache);
    out.loss += scale * loss_from_logits(logits, batch[m].label, loss);
    const Eigen::VectorXd dz =
        head_.backward(cache, loss_grad_from_logits(logits, batch[m].label, loss), out.d_gamma,
                       scale);
    weights[m].assign(dz.data(), dz.data() + n);
    for (auto& w : weights[m]) w *= scale;
    unitaries[m] = interaction_unitary(batch[m].field);
  }

  if (method == GradientMethod::kAdjoint) {
    // O = sum_m U_m^dagger (sum_n g_mn Z_n) U_m, with U_m the uniform field unitary.
    const HermitianOperator observable = [&](const StateVector& psi) {
      StateVector acc(psi.num_qubits());
      acc[0] = 0.0;
      for (std::size_t m = 0; m < batch.size(); ++m) {
        StateVector s = psi;
        apply_uniform_1q(s, unitaries[m]);
        apply_weighted_z(s, weights[m]);
        apply_uniform_1q(s, adjoint(unitaries[m]));
        acc.axpy(1.0, s);
      }
      return acc;
    };
    out.d_lambda = adjoint_grad(circuit_, lambda_, observable).grad;
  } else {
    const StateFunctional f = [&](const StateVector& psi) {
      double acc = 0.0;
      for (std::size_t m = 0; m < batch.size(); ++m) {
        StateVector s = psi;
        apply_uniform_1q(s, unitaries[m]);
        const auto z = expectations_z(s);
        for (int q = 0; q < n; ++q) acc += weights[m][q] * z[q];
      }
      return acc;
    };
    out.d_lambda = parameter_shift_grad(circuit_, lambda_, f);
  }
  return out;
}

}  // namespace vqrf
