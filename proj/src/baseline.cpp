#include "vqrf/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace vqrf {

PhaseSequence phase_sequence(const PathSet& paths, double angular_freq) {
  std::vector<std::size_t> order(paths.paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Path& pa = paths.paths[a];
    const Path& pb = paths.paths[b];
    if (pa.delay_s != pb.delay_s) return pa.delay_s < pb.delay_s;
    if (pa.transmitter != pb.transmitter) return pa.transmitter < pb.transmitter;
    return pa.reflections() < pb.reflections();
  });
  PhaseSequence seq;
  seq.reserve(order.size());
  for (std::size_t idx : order) {
    const Path& p = paths.paths[idx];
    double phase = std::arg(p.gain * std::polar(1.0, -angular_freq * p.delay_s));
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    seq.push_back(phase);
  }
  return seq;
}

std::size_t LstmShape::num_params() const {
  const auto i = static_cast<std::size_t>(inputs);
  const auto h = static_cast<std::size_t>(hidden);
  const auto o = static_cast<std::size_t>(outputs);
  return 4 * (h * i + h * h + 2 * h) + (h * o + o);
}

Lstm::Lstm(LstmShape shape) : shape_(shape) {
  if (shape.inputs < 1 || shape.hidden < 1 || shape.outputs < 1) {
    throw std::invalid_argument("LSTM sizes must be positive");
  }
  const auto i = static_cast<std::size_t>(shape.inputs);
  const auto h = static_cast<std::size_t>(shape.hidden);
  const auto o = static_cast<std::size_t>(shape.outputs);
  off_wih_ = 0;
  off_whh_ = off_wih_ + 4 * h * i;
  off_bih_ = off_whh_ + 4 * h * h;
  off_bhh_ = off_bih_ + 4 * h;
  off_wout_ = off_bhh_ + 4 * h;
  off_bout_ = off_wout_ + o * h;
  params_.assign(shape.num_params(), 0.0);
}

void Lstm::init_uniform(Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(shape_.hidden));
  std::uniform_real_distribution<double> u(-k, k);
  for (auto& p : params_) p = u(rng);
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutMat = Eigen::Map<RowMat>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

Eigen::VectorXd Lstm::run(std::span<const double> seq, std::vector<Step>* steps) const {
  const int h = shape_.hidden;
  const int in = shape_.inputs;
  if (seq.size() % static_cast<std::size_t>(in) != 0) {
    throw std::invalid_argument("sequence length is not a multiple of the input width");
  }
  const ConstMat wih(params_.data() + off_wih_, 4 * h, in);
  const ConstMat whh(params_.data() + off_whh_, 4 * h, h);
  const ConstVec bih(params_.data() + off_bih_, 4 * h);
  const ConstVec bhh(params_.data() + off_bhh_, 4 * h);
  const ConstMat wout(params_.data() + off_wout_, shape_.outputs, h);
  const ConstVec bout(params_.data() + off_bout_, shape_.outputs);

  Eigen::VectorXd hs = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(h);
  const std::size_t len = seq.size() / static_cast<std::size_t>(in);
  for (std::size_t t = 0; t < len; ++t) {
    const ConstVec x(seq.data() + t * static_cast<std::size_t>(in), in);
    const Eigen::VectorXd a = wih * x + bih + whh * hs + bhh;
    Step s;
    s.i = sigmoid(a.segment(0, h));
    s.f = sigmoid(a.segment(h, h));
    s.g = a.segment(2 * h, h).array().tanh().matrix();
    s.o = sigmoid(a.segment(3 * h, h));
    cs = s.f.cwiseProduct(cs) + s.i.cwiseProduct(s.g);
    s.tanh_c = cs.array().tanh().matrix();
    hs = s.o.cwiseProduct(s.tanh_c);
    if (steps != nullptr) {
      s.c = cs;
      s.h = hs;
      steps->push_back(std::move(s));
    }
  }
  return wout * hs + bout;
}

Eigen::VectorXd Lstm::forward(std::span<const double> seq) const { return run(seq, nullptr); }

double Lstm::backward(std::span<const double> seq, int label, LossKind loss,
                      std::span<double> grad, double scale) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("LSTM gradient has wrong length");
  const int h = shape_.hidden;
  const int in = shape_.inputs;
  std::vector<Step> steps;
  const Eigen::VectorXd logits = run(seq, &steps);
  const double value = loss_from_logits(logits, label, loss);
  const Eigen::VectorXd dlogits = scale * loss_grad_from_logits(logits, label, loss);

  const ConstMat whh(params_.data() + off_whh_, 4 * h, h);
  const ConstMat wout(params_.data() + off_wout_, shape_.outputs, h);
  MutMat gwih(grad.data() + off_wih_, 4 * h, in);
  MutMat gwhh(grad.data() + off_whh_, 4 * h, h);
  MutVec gbih(grad.data() + off_bih_, 4 * h);
  MutVec gbhh(grad.data() + off_bhh_, 4 * h);
  MutMat gwout(grad.data() + off_wout_, shape_.outputs, h);
  MutVec gbout(grad.data() + off_bout_, shape_.outputs);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h);
  const Eigen::VectorXd& h_last = steps.empty() ? zero : steps.back().h;
  gwout.noalias() += dlogits * h_last.transpose();
  gbout += dlogits;

  Eigen::VectorXd dh = wout.transpose() * dlogits;
  Eigen::VectorXd dc = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd da(4 * h);
  for (std::size_t t = steps.size(); t-- > 0;) {
    const Step& s = steps[t];
    const Eigen::VectorXd& c_prev = t > 0 ? steps[t - 1].c : zero;
    const Eigen::VectorXd& h_prev = t > 0 ? steps[t - 1].h : zero;
    const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_c);
    dc += dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
    const Eigen::VectorXd d_i = dc.cwiseProduct(s.g);
    const Eigen::VectorXd d_g = dc.cwiseProduct(s.i);
    const Eigen::VectorXd d_f = dc.cwiseProduct(c_prev);
    da.segment(0, h) = d_i.array() * s.i.array() * (1.0 - s.i.array());
    da.segment(h, h) = d_f.array() * s.f.array() * (1.0 - s.f.array());
    da.segment(2 * h, h) = d_g.array() * (1.0 - s.g.array().square());
    da.segment(3 * h, h) = d_o.array() * s.o.array() * (1.0 - s.o.array());
    const ConstVec x(seq.data() + t * static_cast<std::size_t>(in), in);
    gwih.noalias() += da * x.transpose();
    gwhh.noalias() += da * h_prev.transpose();
    gbih += da;
    gbhh += da;
    dh = whh.transpose() * da;
    dc = dc.cwiseProduct(s.f).eval();
  }
  return value;
}

std::size_t count_parameters(const Lstm& lstm) { return lstm.num_params(); }

}  // namespace vqrf
