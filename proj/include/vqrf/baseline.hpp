#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vqrf/model.hpp"
#include "vqrf/raytracer.hpp"

namespace vqrf {

/// Per-path phases arg(a exp(-i omega tau)) in (-pi, pi], ordered by delay,
/// then transmitter, then reflection count.
using PhaseSequence = std::vector<double>;

PhaseSequence phase_sequence(const PathSet& paths, double angular_freq);

struct LstmShape {
  int inputs = 1;
  int hidden = 64;
  int outputs = 2;

  /// 4(h*i + h*h + 2h) + (h*o + o): both gate bias vectors are counted.
  std::size_t num_params() const;
};

/// Single-layer LSTM (gate order i, f, g, o) feeding a dense readout on the
/// final hidden state. Flat layout: W_ih, W_hh, b_ih, b_hh, W_out, b_out
/// (weights row-major).
class Lstm {
 public:
  explicit Lstm(LstmShape shape = {});

  const LstmShape& shape() const { return shape_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  /// U(-1/sqrt(h), 1/sqrt(h)) for every parameter.
  void init_uniform(Rng& rng);

  Eigen::VectorXd forward(std::span<const double> seq) const;

  /// Loss for one sequence; accumulates scale * dL/dparams into grad.
  double backward(std::span<const double> seq, int label, LossKind loss, std::span<double> grad,
                  double scale = 1.0) const;

 private:
  struct Step {
    Eigen::VectorXd i, f, g, o, c, h, tanh_c;
  };
  Eigen::VectorXd run(std::span<const double> seq, std::vector<Step>* steps) const;

  LstmShape shape_;
  std::size_t off_wih_ = 0, off_whh_ = 0, off_bih_ = 0, off_bhh_ = 0, off_wout_ = 0, off_bout_ = 0;
  std::vector<double> params_;
};

/// Exact trainable scalar count.
std::size_t count_parameters(const Lstm& lstm);

}  // namespace vqrf
