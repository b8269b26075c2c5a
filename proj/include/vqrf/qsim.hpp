#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vqrf/field.hpp"

namespace vqrf {

class QsimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxQubits = 20;

/// Dense 2^N amplitude vector. Qubit 0 is the least significant index bit.
class StateVector {
 public:
  explicit StateVector(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<Complex> amplitudes() { return amps_; }
  std::span<const Complex> amplitudes() const { return amps_; }
  Complex& operator[](std::size_t i) { return amps_[i]; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;
  Complex inner(const StateVector& other) const;  // <this|other>
  StateVector& axpy(Complex alpha, const StateVector& x);  // this += alpha x

 private:
  int num_qubits_;
  std::vector<Complex> amps_;
};

StateVector zero_state(int num_qubits);

enum class GateKind { kRX, kRY, kRZ, kRZZ, kFixed1Q };

/// A gate instance. Rotations follow R_P(theta) = exp(-i theta P / 2) and
/// RZZ(theta) = exp(-i theta Z⊗Z / 2). `param` >= 0 binds the angle to a
/// circuit parameter slot.
struct GateOp {
  GateKind kind = GateKind::kRX;
  int target = 0;
  int target2 = -1;
  double angle = 0.0;
  Mat2 matrix{};
  int param = -1;

  static GateOp rx(int q, double a) { return {GateKind::kRX, q, -1, a, {}, -1}; }
  static GateOp ry(int q, double a) { return {GateKind::kRY, q, -1, a, {}, -1}; }
  static GateOp rz(int q, double a) { return {GateKind::kRZ, q, -1, a, {}, -1}; }
  static GateOp rzz(int q0, int q1, double a) { return {GateKind::kRZZ, q0, q1, a, {}, -1}; }
  static GateOp fixed(int q, const Mat2& m) { return {GateKind::kFixed1Q, q, -1, 0.0, m, -1}; }
  GateOp bound_to(int slot) const {
    GateOp g = *this;
    g.param = slot;
    return g;
  }
};

Mat2 rx_matrix(double angle);
Mat2 ry_matrix(double angle);
Mat2 rz_matrix(double angle);
Mat2 matmul(const Mat2& a, const Mat2& b);
Mat2 adjoint(const Mat2& m);

void apply_1q(StateVector& state, int qubit, const Mat2& m);
void apply_gate(StateVector& state, const GateOp& gate);
void apply_gate_inverse(StateVector& state, const GateOp& gate);

/// Applies the same 2x2 matrix to every qubit.
void apply_uniform_1q(StateVector& state, const Mat2& m);

double expectation_z(const StateVector& state, int qubit);

/// <Z_n> for every qubit n, in one pass.
std::vector<double> expectations_z(const StateVector& state);

/// Finite-shot estimate of every <Z_n>: `shots` computational-basis samples,
/// averaged per qubit.
std::vector<double> sample_expectations_z(const StateVector& state, std::size_t shots,
                                          std::mt19937_64& rng);

/// Multiplies the state by sum_n weights[n] Z_n (diagonal, not unitary).
void apply_weighted_z(StateVector& state, std::span<const double> weights);

/// A gate list over a fixed qubit count whose angles may be bound to a
/// parameter vector.
class Circuit {
 public:
  Circuit(int num_qubits, std::size_t num_params);

  int num_qubits() const { return num_qubits_; }
  std::size_t num_params() const { return num_params_; }
  const std::vector<GateOp>& gates() const { return gates_; }

  void add(const GateOp& gate);

  GateOp bind(const GateOp& gate, std::span<const double> params) const;
  void run(StateVector& state, std::span<const double> params) const;
  StateVector prepare(std::span<const double> params) const;

 private:
  int num_qubits_;
  std::size_t num_params_;
  std::vector<GateOp> gates_;
};

/// Maps the circuit's output state to a real number.
using StateFunctional = std::function<double(const StateVector&)>;

/// Parameter-shift gradient of f(circuit(params)|0>). Each bound gate is
/// shifted by +-pi/2 and the whole circuit re-executed; contributions of
/// gates sharing a slot are summed. Throws for a bound non-Pauli gate.
std::vector<double> parameter_shift_grad(const Circuit& circuit, std::span<const double> params,
                                         const StateFunctional& f);

/// Applies a Hermitian operator O to a state (out = O in).
using HermitianOperator = std::function<StateVector(const StateVector&)>;

struct AdjointResult {
  double value = 0.0;  // <psi|O|psi>
  std::vector<double> grad;
};

/// Gradient of <psi(params)|O|psi(params)> by one reverse sweep over the
/// gate list.
AdjointResult adjoint_grad(const Circuit& circuit, std::span<const double> params,
                           const HermitianOperator& observable);

}  // namespace vqrf
