#include "vqrf/qsim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vqrf {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.num_qubits()) {
    throw QsimError("qubit index " + std::to_string(q) + " out of range");
  }
}

// Multiplies basis state i by phase(bit) for the diagonal gates.
void apply_diag_1q(StateVector& s, int q, Complex d0, Complex d1) {
  const std::size_t mask = std::size_t{1} << q;
  auto amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= (i & mask) ? d1 : d0;
}

void apply_zz_phase(StateVector& s, int q0, int q1, Complex same, Complex differ) {
  const std::size_t m0 = std::size_t{1} << q0;
  const std::size_t m1 = std::size_t{1} << q1;
  auto amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const bool b0 = (i & m0) != 0;
    const bool b1 = (i & m1) != 0;
    amps[i] *= (b0 == b1) ? same : differ;
  }
}

void check_gate(const StateVector& s, const GateOp& g) {
  check_qubit(s, g.target);
  if (g.kind == GateKind::kRZZ) {
    check_qubit(s, g.target2);
    if (g.target2 == g.target) throw QsimError("RZZ needs two distinct qubits");
  }
}

// out = P in, P the Pauli word generating the gate.
StateVector apply_generator(const GateOp& g, const StateVector& in) {
  StateVector out = in;
  switch (g.kind) {
    case GateKind::kRX:
      apply_1q(out, g.target, Mat2{0, 1, 1, 0});
      break;
    case GateKind::kRY:
      apply_1q(out, g.target, Mat2{0, -kI, kI, 0});
      break;
    case GateKind::kRZ:
      apply_diag_1q(out, g.target, 1.0, -1.0);
      break;
    case GateKind::kRZZ:
      apply_zz_phase(out, g.target, g.target2, 1.0, -1.0);
      break;
    case GateKind::kFixed1Q:
      throw QsimError("fixed gates have no generator");
  }
  return out;
}

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw QsimError("qubit count must lie in [1, " + std::to_string(kMaxQubits) + "]");
  }
  amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

double StateVector::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amps_) n += std::norm(a);
  return n;
}

Complex StateVector::inner(const StateVector& other) const {
  if (other.dim() != dim()) throw QsimError("inner product of mismatched states");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) acc += std::conj(amps_[i]) * other.amps_[i];
  return acc;
}

StateVector& StateVector::axpy(Complex alpha, const StateVector& x) {
  if (x.dim() != dim()) throw QsimError("axpy of mismatched states");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += alpha * x.amps_[i];
  return *this;
}

StateVector zero_state(int num_qubits) { return StateVector(num_qubits); }

Mat2 rx_matrix(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {c, -kI * s, -kI * s, c};
}

Mat2 ry_matrix(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {c, -s, s, c};
}

Mat2 rz_matrix(double angle) {
  return {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)};
}

Mat2 matmul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 adjoint(const Mat2& m) {
  return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

void apply_1q(StateVector& state, int qubit, const Mat2& m) {
  check_qubit(state, qubit);
  const std::size_t stride = std::size_t{1} << qubit;
  auto amps = state.amplitudes();
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = amps[i];
      const Complex a1 = amps[i + stride];
      amps[i] = m[0] * a0 + m[1] * a1;
      amps[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_gate(StateVector& state, const GateOp& gate) {
  check_gate(state, gate);
  switch (gate.kind) {
    case GateKind::kRX:
      apply_1q(state, gate.target, rx_matrix(gate.angle));
      break;
    case GateKind::kRY:
      apply_1q(state, gate.target, ry_matrix(gate.angle));
      break;
    case GateKind::kRZ:
      apply_diag_1q(state, gate.target, std::polar(1.0, -gate.angle / 2),
                    std::polar(1.0, gate.angle / 2));
      break;
    case GateKind::kRZZ:
      apply_zz_phase(state, gate.target, gate.target2, std::polar(1.0, -gate.angle / 2),
                     std::polar(1.0, gate.angle / 2));
      break;
    case GateKind::kFixed1Q:
      apply_1q(state, gate.target, gate.matrix);
      break;
  }
}

void apply_gate_inverse(StateVector& state, const GateOp& gate) {
  if (gate.kind == GateKind::kFixed1Q) {
    check_gate(state, gate);
    apply_1q(state, gate.target, adjoint(gate.matrix));
    return;
  }
  GateOp inv = gate;
  inv.angle = -gate.angle;
  apply_gate(state, inv);
}

void apply_uniform_1q(StateVector& state, const Mat2& m) {
  for (int q = 0; q < state.num_qubits(); ++q) apply_1q(state, q, m);
}

double expectation_z(const StateVector& state, int qubit) {
  check_qubit(state, qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  double acc = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    acc += (i & mask) ? -p : p;
  }
  return acc;
}

std::vector<double> expectations_z(const StateVector& state) {
  const int n = state.num_qubits();
  std::vector<double> z(n, 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    for (int q = 0; q < n; ++q) z[q] += ((i >> q) & 1) ? -p : p;
  }
  return z;
}

std::vector<double> sample_expectations_z(const StateVector& state, std::size_t shots,
                                          std::mt19937_64& rng) {
  if (shots == 0) throw QsimError("shot count must be positive");
  const auto amps = state.amplitudes();
  std::vector<double> probs(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) probs[i] = std::norm(amps[i]);
  std::discrete_distribution<std::size_t> basis(probs.begin(), probs.end());
  const int n = state.num_qubits();
  std::vector<double> z(n, 0.0);
  for (std::size_t s = 0; s < shots; ++s) {
    const std::size_t i = basis(rng);
    for (int q = 0; q < n; ++q) z[q] += ((i >> q) & 1) ? -1.0 : 1.0;
  }
  for (auto& v : z) v /= static_cast<double>(shots);
  return z;
}

void apply_weighted_z(StateVector& state, std::span<const double> weights) {
  const int n = state.num_qubits();
  if (static_cast<int>(weights.size()) != n) throw QsimError("weight count must equal qubit count");
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    double d = 0.0;
    for (int q = 0; q < n; ++q) d += ((i >> q) & 1) ? -weights[q] : weights[q];
    amps[i] *= d;
  }
}

Circuit::Circuit(int num_qubits, std::size_t num_params)
    : num_qubits_(num_qubits), num_params_(num_params) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) throw QsimError("qubit count out of range");
}

void Circuit::add(const GateOp& gate) {
  const bool two = gate.kind == GateKind::kRZZ;
  if (gate.target < 0 || gate.target >= num_qubits_ ||
      (two && (gate.target2 < 0 || gate.target2 >= num_qubits_ || gate.target2 == gate.target))) {
    throw QsimError("invalid gate targets");
  }
  if (gate.param >= static_cast<int>(num_params_)) throw QsimError("parameter slot out of range");
  gates_.push_back(gate);
}

GateOp Circuit::bind(const GateOp& gate, std::span<const double> params) const {
  GateOp g = gate;
  if (g.param >= 0) g.angle = params[static_cast<std::size_t>(g.param)];
  return g;
}

void Circuit::run(StateVector& state, std::span<const double> params) const {
  if (params.size() != num_params_) throw QsimError("parameter vector has wrong length");
  if (state.num_qubits() != num_qubits_) throw QsimError("state has wrong qubit count");
  for (const auto& g : gates_) apply_gate(state, bind(g, params));
}

StateVector Circuit::prepare(std::span<const double> params) const {
  StateVector s = zero_state(num_qubits_);
  run(s, params);
  return s;
}

std::vector<double> parameter_shift_grad(const Circuit& circuit, std::span<const double> params,
                                         const StateFunctional& f) {
  if (params.size() != circuit.num_params()) throw QsimError("parameter vector has wrong length");
  std::vector<double> grad(params.size(), 0.0);
  const auto& gates = circuit.gates();
  auto evaluate = [&](std::size_t shifted, double shift) {
    StateVector s = zero_state(circuit.num_qubits());
    for (std::size_t j = 0; j < gates.size(); ++j) {
      GateOp g = circuit.bind(gates[j], params);
      if (j == shifted) g.angle += shift;
      apply_gate(s, g);
    }
    return f(s);
  };
  for (std::size_t j = 0; j < gates.size(); ++j) {
    const GateOp& g = gates[j];
    if (g.param < 0) continue;
    if (g.kind == GateKind::kFixed1Q) {
      throw QsimError("parameter shift unsupported for non-Pauli gate");
    }
    constexpr double kShift = std::numbers::pi / 2;
    grad[static_cast<std::size_t>(g.param)] +=
        0.5 * (evaluate(j, kShift) - evaluate(j, -kShift));
  }
  return grad;
}

AdjointResult adjoint_grad(const Circuit& circuit, std::span<const double> params,
                           const HermitianOperator& observable) {
  StateVector phi = circuit.prepare(params);
  StateVector lam = observable(phi);
  AdjointResult result;
  result.value = phi.inner(lam).real();
  result.grad.assign(params.size(), 0.0);
  const auto& gates = circuit.gates();
  for (std::size_t j = gates.size(); j-- > 0;) {
    const GateOp g = circuit.bind(gates[j], params);
    if (g.param >= 0) {
      if (g.kind == GateKind::kFixed1Q) throw QsimError("adjoint gradient needs Pauli rotations");
      result.grad[static_cast<std::size_t>(g.param)] += lam.inner(apply_generator(g, phi)).imag();
    }
    apply_gate_inverse(phi, g);
    apply_gate_inverse(lam, g);
  }
  return result;
}

}  // namespace vqrf
