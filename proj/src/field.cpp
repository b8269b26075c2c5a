#include "vqrf/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "vqrf/qsim.hpp"

namespace vqrf {

double angular_frequency(double carrier_frequency_hz) {
  return 2.0 * std::numbers::pi * carrier_frequency_hz;
}

Complex superpose(const PathSet& paths, double angular_freq) {
  if (!(angular_freq > 0.0)) throw FieldError("angular frequency must be positive");
  Complex xi{0.0, 0.0};
  for (const auto& p : paths.paths) xi += p.gain * std::polar(1.0, -angular_freq * p.delay_s);
  return xi;
}

FieldInteraction interaction_params(Complex xi, double t_int, double detuning) {
  if (!(t_int > 0.0)) throw FieldError("interaction time must be positive");
  FieldInteraction fi;
  fi.xi = xi;
  fi.omega = std::abs(xi);
  // std::arg lands in [-pi, pi]; fold -pi onto pi.
  fi.phi = fi.omega > 0.0 ? std::arg(xi) : 0.0;
  if (fi.phi == -std::numbers::pi) fi.phi = std::numbers::pi;
  fi.detuning = detuning;
  fi.t_int = t_int;
  return fi;
}

double calibrate_time(std::span<const double> omegas, double target_angle) {
  if (!(target_angle > 0.0)) throw FieldError("target angle must be positive");
  std::vector<double> positive;
  positive.reserve(omegas.size());
  for (double w : omegas) {
    if (w > 0.0) positive.push_back(w);
  }
  if (positive.empty()) throw FieldError("degenerate field: no positive Rabi frequency");
  std::sort(positive.begin(), positive.end());
  const std::size_t n = positive.size();
  const double median =
      n % 2 == 1 ? positive[n / 2] : 0.5 * (positive[n / 2 - 1] + positive[n / 2]);
  return target_angle / median;
}

Mat2 interaction_unitary(const FieldInteraction& fi) {
  if (fi.detuning != 0.0) return interaction_unitary_axis(fi);
  return matmul(rz_matrix(fi.phi), matmul(rx_matrix(fi.omega * fi.t_int), rz_matrix(-fi.phi)));
}

Mat2 interaction_unitary_axis(const FieldInteraction& fi) {
  const double rate = std::hypot(fi.omega, fi.detuning);
  if (rate == 0.0) return {1.0, 0.0, 0.0, 1.0};
  const double nx = fi.omega * std::cos(fi.phi) / rate;
  const double ny = fi.omega * std::sin(fi.phi) / rate;
  const double nz = fi.detuning / rate;
  const double half = 0.5 * rate * fi.t_int;
  const double c = std::cos(half), s = std::sin(half);
  const Complex i{0.0, 1.0};
  // cos(a/2) I - i sin(a/2) (n . sigma)
  return {Complex{c, -s * nz}, -i * s * Complex{nx, -ny}, -i * s * Complex{nx, ny},
          Complex{c, s * nz}};
}

void apply_field(StateVector& state, const FieldInteraction& fi) {
  if (fi.omega == 0.0 && fi.detuning == 0.0) return;
  apply_uniform_1q(state, interaction_unitary(fi));
}

}  // namespace vqrf
