#pragma once

#include <array>
#include <complex>
#include <span>
#include <stdexcept>

#include "vqrf/raytracer.hpp"

namespace vqrf {

class StateVector;

using Complex = std::complex<double>;

/// Row-major 2x2 complex matrix.
using Mat2 = std::array<Complex, 4>;

/// Rotating-frame coupling of the incident field to one probe qubit, in
/// units where hbar = 1.
struct FieldInteraction {
  Complex xi{0.0, 0.0};
  double omega = 0.0;      // Rabi frequency |xi|
  double phi = 0.0;        // Rabi phase arg(xi), 0 when xi == 0
  double detuning = 0.0;
  double t_int = 1.0;
};

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Angular carrier frequency 2*pi*f.
double angular_frequency(double carrier_frequency_hz);

/// Coherent sum over all paths of a * exp(-i omega tau).
Complex superpose(const PathSet& paths, double angular_freq);

FieldInteraction interaction_params(Complex xi, double t_int, double detuning = 0.0);

/// t_int = target_angle / median of the strictly positive Rabi frequencies.
double calibrate_time(std::span<const double> omegas, double target_angle);

/// Single-qubit evolution under the rotating-wave Hamiltonian
/// detuning/2 Z + omega/2 (cos(phi) X + sin(phi) Y) for time t_int.
///
/// On resonance this is Rz(phi) Rx(omega t) Rz(-phi); off resonance it is a
/// rotation about the tilted axis (omega cos phi, omega sin phi, detuning).
Mat2 interaction_unitary(const FieldInteraction& fi);

/// The general-axis rotation, used for any detuning. Agrees with
/// interaction_unitary at zero detuning.
Mat2 interaction_unitary_axis(const FieldInteraction& fi);

/// Applies the interaction unitary to every qubit.
void apply_field(StateVector& state, const FieldInteraction& fi);

}  // namespace vqrf
