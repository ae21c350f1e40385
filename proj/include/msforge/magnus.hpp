#pragma once

#include "msforge/chain_model.hpp"
#include "msforge/hilbert.hpp"
#include "msforge/pulse_synth.hpp"
#include "msforge/waveform.hpp"

#include <vector>

namespace msforge {

/// int_0^t Omega(s) e^{i delta s} ds
cplx alpha_of_t(const Waveform& w, double delta, double t);
/// d alpha / d delta at time t
cplx dalpha_ddelta(const Waveform& w, double delta, double t);
/// int_0^t alpha(s) ds
cplx alpha_time_integral(const Waveform& w, double delta, double t);
/// int_0^t alpha + i d alpha / d delta
cplx beta_of_t(const Waveform& w, double delta, double t);

/// Entangling angle for the pair, with every detuning shifted by -sym_shift.
double theta_of_t(const Waveform& w, const ModeSpectrum& modes, IonPair ions, double t, double sym_shift = 0.0);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::vector<cplx>> alpha; // [mode][sample]
  std::vector<std::vector<cplx>> beta;  // [mode][sample]
  std::vector<double> theta;
};

TrajectoryRecord sample_trajectory(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                   IonPair ions, int samples);

/// Qubit-side operators of the interaction Hamiltonian for the driven pair
/// (qubit 0 = ions.first, qubit 1 = ions.second).
struct DriveOperators {
  std::vector<QubitMatrix> coupling;   // S^P_m = sum_j eta_m b_j^m P_j
  std::vector<QubitMatrix> quadrature; // same with Q_j = [sigma_z, P_j] / 2i
  QubitMatrix sigma_z_sum;             // sum_j sigma_z^j
  QubitMatrix target;                  // P_1 P_2, sigma_x sigma_x at the default phase
};

DriveOperators drive_operators(const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions);

/// Single-qubit drive axis P for the spin phase.
QubitMatrix drive_axis(double spin_phase);

/// K with U(t) = exp(i K) at second order.
SpinBosonOperator magnus2_generator(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                    IonPair ions, const HilbertLayout& layout, double t);

struct MagnusPropagator {
  SpinBosonOperator generator;
  Eigen::MatrixXcd unitary;
  int fock_cutoff = 0;
  double tail_population = 0.0;
  bool truncation_warning = false;
};

MagnusPropagator magnus2_propagator(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                    IonPair ions, int fock_cutoff);

/// exp(i K) applied to state columns without forming the dense unitary.
void magnus2_apply(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                   const HilbertLayout& layout, Eigen::MatrixXcd& cols);

/// |Delta omega| / 3 * |sum_m eta_m^2 Im int int_{t2<t1} (3 t2 - t1) Omega Omega e^{i delta (t1 - t2)}|
double magnus3_diagnostic(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions);

/// Im of int int_{t2<t1} (tau - t1) Omega Omega e^{-i delta (t1 - t2)} and the
/// t2-weighted counterpart; equal for mirror-symmetric drives.
struct ThirdOrderPair {
  double weight_tau_minus_t1 = 0.0;
  double weight_t2 = 0.0;
};
ThirdOrderPair third_order_pair(const Waveform& w, double delta);

bool is_mirror_symmetric(const Waveform& w, double rel_tol = 1e-12);

} // namespace msforge
