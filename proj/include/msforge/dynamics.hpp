#pragma once

#include "msforge/chain_model.hpp"
#include "msforge/hilbert.hpp"
#include "msforge/pulse_synth.hpp"
#include "msforge/waveform.hpp"

namespace msforge {

enum class Stepper {
  midpoint, // exponential of H at the step midpoint
  segment,  // exact per-segment exponential in the frame rotating with the modes
};

struct ExactOptions {
  double dt_max = 0.0;     // 0 selects the default step
  double tolerance = 1e-8; // max column change accepted between successive halvings
  int max_halvings = 6;
  Stepper stepper = Stepper::segment;
  bool check_convergence = true;
};

struct PropagationStats {
  double dt = 0.0;
  int halvings = 0;
  double last_change = 0.0;
};

/// 2 pi / (50 max(|delta_m|, |Delta omega|, peak Omega))
double default_dt_max(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise);

/// H(t) = (dw/2) sum sigma_z + (Omega/2) sum_m S_m (a_m^dag e^{i(delta'_m t - phi_m)} + h.c.)
SpinBosonOperator interaction_hamiltonian(const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                                          const HilbertLayout& layout, const Waveform& w, double rabi, double t);

/// Time-ordered evolution of the state columns through the whole waveform.
PropagationStats propagate_columns(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                   IonPair ions, const HilbertLayout& layout, Eigen::MatrixXcd& cols,
                                   const ExactOptions& options = {});

/// Full propagator; only for dimension <= 1024.
Eigen::MatrixXcd exact_propagate(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                                 const HilbertLayout& layout, const ExactOptions& options = {},
                                 PropagationStats* stats = nullptr);

struct SingleQubitDrive {
  double rabi = 0.0;     // rad/s
  double z_error = 0.0;  // rad/s
  double duration = 0.0; // s
};

/// exp(-i (Omega/2 sigma_x + dw sigma_z) t)
Eigen::Matrix2cd single_qubit_evolution(const SingleQubitDrive& d);

/// pi pulse of duration pi / Omega on each ion, as a 4x4 two-qubit operator.
QubitMatrix naive_pi_gate(double rabi, double z_error);

/// Three-piece composite x rotation: (Omega, t) (Omega/2, 2t) (Omega, t), t = pi / Omega.
Eigen::Matrix2cd supcode_x(double rabi, double z_error);

struct RamanConfig {
  double rabi_1 = 0.0;
  double rabi_2 = 0.0;
  double rabi_3 = 0.0;
  double detuning_1 = 0.0;
  double detuning_3 = 0.0;
  double laser_shift = 0.0;
};

/// lambda_l + (E1 - E0) / 2 from the four Stark terms.
double raman_asymmetric_shift(const RamanConfig& cfg);

/// True when every detuning exceeds every Rabi frequency by the given ratio.
bool raman_adiabatic(const RamanConfig& cfg, double ratio = 100.0);

} // namespace msforge
