#include "msforge/magnus.hpp"

#include "msforge/errors.hpp"

#include <cmath>

namespace msforge {

cplx alpha_of_t(const Waveform& w, double delta, double t) { return drive_moment(w.pieces(t), delta, 0); }

cplx dalpha_ddelta(const Waveform& w, double delta, double t) {
  return cplx(0.0, 1.0) * drive_moment(w.pieces(t), delta, 1);
}

cplx alpha_time_integral(const Waveform& w, double delta, double t) {
  const auto p = w.pieces(t);
  return t * drive_moment(p, delta, 0) - drive_moment(p, delta, 1);
}

cplx beta_of_t(const Waveform& w, double delta, double t) {
  const auto p = w.pieces(t);
  return t * drive_moment(p, delta, 0) - 2.0 * drive_moment(p, delta, 1);
}

double theta_of_t(const Waveform& w, const ModeSpectrum& modes, IonPair ions, double t, double sym_shift) {
  const auto p = w.pieces(t);
  const auto deltas = modes.detunings(w.drive_detuning);
  double theta = 0.0;
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double eta = modes.lamb_dicke[static_cast<std::size_t>(m)];
    const double weight = eta * eta * modes.couplings(ions.first, m) * modes.couplings(ions.second, m);
    if (weight == 0.0) continue;
    theta += 0.5 * weight * ordered_pair_integral(p, deltas[static_cast<std::size_t>(m)] - sym_shift).imag();
  }
  return theta;
}

TrajectoryRecord sample_trajectory(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                   IonPair ions, int samples) {
  if (samples < 2) throw PreconditionError("trajectory needs at least two samples");
  TrajectoryRecord r;
  const auto deltas = modes.detunings(w.drive_detuning);
  const int nm = modes.mode_count();
  r.alpha.assign(static_cast<std::size_t>(nm), {});
  r.beta.assign(static_cast<std::size_t>(nm), {});
  for (int i = 0; i < samples; ++i) {
    const double t = w.gate_time * i / (samples - 1);
    r.times.push_back(t);
    for (int m = 0; m < nm; ++m) {
      const double d = deltas[static_cast<std::size_t>(m)] - noise.sym_shift;
      r.alpha[static_cast<std::size_t>(m)].push_back(alpha_of_t(w, d, t));
      r.beta[static_cast<std::size_t>(m)].push_back(beta_of_t(w, d, t));
    }
    r.theta.push_back(theta_of_t(w, modes, ions, t, noise.sym_shift));
  }
  return r;
}

QubitMatrix drive_axis(double spin_phase) {
  return -std::sin(spin_phase) * pauli::x() + std::cos(spin_phase) * pauli::y();
}

DriveOperators drive_operators(const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions) {
  const QubitMatrix p = drive_axis(noise.spin_phase);
  const QubitMatrix q = -std::sin(noise.spin_phase) * pauli::y() - std::cos(noise.spin_phase) * pauli::x();
  const QubitMatrix p0 = pauli::embed(p, 0, 2);
  const QubitMatrix p1 = pauli::embed(p, 1, 2);
  const QubitMatrix q0 = pauli::embed(q, 0, 2);
  const QubitMatrix q1 = pauli::embed(q, 1, 2);
  DriveOperators ops;
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double eta = modes.lamb_dicke[static_cast<std::size_t>(m)];
    const double b0 = modes.couplings(ions.first, m);
    const double b1 = modes.couplings(ions.second, m);
    ops.coupling.push_back(eta * (b0 * p0 + b1 * p1));
    ops.quadrature.push_back(eta * (b0 * q0 + b1 * q1));
  }
  ops.sigma_z_sum = pauli::embed(pauli::z(), 0, 2) + pauli::embed(pauli::z(), 1, 2);
  ops.target = p0 * p1;
  return ops;
}

SpinBosonOperator magnus2_generator(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                    IonPair ions, const HilbertLayout& layout, double t) {
  if (layout.qubit_count() != 2 || layout.mode_count() != modes.mode_count()) {
    throw PreconditionError("layout does not match the driven pair and mode count");
  }
  const DriveOperators ops = drive_operators(modes, noise, ions);
  const auto deltas = modes.detunings(w.drive_detuning);
  const double dw = noise.asym_shift;
  const cplx motional = std::polar(1.0, -noise.motional_phase);

  SpinBosonOperator k(layout);
  k.add_spin(theta_of_t(w, modes, ions, t, noise.sym_shift) * ops.target - (0.5 * t * dw) * ops.sigma_z_sum);
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double d = deltas[static_cast<std::size_t>(m)] - noise.sym_shift;
    const cplx alpha = motional * alpha_of_t(w, d, t);
    k.add_ladder(-ops.coupling[static_cast<std::size_t>(m)], m, 0.5 * alpha);
    if (dw != 0.0) {
      const cplx beta = motional * beta_of_t(w, d, t);
      k.add_ladder(-ops.quadrature[static_cast<std::size_t>(m)], m, 0.25 * dw * beta);
    }
  }
  return k;
}

MagnusPropagator magnus2_propagator(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                    IonPair ions, int fock_cutoff) {
  const HilbertLayout layout(2, modes.mode_count(), fock_cutoff);
  MagnusPropagator out{magnus2_generator(w, modes, noise, ions, layout, w.gate_time), {}, fock_cutoff, 0.0, false};
  Eigen::MatrixXcd kd = out.generator.to_dense();
  kd = 0.5 * (kd + kd.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kd);
  const Eigen::VectorXcd phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp();
  out.unitary = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

  Eigen::MatrixXcd vac = layout.vacuum_columns();
  Eigen::MatrixXcd evolved = out.unitary * vac;
  out.tail_population = truncation_tail(layout, evolved);
  out.truncation_warning = out.tail_population > 1e-8;
  return out;
}

void magnus2_apply(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                   const HilbertLayout& layout, Eigen::MatrixXcd& cols) {
  const SpinBosonOperator k = magnus2_generator(w, modes, noise, ions, layout, w.gate_time);
  apply_exponential(k, cplx(0.0, 1.0), cols);
}

bool is_mirror_symmetric(const Waveform& w, double rel_tol) {
  const int n = w.segment_count();
  const double scale = std::max(w.peak_rabi(), 1e-300);
  for (int i = 0; i < n / 2; ++i) {
    if (std::abs(w.segment_amplitudes[static_cast<std::size_t>(i)] -
                 w.segment_amplitudes[static_cast<std::size_t>(n - 1 - i)]) > rel_tol * scale) {
      return false;
    }
  }
  return true;
}

double magnus3_diagnostic(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions) {
  (void)ions;
  if (!is_mirror_symmetric(w)) throw PreconditionError("third-order diagnostic requires a mirror-symmetric waveform");
  const auto p = w.pieces();
  const auto deltas = modes.detunings(w.drive_detuning);
  double sum = 0.0;
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double eta = modes.lamb_dicke[static_cast<std::size_t>(m)];
    const double d = deltas[static_cast<std::size_t>(m)] - noise.sym_shift;
    sum += eta * eta * ordered_pair_integral(p, d, {0.0, -1.0, 3.0}).imag();
  }
  return std::abs(noise.asym_shift) / 3.0 * std::abs(sum);
}

ThirdOrderPair third_order_pair(const Waveform& w, double delta) {
  const auto p = w.pieces();
  // conj flips e^{i delta (t1 - t2)} to e^{-i delta (t1 - t2)}; the drive is real.
  ThirdOrderPair r;
  r.weight_tau_minus_t1 = -ordered_pair_integral(p, delta, {w.gate_time, -1.0, 0.0}).imag();
  r.weight_t2 = -ordered_pair_integral(p, delta, {0.0, 0.0, 1.0}).imag();
  return r;
}

} // namespace msforge
