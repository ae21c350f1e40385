#include "msforge/dynamics.hpp"

#include "msforge/errors.hpp"
#include "msforge/magnus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msforge {

double default_dt_max(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise) {
  double fastest = std::max(std::abs(noise.asym_shift), w.peak_rabi());
  for (double d : modes.detunings(w.drive_detuning)) fastest = std::max(fastest, std::abs(d - noise.sym_shift));
  if (fastest == 0.0) return w.gate_time;
  return 2.0 * std::numbers::pi / (50.0 * fastest);
}

namespace {

void check_layout(const ModeSpectrum& modes, const HilbertLayout& layout) {
  if (layout.qubit_count() != 2 || layout.mode_count() != modes.mode_count()) {
    throw PreconditionError("layout does not match the driven pair and mode count");
  }
}

// Precomputed pieces shared by every step of one propagation.
struct StepContext {
  DriveOperators ops;
  std::vector<double> deltas;
  cplx motional;
  QubitMatrix z_term;
};

StepContext make_context(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions) {
  StepContext c{drive_operators(modes, noise, ions), modes.detunings(w.drive_detuning),
                std::polar(1.0, -noise.motional_phase), {}};
  for (double& d : c.deltas) d -= noise.sym_shift;
  c.z_term = (0.5 * noise.asym_shift) * c.ops.sigma_z_sum;
  return c;
}

SpinBosonOperator hamiltonian_at(const StepContext& c, const HilbertLayout& layout, double rabi, double t) {
  SpinBosonOperator h(layout);
  h.add_spin(c.z_term);
  for (std::size_t m = 0; m < c.deltas.size(); ++m) {
    h.add_ladder(c.ops.coupling[m], static_cast<int>(m), 0.5 * rabi * c.motional * std::polar(1.0, c.deltas[m] * t));
  }
  return h;
}

void rotate_frame(const StepContext& c, const HilbertLayout& layout, double t, Eigen::MatrixXcd& cols) {
  const Eigen::Index np = layout.phonon_dim();
  std::vector<cplx> phase(static_cast<std::size_t>(np));
  for (Eigen::Index p = 0; p < np; ++p) {
    double angle = 0.0;
    for (int m = 0; m < layout.mode_count(); ++m) angle += c.deltas[static_cast<std::size_t>(m)] * layout.occupation(p, m);
    phase[static_cast<std::size_t>(p)] = std::polar(1.0, angle * t);
  }
  for (Eigen::Index col = 0; col < cols.cols(); ++col)
    for (Eigen::Index i = 0; i < cols.rows(); ++i) cols(i, col) *= phase[static_cast<std::size_t>(i % np)];
}

void run_midpoint(const StepContext& c, const Waveform& w, const HilbertLayout& layout, double dt,
                  Eigen::MatrixXcd& cols) {
  for (const Piece& p : w.pieces()) {
    const double len = p.end - p.start;
    const int n = std::max(1, static_cast<int>(std::ceil(len / dt - 1e-9)));
    const double h = len / n;
    for (int k = 0; k < n; ++k) {
      const double t = p.start + (k + 0.5) * h;
      apply_exponential(hamiltonian_at(c, layout, p.amplitude, t), cplx(0.0, -h), cols);
    }
  }
}

void run_segment(const StepContext& c, const Waveform& w, const HilbertLayout& layout, Eigen::MatrixXcd& cols) {
  for (const Piece& p : w.pieces()) {
    SpinBosonOperator hf = hamiltonian_at(c, layout, p.amplitude, 0.0);
    for (std::size_t m = 0; m < c.deltas.size(); ++m) hf.add_number(static_cast<int>(m), c.deltas[m]);
    rotate_frame(c, layout, -p.start, cols);
    apply_exponential(hf, cplx(0.0, -(p.end - p.start)), cols);
    rotate_frame(c, layout, p.end, cols);
  }
}

} // namespace

SpinBosonOperator interaction_hamiltonian(const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                                          const HilbertLayout& layout, const Waveform& w, double rabi, double t) {
  check_layout(modes, layout);
  return hamiltonian_at(make_context(w, modes, noise, ions), layout, rabi, t);
}

PropagationStats propagate_columns(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise,
                                   IonPair ions, const HilbertLayout& layout, Eigen::MatrixXcd& cols,
                                   const ExactOptions& options) {
  check_layout(modes, layout);
  if (cols.rows() != layout.dimension()) throw PreconditionError("state columns do not match the layout dimension");
  const StepContext c = make_context(w, modes, noise, ions);
  PropagationStats stats;

  if (options.stepper == Stepper::segment) {
    run_segment(c, w, layout, cols);
    return stats;
  }

  double dt = options.dt_max > 0.0 ? options.dt_max : default_dt_max(w, modes, noise);
  if (!(dt > 0.0)) throw PreconditionError("dt_max must be positive");
  Eigen::MatrixXcd coarse = cols;
  run_midpoint(c, w, layout, dt, coarse);
  stats.dt = dt;
  if (!options.check_convergence) {
    cols = std::move(coarse);
    return stats;
  }
  for (int h = 1; h <= options.max_halvings; ++h) {
    dt *= 0.5;
    Eigen::MatrixXcd fine = cols;
    run_midpoint(c, w, layout, dt, fine);
    stats.last_change = (fine - coarse).cwiseAbs().maxCoeff();
    stats.dt = dt;
    stats.halvings = h;
    coarse = std::move(fine);
    if (stats.last_change <= options.tolerance) {
      cols = std::move(coarse);
      return stats;
    }
  }
  std::ostringstream os;
  os << "midpoint stepping did not converge after " << options.max_halvings << " halvings (dt = " << dt
     << " s, last change " << stats.last_change << ")";
  throw ConvergenceError(os.str());
}

Eigen::MatrixXcd exact_propagate(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                                 const HilbertLayout& layout, const ExactOptions& options, PropagationStats* stats) {
  if (layout.dimension() > 1024) {
    throw PreconditionError("full propagator limited to dimension 1024; propagate state columns instead");
  }
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(layout.dimension(), layout.dimension());
  const PropagationStats s = propagate_columns(w, modes, noise, ions, layout, u, options);
  if (stats) *stats = s;
  return u;
}

Eigen::Matrix2cd single_qubit_evolution(const SingleQubitDrive& d) {
  if (d.rabi < 0.0) throw PreconditionError("single-qubit Rabi frequency must be non-negative");
  const double hx = 0.5 * d.rabi;
  const double hz = d.z_error;
  const double r = std::hypot(hx, hz);
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (r == 0.0) return u;
  const double c = std::cos(r * d.duration);
  const double s = std::sin(r * d.duration);
  const cplx i(0.0, 1.0);
  u(0, 0) = c - i * s * (hz / r);
  u(1, 1) = c + i * s * (hz / r);
  u(0, 1) = -i * s * (hx / r);
  u(1, 0) = -i * s * (hx / r);
  return u;
}

QubitMatrix naive_pi_gate(double rabi, double z_error) {
  if (!(rabi > 0.0)) throw PreconditionError("pi pulse needs a positive Rabi frequency");
  const QubitMatrix u = single_qubit_evolution({rabi, z_error, std::numbers::pi / rabi});
  return pauli::kron(u, u);
}

Eigen::Matrix2cd supcode_x(double rabi, double z_error) {
  if (!(rabi > 0.0)) throw PreconditionError("composite pulse needs a positive Rabi frequency");
  const double t = std::numbers::pi / rabi;
  const Eigen::Matrix2cd outer = single_qubit_evolution({rabi, z_error, t});
  const Eigen::Matrix2cd inner = single_qubit_evolution({0.5 * rabi, z_error, 2.0 * t});
  return outer * inner * outer;
}

double raman_asymmetric_shift(const RamanConfig& cfg) {
  if (cfg.detuning_1 == 0.0 || cfg.detuning_3 == 0.0) throw ConfigError("Raman detunings must be non-zero");
  const double lhs = cfg.rabi_1 * cfg.rabi_2 / cfg.detuning_1;
  const double rhs = cfg.rabi_1 * cfg.rabi_3 / cfg.detuning_3;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (scale > 0.0 && std::abs(lhs - rhs) > 1e-6 * scale) {
    std::ostringstream os;
    os << "phase-insensitive matching condition violated: " << lhs << " vs " << rhs;
    throw ConfigError(os.str());
  }
  const double e0 = cfg.rabi_1 * cfg.rabi_1 / (4.0 * cfg.detuning_1) + cfg.rabi_3 * cfg.rabi_3 / (4.0 * cfg.detuning_3);
  const double e1 = cfg.rabi_2 * cfg.rabi_2 / (4.0 * cfg.detuning_1) + cfg.rabi_1 * cfg.rabi_1 / (4.0 * cfg.detuning_3);
  return cfg.laser_shift + 0.5 * (e1 - e0);
}

bool raman_adiabatic(const RamanConfig& cfg, double ratio) {
  const double rabi = std::max({std::abs(cfg.rabi_1), std::abs(cfg.rabi_2), std::abs(cfg.rabi_3)});
  return std::min(std::abs(cfg.detuning_1), std::abs(cfg.detuning_3)) >= ratio * rabi;
}

} // namespace msforge
