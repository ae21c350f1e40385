#include "msforge/pulse_synth.hpp"

#include "msforge/errors.hpp"
#include "msforge/magnus.hpp"

#include <cmath>
#include <sstream>

namespace msforge {

namespace {

void check_pair(const ModeSpectrum& modes, IonPair ions) {
  const int n = modes.ion_count();
  if (ions.first < 0 || ions.second < 0 || ions.first >= n || ions.second >= n || ions.first == ions.second) {
    throw PreconditionError("ion pair must be two distinct valid ion indices");
  }
}

} // namespace

Eigen::MatrixXd angle_matrix(const ModeSpectrum& modes, double gate_time, std::span<const double> detunings,
                             int n_seg, IonPair ions) {
  const double h = gate_time / n_seg;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_seg, n_seg);
  for (int mode = 0; mode < modes.mode_count(); ++mode) {
    const double eta = modes.lamb_dicke[mode];
    const double weight = eta * eta * modes.couplings(ions.first, mode) * modes.couplings(ions.second, mode);
    if (weight == 0.0) continue;
    const double delta = detunings[mode];
    std::vector<cplx> e0(static_cast<std::size_t>(n_seg));
    for (int i = 0; i < n_seg; ++i) e0[i] = segment_moment(0, i * h, (i + 1) * h, delta);
    // G(i, j) = int_{t2 < t1} f_i(t1) f_j(t2) sin(delta (t1 - t2))
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_seg, n_seg);
    const Piece unit{0.0, h, 1.0};
    const double diag = ordered_pair_integral(std::span(&unit, 1), delta).imag();
    for (int i = 0; i < n_seg; ++i) {
      g(i, i) = diag;
      for (int j = 0; j < i; ++j) g(i, j) = (e0[i] * std::conj(e0[j])).imag();
    }
    m += 0.25 * weight * (g + g.transpose());
  }
  return m;
}

SynthesisProblem build_problem(const ModeSpectrum& modes, double gate_time, double drive_detuning, int n_seg,
                               bool robust, IonPair ions) {
  check_pair(modes, ions);
  if (!(gate_time > 0.0)) throw PreconditionError("gate time must be positive");
  if (n_seg < 1) throw PreconditionError("segment count must be positive");
  if (robust && n_seg % 2 != 0) throw PreconditionError("robust synthesis needs an even segment count");

  const int n_modes = modes.mode_count();
  const int n_vars = robust ? n_seg / 2 : n_seg;
  const int rows = 2 * n_modes;
  if (n_vars - rows < 1) {
    const int min_seg = robust ? 2 * (rows + 1) : rows + 1;
    std::ostringstream os;
    os << "no free waveform dimension: " << n_vars << " variables against " << rows
       << " real constraints; use at least N_seg = " << min_seg;
    throw SynthesisError(os.str());
  }

  SynthesisProblem p;
  p.gate_time = gate_time;
  p.drive_detuning = drive_detuning;
  p.detunings = modes.detunings(drive_detuning);
  p.robust = robust;

  p.expansion = Eigen::MatrixXd::Zero(n_seg, n_vars);
  for (int k = 0; k < n_vars; ++k) {
    p.expansion(k, k) = 1.0;
    if (robust) p.expansion(n_seg - 1 - k, k) = 1.0;
  }

  const double h = gate_time / n_seg;
  Eigen::MatrixXd a_full(rows, n_seg);
  for (int m = 0; m < n_modes; ++m) {
    const double delta = p.detunings[m];
    for (int l = 0; l < n_seg; ++l) {
      const double a = l * h;
      const double b = (l + 1) * h;
      // robust: int_0^tau dt1 int_0^t1 f_l e^{i delta t2} = tau E0 - E1
      // otherwise: alpha_m(tau) contribution E0
      const cplx e0 = segment_moment(0, a, b, delta);
      const cplx v = robust ? gate_time * e0 - segment_moment(1, a, b, delta) : e0;
      a_full(2 * m, l) = v.real();
      a_full(2 * m + 1, l) = v.imag();
    }
  }
  p.constraint_matrix = a_full * p.expansion;
  p.angle_matrix = p.expansion.transpose() * angle_matrix(modes, gate_time, p.detunings, n_seg, ions) * p.expansion;
  p.angle_matrix = 0.5 * (p.angle_matrix + p.angle_matrix.transpose()).eval();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.constraint_matrix, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-12 * (sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv[i] > cutoff ? 1 : 0;
  p.nullspace_basis = svd.matrixV().rightCols(n_vars - rank);
  return p;
}

SynthesisResult synthesize(const SynthesisProblem& problem, double target_angle) {
  const Eigen::MatrixXd& ker = problem.nullspace_basis;
  if (ker.cols() == 0) throw SynthesisError("constraint null space is empty");
  Eigen::MatrixXd reduced = ker.transpose() * problem.angle_matrix * ker;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);

  SynthesisResult result;
  result.reduced_eigenvalues = es.eigenvalues();
  Waveform& w = result.waveform;
  w.gate_time = problem.gate_time;
  w.drive_detuning = problem.drive_detuning;
  w.detunings = problem.detunings;
  w.symmetric = problem.robust;

  const int n_seg = static_cast<int>(problem.expansion.rows());
  if (target_angle == 0.0) {
    w.segment_amplitudes.assign(static_cast<std::size_t>(n_seg), 0.0);
    result.selected_eigenvector = Eigen::VectorXd::Zero(ker.cols());
    return result;
  }

  const double scale_ref = es.eigenvalues().cwiseAbs().maxCoeff();
  int best = -1;
  double best_norm = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (lam == 0.0 || std::signbit(lam) != std::signbit(target_angle)) continue;
    const double norm = std::sqrt(target_angle / lam) * (problem.expansion * ker * es.eigenvectors().col(i)).norm();
    if (best < 0) {
      best = i;
      best_norm = norm;
      continue;
    }
    const double cur = std::abs(es.eigenvalues()[best]);
    if (std::abs(lam) > cur * (1.0 + 1e-12) ||
        (std::abs(std::abs(lam) - cur) <= 1e-12 * scale_ref && norm < best_norm * (1.0 - 1e-12))) {
      best = i;
      best_norm = norm;
    }
  }
  if (best < 0 || std::abs(es.eigenvalues()[best]) <= 1e-14 * scale_ref) {
    throw SynthesisError("no eigenvalue of the reduced angle form has the sign of the target angle");
  }

  const double lam = es.eigenvalues()[best];
  Eigen::VectorXd v = es.eigenvectors().col(best);
  Eigen::VectorXd x = std::sqrt(target_angle / lam) * (problem.expansion * (ker * v));
  // Deterministic overall sign: largest-magnitude amplitude positive.
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  if (x[imax] < 0) {
    x = -x;
    v = -v;
  }
  result.selected_eigenvalue = lam;
  result.selected_eigenvector = v;
  w.segment_amplitudes.assign(x.data(), x.data() + x.size());
  if (problem.robust) {
    // Exact mirror symmetry.
    for (int k = 0; k < n_seg / 2; ++k) w.segment_amplitudes[n_seg - 1 - k] = w.segment_amplitudes[k];
  }
  return result;
}

WaveformReport validate_waveform(const Waveform& w, const ModeSpectrum& modes, IonPair ions) {
  WaveformReport r;
  r.peak_rabi = w.peak_rabi();
  const auto deltas = modes.detunings(w.drive_detuning);
  const double tau = w.gate_time;
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double d = deltas[m];
    ModeResiduals res;
    res.alpha_end = std::abs(alpha_of_t(w, d, tau));
    res.alpha_bar = std::abs(alpha_time_integral(w, d, tau));
    res.beta_end = std::abs(beta_of_t(w, d, tau));
    res.dalpha_end = std::abs(dalpha_ddelta(w, d, tau));
    r.modes.push_back(res);
  }
  r.theta = theta_of_t(w, modes, ions, tau);
  return r;
}

nlohmann::json to_json(const WaveformReport& r) {
  nlohmann::json j;
  j["theta"] = r.theta;
  j["peak_rabi_rad_s"] = r.peak_rabi;
  auto arr = nlohmann::json::array();
  for (std::size_t m = 0; m < r.modes.size(); ++m) {
    const auto& x = r.modes[m];
    arr.push_back({{"mode", m},
                   {"abs_alpha_tau", x.alpha_end},
                   {"abs_alpha_bar", x.alpha_bar},
                   {"abs_beta_tau", x.beta_end},
                   {"abs_dalpha_ddelta_tau", x.dalpha_end}});
  }
  j["modes"] = arr;
  return j;
}

} // namespace msforge
