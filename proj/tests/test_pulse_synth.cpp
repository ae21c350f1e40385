#include <doctest.h>

#include "msforge/config.hpp"
#include "msforge/errors.hpp"
#include "msforge/magnus.hpp"
#include "msforge/pulse_synth.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace msforge;
using oracle::cplx;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double tau = 150e-6;
constexpr double omega_d = 9.470e6;

const ModeSpectrum& paper_modes() {
  static const ModeSpectrum m = normal_modes(parse_config(preset_json("paper-2ion")).chain);
  return m;
}

double seg_lo(int i, int n, double t) { return t * i / n; }
double seg_hi(int i, int n, double t) { return t * (i + 1) / n; }

// int over segment i of e^{i delta t}
cplx seg_phase(int i, int n, double delta) {
  return oracle::integrate([&](double t) { return std::polar(1.0, delta * t); }, seg_lo(i, n, tau), seg_hi(i, n, tau),
                           {}, 20);
}

// int_0^tau dt1 int_0^t1 [segment i](t2) e^{i delta t2} dt2
cplx nested_seg(int i, int n, double delta) {
  const double a = seg_lo(i, n, tau);
  const double b = seg_hi(i, n, tau);
  return oracle::integrate(
      [&](double t1) {
        if (t1 <= a) return cplx(0.0);
        return oracle::integrate([&](double t2) { return std::polar(1.0, delta * t2); }, a, std::min(t1, b), {}, 20);
      },
      0.0, tau, {a, b}, 20, 4);
}

// int_{seg i} dt1 int_{seg j, t2 < t1} dt2 e^{i delta (t1 - t2)}
cplx ordered_seg_pair(int i, int j, int n, double delta) {
  if (j > i) return 0.0;
  const double aj = seg_lo(j, n, tau);
  const double bj = seg_hi(j, n, tau);
  return oracle::integrate(
      [&](double t1) {
        return oracle::integrate([&](double t2) { return std::polar(1.0, delta * (t1 - t2)); }, aj, std::min(bj, t1),
                                 {}, 16);
      },
      seg_lo(i, n, tau), seg_hi(i, n, tau), {}, 16);
}

bool close_rel(cplx a, cplx b, double scale, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), scale); }

} // namespace

TEST_CASE("problem dimensions") {
  const SynthesisProblem r = build_problem(paper_modes(), tau, omega_d, 16, true);
  CHECK(r.constraint_matrix.rows() == 4);
  CHECK(r.constraint_matrix.cols() == 8);
  CHECK(r.nullspace_basis.cols() >= 4);
  CHECK(r.expansion.rows() == 16);

  const SynthesisProblem n = build_problem(paper_modes(), tau, omega_d, 15, false);
  CHECK(n.constraint_matrix.rows() == 4);
  CHECK(n.constraint_matrix.cols() == 15);
  CHECK(n.nullspace_basis.cols() == 11);
}

TEST_CASE("constraint entries against quadrature") {
  const auto deltas = paper_modes().detunings(omega_d);
  const int n = 16;
  const SynthesisProblem r = build_problem(paper_modes(), tau, omega_d, n, true);
  const SynthesisProblem nr = build_problem(paper_modes(), tau, omega_d, n, false);
  for (int m = 0; m < 2; ++m) {
    const double d = deltas[static_cast<std::size_t>(m)];
    const double scale = 1e-3 * tau * tau / n;
    for (int k = 0; k < n / 2; ++k) {
      const cplx ref = nested_seg(k, n, d) + nested_seg(n - 1 - k, n, d);
      const cplx got(r.constraint_matrix(2 * m, k), r.constraint_matrix(2 * m + 1, k));
      CAPTURE(m);
      CAPTURE(k);
      CHECK(close_rel(got, ref, scale, 1e-9));
    }
    for (int l = 0; l < n; ++l) {
      const cplx ref = seg_phase(l, n, d);
      const cplx got(nr.constraint_matrix(2 * m, l), nr.constraint_matrix(2 * m + 1, l));
      CHECK(close_rel(got, ref, 1e-3 * tau / n, 1e-9));
    }
  }
}

TEST_CASE("angle matrix entries against quadrature") {
  const ModeSpectrum& modes = paper_modes();
  const auto deltas = modes.detunings(omega_d);
  const int n = 16;
  const Eigen::MatrixXd m = angle_matrix(modes, tau, deltas, n, {});
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * m.cwiseAbs().maxCoeff());

  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(n, n);
  for (int mode = 0; mode < 2; ++mode) {
    const double w = std::pow(modes.lamb_dicke[mode], 2) * modes.couplings(0, mode) * modes.couplings(1, mode);
    const double d = deltas[static_cast<std::size_t>(mode)];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ref(i, j) += 0.25 * w * (ordered_seg_pair(i, j, n, d) + ordered_seg_pair(j, i, n, d)).imag();
  }
  const double scale = ref.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(m(i, j) - ref(i, j)) <= 1e-9 * std::max(std::abs(ref(i, j)), 1e-3 * scale));
    }

  const SynthesisProblem p = build_problem(modes, tau, omega_d, n, true);
  CHECK((p.angle_matrix - p.expansion.transpose() * m * p.expansion).cwiseAbs().maxCoeff() < 1e-14 * scale * 4);
}

TEST_CASE("zero target angle gives the zero waveform") {
  const SynthesisResult r = synthesize(build_problem(paper_modes(), tau, omega_d, 16, true), 0.0);
  CHECK(r.waveform.peak_rabi() == 0.0);
  CHECK(r.waveform.segment_count() == 16);
}

TEST_CASE("robust waveform for the paper parameters") {
  const SynthesisProblem p = build_problem(paper_modes(), tau, omega_d, 16, true);
  const SynthesisResult r = synthesize(p, pi / 4);
  const Waveform& w = r.waveform;
  CHECK(w.symmetric);
  for (int i = 0; i < 8; ++i) CHECK(w.segment_amplitudes[i] == w.segment_amplitudes[15 - i]);

  const Eigen::Map<const Eigen::VectorXd> full(w.segment_amplitudes.data(), 16);
  const Eigen::VectorXd half = full.head(8);
  CHECK((p.constraint_matrix * half).norm() <= 1e-10 * half.norm() * p.constraint_matrix.norm());

  const WaveformReport rep = validate_waveform(w, paper_modes());
  CHECK(std::abs(rep.theta - pi / 4) < 1e-9);
  const double scale = rep.peak_rabi * tau;
  for (const auto& m : rep.modes) {
    CHECK(m.alpha_end < 1e-8 * scale);
    CHECK(m.alpha_bar / tau < 1e-8 * scale);
    CHECK(m.beta_end / tau < 1e-8 * scale);
    CHECK(m.dalpha_end / tau < 1e-8 * scale);
  }
  // Smooth envelope, largest in the middle half.
  double inner = 0.0;
  double outer = 0.0;
  for (int i = 0; i < 16; ++i) {
    double& slot = (i >= 4 && i < 12) ? inner : outer;
    slot = std::max(slot, std::abs(w.segment_amplitudes[i]));
  }
  CHECK(inner >= outer);
}

TEST_CASE("reverse-angle piece at twice the gate time") {
  const SynthesisProblem p = build_problem(paper_modes(), 2 * tau, 10.190e6, 16, true);
  const SynthesisResult r = synthesize(p, -pi / 4);
  CHECK(r.selected_eigenvalue < 0.0);
  const WaveformReport rep = validate_waveform(r.waveform, paper_modes());
  CHECK(std::abs(rep.theta + pi / 4) < 1e-9);
  for (const auto& m : rep.modes) CHECK(m.alpha_end < 1e-8 * rep.peak_rabi * 2 * tau);
}

TEST_CASE("selected eigenpair has the smallest amplitude norm") {
  for (double target : {pi / 4, -pi / 4}) {
    const SynthesisProblem p = build_problem(paper_modes(), tau, omega_d, 16, true);
    const SynthesisResult r = synthesize(p, target);
    const double chosen = Eigen::Map<const Eigen::VectorXd>(r.waveform.segment_amplitudes.data(), 16).norm();
    Eigen::MatrixXd reduced = p.nullspace_basis.transpose() * p.angle_matrix * p.nullspace_basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (reduced + reduced.transpose()));
    int others = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double lam = es.eigenvalues()[i];
      if (lam == 0.0 || (lam > 0) != (target > 0)) continue;
      const Eigen::VectorXd x = std::sqrt(target / lam) * (p.expansion * (p.nullspace_basis * es.eigenvectors().col(i)));
      Waveform alt = r.waveform;
      alt.segment_amplitudes.assign(x.data(), x.data() + x.size());
      CHECK(theta_of_t(alt, paper_modes(), {}, tau) == doctest::Approx(target).epsilon(1e-9));
      CHECK(chosen <= x.norm() * (1.0 + 1e-12));
      ++others;
    }
    CHECK(others >= 1);
  }
}

TEST_CASE("synthesis infeasibility") {
  SynthesisProblem p;
  p.constraint_matrix = Eigen::MatrixXd::Zero(1, 3);
  p.angle_matrix = Eigen::MatrixXd::Identity(3, 3);
  p.nullspace_basis = Eigen::MatrixXd::Identity(3, 3);
  p.expansion = Eigen::MatrixXd::Identity(3, 3);
  p.gate_time = 1.0;
  CHECK_THROWS_AS(synthesize(p, -1.0), SynthesisError);
  CHECK(synthesize(p, 1.0).waveform.peak_rabi() > 0.0);

  try {
    build_problem(paper_modes(), tau, omega_d, 8, true);
    FAIL("expected a SynthesisError");
  } catch (const SynthesisError& e) {
    CHECK(std::string(e.what()).find("N_seg = 10") != std::string::npos);
  }
  try {
    build_problem(paper_modes(), tau, omega_d, 4, false);
    FAIL("expected a SynthesisError");
  } catch (const SynthesisError& e) {
    CHECK(std::string(e.what()).find("N_seg = 5") != std::string::npos);
  }
  CHECK_THROWS_AS(build_problem(paper_modes(), tau, omega_d, 15, true), PreconditionError);
  CHECK_THROWS_AS(build_problem(paper_modes(), tau, omega_d, 16, true, {0, 0}), PreconditionError);
  CHECK_THROWS_AS(build_problem(paper_modes(), -tau, omega_d, 16, true), PreconditionError);
}

TEST_CASE("non-robust waveform closes alpha only") {
  const SynthesisResult r = synthesize(build_problem(paper_modes(), tau, omega_d, 15, false), pi / 4);
  CHECK_FALSE(r.waveform.symmetric);
  const WaveformReport rep = validate_waveform(r.waveform, paper_modes());
  CHECK(std::abs(rep.theta - pi / 4) < 1e-9);
  double beta_max = 0.0;
  for (const auto& m : rep.modes) {
    CHECK(m.alpha_end < 1e-8 * rep.peak_rabi * tau);
    beta_max = std::max(beta_max, m.beta_end);
  }
  CHECK(beta_max > 1e-3 * rep.peak_rabi * tau * tau);
}

TEST_CASE("robust output closes alpha without an explicit alpha constraint") {
  const SynthesisResult r = synthesize(build_problem(paper_modes(), tau, omega_d, 16, true), pi / 4);
  const auto deltas = paper_modes().detunings(omega_d);
  for (double d : deltas) {
    CHECK(std::abs(alpha_of_t(r.waveform, d, tau)) < 1e-8 * r.waveform.peak_rabi() * tau);
    CHECK(std::abs(dalpha_ddelta(r.waveform, d, tau)) < 1e-8 * r.waveform.peak_rabi() * tau * tau);
  }
}

TEST_CASE("beta of an arbitrary waveform against its defining integral") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Waveform w = Waveform::zero(9, tau);
  w.symmetric = false;
  for (double& x : w.segment_amplitudes) x = 2e5 * u(rng);
  oracle::Drive drive{w.segment_amplitudes, tau};
  for (double d : {-7.3e5, 1.2e5, 0.0}) {
    auto alpha = [&](double t) {
      return oracle::integrate([&](double s) { return drive(s) * std::polar(1.0, d * s); }, 0.0, t, drive.breaks(), 16);
    };
    const cplx abar = oracle::integrate(alpha, 0.0, tau, drive.breaks(), 16);
    const cplx dad = cplx(0.0, 1.0) *
                     oracle::integrate([&](double s) { return s * drive(s) * std::polar(1.0, d * s); }, 0.0, tau,
                                       drive.breaks(), 16);
    const cplx ref = abar + cplx(0.0, 1.0) * dad;
    const cplx got = beta_of_t(w, d, tau);
    CAPTURE(d);
    CHECK(std::abs(got - ref) <= 1e-10 * std::abs(ref));
    CHECK(std::abs(got - (2.0 * abar - tau * alpha(tau))) <= 1e-10 * std::abs(ref));
    CHECK(std::abs(alpha_time_integral(w, d, tau) - abar) <= 1e-10 * std::abs(abar));
  }
}

TEST_CASE("scaling and the mirror relation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Waveform w = Waveform::zero(12, tau);
  for (int i = 0; i < 6; ++i) w.segment_amplitudes[i] = w.segment_amplitudes[11 - i] = 3e5 * u(rng);
  Waveform s = w;
  for (double& x : s.segment_amplitudes) x *= 3.0;
  const ModeSpectrum& modes = paper_modes();
  for (double d : modes.detunings(omega_d)) {
    CHECK(std::abs(alpha_of_t(s, d, 0.7 * tau) - 3.0 * alpha_of_t(w, d, 0.7 * tau)) <=
          1e-14 * std::abs(alpha_of_t(s, d, 0.7 * tau)));
    const cplx abar = alpha_time_integral(w, d, tau);
    const cplx lhs = tau * alpha_of_t(w, d, tau);
    const cplx rhs = abar + std::polar(1.0, d * tau) * std::conj(abar);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(abar));
  }
  const double th = theta_of_t(w, modes, {}, 0.6 * tau);
  CHECK(theta_of_t(s, modes, {}, 0.6 * tau) == doctest::Approx(9.0 * th).epsilon(1e-14));
}

TEST_CASE("waveform records") {
  const SynthesisResult r = synthesize(build_problem(paper_modes(), tau, omega_d, 16, true), pi / 4);
  const Waveform& w = r.waveform;
  const Waveform back = waveform_from_json(nlohmann::json::parse(to_json(w).dump()));
  CHECK(back.segment_amplitudes == w.segment_amplitudes);
  CHECK(back.gate_time == w.gate_time);
  CHECK(back.drive_detuning == w.drive_detuning);
  CHECK(back.symmetric);

  const std::string csv = waveform_csv(w);
  CHECK(csv.rfind("t_start_s,omega_rad_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 18);

  CHECK(w.amplitude_at(0.0) == w.segment_amplitudes[0]);
  CHECK(w.amplitude_at(tau) == w.segment_amplitudes[15]);
  CHECK(w.amplitude_at(tau * 5.5 / 16) == w.segment_amplitudes[5]);
  CHECK(w.pieces(tau / 3).size() == 6);
  CHECK(w.pieces(tau / 3).back().end == doctest::Approx(tau / 3));

  nlohmann::json bad = to_json(w);
  bad["n_seg"] = 3;
  CHECK_THROWS_AS(waveform_from_json(bad), ConfigError);
  bad.erase("n_seg");
  CHECK_THROWS_AS(waveform_from_json(bad), ConfigError);
}

TEST_CASE("synthesis is deterministic") {
  const auto a = synthesize(build_problem(paper_modes(), tau, omega_d, 16, true), pi / 4).waveform.segment_amplitudes;
  const auto b = synthesize(build_problem(paper_modes(), tau, omega_d, 16, true), pi / 4).waveform.segment_amplitudes;
  CHECK(a == b);
}
