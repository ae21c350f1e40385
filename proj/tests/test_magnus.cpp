#include <doctest.h>

#include "msforge/config.hpp"
#include "msforge/errors.hpp"
#include "msforge/magnus.hpp"
#include "msforge/metrics.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace msforge;
using oracle::cplx;

namespace {

constexpr double pi = std::numbers::pi;

struct Paper {
  RunConfig cfg = parse_config(preset_json("paper-2ion"));
  ModeSpectrum modes = normal_modes(cfg.chain);
  SchemeSet set = design_schemes(modes, cfg.drive);
};

const Paper& paper() {
  static const Paper p;
  return p;
}

Eigen::MatrixXcd vacuum_block(const Eigen::MatrixXcd& u, const HilbertLayout& layout) {
  const Eigen::MatrixXcd v = layout.vacuum_columns();
  return v.adjoint() * u * v;
}

Waveform lopsided() {
  Waveform w = paper().set.robust;
  w.segment_amplitudes.front() *= 1.5;
  w.symmetric = false;
  return w;
}

} // namespace

TEST_CASE("displacement of simple drives") {
  const Waveform z = Waveform::zero(8, 100e-6);
  for (double t : {0.0, 3e-5, 1e-4}) {
    CHECK(alpha_of_t(z, 2e5, t) == cplx(0.0));
    CHECK(beta_of_t(z, 2e5, t) == cplx(0.0));
  }

  Waveform c = Waveform::zero(1, 100e-6);
  c.segment_amplitudes = {3.0e5};
  for (double d : {2.5e5, -4e4, 1e-3}) {
    const double tau = c.gate_time;
    const cplx ref = 3.0e5 * std::polar(2.0 * std::sin(0.5 * d * tau) / d, 0.5 * d * tau);
    CHECK(std::abs(alpha_of_t(c, d, tau) - ref) <= 1e-12 * std::abs(ref));
  }

  Waveform r = Waveform::zero(5, 50e-6);
  r.segment_amplitudes = {1.0, -2.0, 4.0, 0.5, 3.0};
  const cplx sum = (1.0 - 2.0 + 4.0 + 0.5 + 3.0) * 50e-6 / 5;
  CHECK(std::abs(alpha_of_t(r, 0.0, 50e-6) - sum) < 1e-15 * std::abs(sum));
}

TEST_CASE("zero waveform has no entangling angle") {
  const Waveform z = Waveform::zero(16, 150e-6, 9.47e6);
  CHECK(theta_of_t(z, paper().modes, {}, 150e-6) == 0.0);
}

TEST_CASE("trajectories start at the origin") {
  NoiseParams n;
  n.asym_shift = 2 * pi * 1e3;
  const TrajectoryRecord rec = sample_trajectory(paper().set.robust, paper().modes, n, {}, 11);
  for (std::size_t m = 0; m < rec.alpha.size(); ++m) {
    CHECK(rec.alpha[m][0] == cplx(0.0));
    CHECK(rec.beta[m][0] == cplx(0.0));
  }
  CHECK(rec.theta[0] == 0.0);
  CHECK(std::abs(rec.theta.back() - pi / 4) < 1e-9);
  CHECK_THROWS_AS(sample_trajectory(paper().set.robust, paper().modes, n, {}, 1), PreconditionError);
}

TEST_CASE("entangling angle ignores the asymmetric shift") {
  NoiseParams a;
  NoiseParams b;
  b.asym_shift = 2 * pi * 1e3;
  const auto ra = sample_trajectory(paper().set.nonrobust, paper().modes, a, {}, 21);
  const auto rb = sample_trajectory(paper().set.nonrobust, paper().modes, b, {}, 21);
  CHECK(ra.theta == rb.theta);
}

TEST_CASE("detuning derivative against central differences") {
  const Waveform& w = paper().set.nonrobust;
  for (double d : paper().modes.detunings(w.drive_detuning)) {
    for (double t : {0.4 * w.gate_time, w.gate_time}) {
      const double h = 1.0;
      const cplx fd = (alpha_of_t(w, d + h, t) - alpha_of_t(w, d - h, t)) / (2.0 * h);
      const cplx cf = dalpha_ddelta(w, d, t);
      CHECK(std::abs(cf - fd) <= 1e-6 * std::abs(cf));
    }
  }
}

TEST_CASE("robust waveform is first-order insensitive to symmetric detuning") {
  const Waveform& w = paper().set.robust;
  for (double d : paper().modes.detunings(w.drive_detuning)) {
    CHECK(std::abs(dalpha_ddelta(w, d, w.gate_time)) < 1e-8 * w.peak_rabi() * w.gate_time * w.gate_time);
  }
}

TEST_CASE("second-order propagator of the zero drive") {
  const Waveform z = Waveform::zero(16, 150e-6, 9.47e6);
  NoiseParams n;
  const MagnusPropagator p0 = magnus2_propagator(z, paper().modes, n, {}, 4);
  CHECK((p0.unitary - Eigen::MatrixXcd::Identity(p0.unitary.rows(), p0.unitary.cols())).cwiseAbs().maxCoeff() < 1e-14);

  n.asym_shift = 700.0;
  const MagnusPropagator p = magnus2_propagator(z, paper().modes, n, {}, 4);
  const Eigen::MatrixXcd one = oracle::expi(-0.5 * 150e-6 * 700.0 * oracle::sz());
  const Eigen::MatrixXcd ref = oracle::kron(oracle::kron(one, one), oracle::id(16));
  CHECK((p.unitary - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("robust gate at zero error is the ideal entangler on vacuum") {
  const MagnusPropagator p = magnus2_propagator(paper().set.robust, paper().modes, {}, {}, 10);
  const HilbertLayout layout(2, 2, 10);
  const Eigen::MatrixXcd k0 = vacuum_block(p.unitary, layout);
  const Eigen::MatrixXcd ideal = oracle::expi(pi / 4 * oracle::kron(oracle::sx(), oracle::sx()));
  const double fpro = std::norm((ideal.adjoint() * k0).trace()) / 16.0;
  CHECK(1.0 - fpro < 1e-9);
  CHECK_FALSE(p.truncation_warning);
}

TEST_CASE("generator is Hermitian and its exponential unitary") {
  for (double dw : {0.0, 500.0, -2 * pi * 1e3}) {
    NoiseParams n;
    n.asym_shift = dw;
    n.sym_shift = 120.0;
    for (const Waveform* w : {&paper().set.robust, &paper().set.nonrobust}) {
      const MagnusPropagator p = magnus2_propagator(*w, paper().modes, n, {}, 8);
      const Eigen::MatrixXcd k = p.generator.to_dense();
      CHECK((k - k.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff()));
      const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(k.rows(), k.cols());
      CHECK((p.unitary.adjoint() * p.unitary - id).norm() < 1e-10);
    }
  }
}

TEST_CASE("action of the exponential matches the dense propagator") {
  NoiseParams n;
  n.asym_shift = 800.0;
  const HilbertLayout layout(2, 2, 8);
  const MagnusPropagator p = magnus2_propagator(paper().set.nonrobust, paper().modes, n, {}, 8);
  Eigen::MatrixXcd cols = layout.vacuum_columns();
  magnus2_apply(paper().set.nonrobust, paper().modes, n, {}, layout, cols);
  CHECK((cols - p.unitary * layout.vacuum_columns()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Fock cutoff is converged at the default") {
  NoiseParams n;
  n.asym_shift = 500.0;
  for (Scheme s : all_schemes) {
    SimulationSettings a;
    a.fock_cutoff = 10;
    SimulationSettings b = a;
    b.fock_cutoff = 14;
    const double fa = 1.0 - scheme_infidelity(paper().set, s, paper().modes, n, a);
    const double fb = 1.0 - scheme_infidelity(paper().set, s, paper().modes, n, b);
    CAPTURE(to_string(s));
    CHECK(std::abs(fa - fb) < 1e-9);
    const QubitChannel ch = scheme_channel(paper().set, s, paper().modes, n, a);
    CHECK(truncation_tail(ch.layout, ch.columns) < 1e-8);
  }
}

TEST_CASE("a starved Fock space is flagged") {
  NoiseParams n;
  n.asym_shift = 2 * pi * 1e3;
  const MagnusPropagator p = magnus2_propagator(paper().set.nonrobust, paper().modes, n, {}, 3);
  CHECK(p.truncation_warning);
  CHECK(p.tail_population > 1e-8);
}

TEST_CASE("layout mismatch is rejected") {
  const HilbertLayout wrong(2, 3, 4);
  CHECK_THROWS_AS(magnus2_generator(paper().set.robust, paper().modes, {}, {}, wrong, 1e-5), PreconditionError);
}

TEST_CASE("third-order diagnostic") {
  NoiseParams n;
  CHECK(magnus3_diagnostic(paper().set.robust, paper().modes, n, {}) == 0.0);
  n.asym_shift = 2 * pi * 1e3;
  const double one = magnus3_diagnostic(paper().set.robust, paper().modes, n, {});
  n.asym_shift *= 2.0;
  const double two = magnus3_diagnostic(paper().set.robust, paper().modes, n, {});
  CHECK(one > 0.0);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-15));
  CHECK_THROWS_AS(magnus3_diagnostic(lopsided(), paper().modes, n, {}), PreconditionError);
}

TEST_CASE("third-order pair weights coincide only for mirror-symmetric drives") {
  for (double d : paper().modes.detunings(9.47e6)) {
    const ThirdOrderPair s = third_order_pair(paper().set.robust, d);
    CHECK(s.weight_tau_minus_t1 == doctest::Approx(s.weight_t2).epsilon(1e-10));
    const ThirdOrderPair a = third_order_pair(lopsided(), d);
    CHECK(std::abs(a.weight_tau_minus_t1 - a.weight_t2) > 1e-6 * std::abs(a.weight_t2));
  }
}

TEST_CASE("third-order diagnostic against brute-force triple integrals") {
  const Waveform& w = paper().set.robust;
  const oracle::Drive om{w.segment_amplitudes, w.gate_time};
  NoiseParams n;
  n.asym_shift = 2 * pi * 1e3;
  double bd = 0.0;
  for (int m = 0; m < paper().modes.mode_count(); ++m) {
    const double d = paper().modes.detunings(w.drive_detuning)[static_cast<std::size_t>(m)];
    const oracle::ThirdOrderScalars s = oracle::third_order_scalars(om, d);
    CHECK(std::abs(s.a + s.c) < 1e-8 * std::max(std::abs(s.a), std::abs(s.c)));
    bd += std::pow(paper().modes.lamb_dicke[static_cast<std::size_t>(m)], 2) * (s.ib - s.id).imag();
  }
  const double brute = std::abs(n.asym_shift) / 3.0 * std::abs(bd);
  CHECK(magnus3_diagnostic(w, paper().modes, n, {}) == doctest::Approx(brute).epsilon(0.05));
}
