#include <doctest.h>

#include "msforge/chain_model.hpp"
#include "msforge/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

using namespace msforge;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double amu = 1.66053906660e-27;
constexpr double ca40 = 39.962590863 * amu;

ChainSpec two_ion_spec() {
  ChainSpec s;
  s.ion_count = 2;
  s.ion_mass = ca40;
  s.radial_freq = 2 * pi * 1.59e6;
  s.two_ion_spacing = 8e-6;
  s.laser_wavevector = 2 * pi / 729e-9;
  return s;
}

ChainSpec long_chain(int n) {
  ChainSpec s;
  s.ion_count = n;
  s.ion_mass = ca40;
  s.radial_freq = 2 * pi * 3.0e6;
  s.axial_freq = 2 * pi * 0.2e6;
  s.laser_wavevector = 2 * pi / 729e-9;
  return s;
}

// Plain gradient descent on sum u^2/2 + sum_{i<j} 1/|u_i - u_j|.
std::vector<double> descend(int n) {
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / std::max(n - 1, 1);
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> g(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      g[i] = u[i];
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i == j) continue;
        const double d = u[i] - u[j];
        g[i] -= d / std::pow(std::abs(d), 3);
      }
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= 0.05 * g[i];
  }
  return u;
}

} // namespace

TEST_CASE("single ion sits at the trap centre") {
  CHECK(normalized_equilibrium(1) == std::vector<double>{0.0});
  ChainSpec s = long_chain(1);
  const ModeSpectrum m = normal_modes(s);
  REQUIRE(m.mode_count() == 1);
  CHECK(m.mode_freqs[0] == s.radial_freq);
  CHECK(std::abs(m.couplings(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("two ions at 8 um spacing") {
  const ChainSpec s = two_ion_spec();
  const auto x = equilibrium_positions(s);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == doctest::Approx(-4e-6).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(4e-6).epsilon(1e-12));

  const double e = 1.602176634e-19;
  const double eps0 = 8.8541878128e-12;
  const double d = 8e-6;
  const double wz = std::sqrt(e * e / (2 * pi * eps0 * ca40 * d * d * d));
  CHECK(axial_frequency(s) == doctest::Approx(wz).epsilon(1e-14));
}

TEST_CASE("two-ion transverse modes") {
  const ModeSpectrum m = normal_modes(two_ion_spec());
  REQUIRE(m.mode_count() == 2);
  CHECK(m.mode_freqs[0] == 2 * pi * 1.59e6);
  CHECK(m.mode_freqs[1] / (2 * pi * 1.48e6) == doctest::Approx(1.0).epsilon(0.01));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(m.couplings(0, 0)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(std::abs(m.couplings(1, 0)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(m.couplings(0, 0) * m.couplings(1, 0) > 0);
  CHECK(m.couplings(0, 1) * m.couplings(1, 1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("three-ion equilibrium matches direct potential minimisation") {
  const auto u = normalized_equilibrium(3);
  const auto ref = descend(3);
  for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  const double ratio = (u[2] - u[1]) / (u[1] - u[0]);
  CHECK(ratio == doctest::Approx((ref[2] - ref[1]) / (ref[1] - ref[0])).epsilon(1e-9));
  CHECK(u[2] == doctest::Approx(std::cbrt(1.25)).epsilon(1e-12));
}

TEST_CASE("three-ion modes match a directly assembled Hessian") {
  ChainSpec s = long_chain(3);
  s.radial_freq = 2 * pi * 1.59e6;
  s.axial_freq = 2 * pi * 586.516e3;
  const ModeSpectrum m = normal_modes(s);
  const auto u = descend(3);
  const double wz = *s.axial_freq;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    h(i, i) += std::pow(s.radial_freq / wz, 2);
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double c = 1.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) -= c;
      h(i, j) += c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  for (int k = 0; k < 3; ++k) {
    CHECK(m.mode_freqs[k] == doctest::Approx(wz * std::sqrt(es.eigenvalues()[2 - k])).epsilon(1e-10));
  }
}

TEST_CASE("chains up to ten ions") {
  for (int n = 1; n <= 10; ++n) {
    CAPTURE(n);
    const ChainSpec s = long_chain(n);
    const ModeSpectrum m = normal_modes(s);
    CHECK(m.mode_count() == n);
    const Eigen::MatrixXd gram = m.couplings.transpose() * m.couplings;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.mode_freqs[0] == doctest::Approx(s.radial_freq).epsilon(1e-12));
    for (int k = 1; k < n; ++k) CHECK(m.mode_freqs[k] < m.mode_freqs[k - 1]);
    const auto u = normalized_equilibrium(n);
    for (int i = 0; i < n; ++i) CHECK(std::abs(u[i] + u[n - 1 - i]) < 1e-12);
    for (double eta : m.lamb_dicke) CHECK(eta > 0.0);
  }
}

TEST_CASE("Lamb-Dicke parameter from constants") {
  const ChainSpec s = two_ion_spec();
  const double w = 2 * pi * 1.59e6;
  const double hbar = 1.054571817e-34;
  const double k = 2 * pi / 729e-9;
  const double expected = k * std::sqrt(hbar / (2.0 * 39.962590863 * 1.66053906660e-27 * w));
  const std::vector<double> freqs{w};
  CHECK(lamb_dicke(s, freqs)[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("doubling the mass scales eta by 1/sqrt(2)") {
  ChainSpec s = two_ion_spec();
  const std::vector<double> freqs{2 * pi * 1.59e6, 2 * pi * 1.48e6};
  const auto a = lamb_dicke(s, freqs);
  s.ion_mass *= 2.0;
  const auto b = lamb_dicke(s, freqs);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i] / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("eta falls monotonically with mode frequency") {
  const ChainSpec s = two_ion_spec();
  double last = 1e300;
  for (double w = 1e5; w < 1e13; w *= 10.0) {
    const std::vector<double> f{w};
    const double eta = lamb_dicke(s, f)[0];
    CHECK(eta < last);
    last = eta;
  }
  CHECK(last < 1e-3);
}

TEST_CASE("eta override pins the top mode") {
  ChainSpec s = two_ion_spec();
  s.eta_override = 0.1;
  const ModeSpectrum m = normal_modes(s);
  CHECK(m.lamb_dicke[0] == 0.1);
  CHECK(m.lamb_dicke[1] == doctest::Approx(0.1 * std::sqrt(m.mode_freqs[0] / m.mode_freqs[1])).epsilon(1e-15));
}

TEST_CASE("invalid chains") {
  ChainSpec s = two_ion_spec();
  s.axial_freq = 1e6;
  CHECK_THROWS_AS(normal_modes(s), ConfigError);

  ChainSpec three = long_chain(3);
  three.two_ion_spacing = 8e-6;
  three.axial_freq.reset();
  CHECK_THROWS_AS(normal_modes(three), ConfigError);

  ChainSpec weak = long_chain(2);
  weak.radial_freq = 0.5 * *weak.axial_freq;
  CHECK_THROWS_AS(normal_modes(weak), ConfigError);

  ChainSpec zigzag = long_chain(10);
  zigzag.radial_freq = 2.0 * *zigzag.axial_freq;
  CHECK_THROWS_AS(normal_modes(zigzag), StabilityError);
}
