#include <doctest.h>

#include "msforge/segment_integrals.hpp"
#include "msforge/waveform.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace msforge;
using oracle::cplx;

namespace {

cplx quad_unit(int k, double theta) {
  return oracle::integrate([&](double u) { return std::pow(u, k) * std::polar(1.0, theta * u); }, 0.0, 1.0, {}, 24,
                           std::max(1, static_cast<int>(std::abs(theta) / 4.0) + 1));
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("unit moments against quadrature") {
  for (double theta : {0.0, 1e-9, 1e-6, 0.3, 0.999, 1.0, 1.001, -2.5, 7.0, 120.0}) {
    for (int k = 0; k <= 2; ++k) {
      CAPTURE(theta);
      CAPTURE(k);
      CHECK(rel(unit_moment(k, theta), quad_unit(k, theta)) < 1e-12);
    }
  }
  CHECK(unit_moment(0, 0.0) == cplx(1.0, 0.0));
  CHECK(unit_moment(2, 0.0) == cplx(1.0 / 3.0, 0.0));
}

TEST_CASE("segment moments against quadrature") {
  for (double delta : {0.0, 1e-3, 2.0e5, -7.2e5, 3.1e6}) {
    for (int k = 0; k <= 1; ++k) {
      const double a = 37.5e-6;
      const double b = 46.875e-6;
      const cplx ref = oracle::integrate([&](double t) { return std::pow(t, k) * std::polar(1.0, delta * t); }, a, b,
                                         {}, 24, 4);
      CAPTURE(delta);
      CHECK(rel(segment_moment(k, a, b, delta), ref) < 1e-12);
    }
  }
  CHECK(segment_moment(0, 1.0, 1.0, 3.0) == cplx(0.0, 0.0));
}

TEST_CASE("near-resonant moments keep their digits") {
  // |delta h| around 1e-7: the direct antiderivative would cancel badly here.
  const double a = 0.0;
  const double b = 9.375e-6;
  const double delta = 1e-2;
  const cplx ref = oracle::integrate([&](double t) { return t * std::polar(1.0, delta * t); }, a, b, {}, 16);
  CHECK(rel(segment_moment(1, a, b, delta), ref) < 1e-13);
}

TEST_CASE("ordered pair integral against nested quadrature") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Waveform w = Waveform::zero(6, 60e-6);
  for (double& x : w.segment_amplitudes) x = 1e5 * u(rng);
  oracle::Drive drive{w.segment_amplitudes, w.gate_time};
  const auto pieces = w.pieces();

  for (double delta : {0.0, 4.0e4, -3.3e5}) {
    for (BilinearWeight bw : {BilinearWeight{1, 0, 0}, BilinearWeight{0, 1, 0}, BilinearWeight{0, 0, 1},
                              BilinearWeight{60e-6, -1, 3}}) {
      const cplx ref = oracle::integrate(
          [&](double t1) {
            return oracle::integrate(
                [&](double t2) {
                  return (bw.c0 + bw.c1 * t1 + bw.c2 * t2) * drive(t1) * drive(t2) * std::polar(1.0, delta * (t1 - t2));
                },
                0.0, t1, drive.breaks(), 16);
          },
          0.0, w.gate_time, drive.breaks(), 16);
      CAPTURE(delta);
      CHECK(rel(ordered_pair_integral(pieces, delta, bw), ref) < 1e-11);
    }
  }
}

TEST_CASE("drive moments sum segment moments") {
  Waveform w = Waveform::zero(4, 1e-5);
  w.segment_amplitudes = {1.0, -2.0, 0.5, 3.0};
  oracle::Drive drive{w.segment_amplitudes, w.gate_time};
  for (int k = 0; k <= 1; ++k) {
    const cplx ref = oracle::integrate([&](double t) { return drive(t) * std::pow(t, k) * std::polar(1.0, 2e5 * t); },
                                       0.0, w.gate_time, drive.breaks(), 20);
    CHECK(rel(drive_moment(w.pieces(), 2e5, k), ref) < 1e-12);
  }
}
