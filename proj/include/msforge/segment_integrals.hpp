#pragma once

#include <complex>
#include <span>
#include <vector>

namespace msforge {

using cplx = std::complex<double>;

/// One constant-amplitude interval [start, end) of a piecewise-constant drive.
struct Piece {
  double start = 0.0;
  double end = 0.0;
  double amplitude = 0.0;
};

/// int_0^1 u^k exp(i theta u) du, k in {0, 1, 2}.
cplx unit_moment(int k, double theta);

/// int_a^b t^k exp(i delta t) dt, k in {0, 1}.
cplx segment_moment(int k, double a, double b, double delta);

/// Weight c0 + c1 t1 + c2 t2 inside an ordered double integral.
struct BilinearWeight {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Closed form of
///   int_0^T dt1 int_0^t1 dt2 w(t1, t2) Omega(t1) Omega(t2) exp(i delta (t1 - t2))
/// over the pieces (which must be contiguous from 0 to T).
cplx ordered_pair_integral(std::span<const Piece> pieces, double delta, BilinearWeight w = {});

/// int_0^T Omega(t) t^k exp(i delta t) dt over the pieces, k in {0, 1}.
cplx drive_moment(std::span<const Piece> pieces, double delta, int k);

} // namespace msforge
