#include "msforge/segment_integrals.hpp"

#include <cmath>
#include <stdexcept>

namespace msforge {

cplx unit_moment(int k, double theta) {
  if (k < 0 || k > 2) throw std::invalid_argument("unit_moment: k must be 0, 1 or 2");
  if (std::abs(theta) < 1.0) {
    // sum_n (i theta)^n / (n! (n + k + 1))
    cplx sum = 0.0;
    cplx power = 1.0;
    double factorial = 1.0;
    for (int n = 0; n < 40; ++n) {
      if (n > 0) {
        power *= cplx(0.0, theta);
        factorial *= n;
      }
      const cplx term = power / (factorial * (n + k + 1));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  const cplx e = std::polar(1.0, theta);
  const cplx i_theta(0.0, theta);
  cplx mu = cplx(std::sin(theta) / theta, (1.0 - std::cos(theta)) / theta);
  for (int j = 1; j <= k; ++j) mu = (e - static_cast<double>(j) * mu) / i_theta;
  return mu;
}

cplx segment_moment(int k, double a, double b, double delta) {
  const double h = b - a;
  if (h <= 0.0) return 0.0;
  const double theta = delta * h;
  const cplx phase = std::polar(1.0, delta * a);
  switch (k) {
  case 0:
    return phase * h * unit_moment(0, theta);
  case 1:
    return phase * (a * h * unit_moment(0, theta) + h * h * unit_moment(1, theta));
  default:
    throw std::invalid_argument("segment_moment: k must be 0 or 1");
  }
}

cplx drive_moment(std::span<const Piece> pieces, double delta, int k) {
  cplx sum = 0.0;
  for (const Piece& p : pieces) sum += p.amplitude * segment_moment(k, p.start, p.end, delta);
  return sum;
}

cplx ordered_pair_integral(std::span<const Piece> pieces, double delta, BilinearWeight w) {
  cplx total = 0.0;
  cplx prior0 = 0.0; // sum over earlier pieces of x_q E0_q
  cplx prior1 = 0.0; // sum over earlier pieces of x_q E1_q
  for (const Piece& p : pieces) {
    const double h = p.end - p.start;
    if (h <= 0.0) continue;
    const cplx e0 = segment_moment(0, p.start, p.end, delta);
    const cplx e1 = segment_moment(1, p.start, p.end, delta);
    const double x = p.amplitude;

    // t1 in this piece, t2 in an earlier one.
    total += x * ((w.c0 * e0 + w.c1 * e1) * std::conj(prior0) + w.c2 * e0 * std::conj(prior1));

    // Both times inside this piece: substitute t1 = a + u, t1 - t2 = s.
    const double theta = delta * h;
    const double kk = w.c0 + (w.c1 + w.c2) * p.start;
    const double ll = w.c1 + w.c2;
    const cplx diag = (kk * h + 0.5 * ll * h * h) * h * unit_moment(0, theta) -
                      (kk + w.c2 * h) * h * h * unit_moment(1, theta) +
                      (w.c2 - 0.5 * ll) * h * h * h * unit_moment(2, theta);
    total += x * x * diag;

    prior0 += x * e0;
    prior1 += x * e1;
  }
  return total;
}

} // namespace msforge
