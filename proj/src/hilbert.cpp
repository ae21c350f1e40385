#include "msforge/hilbert.hpp"

#include "msforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msforge {

HilbertLayout::HilbertLayout(int qubit_count, int mode_count, int fock_cutoff)
    : qubits_(qubit_count), modes_(mode_count), cutoff_(fock_cutoff), phonon_dim_(1) {
  if (qubit_count < 1 || qubit_count > 8) throw PreconditionError("qubit count must be in [1, 8]");
  if (mode_count < 0) throw PreconditionError("mode count must be non-negative");
  if (fock_cutoff < 2) throw PreconditionError("Fock cutoff must be at least 2");
  strides_.assign(static_cast<std::size_t>(mode_count), 1);
  for (int m = mode_count - 1; m >= 0; --m) {
    strides_[static_cast<std::size_t>(m)] = phonon_dim_;
    phonon_dim_ *= fock_cutoff;
    if (phonon_dim_ > (std::int64_t{1} << 30)) throw PreconditionError("Hilbert space too large");
  }
}

std::int64_t HilbertLayout::index(int q, const std::vector<int>& fock) const {
  std::int64_t p = 0;
  for (int m = 0; m < modes_; ++m) p += fock[static_cast<std::size_t>(m)] * stride(m);
  return q * phonon_dim_ + p;
}

void HilbertLayout::decompose(std::int64_t flat, int& q, std::vector<int>& fock) const {
  q = static_cast<int>(flat / phonon_dim_);
  const std::int64_t p = flat % phonon_dim_;
  fock.resize(static_cast<std::size_t>(modes_));
  for (int m = 0; m < modes_; ++m) fock[static_cast<std::size_t>(m)] = occupation(p, m);
}

Eigen::MatrixXcd HilbertLayout::vacuum_columns() const {
  Eigen::MatrixXcd cols = Eigen::MatrixXcd::Zero(dimension(), qubit_dim());
  for (int q = 0; q < qubit_dim(); ++q) cols(q * phonon_dim_, q) = 1.0;
  return cols;
}

namespace pauli {

QubitMatrix identity(int n) { return QubitMatrix::Identity(1 << n, 1 << n); }

QubitMatrix x() {
  QubitMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

QubitMatrix y() {
  QubitMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

QubitMatrix z() {
  QubitMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

QubitMatrix kron(const QubitMatrix& a, const QubitMatrix& b) {
  QubitMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

QubitMatrix embed(const QubitMatrix& op, int k, int n) {
  QubitMatrix out = QubitMatrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, i == k ? op : QubitMatrix::Identity(2, 2));
  return out;
}

} // namespace pauli

SpinBosonOperator::SpinBosonOperator(const HilbertLayout& layout)
    : layout_(layout),
      spin_(QubitMatrix::Zero(layout.qubit_dim(), layout.qubit_dim())),
      number_(static_cast<std::size_t>(layout.mode_count()), 0.0),
      diagonal_(Eigen::VectorXcd::Zero(layout.phonon_dim())) {
  const Eigen::Index np = layout.phonon_dim();
  const int nc = layout.fock_cutoff();
  raise_.resize(static_cast<std::size_t>(layout.mode_count()));
  for (int m = 0; m < layout.mode_count(); ++m) {
    Eigen::VectorXcd& r = raise_[static_cast<std::size_t>(m)];
    r.resize(np);
    for (Eigen::Index p = 0; p < np; ++p) {
      const int n = layout.occupation(p, m);
      r(p) = n + 1 < nc ? std::sqrt(static_cast<double>(n + 1)) : 0.0;
    }
  }
}

void SpinBosonOperator::add_spin(const QubitMatrix& s) { spin_ += s; }

void SpinBosonOperator::add_number(int mode, double coeff) {
  number_[static_cast<std::size_t>(mode)] += coeff;
  for (Eigen::Index p = 0; p < diagonal_.size(); ++p) diagonal_(p) += coeff * layout_.occupation(p, mode);
}

void SpinBosonOperator::add_ladder(const QubitMatrix& spin, int mode, cplx coeff) {
  if (coeff == 0.0 || spin.isZero(0.0)) return;
  ladders_.push_back({spin, mode, coeff});
}

void SpinBosonOperator::apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const {
  const Eigen::Index np = layout_.phonon_dim();
  const int nq = layout_.qubit_dim();
  const bool has_diagonal = std::any_of(number_.begin(), number_.end(), [](double w) { return w != 0.0; });
  out.resize(in.rows(), in.cols());
  Eigen::MatrixXcd y(np, nq);
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    Eigen::Map<const Eigen::MatrixXcd> psi(in.col(c).data(), np, nq);
    Eigen::Map<Eigen::MatrixXcd> phi(out.col(c).data(), np, nq);
    phi.noalias() = psi * spin_.transpose();
    if (has_diagonal) phi += diagonal_.asDiagonal() * psi;
    for (const LadderTerm& t : ladders_) {
      y.noalias() = psi * t.spin.transpose();
      const Eigen::Index s = layout_.stride(t.mode);
      const Eigen::Index n = np - s;
      const auto r = raise_[static_cast<std::size_t>(t.mode)].head(n).array();
      for (int q = 0; q < nq; ++q) {
        phi.col(q).segment(s, n).array() += t.coeff * r * y.col(q).head(n).array();
        phi.col(q).head(n).array() += std::conj(t.coeff) * r * y.col(q).segment(s, n).array();
      }
    }
  }
}

double SpinBosonOperator::norm_bound() const {
  const double ladder_scale = 2.0 * std::sqrt(static_cast<double>(layout_.fock_cutoff() - 1));
  double bound = spin_.norm();
  for (std::size_t m = 0; m < number_.size(); ++m) bound += std::abs(number_[m]) * (layout_.fock_cutoff() - 1);
  for (const LadderTerm& t : ladders_) bound += t.spin.norm() * std::abs(t.coeff) * ladder_scale;
  return bound;
}

bool SpinBosonOperator::is_hermitian(double tol) const {
  const double scale = std::max(1.0, spin_.cwiseAbs().maxCoeff());
  if ((spin_ - spin_.adjoint()).cwiseAbs().maxCoeff() > tol * scale) return false;
  for (const LadderTerm& t : ladders_) {
    if ((t.spin - t.spin.adjoint()).cwiseAbs().maxCoeff() > tol * std::max(1.0, t.spin.cwiseAbs().maxCoeff())) {
      return false;
    }
  }
  return true;
}

std::pair<double, double> SpinBosonOperator::spectral_bounds() const {
  // ||a|| = sqrt(N_c - 1) on the truncated space
  const double ladder_scale = 2.0 * std::sqrt(static_cast<double>(layout_.fock_cutoff() - 1));
  const Eigen::SelfAdjointEigenSolver<QubitMatrix> es(0.5 * (spin_ + spin_.adjoint()), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  const Eigen::VectorXd d = diagonal_.real();
  lo += d.minCoeff();
  hi += d.maxCoeff();
  double off = 0.0;
  for (const LadderTerm& t : ladders_) {
    const Eigen::JacobiSVD<QubitMatrix> svd(t.spin);
    off += svd.singularValues()(0) * std::abs(t.coeff) * ladder_scale;
  }
  return {lo - off, hi + off};
}

Eigen::MatrixXcd SpinBosonOperator::to_dense() const {
  const Eigen::Index d = layout_.dimension();
  if (d > 4096) throw PreconditionError("dense operator requested above dimension 4096");
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd out;
  apply(id, out);
  return out;
}

namespace {

// exp(i theta H) via the Jacobi-Anger series in Chebyshev polynomials of the
// spectrum mapped onto [-1, 1].
void chebyshev_exponential(const SpinBosonOperator& h, double theta, Eigen::MatrixXcd& cols, double tol) {
  const auto [lo, hi] = h.spectral_bounds();
  const double centre = 0.5 * (hi + lo);
  const double radius = 0.5 * (hi - lo);
  const cplx shift = std::polar(1.0, theta * centre);
  if (radius <= 0.0) {
    cols *= shift;
    return;
  }
  const double x = std::abs(theta) * radius;
  const cplx unit(0.0, theta >= 0.0 ? 1.0 : -1.0);

  std::vector<cplx> coeff{std::cyl_bessel_j(0.0, x)};
  cplx ik = 1.0;
  int small = 0;
  for (int k = 1; small < 2; ++k) {
    ik *= unit;
    const double j = std::cyl_bessel_j(static_cast<double>(k), x);
    coeff.push_back(2.0 * ik * j);
    small = (k > x && std::abs(j) < tol) ? small + 1 : 0;
    if (k > 100000) throw ConvergenceError("Chebyshev series did not converge");
  }

  auto mapped = [&](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
    h.apply(in, out);
    out = (out - centre * in) / radius;
  };
  Eigen::MatrixXcd t0 = cols;
  Eigen::MatrixXcd t1;
  Eigen::MatrixXcd t2;
  mapped(t0, t1);
  Eigen::MatrixXcd acc = coeff[0] * t0 + coeff[1] * t1;
  for (std::size_t k = 2; k < coeff.size(); ++k) {
    mapped(t1, t2);
    t2 = 2.0 * t2 - t0;
    acc += coeff[k] * t2;
    std::swap(t0, t1);
    std::swap(t1, t2);
  }
  cols = shift * acc;
}

} // namespace

void apply_exponential(const SpinBosonOperator& h, cplx factor, Eigen::MatrixXcd& cols, double tol) {
  if (factor.real() == 0.0 && h.is_hermitian()) {
    chebyshev_exponential(h, factor.imag(), cols, tol);
    return;
  }
  const double scale = std::abs(factor) * h.norm_bound();
  if (scale == 0.0) return;
  const int substeps = std::max(1, static_cast<int>(std::ceil(scale / 2.0)));
  const cplx f = factor / static_cast<double>(substeps);
  Eigen::MatrixXcd term;
  Eigen::MatrixXcd next;
  for (int s = 0; s < substeps; ++s) {
    term = cols;
    const double ref = std::max(cols.cwiseAbs().maxCoeff(), 1e-300);
    bool converged = false;
    for (int k = 1; k <= 80; ++k) {
      h.apply(term, next);
      term.noalias() = (f / static_cast<double>(k)) * next;
      cols += term;
      // Two consecutive small terms guard against an accidental near-zero one.
      if (term.cwiseAbs().maxCoeff() <= tol * ref) {
        if (converged) break;
        converged = true;
      } else {
        converged = false;
      }
    }
  }
}

double truncation_tail(const HilbertLayout& layout, const Eigen::MatrixXcd& cols) {
  const Eigen::Index np = layout.phonon_dim();
  const int nc = layout.fock_cutoff();
  double tail = 0.0;
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    for (Eigen::Index i = 0; i < cols.rows(); ++i) {
      const Eigen::Index p = i % np;
      bool high = false;
      for (int m = 0; m < layout.mode_count() && !high; ++m) high = layout.occupation(p, m) >= nc - 2;
      if (high) tail += std::norm(cols(i, c));
    }
  }
  return cols.cols() > 0 ? tail / static_cast<double>(cols.cols()) : 0.0;
}

} // namespace msforge
