#pragma once

#include "msforge/segment_integrals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace msforge {

/// Qubits tensored with truncated Fock spaces. Flat index = q * phonon_dim + p,
/// with p the mixed-radix phonon index (last mode fastest). Qubit 0 is the
/// most significant bit of q.
class HilbertLayout {
public:
  HilbertLayout(int qubit_count, int mode_count, int fock_cutoff);

  int qubit_count() const { return qubits_; }
  int mode_count() const { return modes_; }
  int fock_cutoff() const { return cutoff_; }
  int qubit_dim() const { return 1 << qubits_; }
  std::int64_t phonon_dim() const { return phonon_dim_; }
  std::int64_t dimension() const { return phonon_dim_ * qubit_dim(); }
  std::int64_t stride(int mode) const { return strides_[static_cast<std::size_t>(mode)]; }

  std::int64_t index(int q, const std::vector<int>& fock) const;
  void decompose(std::int64_t flat, int& q, std::vector<int>& fock) const;
  int occupation(std::int64_t phonon_index, int mode) const {
    return static_cast<int>((phonon_index / stride(mode)) % cutoff_);
  }

  /// Columns |q> (x) |vac> for every qubit basis state q.
  Eigen::MatrixXcd vacuum_columns() const;

private:
  int qubits_;
  int modes_;
  int cutoff_;
  std::int64_t phonon_dim_;
  std::vector<std::int64_t> strides_;
};

using QubitMatrix = Eigen::MatrixXcd;

namespace pauli {
QubitMatrix identity(int n);
QubitMatrix x();
QubitMatrix y();
QubitMatrix z();
/// Single-qubit operator `op` acting on qubit k of n.
QubitMatrix embed(const QubitMatrix& op, int k, int n);
QubitMatrix kron(const QubitMatrix& a, const QubitMatrix& b);
} // namespace pauli

/// spin (x) (coeff a_m^dag + conj(coeff) a_m)
struct LadderTerm {
  QubitMatrix spin;
  int mode = 0;
  cplx coeff = 0.0;
};

/// Sum of spin-only, number-operator and ladder terms.
class SpinBosonOperator {
public:
  explicit SpinBosonOperator(const HilbertLayout& layout);

  const HilbertLayout& layout() const { return layout_; }

  void add_spin(const QubitMatrix& s);
  void add_number(int mode, double coeff);
  void add_ladder(const QubitMatrix& spin, int mode, cplx coeff);

  /// out = H * in, column by column.
  void apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
  double norm_bound() const;
  /// Interval containing the spectrum (Weyl bound), valid when is_hermitian().
  std::pair<double, double> spectral_bounds() const;
  bool is_hermitian(double tol = 1e-12) const;
  Eigen::MatrixXcd to_dense() const;

  const QubitMatrix& spin_part() const { return spin_; }
  const std::vector<LadderTerm>& ladders() const { return ladders_; }
  const std::vector<double>& number_coeffs() const { return number_; }

private:
  HilbertLayout layout_;
  QubitMatrix spin_;
  std::vector<double> number_;
  std::vector<LadderTerm> ladders_;
  Eigen::VectorXcd diagonal_;             // number terms summed over modes
  std::vector<Eigen::VectorXcd> raise_;  // sqrt(n_m + 1), zero on the top level
};

/// cols <- exp(factor * H) cols. Purely imaginary factors on a Hermitian H use a
/// Chebyshev expansion; anything else a substepped Taylor series.
void apply_exponential(const SpinBosonOperator& h, cplx factor, Eigen::MatrixXcd& cols, double tol = 1e-16);

/// Population in Fock levels >= N_c - 2 of any mode, summed over columns and
/// normalised by the column count.
double truncation_tail(const HilbertLayout& layout, const Eigen::MatrixXcd& cols);

} // namespace msforge
