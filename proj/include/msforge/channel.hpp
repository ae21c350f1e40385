#pragma once

#include "msforge/hilbert.hpp"

#include <string>
#include <vector>

namespace msforge {

/// Qubit channel obtained by propagating |q> (x) |vac> and tracing the phonons.
/// Kraus operator n has entries K_n(q', q) = <q', n| U |q, vac>.
struct QubitChannel {
  HilbertLayout layout;
  Eigen::MatrixXcd columns; // dimension x 2^qubits
  std::string engine;

  static QubitChannel identity(const HilbertLayout& layout, std::string engine = "identity");
  /// Channel of a qubit unitary with phonons left in vacuum (algebra-level).
  static QubitChannel from_unitary(const QubitMatrix& u);

  std::vector<Eigen::MatrixXcd> kraus() const;
  /// max |sum_n K_n^dag K_n - I|
  double completeness_error() const;
};

} // namespace msforge
