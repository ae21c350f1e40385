#include "msforge/circuits.hpp"

#include "msforge/errors.hpp"
#include "msforge/magnus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace msforge {

GateAlgebra GateAlgebra::two_qubit(double angle) {
  GateAlgebra g;
  g.target = pauli::kron(pauli::x(), pauli::x());
  g.error = 0.5 * (pauli::embed(pauli::z(), 0, 2) + pauli::embed(pauli::z(), 1, 2));
  g.angle = angle;
  return g;
}

QubitMatrix expi_hermitian(const QubitMatrix& a) {
  const QubitMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<QubitMatrix> es(h);
  const Eigen::VectorXcd phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

QubitMatrix generator_kg(double angle, const QubitMatrix& target, const QubitMatrix& error) {
  const QubitMatrix anti = target * error + error * target;
  if (anti.cwiseAbs().maxCoeff() >= 1e-14) throw PreconditionError("generator and error operator do not anticommute");
  if (error.isZero(0.0)) return QubitMatrix::Zero(error.rows(), error.cols());
  if (angle == 0.0) return error; // limit Theta -> 0
  const QubitMatrix id = QubitMatrix::Identity(target.rows(), target.cols());
  const QubitMatrix rotation = expi_hermitian(2.0 * angle * target);
  return target.inverse() * (rotation - id) * error / cplx(0.0, 2.0 * angle);
}

QubitMatrix algebra_gate(const GateAlgebra& g, double angle, double error_level) {
  return expi_hermitian(angle * g.target - error_level * g.error);
}

std::string to_string(PiKind k) {
  switch (k) {
  case PiKind::ideal:
    return "ideal";
  case PiKind::naive:
    return "naive";
  case PiKind::supcode:
    return "supcode";
  }
  return "ideal";
}

PiKind pi_kind_from_string(const std::string& s) {
  if (s == "ideal") return PiKind::ideal;
  if (s == "naive") return PiKind::naive;
  if (s == "supcode") return PiKind::supcode;
  throw ConfigError("unknown pi kind '" + s + "' (expected ideal, naive or supcode)");
}

std::string CircuitElement::waveform_ref() const {
  std::ostringstream os;
  os << "tau" << time_multiplier << (angle_sign > 0 ? "_pos" : "_neg");
  return os.str();
}

int GateCircuit::entangling_count() const {
  return static_cast<int>(std::count_if(elements.begin(), elements.end(),
                                        [](const CircuitElement& e) { return e.kind == CircuitElement::Kind::entangling; }));
}

int GateCircuit::total_time_multiplier() const {
  int total = 0;
  for (const auto& e : elements)
    if (e.kind == CircuitElement::Kind::entangling) total += e.time_multiplier;
  return total;
}

std::vector<std::pair<int, int>> GateCircuit::piece_kinds() const {
  std::set<std::pair<int, int>> kinds;
  for (const auto& e : elements)
    if (e.kind == CircuitElement::Kind::entangling) kinds.insert({e.time_multiplier, e.angle_sign});
  return {kinds.begin(), kinds.end()};
}

GateCircuit single_gate(double angle) {
  GateCircuit c;
  c.angle = angle;
  c.elements.push_back({CircuitElement::Kind::entangling, 1, 1, PiKind::ideal});
  return c;
}

namespace {

// Symbolic piece U_{m e}(Theta), or its adjoint realised as Pi U_{m e}(-Theta) Pi.
struct Symbol {
  int multiplier;
  bool adjoint;
};

std::vector<Symbol> unroll(int level, int multiplier) {
  if (level == 0) return {{multiplier, false}};
  const std::vector<Symbol> outer = unroll(level - 1, multiplier);
  std::vector<Symbol> inner = unroll(level - 1, 2 * multiplier);
  std::reverse(inner.begin(), inner.end());
  for (Symbol& s : inner) s.adjoint = !s.adjoint;
  std::vector<Symbol> out = outer;
  out.insert(out.end(), inner.begin(), inner.end());
  out.insert(out.end(), outer.begin(), outer.end());
  return out;
}

} // namespace

GateCircuit gbc_recursive(double angle, int level, PiKind pi) {
  if (level < 1 || level > 3) throw ConfigError("GBC level must be between 1 and 3");
  GateCircuit c;
  c.angle = angle;
  c.level = level;
  for (const Symbol& s : unroll(level, 1)) {
    if (!s.adjoint) {
      c.elements.push_back({CircuitElement::Kind::entangling, s.multiplier, 1, pi});
      continue;
    }
    c.elements.push_back({CircuitElement::Kind::pi, 0, 0, pi});
    c.elements.push_back({CircuitElement::Kind::entangling, s.multiplier, -1, pi});
    c.elements.push_back({CircuitElement::Kind::pi, 0, 0, pi});
  }
  return c;
}

GateCircuit gbc_compose(double angle, PiKind pi) { return gbc_recursive(angle, 1, pi); }

nlohmann::json to_json(const GateCircuit& c) {
  nlohmann::json j;
  j["level"] = c.level;
  j["angle"] = c.angle;
  j["entangling_pieces"] = c.entangling_count();
  auto arr = nlohmann::json::array();
  for (const auto& e : c.elements) {
    if (e.kind == CircuitElement::Kind::entangling) {
      arr.push_back({{"kind", "entangling"},
                     {"waveform_ref", e.waveform_ref()},
                     {"time_multiplier", e.time_multiplier},
                     {"angle", e.angle_sign * c.angle}});
    } else {
      arr.push_back({{"kind", "pi"}, {"pi_kind", to_string(e.pi)}});
    }
  }
  j["elements"] = arr;
  return j;
}

QubitMatrix algebra_circuit(const GateCircuit& c, const GateAlgebra& g, double error_level) {
  const QubitMatrix pi = pauli::kron(pauli::x(), pauli::x());
  QubitMatrix u = QubitMatrix::Identity(4, 4);
  for (const auto& e : c.elements) {
    if (e.kind == CircuitElement::Kind::pi) {
      u = pi * u;
    } else {
      u = algebra_gate(g, e.angle_sign * c.angle, e.time_multiplier * error_level) * u;
    }
  }
  return u;
}

const Waveform& WaveformBank::at(int multiplier, int sign) const {
  const auto it = pieces.find({multiplier, sign});
  if (it == pieces.end()) {
    std::ostringstream os;
    os << "no waveform for time multiplier " << multiplier << " and angle sign " << sign;
    throw ConfigError(os.str());
  }
  return it->second;
}

WaveformBank synthesize_bank(const ModeSpectrum& modes, const GbcDesign& design, const GateCircuit& circuit,
                             IonPair ions) {
  WaveformBank bank;
  for (const auto& [mult, sign] : circuit.piece_kinds()) {
    const double wd = sign > 0 ? design.drive_detuning : design.reverse_drive_detuning;
    const SynthesisProblem p = build_problem(modes, mult * design.gate_time, wd, design.n_seg, true, ions);
    bank.add(mult, sign, synthesize(p, sign * design.angle).waveform);
  }
  return bank;
}

std::string to_string(Engine e) { return e == Engine::magnus ? "magnus" : "exact"; }

Engine engine_from_string(const std::string& s) {
  if (s == "magnus") return Engine::magnus;
  if (s == "exact") return Engine::exact;
  throw ConfigError("unknown engine '" + s + "' (expected magnus or exact)");
}

QubitMatrix pi_gate(PiKind kind, const NoiseParams& noise, double pi_rabi) {
  switch (kind) {
  case PiKind::ideal: {
    const QubitMatrix p = drive_axis(noise.spin_phase);
    return pauli::kron(p, p);
  }
  case PiKind::naive:
    return naive_pi_gate(pi_rabi, noise.asym_shift);
  case PiKind::supcode: {
    const QubitMatrix x = supcode_x(pi_rabi, noise.asym_shift);
    return pauli::kron(x, x);
  }
  }
  return QubitMatrix::Identity(4, 4);
}

void apply_qubit_op(const HilbertLayout& layout, const QubitMatrix& op, Eigen::MatrixXcd& cols) {
  const Eigen::Index np = layout.phonon_dim();
  const int nq = layout.qubit_dim();
  Eigen::MatrixXcd tmp(np, nq);
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Eigen::Map<Eigen::MatrixXcd> psi(cols.col(c).data(), np, nq);
    tmp.noalias() = psi * op.transpose();
    psi = tmp;
  }
}

QubitChannel simulate_circuit(const GateCircuit& c, const WaveformBank& bank, const ModeSpectrum& modes,
                              const NoiseParams& noise, IonPair ions, const SimulationSettings& settings) {
  const HilbertLayout layout(2, modes.mode_count(), settings.fock_cutoff);
  QubitChannel ch{layout, layout.vacuum_columns(), to_string(settings.engine)};
  for (const auto& e : c.elements) {
    if (e.kind == CircuitElement::Kind::pi) {
      apply_qubit_op(layout, pi_gate(e.pi, noise, settings.pi_rabi), ch.columns);
      continue;
    }
    const Waveform& w = bank.at(e.time_multiplier, e.angle_sign);
    if (settings.engine == Engine::magnus) {
      magnus2_apply(w, modes, noise, ions, layout, ch.columns);
    } else {
      propagate_columns(w, modes, noise, ions, layout, ch.columns, settings.exact);
    }
  }
  return ch;
}

QubitMatrix ideal_gate(double angle, const NoiseParams& noise) {
  const QubitMatrix p = drive_axis(noise.spin_phase);
  return expi_hermitian(angle * pauli::kron(p, p));
}

} // namespace msforge
