#pragma once

#include "msforge/channel.hpp"
#include "msforge/chain_model.hpp"
#include "msforge/dynamics.hpp"
#include "msforge/pulse_synth.hpp"

#include <json.hpp>

#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace msforge {

/// Target G, error operator E and angle of U_e = exp(i Theta G - i e E).
struct GateAlgebra {
  QubitMatrix target;
  QubitMatrix error;
  double angle = 0.0;

  /// G = sigma_x sigma_x, E = (sigma_z^1 + sigma_z^2) / 2.
  static GateAlgebra two_qubit(double angle);
};

/// exp(i A) for Hermitian A.
QubitMatrix expi_hermitian(const QubitMatrix& a);

/// K_G = G^{-1} (e^{2 i Theta G} - I) E / (2 i Theta); needs {G, E} = 0.
QubitMatrix generator_kg(double angle, const QubitMatrix& target, const QubitMatrix& error);

/// exp(i angle G - i e E)
QubitMatrix algebra_gate(const GateAlgebra& g, double angle, double error_level);

enum class PiKind { ideal, naive, supcode };

std::string to_string(PiKind k);
PiKind pi_kind_from_string(const std::string& s);

struct CircuitElement {
  enum class Kind { entangling, pi };
  Kind kind = Kind::entangling;
  int time_multiplier = 1; // entangling: duration multiplier of tau
  int angle_sign = 1;      // entangling: angle = angle_sign * Theta
  PiKind pi = PiKind::ideal;

  std::string waveform_ref() const;
};

struct GateCircuit {
  std::vector<CircuitElement> elements;
  double angle = 0.0;
  int level = 0;

  int entangling_count() const;
  /// Sum of the entangling durations in units of tau.
  int total_time_multiplier() const;
  /// Distinct (time multiplier, angle sign) pairs used by the circuit.
  std::vector<std::pair<int, int>> piece_kinds() const;
};

GateCircuit single_gate(double angle);
GateCircuit gbc_compose(double angle, PiKind pi = PiKind::ideal);
/// Level-k unrolled recursion U^(k+1)_e = U^(k)_e (U^(k)_2e)^dag U^(k)_e; 1 <= k <= 3.
GateCircuit gbc_recursive(double angle, int level, PiKind pi = PiKind::ideal);

nlohmann::json to_json(const GateCircuit& c);

/// Product of the circuit at algebra level (4x4, no phonons), ideal Pi.
QubitMatrix algebra_circuit(const GateCircuit& c, const GateAlgebra& g, double error_level);

/// Waveform design parameters for every piece of a circuit.
struct GbcDesign {
  double gate_time = 150e-6;
  double angle = 0.0;
  int n_seg = 16;
  double drive_detuning = 0.0;          // positive-angle pieces
  double reverse_drive_detuning = 0.0;  // negative-angle pieces
};

/// Robust waveforms keyed by (time multiplier, angle sign).
struct WaveformBank {
  std::map<std::pair<int, int>, Waveform> pieces;
  const Waveform& at(int multiplier, int sign) const;
  void add(int multiplier, int sign, Waveform w) { pieces[{multiplier, sign}] = std::move(w); }
};

WaveformBank synthesize_bank(const ModeSpectrum& modes, const GbcDesign& design, const GateCircuit& circuit,
                             IonPair ions = {});

enum class Engine { magnus, exact };
std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

struct SimulationSettings {
  Engine engine = Engine::magnus;
  int fock_cutoff = 10;
  ExactOptions exact;
  double pi_rabi = 2.0 * std::numbers::pi * 1e6; // rad/s, naive and composite Pi pulses
};

/// Qubit-side Pi element for the given kind and z error.
QubitMatrix pi_gate(PiKind kind, const NoiseParams& noise, double pi_rabi);

/// Applies a qubit operator to every column.
void apply_qubit_op(const HilbertLayout& layout, const QubitMatrix& op, Eigen::MatrixXcd& cols);

QubitChannel simulate_circuit(const GateCircuit& c, const WaveformBank& bank, const ModeSpectrum& modes,
                              const NoiseParams& noise, IonPair ions, const SimulationSettings& settings);

/// exp(i Theta P1 P2) for the noise spin phase (sigma_x sigma_x by default).
QubitMatrix ideal_gate(double angle, const NoiseParams& noise = {});

} // namespace msforge
