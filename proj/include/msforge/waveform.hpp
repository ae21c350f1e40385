#pragma once

#include "msforge/segment_integrals.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace msforge {

/// Piecewise-constant Rabi amplitude on uniform segments of width tau / N_seg.
struct Waveform {
  std::vector<double> segment_amplitudes; // rad/s, may be negative
  double gate_time = 0.0;                 // s
  double drive_detuning = 0.0;            // rad/s
  bool symmetric = false;
  std::vector<double> detunings;          // delta_m = omega_m - omega_d, rad/s

  int segment_count() const { return static_cast<int>(segment_amplitudes.size()); }
  double segment_width() const { return gate_time / segment_count(); }
  double peak_rabi() const;
  double amplitude_at(double t) const;

  /// Pieces covering [0, min(t, tau)].
  std::vector<Piece> pieces(double t) const;
  std::vector<Piece> pieces() const { return pieces(gate_time); }

  static Waveform zero(int n_seg, double tau, double drive_detuning = 0.0);
};

nlohmann::json to_json(const Waveform& w);
Waveform waveform_from_json(const nlohmann::json& j);

/// Two-column step-plot table: t_start_s, omega_rad_s (one row per segment
/// plus a closing row at tau).
std::string waveform_csv(const Waveform& w);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace msforge
