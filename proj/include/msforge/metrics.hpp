#pragma once

#include "msforge/channel.hpp"
#include "msforge/circuits.hpp"
#include "msforge/magnus.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace msforge {

/// sum_n |Tr(ideal^dag K_n)|^2 / d^2
double process_fidelity(const QubitChannel& ch, const QubitMatrix& ideal);

/// (d F_pro + 1) / (d + 1); throws when the Kraus family is incomplete (> 1e-9).
double avg_gate_fidelity(const QubitChannel& ch, const QubitMatrix& ideal);

/// 1 - F_avg of a unitary against an ideal unitary, from the eigenphases of
/// ideal^dag u so that values far below machine epsilon stay resolved.
double unitary_infidelity(const QubitMatrix& u, const QubitMatrix& ideal);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least squares of log y on log x over points with x, y > 0 and x in [lo, hi].
LogLogFit loglog_fit(std::span<const double> x, std::span<const double> y, double lo = 0.0,
                     double hi = std::numeric_limits<double>::infinity());

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written by index.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

enum class Scheme { nonrobust, robust, gbc };
std::string to_string(Scheme s);
inline constexpr Scheme all_schemes[] = {Scheme::nonrobust, Scheme::robust, Scheme::gbc};

struct DriveDesign {
  double gate_time = 150e-6;
  double drive_detuning = 0.0;
  double reverse_drive_detuning = 0.0;
  double angle = std::numbers::pi / 4;
  int n_seg_robust = 16;
  int n_seg_nonrobust = 15;
  int gbc_level = 1;
  PiKind pi = PiKind::ideal;
};

struct SchemeSet {
  Waveform nonrobust;
  Waveform robust;
  GateCircuit gbc;
  WaveformBank gbc_bank;
  double angle = 0.0;
  IonPair ions;
};

SchemeSet design_schemes(const ModeSpectrum& modes, const DriveDesign& design, IonPair ions = {});

QubitChannel scheme_channel(const SchemeSet& set, Scheme s, const ModeSpectrum& modes, const NoiseParams& noise,
                            const SimulationSettings& settings);

double scheme_infidelity(const SchemeSet& set, Scheme s, const ModeSpectrum& modes, const NoiseParams& noise,
                         const SimulationSettings& settings);

/// n points evenly spaced over [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int n);

struct SweepResult {
  std::vector<double> axis; // asymmetric shift, rad/s
  std::vector<std::vector<double>> infidelity; // [scheme][point], scheme order nonrobust, robust, gbc
  std::vector<std::vector<double>> tail;       // final population in the top two Fock levels
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  LogLogFit delta_fit; // F_gbc - F_robust against |dw|
  LogLogFit nonrobust_fit;
  LogLogFit robust_fit;
  LogLogFit gbc_fit;
  std::string engine;

  const std::vector<double>& of(Scheme s) const { return infidelity[static_cast<std::size_t>(s)]; }
};

SweepResult sweep_asymmetric(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& grid,
                             const SimulationSettings& settings, int jobs = 1, const NoiseParams& base = {},
                             double fit_lo = 100.0, double fit_hi = 1000.0);

/// Rows dw_hz, infid_nonrobust, infid_robust, infid_gbc (dw_hz = dw / 2pi).
std::string sweep_csv(const SweepResult& r);
nlohmann::json to_json(const SweepResult& r);

struct ContourResult {
  std::vector<double> sym_axis;  // rad/s
  std::vector<double> asym_axis; // rad/s
  std::vector<Eigen::MatrixXd> infidelity; // [scheme](i_sym, j_asym)
  std::string engine;

  const Eigen::MatrixXd& of(Scheme s) const { return infidelity[static_cast<std::size_t>(s)]; }
};

ContourResult contour_grid(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& sym_grid,
                           const std::vector<double>& asym_grid, const SimulationSettings& settings, int jobs = 1);

/// First crossing of `threshold` moving outward from 0 along the non-negative
/// part of the axis, log-log interpolated. NaN when never crossed.
double threshold_crossing(std::span<const double> axis, std::span<const double> values, double threshold);

struct SchemeCrossings {
  double asymmetric = 0.0; // along dw at dws = 0
  double symmetric = 0.0;  // along dws at dw = 0
  double max_within = 0.0; // max infidelity over |dws|, |dw| <= radius
};

SchemeCrossings contour_crossings(const ContourResult& r, Scheme s, double threshold, double radius);

/// Rows scheme, dws_hz, dwa_hz, infid.
std::string contour_csv(const ContourResult& r);
nlohmann::json to_json(const ContourResult& r, double threshold, double radius);

struct ClosureMetrics {
  double alpha_end = 0.0;
  double alpha_diameter = 0.0;
  double beta_end = 0.0;
  double beta_diameter = 0.0;
};

/// Per mode, on eta_m alpha_m and dw eta_m beta_m.
std::vector<ClosureMetrics> trajectory_closure(const TrajectoryRecord& rec, const ModeSpectrum& modes,
                                               const NoiseParams& noise);

/// t_s, mode, re_alpha, im_alpha, re_beta, im_beta, theta with '#' closure lines.
std::string trajectory_csv(const TrajectoryRecord& rec, const ModeSpectrum& modes, const NoiseParams& noise);

void trajectory_export(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                       const std::filesystem::path& path, int samples = 501);

/// Three-scheme asymmetric sweep on a three-ion chain, column-wise exact propagation.
SweepResult three_ion_sweep(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& grid,
                            const SimulationSettings& settings, int jobs = 1, double fit_lo = 100.0,
                            double fit_hi = 1000.0);

} // namespace msforge
