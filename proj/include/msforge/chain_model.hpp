#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace msforge {

/// Linear Paul-trap ion chain. Exactly one of `axial_freq` or
/// `two_ion_spacing` must be given; the spacing form is only valid for two ions.
struct ChainSpec {
  int ion_count = 2;
  double ion_mass = 0.0;          // kg
  double radial_freq = 0.0;       // rad/s
  std::optional<double> axial_freq;      // rad/s
  std::optional<double> two_ion_spacing; // m
  double laser_wavevector = 0.0;  // rad/m
  /// When set, the highest-frequency mode gets this Lamb-Dicke parameter and
  /// the others scale as sqrt(omega_1 / omega_m).
  std::optional<double> eta_override;
};

/// Transverse normal modes, sorted by descending frequency.
struct ModeSpectrum {
  std::vector<double> mode_freqs;   // rad/s
  Eigen::MatrixXd couplings;        // b(j, m): rows ions, columns modes
  std::vector<double> lamb_dicke;

  int mode_count() const { return static_cast<int>(mode_freqs.size()); }
  int ion_count() const { return static_cast<int>(couplings.rows()); }
  /// delta_m = omega_m - omega_d
  std::vector<double> detunings(double drive_detuning) const;
};

/// Symmetric/asymmetric frequency errors plus the laser phase convention.
struct NoiseParams {
  double sym_shift = 0.0;   // rad/s, moves every delta_m -> delta_m - sym_shift
  double asym_shift = 0.0;  // rad/s, level drift minus laser drift
  double spin_phase = std::numbers::pi / 2;
  double motional_phase = std::numbers::pi;

  static NoiseParams from_sources(double sym_shift, double level_shift, double laser_shift) {
    return NoiseParams{sym_shift, level_shift - laser_shift};
  }
  /// Converts red/blue laser phases to spin/motional phases.
  NoiseParams& with_laser_phases(double phi_red, double phi_blue) {
    spin_phase = 0.5 * (phi_red + phi_blue);
    motional_phase = 0.5 * (phi_red - phi_blue);
    return *this;
  }
};

/// Axial COM frequency, derived from the two-ion spacing when given.
double axial_frequency(const ChainSpec& spec);

/// Axial equilibrium positions in metres, ascending.
std::vector<double> equilibrium_positions(const ChainSpec& spec);

/// Transverse modes (frequencies and couplings); lamb_dicke is filled as well.
ModeSpectrum normal_modes(const ChainSpec& spec);

std::vector<double> lamb_dicke(const ChainSpec& spec, std::span<const double> mode_freqs);

/// Dimensionless equilibrium positions in units of (e^2 / (4 pi eps0 M w_z^2))^(1/3).
std::vector<double> normalized_equilibrium(int ion_count);

void validate(const ChainSpec& spec);

} // namespace msforge
