#pragma once

#include <numbers>
#include <string>
#include <string_view>

namespace msforge {

// CODATA 2018 values.
namespace constants {
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double calcium40_mass_amu = 39.962590863;
} // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Parses "<number> <unit>" into rad/s. Hz, kHz and MHz are cyclic and get
/// multiplied by 2*pi; rad/s, krad/s and Mrad/s are taken as angular.
/// A missing or unknown suffix throws ConfigError.
double parse_frequency(std::string_view text);

/// Formats an angular frequency with an explicit "rad/s" suffix, round-trip exact.
std::string format_frequency(double rad_per_s);

inline double hz_to_rad(double hz) { return two_pi * hz; }
inline double rad_to_hz(double rad_per_s) { return rad_per_s / two_pi; }

} // namespace msforge
