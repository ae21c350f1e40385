#include "msforge/chain_model.hpp"

#include "msforge/errors.hpp"
#include "msforge/units.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msforge {

std::vector<double> ModeSpectrum::detunings(double drive_detuning) const {
  std::vector<double> out(mode_freqs.size());
  std::transform(mode_freqs.begin(), mode_freqs.end(), out.begin(),
                 [&](double w) { return w - drive_detuning; });
  return out;
}

void validate(const ChainSpec& spec) {
  if (spec.ion_count < 1) throw ConfigError("ion_count must be >= 1");
  if (!(spec.ion_mass > 0.0)) throw ConfigError("ion mass must be positive");
  if (!(spec.laser_wavevector > 0.0)) throw ConfigError("laser wavevector must be positive");
  if (spec.axial_freq.has_value() == spec.two_ion_spacing.has_value()) {
    throw ConfigError("exactly one of axial frequency or two-ion spacing must be given");
  }
  if (spec.two_ion_spacing && spec.ion_count != 2) {
    throw ConfigError("two-ion spacing is only meaningful for ion_count = 2");
  }
  if (spec.two_ion_spacing && !(*spec.two_ion_spacing > 0.0)) {
    throw ConfigError("ion spacing must be positive");
  }
  if (spec.eta_override && !(*spec.eta_override > 0.0)) {
    throw ConfigError("eta_override must be positive");
  }
  const double wz = axial_frequency(spec);
  if (!(wz > 0.0) || !(spec.radial_freq > wz)) {
    throw ConfigError("trap frequencies must satisfy radial > axial > 0");
  }
}

double axial_frequency(const ChainSpec& spec) {
  if (spec.axial_freq) return *spec.axial_freq;
  if (!spec.two_ion_spacing) return 0.0;
  const double d = *spec.two_ion_spacing;
  const double e2 = constants::elementary_charge * constants::elementary_charge;
  return std::sqrt(e2 / (2.0 * std::numbers::pi * constants::vacuum_permittivity * spec.ion_mass * d * d * d));
}

std::vector<double> normalized_equilibrium(int n) {
  if (n < 1) throw ConfigError("ion_count must be >= 1");
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  if (n == 1) return u;

  // Force balance u_i = sum_{j<i} 1/(u_i-u_j)^2 - sum_{j>i} 1/(u_i-u_j)^2,
  // solved by damped Newton from an evenly spaced start.
  const double half_span = 1.0 * std::pow(static_cast<double>(n), 0.56);
  for (int i = 0; i < n; ++i) u[i] = -half_span + 2.0 * half_span * i / (n - 1);

  auto residual = [n](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      double f = x[i];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = x[i] - x[j];
        f -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      r[i] = f;
    }
    return r;
  };

  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(u.data(), n);
  Eigen::VectorXd r = residual(x);
  int iter = 0;
  constexpr int max_iter = 200;
  for (; iter < max_iter && r.lpNorm<Eigen::Infinity>() >= 1e-13; ++iter) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double c = 2.0 / std::pow(std::abs(x[i] - x[j]), 3);
        jac(i, i) += c;
        jac(i, j) -= c;
      }
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(r);
    double scale = 1.0;
    for (int k = 0; k < 40; ++k, scale *= 0.5) {
      Eigen::VectorXd trial = x - scale * step;
      bool ordered = true;
      for (int i = 1; i < n; ++i) ordered = ordered && trial[i] > trial[i - 1];
      if (!ordered) continue;
      const Eigen::VectorXd rt = residual(trial);
      if (rt.norm() < r.norm() || k == 39) {
        x = trial;
        r = rt;
        break;
      }
    }
  }
  if (r.lpNorm<Eigen::Infinity>() >= 1e-12) {
    std::ostringstream os;
    os << "equilibrium solve did not converge after " << iter << " iterations, residual "
       << r.lpNorm<Eigen::Infinity>();
    throw ConvergenceError(os.str());
  }
  for (int i = 0; i < n; ++i) u[i] = x[i];
  return u;
}

std::vector<double> equilibrium_positions(const ChainSpec& spec) {
  validate(spec);
  const double wz = axial_frequency(spec);
  const double e2 = constants::elementary_charge * constants::elementary_charge;
  const double length =
      std::cbrt(e2 / (4.0 * std::numbers::pi * constants::vacuum_permittivity * spec.ion_mass * wz * wz));
  auto u = normalized_equilibrium(spec.ion_count);
  for (double& v : u) v *= length;
  return u;
}

ModeSpectrum normal_modes(const ChainSpec& spec) {
  validate(spec);
  const int n = spec.ion_count;
  const double wz = axial_frequency(spec);
  const auto u = normalized_equilibrium(n);
  const double ratio2 = (spec.radial_freq / wz) * (spec.radial_freq / wz);

  // Transverse Hessian in units of M w_z^2.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = ratio2;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 1.0 / std::pow(std::abs(u[i] - u[j]), 3);
      k(i, i) -= c;
      k(i, j) += c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::VectorXd& ev = es.eigenvalues(); // ascending

  ModeSpectrum out;
  out.mode_freqs.resize(n);
  out.couplings.resize(n, n);
  for (int m = 0; m < n; ++m) {
    const int src = n - 1 - m;
    if (!(ev[src] > 0.0)) {
      std::ostringstream os;
      os << "transverse mode " << m << " is unstable (omega^2 = " << ev[src] * wz * wz
         << " rad^2/s^2); increase the radial trap frequency";
      throw StabilityError(os.str());
    }
    out.mode_freqs[m] = wz * std::sqrt(ev[src]);
    Eigen::VectorXd v = es.eigenvectors().col(src);
    // Sign convention: first non-negligible component positive.
    for (int j = 0; j < n; ++j) {
      if (std::abs(v[j]) > 1e-9) {
        if (v[j] < 0) v = -v;
        break;
      }
    }
    out.couplings.col(m) = v;
  }
  // The COM eigenvalue is ratio2 exactly; pin it to avoid eigensolver roundoff.
  out.mode_freqs[0] = std::abs(ev[n - 1] - ratio2) < 1e-9 * ratio2 ? spec.radial_freq : out.mode_freqs[0];
  out.lamb_dicke = lamb_dicke(spec, out.mode_freqs);
  return out;
}

std::vector<double> lamb_dicke(const ChainSpec& spec, std::span<const double> mode_freqs) {
  std::vector<double> eta(mode_freqs.size());
  if (mode_freqs.empty()) return eta;
  for (double w : mode_freqs) {
    if (!(w > 0.0)) throw PreconditionError("Lamb-Dicke parameter needs positive mode frequencies");
  }
  if (spec.eta_override) {
    const double w1 = mode_freqs.front();
    for (std::size_t m = 0; m < mode_freqs.size(); ++m) {
      eta[m] = *spec.eta_override * std::sqrt(w1 / mode_freqs[m]);
    }
    return eta;
  }
  for (std::size_t m = 0; m < mode_freqs.size(); ++m) {
    eta[m] = spec.laser_wavevector * std::sqrt(constants::hbar / (2.0 * spec.ion_mass * mode_freqs[m]));
  }
  return eta;
}

} // namespace msforge
