#include "msforge/metrics.hpp"

#include "msforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace msforge {

QubitChannel QubitChannel::identity(const HilbertLayout& layout, std::string engine) {
  return QubitChannel{layout, layout.vacuum_columns(), std::move(engine)};
}

QubitChannel QubitChannel::from_unitary(const QubitMatrix& u) {
  int q = 0;
  while ((1 << q) < u.rows()) ++q;
  const HilbertLayout layout(q, 0, 2);
  return QubitChannel{layout, u, "unitary"};
}

std::vector<Eigen::MatrixXcd> QubitChannel::kraus() const {
  const Eigen::Index np = layout.phonon_dim();
  const int nq = layout.qubit_dim();
  std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(np), Eigen::MatrixXcd(nq, nq));
  for (Eigen::Index n = 0; n < np; ++n)
    for (int qp = 0; qp < nq; ++qp)
      for (int q = 0; q < nq; ++q) out[static_cast<std::size_t>(n)](qp, q) = columns(qp * np + n, q);
  return out;
}

double QubitChannel::completeness_error() const {
  const Eigen::MatrixXcd gram = columns.adjoint() * columns;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double process_fidelity(const QubitChannel& ch, const QubitMatrix& ideal) {
  const Eigen::Index np = ch.layout.phonon_dim();
  const int nq = ch.layout.qubit_dim();
  if (ideal.rows() != nq || ideal.cols() != nq) throw PreconditionError("ideal gate dimension does not match channel");
  double sum = 0.0;
  for (Eigen::Index n = 0; n < np; ++n) {
    cplx tr = 0.0;
    for (int qp = 0; qp < nq; ++qp)
      for (int q = 0; q < nq; ++q) tr += std::conj(ideal(qp, q)) * ch.columns(qp * np + n, q);
    sum += std::norm(tr);
  }
  return sum / (static_cast<double>(nq) * nq);
}

double avg_gate_fidelity(const QubitChannel& ch, const QubitMatrix& ideal) {
  const double err = ch.completeness_error();
  if (err > 1e-9) {
    std::ostringstream os;
    os << "Kraus completeness violated by " << err;
    throw ConvergenceError(os.str());
  }
  const double d = ch.layout.qubit_dim();
  return (d * process_fidelity(ch, ideal) + 1.0) / (d + 1.0);
}

double unitary_infidelity(const QubitMatrix& u, const QubitMatrix& ideal) {
  const QubitMatrix v = ideal.adjoint() * u;
  Eigen::ComplexEigenSolver<QubitMatrix> es(v);
  const auto& ev = es.eigenvalues();
  const double d = static_cast<double>(v.rows());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < ev.size(); ++j)
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      const double s = std::sin(0.5 * std::arg(ev[j] / ev[k]));
      sum += s * s;
    }
  const double process_infid = 2.0 * sum / (d * d);
  return d * process_infid / (d + 1.0);
}

LogLogFit loglog_fit(std::span<const double> x, std::span<const double> y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    if (!(ax > 0.0) || !(y[i] > 0.0) || ax < lo * (1 - 1e-12) || ax > hi * (1 + 1e-12)) continue;
    const double lx = std::log(ax);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
    ++n;
  }
  LogLogFit f;
  f.points = n;
  if (n < 2) return f;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  if (vx <= 0.0) return f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  int next = 0;
  int failed_index = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard lock(mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        // Keep the lowest failing index so the reported error is deterministic.
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string to_string(Scheme s) {
  switch (s) {
  case Scheme::nonrobust:
    return "nonrobust";
  case Scheme::robust:
    return "robust";
  case Scheme::gbc:
    return "gbc";
  }
  return "robust";
}

SchemeSet design_schemes(const ModeSpectrum& modes, const DriveDesign& design, IonPair ions) {
  SchemeSet set;
  set.angle = design.angle;
  set.ions = ions;
  set.nonrobust = synthesize(build_problem(modes, design.gate_time, design.drive_detuning, design.n_seg_nonrobust,
                                           false, ions),
                             design.angle)
                      .waveform;
  set.robust = synthesize(build_problem(modes, design.gate_time, design.drive_detuning, design.n_seg_robust, true, ions),
                          design.angle)
                   .waveform;
  set.gbc = gbc_recursive(design.angle, design.gbc_level, design.pi);
  GbcDesign g{design.gate_time, design.angle, design.n_seg_robust, design.drive_detuning,
              design.reverse_drive_detuning};
  set.gbc_bank = synthesize_bank(modes, g, set.gbc, ions);
  return set;
}

QubitChannel scheme_channel(const SchemeSet& set, Scheme s, const ModeSpectrum& modes, const NoiseParams& noise,
                            const SimulationSettings& settings) {
  if (s == Scheme::gbc) return simulate_circuit(set.gbc, set.gbc_bank, modes, noise, set.ions, settings);
  WaveformBank single;
  single.add(1, 1, s == Scheme::robust ? set.robust : set.nonrobust);
  return simulate_circuit(single_gate(set.angle), single, modes, noise, set.ions, settings);
}

double scheme_infidelity(const SchemeSet& set, Scheme s, const ModeSpectrum& modes, const NoiseParams& noise,
                         const SimulationSettings& settings) {
  const QubitChannel ch = scheme_channel(set, s, modes, noise, settings);
  return std::clamp(1.0 - avg_gate_fidelity(ch, ideal_gate(set.angle, noise)), 0.0, 1.0);
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("grid needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  // Exact zero at the centre of symmetric grids.
  for (double& v : g)
    if (std::abs(v) < 1e-12 * std::max(std::abs(lo), std::abs(hi))) v = 0.0;
  return g;
}

SweepResult sweep_asymmetric(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& grid,
                             const SimulationSettings& settings, int jobs, const NoiseParams& base, double fit_lo,
                             double fit_hi) {
  SweepResult r;
  r.axis = grid;
  r.engine = to_string(settings.engine);
  r.fit_lo = fit_lo;
  r.fit_hi = fit_hi;
  const int n = static_cast<int>(grid.size());
  r.infidelity.assign(3, std::vector<double>(grid.size(), 0.0));
  r.tail = r.infidelity;
  parallel_for(3 * n, jobs, [&](int k) {
    const auto s = static_cast<std::size_t>(k / n);
    const auto i = static_cast<std::size_t>(k % n);
    NoiseParams noise = base;
    noise.asym_shift = grid[i];
    const QubitChannel ch = scheme_channel(set, all_schemes[s], modes, noise, settings);
    r.infidelity[s][i] = std::clamp(1.0 - avg_gate_fidelity(ch, ideal_gate(set.angle, noise)), 0.0, 1.0);
    r.tail[s][i] = truncation_tail(ch.layout, ch.columns);
  });
  std::vector<double> delta(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) delta[i] = r.of(Scheme::robust)[i] - r.of(Scheme::gbc)[i];
  r.delta_fit = loglog_fit(grid, delta, fit_lo, fit_hi);
  r.nonrobust_fit = loglog_fit(grid, r.of(Scheme::nonrobust), fit_lo, fit_hi);
  r.robust_fit = loglog_fit(grid, r.of(Scheme::robust), fit_lo, fit_hi);
  r.gbc_fit = loglog_fit(grid, r.of(Scheme::gbc), fit_lo, fit_hi);
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json fit_json(const LogLogFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

double to_hz(double rad_s) { return rad_s / (2.0 * std::numbers::pi); }

} // namespace

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "dw_hz,infid_nonrobust,infid_robust,infid_gbc\n";
  for (std::size_t i = 0; i < r.axis.size(); ++i) {
    os << fmt(to_hz(r.axis[i])) << ',' << fmt(r.of(Scheme::nonrobust)[i]) << ',' << fmt(r.of(Scheme::robust)[i]) << ','
       << fmt(r.of(Scheme::gbc)[i]) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json j;
  j["engine"] = r.engine;
  j["points"] = r.axis.size();
  j["fit_window_rad_s"] = {r.fit_lo, r.fit_hi};
  j["delta_f_fit"] = fit_json(r.delta_fit);
  j["nonrobust_fit"] = fit_json(r.nonrobust_fit);
  j["robust_fit"] = fit_json(r.robust_fit);
  j["gbc_fit"] = fit_json(r.gbc_fit);
  for (Scheme s : all_schemes) {
    const auto& t = r.tail[static_cast<std::size_t>(s)];
    j["max_fock_tail"][to_string(s)] = t.empty() ? 0.0 : *std::max_element(t.begin(), t.end());
  }
  return j;
}

ContourResult contour_grid(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& sym_grid,
                           const std::vector<double>& asym_grid, const SimulationSettings& settings, int jobs) {
  ContourResult r;
  r.sym_axis = sym_grid;
  r.asym_axis = asym_grid;
  r.engine = to_string(settings.engine);
  const int ns = static_cast<int>(sym_grid.size());
  const int na = static_cast<int>(asym_grid.size());
  r.infidelity.assign(3, Eigen::MatrixXd::Zero(ns, na));
  parallel_for(3 * ns * na, jobs, [&](int k) {
    const int s = k / (ns * na);
    const int i = (k / na) % ns;
    const int j = k % na;
    NoiseParams noise;
    noise.sym_shift = sym_grid[static_cast<std::size_t>(i)];
    noise.asym_shift = asym_grid[static_cast<std::size_t>(j)];
    r.infidelity[static_cast<std::size_t>(s)](i, j) = scheme_infidelity(set, all_schemes[s], modes, noise, settings);
  });
  return r;
}

double threshold_crossing(std::span<const double> axis, std::span<const double> values, double threshold) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < axis.size(); ++i)
    if (axis[i] >= 0.0) pts.push_back({axis[i], values[i]});
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].second < threshold) continue;
    if (i == 0) return pts[0].first;
    const auto [x0, y0] = pts[i - 1];
    const auto [x1, y1] = pts[i];
    if (x0 > 0.0 && y0 > 0.0) {
      const double f = (std::log(threshold) - std::log(y0)) / (std::log(y1) - std::log(y0));
      return std::exp(std::log(x0) + f * (std::log(x1) - std::log(x0)));
    }
    return x0 + (threshold - y0) / (y1 - y0) * (x1 - x0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SchemeCrossings contour_crossings(const ContourResult& r, Scheme s, double threshold, double radius) {
  const Eigen::MatrixXd& m = r.of(s);
  SchemeCrossings c;
  const auto zero_index = [](const std::vector<double>& axis) {
    for (std::size_t i = 0; i < axis.size(); ++i)
      if (axis[i] == 0.0) return static_cast<Eigen::Index>(i);
    throw ConfigError("contour axes must contain 0 for crossing extraction");
  };
  const Eigen::Index i0 = zero_index(r.sym_axis);
  const Eigen::Index j0 = zero_index(r.asym_axis);
  std::vector<double> row(r.asym_axis.size());
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = m(i0, static_cast<Eigen::Index>(j));
  std::vector<double> col(r.sym_axis.size());
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = m(static_cast<Eigen::Index>(i), j0);
  c.asymmetric = threshold_crossing(r.asym_axis, row, threshold);
  c.symmetric = threshold_crossing(r.sym_axis, col, threshold);
  for (std::size_t i = 0; i < r.sym_axis.size(); ++i)
    for (std::size_t j = 0; j < r.asym_axis.size(); ++j)
      if (std::abs(r.sym_axis[i]) <= radius * (1 + 1e-12) && std::abs(r.asym_axis[j]) <= radius * (1 + 1e-12))
        c.max_within = std::max(c.max_within, m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return c;
}

std::string contour_csv(const ContourResult& r) {
  std::ostringstream os;
  os << "scheme,dws_hz,dwa_hz,infid\n";
  for (Scheme s : all_schemes)
    for (std::size_t i = 0; i < r.sym_axis.size(); ++i)
      for (std::size_t j = 0; j < r.asym_axis.size(); ++j)
        os << to_string(s) << ',' << fmt(to_hz(r.sym_axis[i])) << ',' << fmt(to_hz(r.asym_axis[j])) << ','
           << fmt(r.of(s)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
  return os.str();
}

nlohmann::json to_json(const ContourResult& r, double threshold, double radius) {
  nlohmann::json j;
  j["engine"] = r.engine;
  j["threshold"] = threshold;
  j["radius_rad_s"] = radius;
  for (Scheme s : all_schemes) {
    const SchemeCrossings c = contour_crossings(r, s, threshold, radius);
    const auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    j["schemes"][to_string(s)] = {{"asymmetric_crossing_rad_s", num(c.asymmetric)},
                                  {"symmetric_crossing_rad_s", num(c.symmetric)},
                                  {"max_infidelity_within_radius", c.max_within}};
  }
  return j;
}

std::vector<ClosureMetrics> trajectory_closure(const TrajectoryRecord& rec, const ModeSpectrum& modes,
                                               const NoiseParams& noise) {
  std::vector<ClosureMetrics> out;
  const auto diameter = [](const std::vector<cplx>& pts, double scale) {
    double d = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) d = std::max(d, std::abs(pts[a] - pts[b]));
    return d * scale;
  };
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double eta = modes.lamb_dicke[static_cast<std::size_t>(m)];
    const auto& a = rec.alpha[static_cast<std::size_t>(m)];
    const auto& b = rec.beta[static_cast<std::size_t>(m)];
    const double bscale = std::abs(noise.asym_shift) * eta;
    out.push_back({std::abs(a.back()) * eta, diameter(a, eta), std::abs(b.back()) * bscale, diameter(b, bscale)});
  }
  return out;
}

std::string trajectory_csv(const TrajectoryRecord& rec, const ModeSpectrum& modes, const NoiseParams& noise) {
  std::ostringstream os;
  os << "t_s,mode,re_alpha,im_alpha,re_beta,im_beta,theta\n";
  for (int m = 0; m < modes.mode_count(); ++m) {
    const double eta = modes.lamb_dicke[static_cast<std::size_t>(m)];
    const double bscale = noise.asym_shift * eta;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      const cplx a = rec.alpha[static_cast<std::size_t>(m)][i] * eta;
      const cplx b = rec.beta[static_cast<std::size_t>(m)][i] * bscale;
      os << fmt(rec.times[i]) << ',' << m << ',' << fmt(a.real()) << ',' << fmt(a.imag()) << ',' << fmt(b.real()) << ','
         << fmt(b.imag()) << ',' << fmt(rec.theta[i]) << '\n';
    }
  }
  const auto closure = trajectory_closure(rec, modes, noise);
  for (std::size_t m = 0; m < closure.size(); ++m) {
    os << "# closure mode=" << m << " abs_alpha_tau=" << fmt(closure[m].alpha_end)
       << " alpha_diameter=" << fmt(closure[m].alpha_diameter) << " abs_beta_tau=" << fmt(closure[m].beta_end)
       << " beta_diameter=" << fmt(closure[m].beta_diameter) << '\n';
  }
  return os.str();
}

void trajectory_export(const Waveform& w, const ModeSpectrum& modes, const NoiseParams& noise, IonPair ions,
                       const std::filesystem::path& path, int samples) {
  if (samples < 500) throw ConfigError("trajectory export needs at least 500 samples");
  write_text_file(path, trajectory_csv(sample_trajectory(w, modes, noise, ions, samples), modes, noise));
}

SweepResult three_ion_sweep(const SchemeSet& set, const ModeSpectrum& modes, const std::vector<double>& grid,
                            const SimulationSettings& settings, int jobs, double fit_lo, double fit_hi) {
  if (modes.ion_count() != 3) throw ConfigError("three-ion sweep needs a three-ion chain");
  const HilbertLayout layout(2, modes.mode_count(), settings.fock_cutoff);
  if (layout.dimension() > (std::int64_t{1} << 16)) {
    std::ostringstream os;
    os << "Hilbert dimension " << layout.dimension() << " exceeds the 65536 memory guard";
    throw ConfigError(os.str());
  }
  return sweep_asymmetric(set, modes, grid, settings, jobs, NoiseParams{}, fit_lo, fit_hi);
}

} // namespace msforge
