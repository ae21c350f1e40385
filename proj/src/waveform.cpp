#include "msforge/waveform.hpp"

#include "msforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace msforge {

double Waveform::peak_rabi() const {
  double peak = 0.0;
  for (double x : segment_amplitudes) peak = std::max(peak, std::abs(x));
  return peak;
}

double Waveform::amplitude_at(double t) const {
  if (t < 0.0 || t > gate_time || segment_amplitudes.empty()) return 0.0;
  const int i = std::min(segment_count() - 1, static_cast<int>(t / segment_width()));
  return segment_amplitudes[static_cast<std::size_t>(i)];
}

std::vector<Piece> Waveform::pieces(double t) const {
  std::vector<Piece> out;
  const int n = segment_count();
  if (n == 0 || t <= 0.0) return out;
  const double h = segment_width();
  const double stop = std::min(t, gate_time);
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = i * h;
    if (a >= stop) break;
    const double b = (i == n - 1) ? gate_time : (i + 1) * h;
    out.push_back({a, std::min(b, stop), segment_amplitudes[static_cast<std::size_t>(i)]});
  }
  return out;
}

Waveform Waveform::zero(int n_seg, double tau, double drive_detuning) {
  Waveform w;
  w.segment_amplitudes.assign(static_cast<std::size_t>(n_seg), 0.0);
  w.gate_time = tau;
  w.drive_detuning = drive_detuning;
  w.symmetric = true;
  return w;
}

nlohmann::json to_json(const Waveform& w) {
  nlohmann::json j;
  j["tau_s"] = w.gate_time;
  j["n_seg"] = w.segment_count();
  j["omega_d_rad_s"] = w.drive_detuning;
  j["amplitudes_rad_s"] = w.segment_amplitudes;
  j["symmetric"] = w.symmetric;
  return j;
}

Waveform waveform_from_json(const nlohmann::json& j) {
  try {
    Waveform w;
    w.gate_time = j.at("tau_s").get<double>();
    w.drive_detuning = j.at("omega_d_rad_s").get<double>();
    w.segment_amplitudes = j.at("amplitudes_rad_s").get<std::vector<double>>();
    w.symmetric = j.at("symmetric").get<bool>();
    if (j.at("n_seg").get<int>() != w.segment_count()) {
      throw ConfigError("waveform n_seg does not match the amplitude count");
    }
    if (!(w.gate_time > 0.0)) throw ConfigError("waveform tau_s must be positive");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed waveform record: ") + e.what());
  }
}

std::string waveform_csv(const Waveform& w) {
  std::ostringstream os;
  os << "t_start_s,omega_rad_s\n";
  char buf[96];
  const double h = w.segment_width();
  for (int i = 0; i < w.segment_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", i * h, w.segment_amplitudes[static_cast<std::size_t>(i)]);
    os << buf;
  }
  if (w.segment_count() > 0) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", w.gate_time, w.segment_amplitudes.back());
    os << buf;
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace msforge
