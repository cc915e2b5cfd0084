#pragma once

// CSV/JSON emission and the run manifest written next to CLI outputs.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trscat/core.hpp"
#include "trscat/propagate.hpp"
#include "trscat/scattering.hpp"

namespace trscat {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits, scientific; round-trips every double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

inline constexpr const char* kScanHeader = "E,absR2,absT2,ReR,ImR,ReT,ImT";

inline void write_scan_csv(std::ostream& os, const std::vector<ScatteringCoefficients>& rows) {
  os << kScanHeader << '\n';
  for (const auto& r : rows) {
    os << format_double(r.z.real()) << ',' << format_double(std::norm(r.R)) << ',' << format_double(std::norm(r.T))
       << ',' << format_double(r.R.real()) << ',' << format_double(r.R.imag()) << ','
       << format_double(r.T.real()) << ',' << format_double(r.T.imag()) << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& pts) {
  static const char* names[] = {"u", "du", "v", "dv", "u_w", "du_w", "u_z", "du_z", "Iuu", "Iuv"};
  os << 'x';
  for (const char* n : names) os << ",Re_" << n << ",Im_" << n;
  os << '\n';
  for (const auto& p : pts) {
    const auto packed = p.state.pack<StateVector::kBase>();
    os << format_double(p.x);
    for (const auto& c : packed) os << ',' << format_double(c.real()) << ',' << format_double(c.imag());
    os << '\n';
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  return f;
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto f = open_output(path);
  f << j.dump(2) << '\n';
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::string started, finished;
  std::vector<std::string> outputs;
  nlohmann::json fitted = nlohmann::json::object();  // k_minus, k_plus, slopes, constants

  nlohmann::json to_json() const {
    return {{"command", command}, {"argv", argv},         {"config", config},   {"version", kVersion},
            {"started", started}, {"finished", finished}, {"outputs", outputs}, {"fitted", fitted}};
  }
};

} // namespace trscat
