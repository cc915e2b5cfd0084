// trscat: command-line front end.
// Exit codes: 0 ok, 1 domain error (preconditions not met), 2 usage/input error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "trscat/boundstate.hpp"
#include "trscat/fdoracle.hpp"
#include "trscat/io.hpp"
#include "trscat/locator.hpp"
#include "trscat/scattering.hpp"
#include "trscat/sho.hpp"

using namespace trscat;
using nlohmann::json;

namespace {

struct Globals {
  unsigned threads = 0;
  bool verbose = false;
  std::string manifest;
};

Globals g;
RunManifest manifest;

void log(const std::string& msg) {
  if (g.verbose) std::cerr << "[trscat] " << msg << '\n';
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(out, j);
    manifest.outputs.push_back(out);
  }
}

void emit_scan(const std::vector<ScatteringCoefficients>& rows, const std::string& out) {
  if (out.empty() || out == "-") {
    write_scan_csv(std::cout, rows);
  } else {
    auto f = open_output(out);
    write_scan_csv(f, rows);
    manifest.outputs.push_back(out);
  }
}

void dump_trajectory(const TruncatedPotential& p, const Zeta& zeta, NormalizationCase c, const std::string& out,
                     int points) {
  if (out.empty()) return;
  std::vector<double> xs;
  for (int i = 0; i < points; ++i) xs.push_back(-p.M() + 2.0 * p.M() * i / (points - 1));
  auto f = open_output(out);
  write_trajectory_csv(f, trajectory(p, zeta, c, xs, tight_propagation()));
  manifest.outputs.push_back(out);
}

json cj(cplx z) { return cplx_json(z); }

std::vector<ScatteringCoefficients> tight_scan(const TruncatedPotential& p, double lo, double hi, std::size_t n) {
  ScatteringOptions so;
  so.ode.rtol = 1e-12;
  so.ode.atol = 1e-15;
  return scan_rt(p, lo, hi, n, g.threads, so);
}

std::vector<double> abs_t2(const std::vector<ScatteringCoefficients>& rows) {
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(std::norm(r.T));
  return t;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// figure recipes

json figure1(const std::string& out) {
  BoundStateOptions bo;
  bo.lo = 18.0;
  bo.hi = 21.0;
  log("bound state of the defect potential");
  const auto bs = compute_bound_state(fig1_potential(), bo);
  manifest.fitted["k_minus"] = bs.eta.k_minus;
  manifest.fitted["k_plus"] = bs.eta.k_plus;
  const TruncatedPotential p(fig1_potential(), 10.0);
  log("scan [18, 21], 3001 points");
  const auto rows = tight_scan(p, 18.0, 21.0, 3001);
  emit_scan(rows, out);
  const auto t2 = abs_t2(rows);
  const auto i = argmax(t2);
  return {{"figure", 1},
          {"M", 10.0},
          {"bound_state_fd", bs.fd.E},
          {"bound_state", bs.eta.E},
          {"peak_E", rows[i].z.real()},
          {"peak_absT2", t2[i]},
          {"peak_absR2", std::norm(rows[i].R)},
          {"local_maxima", local_maxima(t2).size()}};
}

json figure2(const std::string& out) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  log("scan [5, 45], 4001 points");
  const auto rows = tight_scan(p, 5.0, 45.0, 4001);
  emit_scan(rows, out);
  const auto t2 = abs_t2(rows);
  int switches = 0;
  for (std::size_t i = 1; i < t2.size(); ++i) switches += (t2[i] > 0.5) != (t2[i - 1] > 0.5);
  return {{"figure", 2}, {"M", 10.0}, {"band_gap_switches", switches}};
}

json figure3(const std::string& out) {
  const double M = 5.0;
  LocateOptions o;
  o.enforce_ball = false;
  const auto y = sho_locate(0, M, ThetaMode::ZeroReflection, 1.0, o);
  const auto x = sho_locate(0, M, ThetaMode::Resonance, 1.0, o);
  // the peak width is |Im z_X|; scan ten widths either side
  const double w = std::abs(x.zeta.z.imag());
  const double c = x.zeta.z.real();
  log("scan around Re z_X with half-width " + format_double(10.0 * w));
  const auto rows = tight_scan(sho_potential(M, 1.0), c - 10.0 * w, c + 10.0 * w, 2001);
  emit_scan(rows, out);
  const auto t2 = abs_t2(rows);
  const auto i = argmax(t2);
  return {{"figure", 3},       {"M", M},           {"z_Y", cj(y.zeta.z)},           {"z_X", cj(x.zeta.z)},
          {"peak_E", rows[i].z.real()}, {"peak_absT2", t2[i]}, {"ball_radius", y.ball_radius}};
}

json figure4(const std::string& out) {
  const double M = 3.0;
  const auto p = sho_potential(M, 1.0);
  log("scan [1, 7], 6001 points");
  const auto rows = tight_scan(p, 1.0, 7.0, 6001);
  emit_scan(rows, out);
  const auto t2 = abs_t2(rows);
  const auto grid = energy_grid(1.0, 7.0, 6001);
  json peaks = json::array();
  LocateOptions o;
  o.enforce_ball = false;
  for (int n = 0; n <= 2; ++n) {
    const double E = 2.0 * n + 2.0;
    std::size_t best = 0;
    double dist = 1e300;
    for (auto i : local_maxima(t2))
      if (std::abs(grid[i] - E) < dist) dist = std::abs(grid[i] - E), best = i;
    // the lowest peak is narrower than the plotting grid; widths come from a
    // local scan spanning ten resonance widths either side
    const auto x = sho_locate(n, M, ThetaMode::Resonance, 1.0, o);
    const double c = x.zeta.z.real(), w = std::abs(x.zeta.z.imag());
    const auto fine = tight_scan(p, c - 10.0 * w, c + 10.0 * w, 2001);
    const auto ft = abs_t2(fine);
    const auto fg = energy_grid(c - 10.0 * w, c + 10.0 * w, 2001);
    const auto fi = argmax(ft);
    peaks.push_back({{"n", n},
                     {"E_n", E},
                     {"grid_peak_E", grid[best]},
                     {"z_X", cj(x.zeta.z)},
                     {"peak_E", fg[fi]},
                     {"peak_absT2", ft[fi]},
                     {"fwhm", peak_fwhm(fg, ft, fi)}});
  }
  return {{"figure", 4}, {"M", M}, {"peaks", peaks}};
}

json figure5(const std::string& out) {
  const double M = 3.0;
  log("scan [0.5, 120], 4001 points");
  const auto rows = tight_scan(sho_potential(M, 1.0), 0.5, 120.0, 4001);
  emit_scan(rows, out);
  double min_high = 1.0;
  for (const auto& r : rows)
    if (r.z.real() > 60.0) min_high = std::min(min_high, std::norm(r.T));
  return {{"figure", 5}, {"M", M}, {"min_absT2_above_60", min_high}};
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Transmission resonances and zero-reflection states of truncated periodic potentials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)");
  app.add_flag("--verbose", g.verbose, "progress on stderr");
  app.add_option("--manifest", g.manifest, "write a run manifest JSON here");

  std::function<void()> action;

  // bound-state
  std::string config, out, eta_path, method = "newton", dump;
  double L = 12.0, h = 0.005;
  std::vector<double> window;
  std::optional<double> M_fit;
  bool no_refine = false, allow_outside = false;
  auto* bs = app.add_subcommand("bound-state", "defect state and eta data of a potential");
  bs->add_option("--config", config, "potential JSON")->required();
  bs->add_option("--domain", L, "half-width L of the Dirichlet box");
  bs->add_option("--grid-step", h, "finite-difference step");
  bs->add_option("--window", window, "energy window lo,hi")->required()->delimiter(',')->expected(2);
  bs->add_option("--M-fit", M_fit, "outer edge of the tail decay fit (default: config M or 10)");
  bs->add_flag("--no-refine", no_refine, "skip the shooting refinement");
  bs->add_option("--out", out, "eta JSON (default stdout)");
  bs->callback([&] {
    action = [&] {
      const auto cfg = read_json(config);
      manifest.config = cfg;
      BoundStateOptions o;
      o.L = L;
      o.h = h;
      o.lo = window[0];
      o.hi = window[1];
      o.M_fit = M_fit.value_or(cfg.value("M", 10.0));
      o.refine = !no_refine;
      const auto r = compute_bound_state(potential_from_json(cfg), o);
      manifest.fitted = {{"k_minus", r.eta.k_minus}, {"k_plus", r.eta.k_plus}, {"k", r.eta.k}};
      auto j = to_json(r.eta);
      j["fd_energy"] = r.fd.E;
      j["mass_fraction"] = r.fd.mass_fraction;
      emit_json(j, out);
    };
  });

  // scan / oracle-scan
  double emin = 0.0, emax = 0.0, grid_step = 1e-3;
  std::size_t n_points = 1001;
  const auto scan_opts = [&](CLI::App* s) {
    s->add_option("--config", config, "potential JSON with M")->required();
    s->add_option("--emin", emin, "lower energy")->required();
    s->add_option("--emax", emax, "upper energy")->required();
    s->add_option("--n", n_points, "number of energies");
    s->add_option("--out", out, "CSV (default stdout)");
  };
  const auto check_range = [&] {
    if (!(emax > emin)) throw CLI::ValidationError("--emin/--emax", "emin must be smaller than emax");
  };
  auto* scan = app.add_subcommand("scan", "R and T over a real energy grid");
  scan_opts(scan);
  scan->callback([&] {
    check_range();
    action = [&] {
      const auto cfg = read_json(config);
      manifest.config = cfg;
      emit_scan(tight_scan(truncated_from_json(cfg), emin, emax, n_points), out);
    };
  });
  auto* oscan = app.add_subcommand("oracle-scan", "finite-difference R and T over a real energy grid");
  scan_opts(oscan);
  oscan->add_option("--grid-step", grid_step, "lattice step h");
  oscan->callback([&] {
    check_range();
    action = [&] {
      const auto cfg = read_json(config);
      manifest.config = cfg;
      OracleOptions o;
      o.h = grid_step;
      emit_scan(oracle_scan(truncated_from_json(cfg), emin, emax, n_points, o, g.threads), out);
    };
  });

  // zero-reflection / resonance
  int dump_points = 401;
  const auto locate_cmd = [&](const char* name, ThetaMode mode) {
    auto* c = app.add_subcommand(name, mode == ThetaMode::Resonance ? "scattering resonance near a bound state"
                                                                     : "zero-reflection state near a bound state");
    c->add_option("--config", config, "potential JSON with M")->required();
    c->add_option("--eta", eta_path, "eta JSON from bound-state")->required();
    c->add_option("--method", method, "newton | fixed-point")->check(CLI::IsMember({"newton", "fixed-point"}));
    c->add_flag("--allow-outside-ball", allow_outside, "report instead of rejecting roots outside 10x the ball");
    c->add_option("--dump-trajectory", dump, "CSV of the fundamental system at the located point");
    c->add_option("--dump-points", dump_points, "trajectory samples")->check(CLI::Range(2, 1000000));
    c->add_option("--out", out, "state JSON (default stdout)");
    c->callback([&, mode] {
      action = [&, mode] {
        const auto cfg = read_json(config);
        manifest.config = {{"potential", cfg}, {"eta", eta_path}, {"method", method}};
        const auto eta = eta_from_json(read_json(eta_path));
        const auto p = truncated_from_json(cfg);
        LocateOptions o;
        o.method = method == "newton" ? LocateMethod::Newton : LocateMethod::FixedPoint;
        o.enforce_ball = !allow_outside;
        const auto s = locate_state(eta, p, mode, o);
        manifest.fitted = {{"k_minus", eta.k_minus}, {"k_plus", eta.k_plus}, {"k", eta.k}};
        dump_trajectory(p, s.zeta, eta.norm_case, dump, dump_points);
        emit_json(to_json(s), out);
      };
    });
  };
  locate_cmd("zero-reflection", ThetaMode::ZeroReflection);
  locate_cmd("resonance", ThetaMode::Resonance);

  // compare
  std::vector<double> msweep{6.0, 8.0, 10.0};
  bool no_gamma = false;
  auto* cmp = app.add_subcommand("compare", "locations, comparison and Gamma_M report over an M-sweep");
  cmp->add_option("--config", config, "potential JSON")->required();
  cmp->add_option("--eta", eta_path, "eta JSON from bound-state")->required();
  cmp->add_option("--msweep", msweep, "truncation radii")->delimiter(',');
  cmp->add_flag("--no-gamma", no_gamma, "skip sampling R on Gamma_M");
  cmp->add_option("--out", out, "report JSON (default stdout)");
  cmp->callback([&] {
    if (msweep.size() < 2) throw CLI::ValidationError("--msweep", "need at least two radii");
    action = [&] {
      const auto cfg = read_json(config);
      manifest.config = {{"potential", cfg}, {"eta", eta_path}, {"msweep", msweep}};
      const auto eta = eta_from_json(read_json(eta_path));
      const auto V = potential_from_json(cfg);
      ComparisonOptions co;
      co.locate.enforce_ball = false;
      co.sample_gamma = co.cauchy_riemann = !no_gamma;
      co.threads = g.threads;
      json reports = json::array();
      std::vector<double> ld, lN, lR, ldR, gap, ratio;
      for (double M : msweep) {
        log("M = " + format_double(M));
        const auto r = comparison_report(eta, TruncatedPotential(V, M), co);
        reports.push_back(to_json(r));
        ld.push_back(std::log(r.Y.z_distance));
        lN.push_back(std::log(std::abs(r.N_eta)));
        lR.push_back(std::log(r.gamma.sup_R));
        ldR.push_back(std::log(r.gamma.sup_dR));
        gap.push_back(r.gap_relative_error);
        ratio.push_back(r.asym_error_ratio);
      }
      json fits{{"k", eta.k},
                {"slope_log_zY_offset", fit_slope(msweep, ld)},
                {"slope_log_N", fit_slope(msweep, lN)},
                {"gap_error_decreasing", strictly_decreasing(gap)},
                {"asym_ratio_decreasing", strictly_decreasing(ratio)}};
      if (!no_gamma) {
        fits["slope_log_sup_R"] = fit_slope(msweep, lR);
        fits["slope_log_sup_dR"] = fit_slope(msweep, ldR);
      }
      manifest.fitted = fits;
      manifest.fitted["k_minus"] = eta.k_minus;
      manifest.fitted["k_plus"] = eta.k_plus;
      emit_json({{"reports", reports}, {"fits", fits}}, out);
    };
  });

  // sho
  int n = 0;
  double M = 3.0, offset = 0.0;
  std::string mode = "zero-reflection";
  auto* sho = app.add_subcommand("sho", "truncated harmonic oscillator V = offset + x^2");
  sho->add_option("--n", n, "level index")->check(CLI::Range(0, 20));
  sho->add_option("--M", M, "truncation radius")->check(CLI::PositiveNumber);
  sho->add_option("--offset", offset, "constant added to x^2");
  sho->add_option("--mode", mode, "zero-reflection | resonance | scan")
      ->check(CLI::IsMember({"zero-reflection", "resonance", "scan"}));
  sho->add_option("--emin", emin, "scan lower energy (default E_n - 1)");
  sho->add_option("--emax", emax, "scan upper energy (default E_n + 1)");
  sho->add_option("--points", n_points, "scan points");
  sho->add_flag("--allow-outside-ball", allow_outside, "report instead of rejecting roots outside 10x the ball");
  sho->add_option("--dump-trajectory", dump, "CSV of the fundamental system at the located point");
  sho->add_option("--out", out, "JSON or CSV output (default stdout)");
  sho->callback([&] {
    action = [&] {
      manifest.config = {{"n", n}, {"M", M}, {"offset", offset}, {"mode", mode}};
      const double En = 2.0 * n + 1.0 + offset;
      if (mode == "scan") {
        const double lo = emin > 0.0 ? emin : std::max(En - 1.0, 1e-3);
        const double hi = emax > 0.0 ? emax : En + 1.0;
        if (!(hi > lo)) throw InputError("sho scan: emin must be smaller than emax");
        emit_scan(tight_scan(sho_potential(M, offset), lo, hi, n_points), out);
        return;
      }
      LocateOptions o;
      o.enforce_ball = !allow_outside;
      const auto tm = mode == "resonance" ? ThetaMode::Resonance : ThetaMode::ZeroReflection;
      const auto s = sho_locate(n, M, tm, offset, o);
      dump_trajectory(sho_potential(M, offset), s.zeta, sho_bound_state(n).norm_case(), dump, dump_points);
      auto j = to_json(s);
      j["bound_state"] = to_json(sho_bound_state(n));
      emit_json(j, out);
    };
  });

  // reproduce-figure
  int figure = 1;
  auto* fig = app.add_subcommand("reproduce-figure", "run the pipeline behind one of the five reference figures");
  fig->add_option("figure", figure, "1..5")->required()->check(CLI::Range(1, 5));
  fig->add_option("--out", out, "CSV path (default figN.csv)");
  fig->add_option("--summary", eta_path, "summary JSON (default stdout)");
  fig->callback([&] {
    action = [&] {
      manifest.config = {{"figure", figure}};
      const std::string csv = out.empty() ? "fig" + std::to_string(figure) + ".csv" : out;
      json s;
      switch (figure) {
        case 1: s = figure1(csv); break;
        case 2: s = figure2(csv); break;
        case 3: s = figure3(csv); break;
        case 4: s = figure4(csv); break;
        default: s = figure5(csv); break;
      }
      s["csv"] = csv;
      emit_json(s, eta_path);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  manifest.command = app.get_subcommands().front()->get_name();
  for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);
  manifest.started = utc_timestamp();
  try {
    action();
  } catch (const InputError& e) {
    std::cerr << "trscat: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "trscat: " << e.what() << '\n';
    return 1;
  }
  manifest.finished = utc_timestamp();
  if (!g.manifest.empty()) write_json(g.manifest, manifest.to_json());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "trscat: " << e.what() << '\n';
    return 1;
  }
}
