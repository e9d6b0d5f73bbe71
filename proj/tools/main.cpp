// Command-line front end: transition rates and probabilities, rho11
// histories, teleportation series, and deterministic parameter sweeps with
// CSV/JSON output.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "udw/detector_dynamics.hpp"
#include "udw/response.hpp"
#include "udw/teleport.hpp"
#include "udw/version.hpp"

namespace {

using json = nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // preformatted cells
};

struct RunMeta {
  std::string subcommand;
  std::map<std::string, std::string> config;   // resolved key=value
  std::vector<std::string> overrides;          // flag-over-file keys
};

void write_csv(std::ostream& os, const RunMeta& meta, const OutputTable& t) {
  os << "# udw_version=" << udw::kVersion << "\n";
  os << "# subcommand=" << meta.subcommand << "\n";
  for (const auto& [k, v] : meta.config) os << "# " << k << "=" << v << "\n";
  if (!meta.overrides.empty()) {
    os << "# flag_overrides=";
    for (size_t i = 0; i < meta.overrides.size(); ++i) {
      os << (i ? "," : "") << meta.overrides[i];
    }
    os << "\n";
  }
  os << "# log_negativity_base=2\n";
  os << "# switching_shape=plateau-bump-cdf\n";
  for (size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << t.columns[i];
  }
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

void write_json(std::ostream& os, const RunMeta& meta, const OutputTable& t) {
  json j;
  j["meta"]["udw_version"] = udw::kVersion;
  j["meta"]["subcommand"] = meta.subcommand;
  j["meta"]["config"] = meta.config;
  j["meta"]["flag_overrides"] = meta.overrides;
  j["meta"]["log_negativity_base"] = 2;
  j["meta"]["switching_shape"] = "plateau-bump-cdf";
  j["columns"] = t.columns;
  j["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& cell : row) {
      // Cells are preformatted; keep them as strings for byte stability.
      r.push_back(cell);
    }
    j["rows"].push_back(r);
  }
  os << j.dump(2) << "\n";
}

void emit(const std::string& path, const std::string& format,
          const RunMeta& meta, const OutputTable& t) {
  std::ostringstream buf;
  if (format == "json") {
    write_json(buf, meta, t);
  } else {
    write_csv(buf, meta, t);
  }
  if (path == "-" || path.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    f << buf.str();
  }
}

// ---------------------------------------------------------------------------
// Shared option blocks

struct TrajectoryOpts {
  std::string kind = "uniform";
  double a = 1.0;
  double ramp_width = 1.0;
  double tau2 = 1.0;
  double x0 = 0.0;
  double velocity = 0.0;

  udw::Worldline build(int dim) const {
    if (kind == "inertial") {
      return udw::Worldline::inertial(dim, {velocity}, udw::SpacetimePoint{});
    }
    if (kind == "static") {
      std::vector<double> pos(dim - 1, 0.0);
      pos[0] = x0;
      return udw::Worldline::static_at(dim, pos);
    }
    if (kind == "uniform") {
      return udw::Worldline::uniform_acceleration(dim, a);
    }
    if (kind == "asymptotic") {
      return udw::Worldline::asymptotic_uniform(dim, a, ramp_width);
    }
    if (kind == "truncated") {
      return udw::Worldline::truncated_uniform(dim, a, tau2);
    }
    throw std::invalid_argument("--trajectory: unknown kind '" + kind + "'");
  }

  void add_options(CLI::App* cmd) {
    cmd->add_option("--trajectory", kind,
                    "worldline kind: inertial|static|uniform|asymptotic|"
                    "truncated")
        ->check(CLI::IsMember(
            {"inertial", "static", "uniform", "asymptotic", "truncated"}));
    cmd->add_option("--a", a, "proper acceleration (1/length)");
    cmd->add_option("--ramp-width", ramp_width,
                    "tanh ramp width (asymptotic trajectory)");
    cmd->add_option("--tau2", tau2, "acceleration cutoff proper time");
    cmd->add_option("--x0", x0, "static position x^1");
    cmd->add_option("--velocity", velocity, "inertial velocity v_x");
  }
};

struct OutputOpts {
  std::string path = "-";
  std::string format = "csv";
  int jobs = 1;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--output,-o", path, "output path ('-' for stdout)");
    cmd->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", jobs, "worker threads for sweeps")
        ->check(CLI::Range(1, 64));
  }
};

struct ToleranceOpts {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;

  udw::QuadratureOptions quad() const {
    udw::QuadratureOptions q;
    q.rel_tol = rel_tol;
    q.abs_tol = abs_tol;
    return q;
  }
  void add_options(CLI::App* cmd) {
    cmd->add_option("--rel-tol", rel_tol, "quadrature relative tolerance");
    cmd->add_option("--abs-tol", abs_tol, "quadrature absolute tolerance");
  }
};

// ---------------------------------------------------------------------------

struct RateArgs {
  int d = 4;
  double omega = 2.3;
  double tau = 0.0;
  double dtau = 10.0;
  bool dtau_limit = false;
  double mu = 1.0;
  TrajectoryOpts traj;
  ToleranceOpts tol;
  OutputOpts out;
};

struct ProbabilityArgs {
  int d = 4;
  double omega = 2.3;
  double tau0 = 0.0;
  double tau1 = 2.0;
  double delta = 0.1;
  double mu = 1.0;
  TrajectoryOpts traj;
  ToleranceOpts tol;
  OutputOpts out;
};

std::vector<std::string> rate_columns(int d) {
  std::vector<std::string> cols = {"d",    "trajectory", "a",
                                   "omega", "tau",       "dtau",
                                   "value", "error_estimate", "integral_term"};
  switch (d) {
    case 3:
      cols.push_back("boundary_constant_term");
      break;
    case 4:
      cols.push_back("boundary_omega_term");
      cols.push_back("boundary_dtau_term");
      break;
    case 5:
      cols.push_back("boundary_kinematic_term");
      cols.push_back("boundary_dtau_term");
      break;
    case 6:
      cols.push_back("boundary_kinematic_term");
      cols.push_back("boundary_dtau_term");
      cols.push_back("boundary_dtau3_term");
      break;
    default:
      break;
  }
  return cols;
}

std::vector<std::string> rate_row(const RateArgs& a) {
  const udw::Worldline w = a.traj.build(a.d);
  const udw::WightmanKernel kernel(a.d, a.mu);
  std::vector<std::string> row = {
      std::to_string(a.d), a.traj.kind,      fmt_double(a.traj.a),
      fmt_double(a.omega), fmt_double(a.tau),
      a.dtau_limit ? "inf" : fmt_double(a.dtau)};
  if (a.dtau_limit) {
    const udw::AsymptoticRate r = udw::transition_rate_asymptotic(
        a.d, w, a.omega, kernel, 200.0, a.tol.quad());
    row.push_back(fmt_double(r.value));
    row.push_back(fmt_double(r.error_estimate));
    row.push_back(fmt_double(r.value));
    for (size_t k = row.size(); k < rate_columns(a.d).size(); ++k) {
      row.push_back(fmt_double(0.0));
    }
  } else {
    const udw::RateResult r = udw::transition_rate(a.d, w, a.omega, a.tau,
                                                   a.dtau, kernel,
                                                   a.tol.quad());
    row.push_back(fmt_double(r.value));
    row.push_back(fmt_double(r.error_estimate));
    row.push_back(fmt_double(r.integral_term));
    for (const auto& [name, v] : r.boundary_terms) {
      (void)name;
      row.push_back(fmt_double(v));
    }
  }
  return row;
}

std::vector<std::string> probability_columns() {
  return {"d",    "trajectory", "a",     "omega", "tau0",
          "tau1", "delta",      "value"};
}

std::vector<std::string> probability_row(const ProbabilityArgs& a) {
  const udw::Worldline w = a.traj.build(a.d);
  const udw::WightmanKernel kernel(a.d, a.mu);
  const udw::SwitchingFunction chi(a.tau0, a.tau1, a.delta);
  const double f =
      udw::response_function(a.d, chi, w, a.omega, kernel, a.tol.quad());
  return {std::to_string(a.d), a.traj.kind,    fmt_double(a.traj.a),
          fmt_double(a.omega), fmt_double(a.tau0),
          fmt_double(a.tau1),  fmt_double(a.delta), fmt_double(f)};
}

// ---------------------------------------------------------------------------
// Config file handling: flat key=value lines, '#' comments. Flag values win;
// overridden keys are recorded in the metadata.

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Applies config defaults to a subcommand: every config key must name a known
// option; command-line flags override.
std::vector<std::string> apply_config(CLI::App* cmd,
                                      const std::map<std::string, std::string>& kv,
                                      const std::vector<std::string>& cli_given) {
  std::vector<std::string> overridden;
  for (const auto& [key, value] : kv) {
    CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("config key '" + key +
                                  "' is not a recognized option of '" +
                                  cmd->get_name() + "'");
    }
    if (std::find(cli_given.begin(), cli_given.end(), "--" + key) !=
        cli_given.end()) {
      overridden.push_back(key);
      continue;  // flag wins
    }
    opt->default_str(value);
    opt->force_callback();
  }
  return overridden;
}

std::map<std::string, std::string> collect_config(const CLI::App* cmd) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--config") continue;
    std::string name = opt->get_name();
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    const auto comma = name.find(',');
    if (comma != std::string::npos) name = name.substr(0, comma);
    // Execution-only knobs: no bearing on the results.
    if (name == "jobs" || name == "output") continue;
    if (opt->count() > 0) {
      out[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep grids

struct GridAxis {
  std::string key;
  std::vector<double> values;
};

GridAxis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("--grid: expected key=values, got '" + spec +
                                "'");
  }
  GridAxis axis;
  axis.key = spec.substr(0, eq);
  const std::string vals = spec.substr(eq + 1);
  const auto colons = std::count(vals.begin(), vals.end(), ':');
  if (colons == 2) {
    double lo, hi;
    int n;
    if (std::sscanf(vals.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) {
      throw std::invalid_argument("--grid: bad range spec '" + vals + "'");
    }
    for (int i = 0; i < n; ++i) {
      axis.values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
  } else {
    std::stringstream ss(vals);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      axis.values.push_back(std::stod(tok));
    }
    if (axis.values.empty()) {
      throw std::invalid_argument("--grid: empty value list for " + axis.key);
    }
  }
  return axis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unruh-DeWitt detector rates, nonperturbative correlator "
               "dynamics, and relativistic CV teleportation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default(true);
  app.set_version_flag("--version", udw::kVersion);

  std::string config_path;

  // ---- rate ----------------------------------------------------------------
  RateArgs ra;
  CLI::App* rate = app.add_subcommand("rate", "sharp-switching transition rate");
  rate->add_option("--config", config_path, "key=value config file");
  rate->add_option("--d", ra.d, "spacetime dimension")->check(CLI::Range(2, 6));
  rate->add_option("--omega", ra.omega, "detector gap");
  rate->add_option("--tau", ra.tau, "switch-off moment");
  rate->add_option("--dtau", ra.dtau, "elapsed plateau");
  rate->add_flag("--dtau-limit", ra.dtau_limit,
                 "extrapolate the dtau -> infinity limit");
  rate->add_option("--mu", ra.mu, "d=2 infrared mass");
  ra.traj.add_options(rate);
  ra.tol.add_options(rate);
  ra.out.add_options(rate);

  // ---- probability ----------------------------------------------------------
  ProbabilityArgs pa;
  CLI::App* prob =
      app.add_subcommand("probability", "smooth-switching response function");
  prob->add_option("--config", config_path, "key=value config file");
  prob->add_option("--d", pa.d, "spacetime dimension (2,3,4)")
      ->check(CLI::Range(2, 4));
  prob->add_option("--omega", pa.omega, "detector gap");
  prob->add_option("--tau0", pa.tau0, "plateau start");
  prob->add_option("--tau1", pa.tau1, "plateau end");
  prob->add_option("--delta", pa.delta, "ramp width");
  prob->add_option("--mu", pa.mu, "d=2 infrared mass");
  pa.traj.add_options(prob);
  pa.tol.add_options(prob);
  pa.out.add_options(prob);

  // ---- rho11 ----------------------------------------------------------------
  struct {
    double gamma = 1e-3;
    double a = 6.0;
    double omega = 2.3;
    double m0 = 1.0;
    double lambda0 = 20.0;
    double lambda1 = 20.0;
    double eta_max = 100.0;
    int samples = 201;
    double oversample = 80.0;
    OutputOpts out;
  } rh;
  CLI::App* rho = app.add_subcommand(
      "rho11", "exact vs perturbative excited-state population history");
  rho->add_option("--config", config_path, "key=value config file");
  rho->add_option("--gamma", rh.gamma, "coupling gamma = lambda^2/(8 pi m0)");
  rho->add_option("--a", rh.a, "proper acceleration (0 = inertial)");
  rho->add_option("--omega", rh.omega, "damped frequency Omega");
  rho->add_option("--m0", rh.m0, "detector mass");
  rho->add_option("--lambda0", rh.lambda0, "switch-on cutoff constant");
  rho->add_option("--lambda1", rh.lambda1, "time-independent cutoff constant");
  rho->add_option("--eta-max", rh.eta_max, "history length in proper time");
  rho->add_option("--samples", rh.samples, "output samples")
      ->check(CLI::Range(2, 2000000));
  rho->add_option("--oversample", rh.oversample,
                  "internal grid points per period");
  rh.out.add_options(rho);

  // ---- teleport ---------------------------------------------------------------
  struct {
    std::string mode = "pseudo";
    std::string foliation = "minkowski";
    double a = 1.0;
    double b = 2.0;
    double r1 = 1.0;
    double r2 = 5.0;
    double alpha_re = 1.0;
    double alpha_im = 0.0;
    double gamma = 0.0;
    double omega = 2.3;
    double tau2 = -1.0;  // <0: infinity
    double t1_min = 0.0;
    double t1_max = 10.0;
    int t1_count = 201;
    bool markers = false;
    OutputOpts out;
  } tp;
  CLI::App* tel = app.add_subcommand(
      "teleport", "CV teleportation between Alice (static) and Rob "
                  "(uniformly accelerated)");
  tel->add_option("--config", config_path, "key=value config file");
  tel->add_option("--mode", tp.mode, "pseudo|physical")
      ->check(CLI::IsMember({"pseudo", "physical"}));
  tel->add_option("--foliation", tp.foliation, "minkowski|quasi_rindler")
      ->check(CLI::IsMember({"minkowski", "quasi_rindler"}));
  tel->add_option("--a", tp.a, "Rob's proper acceleration");
  tel->add_option("--b", tp.b, "Alice sits at x = 1/b (a < b)");
  tel->add_option("--r1", tp.r1, "resource squeezing");
  tel->add_option("--r2", tp.r2, "measurement squeezing");
  tel->add_option("--alpha-re", tp.alpha_re, "Re alpha");
  tel->add_option("--alpha-im", tp.alpha_im, "Im alpha");
  tel->add_option("--gamma", tp.gamma, "detector-field coupling");
  tel->add_option("--omega", tp.omega, "damped frequency Omega");
  tel->add_option("--tau2", tp.tau2,
                  "Rob's acceleration cutoff (negative = eternal)");
  tel->add_option("--t1-min", tp.t1_min, "first measurement moment");
  tel->add_option("--t1-max", tp.t1_max, "last measurement moment");
  tel->add_option("--t1-count", tp.t1_count, "grid points")
      ->check(CLI::Range(1, 2000000));
  tel->add_flag("--markers", tp.markers, "append peak/t_half/t_dE metadata");
  tp.out.add_options(tel);

  // ---- sweep -----------------------------------------------------------------
  struct {
    std::string task = "rate";
    std::vector<std::string> grids;
    OutputOpts out;
  } sw;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Cartesian parameter sweep of a scalar task (rate|probability)");
  sweep->add_option("--config", config_path, "key=value config file");
  sweep->add_option("--task", sw.task, "rate|probability")
      ->check(CLI::IsMember({"rate", "probability"}));
  sweep
      ->add_option("--grid", sw.grids,
                   "axis spec key=lo:hi:n or key=v1,v2,... (up to 3)")
      ->expected(1, 3);
  // Task parameters (shared names with rate/probability).
  RateArgs sra;
  ProbabilityArgs spa;
  sweep->add_option("--d", sra.d, "spacetime dimension")->check(CLI::Range(2, 6));
  sweep->add_option("--omega", sra.omega, "detector gap");
  sweep->add_option("--tau", sra.tau, "switch-off moment");
  sweep->add_option("--dtau", sra.dtau, "elapsed plateau");
  sweep->add_flag("--dtau-limit", sra.dtau_limit, "dtau -> infinity");
  sweep->add_option("--mu", sra.mu, "d=2 infrared mass");
  sweep->add_option("--tau0", spa.tau0, "plateau start (probability)");
  sweep->add_option("--tau1", spa.tau1, "plateau end (probability)");
  sweep->add_option("--delta", spa.delta, "ramp width (probability)");
  sra.traj.add_options(sweep);
  sra.tol.add_options(sweep);
  sw.out.add_options(sweep);

  // Which flags were given on the command line (for override bookkeeping).
  std::vector<std::string> cli_given;
  for (int i = 1; i < argc; ++i) {
    std::string s = argv[i];
    if (s.rfind("--", 0) == 0) {
      const auto eq = s.find('=');
      cli_given.push_back(eq == std::string::npos ? s : s.substr(0, eq));
    }
  }

  CLI::App* active = nullptr;
  std::vector<std::string> overrides;
  try {
    // First parse pass: learn the subcommand and --config.
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion") {
        return app.exit(e);
      }
      throw;
    }
    active = app.get_subcommands().front();
    if (!config_path.empty()) {
      const auto kv = parse_config_file(config_path);
      overrides = apply_config(active, kv, cli_given);
      // Re-parse so config-provided defaults are applied and validated.
      app.clear();
      app.parse(argc, argv);
      active = app.get_subcommands().front();
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  RunMeta meta;
  meta.subcommand = active->get_name();
  meta.config = collect_config(active);
  meta.overrides = overrides;

  try {
    OutputTable table;
    const OutputOpts* out = nullptr;

    if (active == rate) {
      out = &ra.out;
      table.columns = rate_columns(ra.d);
      table.rows.push_back(rate_row(ra));
    } else if (active == prob) {
      out = &pa.out;
      table.columns = probability_columns();
      table.rows.push_back(probability_row(pa));
    } else if (active == rho) {
      out = &rh.out;
      udw::DetectorParams params = udw::DetectorParams::from_omega(
          rh.omega, rh.gamma, rh.m0, 1.0, rh.lambda0, rh.lambda1);
      std::vector<double> grid(rh.samples);
      for (int i = 0; i < rh.samples; ++i) {
        grid[i] = rh.eta_max * i / (rh.samples - 1);
      }
      udw::NoiseOptions nopt;
      nopt.oversample = rh.oversample;
      const auto hist = udw::rho11_history(params, rh.a, grid, nopt);
      table.columns = {"eta", "rho11", "rho11_pert", "qq", "pp", "pq",
                       "uncertainty_margin"};
      for (const auto& s : hist) {
        const auto pert = udw::perturbative_rho11(params, rh.a, s.eta);
        table.rows.push_back(
            {fmt_double(s.eta), fmt_double(s.rho11), fmt_double(pert.value),
             fmt_double(s.block.qq), fmt_double(s.block.pp),
             fmt_double(s.block.pq),
             fmt_double(s.block.uncertainty_margin(params.hbar))});
      }
    } else if (active == tel) {
      out = &tp.out;
      udw::TeleportScenario sc;
      sc.a = tp.a;
      sc.b = tp.b;
      sc.r1 = tp.r1;
      sc.r2 = tp.r2;
      sc.alpha = {tp.alpha_re, tp.alpha_im};
      sc.detector = udw::DetectorParams::from_omega(tp.omega, tp.gamma);
      sc.mode = tp.mode == "physical" ? udw::TeleportMode::Physical
                                      : udw::TeleportMode::Pseudo;
      sc.foliation = tp.foliation == "quasi_rindler"
                         ? udw::Foliation::QuasiRindler
                         : udw::Foliation::Minkowski;
      if (tp.tau2 > 0.0) sc.tau2 = tp.tau2;
      sc.t1_grid.resize(tp.t1_count);
      for (int i = 0; i < tp.t1_count; ++i) {
        sc.t1_grid[i] =
            tp.t1_count == 1
                ? tp.t1_min
                : tp.t1_min + (tp.t1_max - tp.t1_min) * i / (tp.t1_count - 1);
      }
      const udw::FidelitySeries series = sc.mode == udw::TeleportMode::Physical
                                             ? udw::run_physical(sc)
                                             : udw::run_pseudo(sc);
      table.columns = {"t1",  "tau_a", "tau_b",          "tau_adv",
                       "f_av", "e_n",   "signed_log_neg", "error"};
      for (const auto& pt : series.points) {
        table.rows.push_back({fmt_double(pt.t1), fmt_double(pt.tau_a),
                              fmt_double(pt.tau_b), fmt_double(pt.tau_adv),
                              fmt_double(pt.f_av), fmt_double(pt.e_n),
                              fmt_double(pt.signed_log_neg),
                              pt.failed ? pt.error : ""});
      }
      if (tp.markers) {
        const udw::TeleportMarkers mk = udw::extract_markers(series);
        meta.config["marker_peak_count"] = std::to_string(mk.peaks.size());
        if (mk.t_half) meta.config["marker_t_half"] = fmt_double(*mk.t_half);
        if (mk.t_de) meta.config["marker_t_de"] = fmt_double(*mk.t_de);
      }
    } else if (active == sweep) {
      out = &sw.out;
      std::vector<GridAxis> axes;
      for (const auto& g : sw.grids) axes.push_back(parse_grid(g));
      if (axes.empty()) {
        throw std::invalid_argument("sweep: at least one --grid is required");
      }

      spa.d = sra.d <= 4 ? sra.d : 4;
      spa.omega = sra.omega;
      spa.mu = sra.mu;
      spa.traj = sra.traj;
      spa.tol = sra.tol;
      // Grid keys are validated up front so a typo aborts instead of
      // producing a file of error rows.
      for (const auto& ax : axes) {
        static const std::set<std::string> known = {
            "omega", "a",    "dtau", "tau",      "mu", "delta",
            "tau0",  "tau1", "x0",   "velocity"};
        if (!known.count(ax.key)) {
          throw std::invalid_argument("sweep: unknown grid key '" + ax.key +
                                      "'");
        }
      }

      const bool is_rate = sw.task == "rate";
      table.columns.clear();
      for (const auto& ax : axes) table.columns.push_back(ax.key);
      {
        const auto task_cols =
            is_rate ? rate_columns(sra.d) : probability_columns();
        table.columns.insert(table.columns.end(), task_cols.begin(),
                             task_cols.end());
      }
      table.columns.push_back("error");

      std::vector<std::vector<double>> points;
      std::vector<double> current(axes.size());
      std::function<void(size_t)> rec = [&](size_t level) {
        if (level == axes.size()) {
          points.push_back(current);
          return;
        }
        for (double v : axes[level].values) {
          current[level] = v;
          rec(level + 1);
        }
      };
      rec(0);

      auto eval_point = [&](const std::vector<double>& pt)
          -> std::vector<std::string> {
        std::vector<std::string> row;
        for (double v : pt) row.push_back(fmt_double(v));
        RateArgs lr = sra;
        ProbabilityArgs lp = spa;
        auto apply_key = [&](const std::string& key, double v) {
          if (key == "omega") {
            lr.omega = v;
            lp.omega = v;
          } else if (key == "a") {
            lr.traj.a = v;
            lp.traj.a = v;
          } else if (key == "dtau") {
            lr.dtau = v;
          } else if (key == "tau") {
            lr.tau = v;
          } else if (key == "mu") {
            lr.mu = v;
            lp.mu = v;
          } else if (key == "delta") {
            lp.delta = v;
          } else if (key == "tau0") {
            lp.tau0 = v;
          } else if (key == "tau1") {
            lp.tau1 = v;
          } else if (key == "x0") {
            lr.traj.x0 = v;
            lp.traj.x0 = v;
          } else if (key == "velocity") {
            lr.traj.velocity = v;
            lp.traj.velocity = v;
          }
        };
        try {
          for (size_t i = 0; i < axes.size(); ++i) {
            apply_key(axes[i].key, pt[i]);
          }
          const auto cells = is_rate ? rate_row(lr) : probability_row(lp);
          row.insert(row.end(), cells.begin(), cells.end());
          row.push_back("");
        } catch (const std::exception& e) {
          // Per-point failures become error rows; the sweep continues.
          const size_t want = table.columns.size() - 1;
          while (row.size() < want) row.push_back("nan");
          std::string what = e.what();
          for (auto& ch : what) {
            if (ch == ',' || ch == '\n') ch = ';';
          }
          row.push_back(what);
        }
        return row;
      };

      if (sw.out.jobs <= 1) {
        for (const auto& pt : points) table.rows.push_back(eval_point(pt));
      } else {
        std::vector<std::future<std::vector<std::string>>> futs;
        for (const auto& pt : points) {
          futs.push_back(std::async(std::launch::async, eval_point, pt));
        }
        for (auto& f : futs) table.rows.push_back(f.get());
      }
    }

    emit(out->path, out->format, meta, table);
    return 0;
  } catch (const udw::NumericsError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
