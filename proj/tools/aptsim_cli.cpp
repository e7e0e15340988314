// aptsim: command-line driver for the dissipative qubit simulator.
//
// Every subcommand validates its parameters, checks that the output is
// writable, computes, and then writes the whole result in one go.
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 degenerate result.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "aptsim/aptsim.hpp"
#include "aptsim/io.hpp"

namespace {

using namespace aptsim;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double required(double v, const char* flag) {
  require(!std::isnan(v), std::string("missing required value ") + flag);
  return v;
}

// --- options ---------------------------------------------------------------

struct GlobalOptions {
  std::string config;
  std::string output{"-"};
  std::string format{"csv"};
  std::uint64_t seed{0};
  std::int64_t shots{1000};
};

struct NoiseOptions {
  double gamma_jitter{0.0};
  double angle_jitter{0.0};
  double p01{0.0};
  double p10{0.0};
  bool exact{false};
};

void add_noise_options(CLI::App* cmd, NoiseOptions& n) {
  cmd->add_option("--gamma-jitter", n.gamma_jitter,
                  "relative std of Gamma, resampled per run (dimensionless)");
  cmd->add_option("--angle-jitter", n.angle_jitter, "std of every rotation angle (rad)");
  cmd->add_option("--p01", n.p01, "probability of reading 1 when the outcome is 0");
  cmd->add_option("--p10", n.p10, "probability of reading 0 when the outcome is 1");
  cmd->add_flag("--exact", n.exact, "use exact outcome probabilities (infinite shots)");
}

ShotConfig shot_config(const GlobalOptions& g, const NoiseOptions& n) {
  ShotConfig c;
  c.n_shots = g.shots;
  c.seed = g.seed;
  c.exact = n.exact;
  c.noise = {n.gamma_jitter, n.angle_jitter, n.p01, n.p10};
  c.validate();
  return c;
}

struct EvolveOptions {
  double j{kUnset};
  double gamma{kUnset};
  double tau_max{100.0};
  int steps{200};
};

struct SweepOptions {
  double gamma{kUnset};
  std::vector<double> ratios;
  double ratio_min{0.2};
  double ratio_max{2.0};
  double ratio_step{0.1};
  int repeats{3};
  int calibration_points{10};
  NoiseOptions noise;
};

struct TrajectoryOptions {
  double j{kUnset};
  double gamma{kUnset};
  double tau{50.0};
  int steps{201};
  std::string initial{"minus"};
  bool allow_continuation{false};
};

struct TomographyOptions {
  double j{kUnset};
  double ratio{0.15};
  double gamma{0.4};
  double tau{10.0};
  NoiseOptions noise;
};

struct CalibrateOptions {
  std::string kind{"dissipation"};
  double j{kUnset};
  double gamma{kUnset};
  double tau_max{kUnset};
  int points{20};
  NoiseOptions noise;
};

struct ReproduceOptions {
  std::string preset;
};

// --- output ----------------------------------------------------------------

/// Opened (and so checked) before any computation; written once at the end.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open output file '" + path_ + "'");
    }
  }

  std::ostream& stream() { return buffer_; }

  void commit() {
    std::ostream& os = path_ == "-" ? std::cout : static_cast<std::ostream&>(file_);
    os << buffer_.str();
    os.flush();
    if (!os) throw IoError("failed writing output '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostringstream buffer_;
};

/// A small mixed-type table, used where no dedicated writer exists.
using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> provenance;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return io::format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<bool>(c) ? "1" : "0";
}

json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

void write_table(std::ostream& os, const Table& t, const std::string& format) {
  if (format == "json") {
    json out;
    out["provenance"] = t.provenance;
    auto& rows = out["rows"] = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) row[t.columns[i]] = cell_json(r[i]);
      rows.push_back(row);
    }
    os << out.dump(2) << '\n';
    return;
  }
  io::CsvWriter w(os);
  for (const auto& line : t.provenance) w.comment(line);
  w.header(t.columns);
  for (const auto& r : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : r) cells.push_back(cell_text(c));
    w.row_strings(cells);
  }
}

// --- config file -----------------------------------------------------------

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config file '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  return cfg;
}

std::string json_scalar_text(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return io::format_double(v.get<double>());
  throw ConfigError("config key '" + key + "' must be a number, string or boolean");
}

CLI::Option* find_option(CLI::App* cmd, const std::string& name) {
  for (CLI::App* app = cmd; app != nullptr; app = app->get_parent()) {
    if (auto* opt = app->get_option_no_throw("--" + name)) return opt;
    if (auto* opt = app->get_option_no_throw(name)) return opt;
  }
  return nullptr;
}

/// Fills options not given on the command line from the config object.
/// Keys are long option names; underscores and dashes are interchangeable.
void apply_config(const json& cfg, CLI::App* cmd) {
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    for (char& c : name) {
      if (c == '_') c = '-';
    }
    if (name == "config") throw ConfigError("config files cannot nest --config");
    CLI::Option* opt = find_option(cmd, name);
    if (opt == nullptr) throw ConfigError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(json_scalar_text(key, v));
    } else {
      opt->add_result(json_scalar_text(key, value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

// --- commands --------------------------------------------------------------

void check_format(const GlobalOptions& g) {
  require(g.format == "csv" || g.format == "json", "--format must be csv or json");
}

void check_positive(int v, int min, const char* flag) {
  require(v >= min, std::string(flag) + " must be >= " + std::to_string(min));
}

void check_time(double t, const char* flag) {
  require(std::isfinite(t) && t >= 0.0, std::string(flag) + " must be finite and >= 0 (μs)");
}

/// Grid values are rounded to 12 decimals so that e.g. 1.0 lands exactly.
std::vector<double> ratio_grid(const SweepOptions& o) {
  if (!o.ratios.empty()) return o.ratios;
  require(o.ratio_step > 0.0, "--ratio-step must be positive");
  require(o.ratio_max >= o.ratio_min, "--ratio-max must be >= --ratio-min");
  const auto n = static_cast<int>(std::floor((o.ratio_max - o.ratio_min) / o.ratio_step + 1e-9));
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) {
    out.push_back(std::round((o.ratio_min + k * o.ratio_step) * 1e12) / 1e12);
  }
  return out;
}

int cmd_evolve(const GlobalOptions& g, const EvolveOptions& o) {
  check_format(g);
  const SystemParams p = SystemParams::make(required(o.j, "--j"), required(o.gamma, "--gamma"));
  check_time(o.tau_max, "--tau-max");
  check_positive(o.steps, 1, "--steps");
  Output out(g.output);
  const auto rows = io::evolution_series(p, o.tau_max, o.steps);
  if (g.format == "json") {
    out.stream() << io::evolution_json(p, rows).dump(2) << '\n';
  } else {
    io::write_evolution_csv(out.stream(), rows);
  }
  out.commit();
  return kExitOk;
}

std::vector<EigenvalueEstimate> run_sweep(double gamma, const std::vector<double>& ratios,
                                          const ShotConfig& cfg, int repeats, int cal_points) {
  std::vector<double> js;
  for (double r : ratios) js.push_back(r * gamma);
  ProtocolOptions opt;
  opt.calibration_points = cal_points;
  auto est = run_eigenvalue_protocol(gamma, js, cfg, repeats, opt);
  for (std::size_t k = 0; k < est.size(); ++k) est[k].ratio = ratios[k];
  return est;
}

void warn_failed_points(const std::vector<EigenvalueEstimate>& est) {
  int failed = 0;
  for (const auto& e : est) failed += e.valid ? 0 : 1;
  if (failed > 0) std::cerr << "warning: " << failed << " sweep point(s) had no valid repeat\n";
}

int cmd_eigensweep(const GlobalOptions& g, const SweepOptions& o) {
  check_format(g);
  const double gamma = required(o.gamma, "--gamma");
  if (gamma == 0.0) throw UndefinedNormalization("normalized eigenvalues undefined for Gamma = 0");
  require(gamma > 0.0 && std::isfinite(gamma), "--gamma must be positive");
  const auto ratios = ratio_grid(o);
  require(!ratios.empty(), "ratio list is empty");
  for (double r : ratios) require(r > 0.0 && std::isfinite(r), "every ratio J/Gamma must be positive");
  check_positive(o.repeats, 1, "--repeats");
  check_positive(o.calibration_points, 3, "--calibration-points");
  const ShotConfig cfg = shot_config(g, o.noise);

  Output out(g.output);
  const auto est = run_sweep(gamma, ratios, cfg, o.repeats, o.calibration_points);
  if (g.format == "json") {
    out.stream() << io::sweep_json(gamma, est, cfg, o.repeats).dump(2) << '\n';
  } else {
    io::write_sweep_csv(out.stream(), gamma, est);
  }
  out.commit();
  warn_failed_points(est);
  return kExitOk;
}

QubitState initial_state(const std::string& name, const CptFrame& frame) {
  const double s = 1.0 / std::numbers::sqrt2;
  if (name == "minus") return {s, -s};
  if (name == "plus") return {s, s};
  if (name == "ground") return QubitState::ground();
  if (name == "excited") return QubitState::excited();
  if (name == "eps-plus") return frame.eps_plus;
  if (name == "eps-minus") return frame.eps_minus;
  throw ConfigError("--initial must be one of minus, plus, ground, excited, eps-plus, eps-minus");
}

int cmd_trajectory(const GlobalOptions& g, const TrajectoryOptions& o) {
  check_format(g);
  const SystemParams p = SystemParams::make(required(o.j, "--j"), required(o.gamma, "--gamma"));
  check_time(o.tau, "--tau");
  check_positive(o.steps, 2, "--steps");
  const CptFrame frame = make_cpt_frame(p, o.allow_continuation);
  const QubitState psi0 = initial_state(o.initial, frame);

  Output out(g.output);
  const auto samples = trajectory_hm(p, psi0, o.tau, o.steps, o.allow_continuation);
  if (g.format == "json") {
    out.stream() << io::trajectory_json(p, samples).dump(2) << '\n';
  } else {
    io::write_trajectory_csv(out.stream(), samples);
  }
  out.commit();
  if (!frame.regime_valid) std::cerr << "warning: r >= 1, coordinates are a non-physical continuation\n";
  return kExitOk;
}

Table tomography_table(const TomographyResult& t) {
  Table tab;
  tab.columns = {"quantity", "estimated", "theory"};
  const auto& e = t.estimated;
  const auto& th = t.theory;
  tab.rows = {{std::string("rho00"), e.rho00, th.rho00},
              {std::string("rho11"), e.rho11, th.rho11},
              {std::string("re_rho01"), e.rho01.real(), th.rho01.real()},
              {std::string("im_rho01"), e.rho01.imag(), th.rho01.imag()},
              {std::string("trace"), e.trace(), th.trace()},
              {std::string("fidelity"), t.fidelity, 1.0}};
  return tab;
}

SystemParams tomography_params(const TomographyOptions& o) {
  const double gamma = o.gamma;
  const double j = std::isnan(o.j) ? o.ratio * gamma : o.j;
  return SystemParams::make(j, gamma);
}

int cmd_tomography(const GlobalOptions& g, const TomographyOptions& o) {
  check_format(g);
  const SystemParams p = tomography_params(o);
  check_time(o.tau, "--tau");
  const ShotConfig cfg = shot_config(g, o.noise);

  Output out(g.output);
  const auto t = tomography(p, o.tau, cfg);
  if (g.format == "json") {
    out.stream() << io::tomography_json(p, o.tau, t, cfg).dump(2) << '\n';
  } else {
    write_table(out.stream(), tomography_table(t), "csv");
  }
  out.commit();
  return kExitOk;
}

struct CalibrationRun {
  std::vector<MeasurementRecord> records;
  FitResult fit;
};

CalibrationRun run_calibration(const std::string& kind, double rate, double tau_max, int points,
                               const ShotConfig& cfg) {
  Rng rng(cfg.seed);
  const auto taus = uniform_grid(0.0, tau_max, points);
  CalibrationRun run;
  if (kind == "dissipation") {
    run.records = simulate_dissipation_data(rate, taus, cfg, rng);
    run.fit = calibrate_gamma(run.records);
  } else {
    run.records = simulate_rabi_data(rate, taus, cfg, rng);
    run.fit = calibrate_j(run.records);
  }
  return run;
}

double calibration_model(const std::string& kind, double value, double tau) {
  if (kind == "dissipation") return dissipation_decay(value, tau);
  const double s = std::sin(value * tau);
  return s * s;
}

int cmd_calibrate(const GlobalOptions& g, const CalibrateOptions& o) {
  check_format(g);
  require(o.kind == "dissipation" || o.kind == "rabi", "--kind must be dissipation or rabi");
  const bool diss = o.kind == "dissipation";
  const double rate = diss ? required(o.gamma, "--gamma") : required(o.j, "--j");
  require(rate > 0.0 && std::isfinite(rate), diss ? "--gamma must be positive" : "--j must be positive");
  // Default windows: two 1/e times of the |1> population, or two Rabi periods.
  const double tau_max = std::isnan(o.tau_max) ? (diss ? 2.0 / (4.0 * rate) : 2.0 * std::numbers::pi / rate)
                                               : o.tau_max;
  require(std::isfinite(tau_max) && tau_max > 0.0, "--tau-max must be positive (μs)");
  check_positive(o.points, diss ? 3 : 8, "--points");
  const ShotConfig cfg = shot_config(g, o.noise);

  Output out(g.output);
  const auto run = run_calibration(o.kind, rate, tau_max, o.points, cfg);
  const char* name = diss ? "gamma" : "j";

  Table tab;
  tab.provenance = {std::string("fit ") + name + " = " + io::format_double(run.fit.value) +
                        " 1/us, std_error = " + io::format_double(run.fit.std_error) + " 1/us",
                    std::string("alias_warning = ") + (run.fit.alias_warning ? "1" : "0")};
  tab.columns = {"tau_us", "n0", "n1", "n_lost", "p1_measured", "p1_fit"};
  for (const auto& r : run.records) {
    tab.rows.push_back({r.tau, r.n0, r.n1, r.n_lost, r.p1(), calibration_model(o.kind, run.fit.value, r.tau)});
  }
  if (g.format == "json") {
    json j;
    j["kind"] = o.kind;
    j["fit"] = {{name, run.fit.value},
                {"std_error", run.fit.std_error},
                {"sse", run.fit.sse},
                {"iterations", run.fit.iterations},
                {"alias_warning", run.fit.alias_warning}};
    j["nominal"] = rate;
    j["shots"] = cfg.n_shots;
    j["exact"] = cfg.exact;
    j["seed"] = cfg.seed;
    j["noise_model"] = io::noise_json(cfg.noise);
    auto& data = j["data"] = json::array();
    for (const auto& row : tab.rows) {
      json r = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) r[tab.columns[i]] = cell_json(row[i]);
      data.push_back(r);
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    write_table(out.stream(), tab, "csv");
  }
  out.commit();
  if (run.fit.alias_warning) std::cerr << "warning: Rabi fit may be aliased\n";
  return kExitOk;
}

// --- reproduce presets -----------------------------------------------------

constexpr int kCurvePoints = 201;
constexpr int kDataPoints = 20;

std::string num(double v) { return io::format_double(v); }

/// Short form for series labels, e.g. gamma_0.022.
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void provenance_common(Table& t, const ShotConfig& cfg) {
  t.provenance.push_back("rates in 1/us, times in us");
  t.provenance.push_back("shots per point = " + std::to_string(cfg.n_shots) +
                         ", seed = " + std::to_string(cfg.seed) + ", noise = ideal");
}

Table preset_fig2a(const ShotConfig& cfg) {
  const double j = 0.06;
  const double tau_max = 100.0;
  Table t;
  t.provenance = {"preset fig2a: rho00(tau) under H_APT from |0>, J = 0.06",
                  "Gamma = 0.004 (broken) and 0.53 (symmetric)",
                  "assumed: theory grid 201 points and measured grid 20 points on [0, 100]"};
  provenance_common(t, cfg);
  t.columns = {"series", "t_us", "value"};
  Rng rng(cfg.seed);
  for (double gamma : {0.004, 0.53}) {
    const SystemParams p{j, gamma};
    const std::string tag = "gamma_" + label(gamma);
    for (double tau : uniform_grid(0.0, tau_max, kCurvePoints)) {
      t.rows.push_back({"theory_" + tag, tau, rho_closed(p, tau).rho00});
    }
    for (double tau : uniform_grid(0.0, tau_max, kDataPoints)) {
      const auto rec = run_and_measure(compile_apt_evolution(p, tau), QubitState::ground(), Basis::kZ, cfg, rng);
      t.rows.push_back({"measured_" + tag, tau, rec.p0()});
    }
  }
  return t;
}

Table preset_fig2b(const ShotConfig& cfg) {
  const double tau_max = 50.0;
  Table t;
  t.provenance = {"preset fig2b: rho11(tau) under pure dissipation from |1>, Gamma = 0.022 and 0.050",
                  "assumed: theory grid 201 points and measured grid 20 points on [0, 50]"};
  provenance_common(t, cfg);
  t.columns = {"series", "t_us", "value"};
  Rng rng(cfg.seed);
  for (double gamma : {0.022, 0.050}) {
    const std::string tag = "gamma_" + label(gamma);
    const auto taus = uniform_grid(0.0, tau_max, kDataPoints);
    const auto records = simulate_dissipation_data(gamma, taus, cfg, rng);
    const auto fit = calibrate_gamma(records);
    t.provenance.push_back("fitted " + tag + ": " + num(fit.value) + " +- " + num(fit.std_error));
    for (double tau : uniform_grid(0.0, tau_max, kCurvePoints)) {
      t.rows.push_back({"theory_" + tag, tau, dissipation_decay(gamma, tau)});
      t.rows.push_back({"fit_" + tag, tau, dissipation_decay(fit.value, tau)});
    }
    for (const auto& r : records) t.rows.push_back({"measured_" + tag, r.tau, r.p1()});
  }
  return t;
}

Table preset_fig2c(const ShotConfig& cfg) {
  const SystemParams p{0.065, 0.022};
  const double tau_max = 100.0;
  Table t;
  t.provenance = {"preset fig2c: overlap P(tau), J = 0.065, Gamma = 0.022",
                  "assumed: theory grid 201 points and measured grid 20 points on [0, 100]"};
  provenance_common(t, cfg);
  t.columns = {"series", "t_us", "value"};
  for (double tau : uniform_grid(0.0, tau_max, kCurvePoints)) {
    t.rows.push_back({std::string("theory"), tau, overlap_p(p, tau)});
  }
  Rng rng(cfg.seed);
  for (double tau : uniform_grid(0.0, tau_max, kDataPoints)) {
    t.rows.push_back({std::string("measured"), tau, measure_overlap_p(p, tau, cfg, rng)});
  }
  return t;
}

Table preset_fig2d(const ShotConfig& cfg, int* failed) {
  const double gamma = 0.050;
  SweepOptions o;
  const auto ratios = ratio_grid(o);
  const auto est = run_sweep(gamma, ratios, cfg, 3, 10);
  Table t;
  t.provenance = {"preset fig2d: eigenvalue protocol E+/Gamma, Gamma = 0.050, tau0 = 1/J",
                  "ratios J/Gamma 0.2 to 2.0 step 0.1, 3 repeats per ratio",
                  "assumed: Gamma recalibrated each repeat from 10 points on [0, 2/(4 Gamma)]",
                  "per-point seed = base seed xor point index"};
  provenance_common(t, cfg);
  t.columns = {"ratio", "re_E_plus", "im_E_plus", "std_re", "std_im", "re_E_plus_theory",
               "im_E_plus_theory"};
  for (const auto& e : est) {
    const auto theory = eigenvalues_apt({e.j, gamma}).first;
    if (e.valid) {
      t.rows.push_back({e.ratio, e.e_plus.real(), e.e_plus.imag(), e.std_real, e.std_imag,
                        theory.real(), theory.imag()});
    } else {
      ++*failed;
      const Cell empty = std::string();
      t.rows.push_back({e.ratio, empty, empty, empty, empty, theory.real(), theory.imag()});
    }
  }
  return t;
}

Table preset_fig3(const ShotConfig& cfg) {
  const double gamma = 0.4;
  const SystemParams p{0.15 * gamma, gamma};
  const auto tomo = tomography(p, 10.0, cfg);
  Table t = tomography_table(tomo);
  t.provenance = {"preset fig3: tomography after H_APT evolution for 10 us, J/Gamma = 0.15",
                  "assumed: Gamma = 0.4 (absolute Gamma is a free input), J = 0.06"};
  provenance_common(t, cfg);
  return t;
}

Table preset_cpt_sphere() {
  Table t;
  t.provenance = {"preset cpt-sphere: H_M trajectory from (|0> - |1>)/sqrt(2), J = 0.06, tau = 50",
                  "Gamma = 0.03 (r = 0.5) and Gamma = 0.12 (r = 2, non-physical continuation)",
                  "assumed: 201 samples"};
  t.columns = {"gamma", "physical", "t_us", "x", "y", "z", "x_norm", "y_norm", "z_norm", "R", "Theta", "Phi"};
  const double s = 1.0 / std::numbers::sqrt2;
  for (double gamma : {0.03, 0.12}) {
    const auto samples = trajectory_hm({0.06, gamma}, {s, -s}, 50.0, kCurvePoints, true);
    for (const auto& x : samples) {
      t.rows.push_back({gamma, x.raw.physical, x.t, x.raw.x(), x.raw.y(), x.raw.z(), x.normalized.x(),
                        x.normalized.y(), x.normalized.z(), x.raw.radius, x.raw.theta, x.raw.phi});
    }
  }
  return t;
}

int cmd_reproduce(const GlobalOptions& g, const ReproduceOptions& o, bool shots_given) {
  check_format(g);
  GlobalOptions eff = g;
  if (!shots_given && o.preset == "fig3") eff.shots = 10'000;
  const ShotConfig cfg = shot_config(eff, {});

  Output out(g.output);
  Table t;
  int failed = 0;
  if (o.preset == "fig2a") t = preset_fig2a(cfg);
  else if (o.preset == "fig2b") t = preset_fig2b(cfg);
  else if (o.preset == "fig2c") t = preset_fig2c(cfg);
  else if (o.preset == "fig2d") t = preset_fig2d(cfg, &failed);
  else if (o.preset == "fig3") t = preset_fig3(cfg);
  else if (o.preset == "cpt-sphere") t = preset_cpt_sphere();
  else throw ConfigError("unknown preset '" + o.preset + "'");
  write_table(out.stream(), t, g.format);
  out.commit();
  if (failed > 0) std::cerr << "warning: " << failed << " sweep point(s) had no valid repeat\n";
  return kExitOk;
}

int report(int code, const std::string& msg) {
  std::string line = msg;
  for (char& c : line) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "aptsim: " << line << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for a dissipative qubit with anti-PT symmetry.\n"
               "Rates J and Gamma are in 1/μs, times in μs.",
               "aptsim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "JSON file with option values (keys are long option names)");
  app.add_option("--output,-o", g.output, "output path, - for stdout");
  app.add_option("--format", g.format, "csv or json");
  app.add_option("--seed", g.seed, "base RNG seed (u64)");
  auto* shots_opt = app.add_option("--shots", g.shots, "shots per measurement");

  EvolveOptions ev;
  auto* evolve = app.add_subcommand("evolve", "closed-form rho(tau) and overlap P(tau) under H_APT from |0>");
  evolve->add_option("--j", ev.j, "coupling J (1/μs)");
  evolve->add_option("--gamma", ev.gamma, "dissipation rate Gamma (1/μs)");
  evolve->add_option("--tau-max", ev.tau_max, "end of the time grid (μs)")->capture_default_str();
  evolve->add_option("--steps", ev.steps, "number of intervals; tau-max 0 gives one row")->capture_default_str();

  SweepOptions sw;
  auto* sweep = app.add_subcommand("eigensweep", "simulated eigenvalue protocol over J/Gamma");
  sweep->add_option("--gamma", sw.gamma, "nominal dissipation rate Gamma (1/μs)");
  sweep->add_option("--ratios", sw.ratios, "explicit J/Gamma list (dimensionless)");
  sweep->add_option("--ratio-min", sw.ratio_min, "first J/Gamma of the grid")->capture_default_str();
  sweep->add_option("--ratio-max", sw.ratio_max, "last J/Gamma of the grid")->capture_default_str();
  sweep->add_option("--ratio-step", sw.ratio_step, "J/Gamma grid step")->capture_default_str();
  sweep->add_option("--repeats", sw.repeats, "protocol repeats per ratio")->capture_default_str();
  sweep->add_option("--calibration-points", sw.calibration_points,
                    "dissipation points per Gamma recalibration, on [0, 2/(4 Gamma)] μs")
      ->capture_default_str();
  add_noise_options(sweep, sw.noise);

  TrajectoryOptions tr;
  auto* traj = app.add_subcommand("trajectory", "non-Hermitian Bloch sphere trajectory under H_M");
  traj->add_option("--j", tr.j, "coupling J (1/μs)");
  traj->add_option("--gamma", tr.gamma, "dissipation rate Gamma (1/μs)");
  traj->add_option("--tau", tr.tau, "evolution time (μs)")->capture_default_str();
  traj->add_option("--steps", tr.steps, "number of samples")->capture_default_str();
  traj->add_option("--initial", tr.initial, "minus, plus, ground, excited, eps-plus or eps-minus")
      ->capture_default_str();
  traj->add_flag("--allow-continuation", tr.allow_continuation,
                 "allow r = Gamma/J > 1; output is tagged non-physical");

  TomographyOptions to;
  auto* tomo = app.add_subcommand("tomography", "simulated state tomography after H_APT evolution");
  tomo->add_option("--j", to.j, "coupling J (1/μs); overrides --ratio");
  tomo->add_option("--ratio", to.ratio, "J/Gamma (dimensionless)")->capture_default_str();
  tomo->add_option("--gamma", to.gamma, "dissipation rate Gamma (1/μs)")->capture_default_str();
  tomo->add_option("--tau", to.tau, "evolution time (μs)")->capture_default_str();
  add_noise_options(tomo, to.noise);

  CalibrateOptions ca;
  auto* cal = app.add_subcommand("calibrate", "simulated calibration fit of Gamma or J");
  cal->add_option("--kind", ca.kind, "dissipation (fits Gamma) or rabi (fits J)")->capture_default_str();
  cal->add_option("--gamma", ca.gamma, "true Gamma for dissipation data (1/μs)");
  cal->add_option("--j", ca.j, "true J for Rabi data (1/μs)");
  cal->add_option("--tau-max", ca.tau_max,
                  "end of the time grid (μs); default 2/(4 Gamma) or two Rabi periods");
  cal->add_option("--points", ca.points, "number of time points")->capture_default_str();
  add_noise_options(cal, ca.noise);

  const std::string global_help =
      "Global options (accepted before or after the command):\n"
      "  --config PATH     JSON file with option values\n"
      "  --output,-o PATH  output path, - for stdout\n"
      "  --format FORMAT   csv or json\n"
      "  --seed U64        base RNG seed\n"
      "  --shots INT       shots per measurement";
  ReproduceOptions rp;
  auto* repro = app.add_subcommand("reproduce", "figure data presets with a provenance header");
  repro->add_option("preset", rp.preset, "fig2a, fig2b, fig2c, fig2d, fig3 or cpt-sphere");

  for (CLI::App* cmd : {evolve, sweep, traj, tomo, cal, repro}) cmd->footer(global_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitConfig, e.what());
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    if (!g.config.empty()) apply_config(load_config(g.config), cmd);
    if (cmd == evolve) return cmd_evolve(g, ev);
    if (cmd == sweep) return cmd_eigensweep(g, sw);
    if (cmd == traj) return cmd_trajectory(g, tr);
    if (cmd == tomo) return cmd_tomography(g, to);
    if (cmd == cal) return cmd_calibrate(g, ca);
    require(!rp.preset.empty(), "reproduce needs a preset name");
    return cmd_reproduce(g, rp, shots_opt->count() > 0);
  } catch (const ConfigError& e) {
    return report(kExitConfig, e.what());
  } catch (const IoError& e) {
    return report(kExitIo, e.what());
  } catch (const InvalidParams& e) {
    return report(kExitConfig, e.what());
  } catch (const InvalidRegime& e) {
    return report(kExitConfig, e.what());
  } catch (const UndefinedNormalization& e) {
    return report(kExitConfig, e.what());
  } catch (const Error& e) {
    return report(kExitDegenerate, e.what());
  }
}
