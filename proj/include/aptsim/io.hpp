#pragma once

// Tabular and JSON export. CSV numbers use 17 significant digits so that
// every double round-trips exactly.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aptsim/analytics.hpp"
#include "aptsim/cpt_bloch.hpp"
#include "aptsim/virtual_lab.hpp"

namespace aptsim::io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(std::string_view text) { os_ << "# " << text << '\n'; }

  void header(const std::vector<std::string>& cols) { row_strings(cols); }

  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) os_ << ',';
      os_ << format_double(vals[i]);
    }
    os_ << '\n';
  }

  void row_strings(const std::vector<std::string>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) os_ << ',';
      os_ << vals[i];
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

// --- time series -----------------------------------------------------------

struct EvolutionRow {
  double t{0.0};
  DensityMatrix2 rho{};
  double overlap{0.0};
};

inline std::vector<EvolutionRow> evolution_series(const SystemParams& p, double tau_max, int steps) {
  std::vector<EvolutionRow> rows;
  const int n = tau_max == 0.0 ? 1 : steps + 1;
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : tau_max * k / steps;
    rows.push_back({t, rho_closed(p, t), overlap_p(p, t)});
  }
  return rows;
}

inline const std::vector<std::string>& evolution_columns() {
  static const std::vector<std::string> cols{"t_us",   "rho00",   "rho11",    "re_rho01",
                                             "im_rho01", "trace", "overlap_p"};
  return cols;
}

inline std::vector<double> evolution_values(const EvolutionRow& r) {
  return {r.t, r.rho.rho00, r.rho.rho11, r.rho.rho01.real(), r.rho.rho01.imag(), r.rho.trace(),
          r.overlap};
}

inline void write_evolution_csv(std::ostream& os, const std::vector<EvolutionRow>& rows) {
  CsvWriter w(os);
  w.header(evolution_columns());
  for (const auto& r : rows) w.row(evolution_values(r));
}

inline nlohmann::json evolution_json(const SystemParams& p, const std::vector<EvolutionRow>& rows) {
  nlohmann::json out;
  out["params"] = {{"j", p.j}, {"gamma", p.gamma}, {"regime", to_string(p.regime())}};
  auto& arr = out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    const auto vals = evolution_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) row[evolution_columns()[i]] = vals[i];
    arr.push_back(row);
  }
  return out;
}

// --- trajectory ------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples,
                                 bool with_header = true) {
  CsvWriter w(os);
  if (with_header) {
    w.header({"t_us", "x", "y", "z", "x_norm", "y_norm", "z_norm", "R", "Theta", "Phi"});
  }
  for (const auto& s : samples) {
    w.row({s.t, s.raw.x(), s.raw.y(), s.raw.z(), s.normalized.x(), s.normalized.y(),
           s.normalized.z(), s.raw.radius, s.raw.theta, s.raw.phi});
  }
}

inline nlohmann::json trajectory_json(const SystemParams& p,
                                      const std::vector<TrajectorySample>& samples) {
  nlohmann::json out;
  out["params"] = {{"j", p.j}, {"gamma", p.gamma}};
  out["physical"] = samples.empty() || samples.front().raw.physical;
  auto& arr = out["rows"] = nlohmann::json::array();
  for (const auto& s : samples) {
    arr.push_back({{"t_us", s.t},
                   {"x", s.raw.x()},
                   {"y", s.raw.y()},
                   {"z", s.raw.z()},
                   {"x_norm", s.normalized.x()},
                   {"y_norm", s.normalized.y()},
                   {"z_norm", s.normalized.z()},
                   {"R", s.raw.radius},
                   {"Theta", s.raw.theta},
                   {"Phi", s.raw.phi}});
  }
  return out;
}

// --- eigenvalue sweep ------------------------------------------------------

inline nlohmann::json noise_json(const NoiseModel& n) {
  return {{"gamma_jitter_rel", n.gamma_jitter_rel},
          {"angle_jitter_rad", n.angle_jitter_rad},
          {"readout_p01", n.p01},
          {"readout_p10", n.p10},
          {"ideal", n.is_ideal()}};
}

/// ratio, re_E_plus, im_E_plus, std_re, std_im, then the analytic curve.
/// Failed points leave the measured fields empty.
inline void write_sweep_csv(std::ostream& os, double gamma,
                            const std::vector<EigenvalueEstimate>& est) {
  CsvWriter w(os);
  w.header({"ratio", "re_E_plus", "im_E_plus", "std_re", "std_im", "re_E_plus_theory",
            "im_E_plus_theory"});
  for (const auto& e : est) {
    const auto theory = eigenvalues_apt(SystemParams{e.j, gamma}).first;
    std::vector<std::string> cells{format_double(e.ratio)};
    if (e.valid) {
      for (double v : {e.e_plus.real(), e.e_plus.imag(), e.std_real, e.std_imag}) {
        cells.push_back(format_double(v));
      }
    } else {
      cells.insert(cells.end(), 4, "");
    }
    cells.push_back(format_double(theory.real()));
    cells.push_back(format_double(theory.imag()));
    w.row_strings(cells);
  }
}

inline nlohmann::json sweep_json(double gamma, const std::vector<EigenvalueEstimate>& est,
                                 const ShotConfig& cfg, int n_repeats) {
  nlohmann::json out;
  nlohmann::json j_list = nlohmann::json::array();
  nlohmann::json taus = nlohmann::json::array();
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : est) {
    j_list.push_back(e.j);
    taus.push_back(e.tau0);
    seeds.push_back(e.seed);
    const auto theory = eigenvalues_apt(SystemParams{e.j, gamma});
    nlohmann::json row{{"ratio", e.ratio},
                       {"j", e.j},
                       {"tau0_us", e.tau0},
                       {"valid", e.valid},
                       {"n_valid", e.n_valid},
                       {"n_failed", e.n_failed},
                       {"theory_E_plus", {theory.first.real(), theory.first.imag()}},
                       {"theory_E_minus", {theory.second.real(), theory.second.imag()}}};
    if (e.valid) {
      row["E_plus"] = {e.e_plus.real(), e.e_plus.imag()};
      row["E_minus"] = {e.e_minus.real(), e.e_minus.imag()};
      row["std_re"] = e.std_real;
      row["std_im"] = e.std_imag;
    } else {
      row["E_plus"] = nullptr;
      row["E_minus"] = nullptr;
    }
    rows.push_back(row);
  }
  out["params"] = {{"gamma", gamma}, {"j_list", j_list}, {"repeats", n_repeats},
                   {"shots", cfg.n_shots}, {"exact", cfg.exact}};
  out["tau_us"] = taus;
  out["estimates"] = rows;
  out["seeds"] = {{"base", cfg.seed}, {"per_point", seeds}};
  out["noise_model"] = noise_json(cfg.noise);
  return out;
}

// --- tomography ------------------------------------------------------------

inline nlohmann::json density_json(const DensityMatrix2& r) {
  return {{"rho00", r.rho00},
          {"rho11", r.rho11},
          {"re_rho01", r.rho01.real()},
          {"im_rho01", r.rho01.imag()},
          {"trace", r.trace()}};
}

inline nlohmann::json tomography_json(const SystemParams& p, double tau,
                                      const TomographyResult& t, const ShotConfig& cfg) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& r : t.records) {
    counts[to_string(r.basis)] = {{"n0", r.n0}, {"n1", r.n1}, {"n_lost", r.n_lost}};
  }
  return {{"params", {{"j", p.j}, {"gamma", p.gamma}, {"ratio", p.gamma > 0 ? p.j / p.gamma : 0.0}}},
          {"tau_us", tau},
          {"estimated", density_json(t.estimated)},
          {"theory", density_json(t.theory)},
          {"fidelity", t.fidelity},
          {"psd_projected", t.projected},
          {"counts", counts},
          {"shots", cfg.n_shots},
          {"exact", cfg.exact},
          {"seed", cfg.seed},
          {"noise_model", noise_json(cfg.noise)}};
}

}  // namespace aptsim::io
