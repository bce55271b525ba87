#pragma once

// Report records: JSON conversion of every study result, CSV/plot tables with
// 17 significant digits, and the file writers.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgl/experiments.hpp"
#include "dgl/identities.hpp"
#include "dgl/integrator.hpp"
#include "dgl/regimes.hpp"

namespace dgl {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

/// %.17g; non-finite values print as nan, inf, -inf.
inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Tables

struct Table {
  std::string name;  ///< file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void add_numbers(const std::vector<double>& row) {
    std::vector<std::string> r;
    r.reserve(row.size());
    for (double v : row) r.push_back(fmt17(v));
    rows.push_back(std::move(r));
  }
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
    out += "\r\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

/// Whitespace-delimited columns with a '#' header line.
inline std::string to_plot_data(const Table& t) {
  std::string out = "#";
  for (const auto& c : t.columns) out += " " + c;
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string cell = r[i];
      for (char& ch : cell)
        if (ch == ' ' || ch == '\t') ch = '_';
      out += (i ? " " : "") + (cell.empty() ? std::string("-") : cell);
    }
    out += "\n";
  }
  return out;
}

/// gnuplot stub: one page per table, first column against each numeric column.
inline std::string plot_script(const std::vector<Table>& tables) {
  auto numeric = [](const std::string& cell) {
    char* end = nullptr;
    std::strtod(cell.c_str(), &end);
    return !cell.empty() && *end == '\0';
  };
  std::string out = "# gnuplot -p plot.gp\nset datafile missing \"-\"\n";
  for (const auto& t : tables) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 1; c < t.columns.size(); ++c)
      if (!t.rows.empty() && numeric(t.rows.front()[c])) cols.push_back(c);
    if (cols.empty()) continue;
    out += "\nset title \"" + t.name + "\"\nset xlabel \"" + t.columns[0] + "\"\nplot";
    for (std::size_t c : cols)
      out += std::string(c != cols.front() ? "," : "") + " \"" + t.name + ".dat\" using 1:" + std::to_string(c + 1) +
             " with linespoints title \"" + t.columns[c] + "\"";
    out += "\npause -1\n";
  }
  return out;
}

inline std::string opt_cell(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }
inline std::string bool_cell(bool b) { return b ? "true" : "false"; }
inline std::string opt_bool_cell(const std::optional<bool>& b) { return b ? bool_cell(*b) : std::string(); }

// ---------------------------------------------------------------------------
// JSON conversions

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline json opt(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }
inline json opt(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
inline json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const ModelParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta}, {"gamma", p.gamma}, {"mu", p.mu}};
}

inline json to_json(const RegimeReport& r) {
  const auto& k = r.constants;
  json j;
  j["case"] = to_string(r.case_label);
  j["A"] = k.a;
  j["B"] = k.b;
  j["C"] = k.c;
  j["D"] = k.d;
  j["K"] = opt(k.k);
  j["R1"] = opt(r.r1);
  j["R2"] = opt(r.r2);
  j["restricted_radius_sq"] = r.restricted_radius_sq;
  j["delta0"] = opt(r.delta0);
  j["rho_sq_ldgl"] = r.rho_sq_ldgl;
  j["rho_sq_nldgl"] = opt(r.rho_sq_nldgl);
  j["absorb_margin"] = r.absorb_margin;
  j["rho_tilde_sq_ldgl"] = r.absorb_margin * r.rho_sq_ldgl;
  j["rho_tilde_sq_nldgl"] = r.rho_sq_nldgl ? json(r.absorb_margin * *r.rho_sq_nldgl) : json(nullptr);
  j["nonescape_rho1"] = opt(r.nonescape_rho1);
  j["nonescape_R0_sq_printed"] = opt(r.nonescape_r0_sq_printed);
  j["nonescape_R0_sq_alt"] = opt(r.nonescape_r0_sq_alt);
  j["entry_time_ldgl"] = opt(r.entry_time_ldgl);
  j["entry_time_nldgl"] = opt(r.entry_time_nldgl);
  j["entry_time"] = opt(r.entry_time);
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const ClosenessConstants& c) {
  return {{"C", opt(c.c_uniform)}, {"C1", opt(c.c_limsup)}, {"C2", opt(c.c_finite_horizon)}};
}

inline json to_json(const ClosenessReport& r) {
  json j;
  j["epsilon"] = r.epsilon;
  j["sup_distance_l2"] = r.sup_distance_l2;
  j["sup_distance_linf"] = r.sup_distance_linf;
  j["tail_window_limsup"] = r.tail_window_limsup;
  j["bound_used"] = r.bound_used;
  j["pass"] = r.pass;
  j["linf_pass"] = r.linf_pass;
  j["constants"] = to_json(r.constants);
  j["samples"] = r.times.size();
  j["diagnostic"] = opt(r.diagnostic);
  return j;
}

inline Table closeness_table(const ClosenessReport& r, const std::string& name) {
  Table t{name, {"t", "dist_l2", "dist_linf", "bound"}, {}};
  for (std::size_t i = 0; i < r.times.size(); ++i) t.add_numbers({r.times[i], r.dist_l2[i], r.dist_linf[i], r.bound_used});
  return t;
}

inline json to_json(const TailReport& r) {
  json j;
  j["xi"] = r.xi;
  j["k_values"] = r.k_values;
  j["min_k_passing"] = opt(r.min_k_passing);
  j["time_of_entry"] = opt(r.time_of_entry);
  j["hypotheses_hold"] = r.hypotheses_hold;
  j["trailing_samples"] = r.sample_times.size();
  json final_row = json::array();
  if (!r.tail_masses.empty())
    for (double v : r.tail_masses.back()) final_row.push_back(v);
  j["final_tail_masses"] = final_row;
  j["notes"] = r.notes;
  return j;
}

inline Table tail_table(const TailReport& r) {
  Table t{"tail", {"t"}, {}};
  for (int k : r.k_values) t.columns.push_back("tail_k" + std::to_string(k));
  for (std::size_t i = 0; i < r.sample_times.size(); ++i) {
    std::vector<double> row{r.sample_times[i]};
    row.insert(row.end(), r.tail_masses[i].begin(), r.tail_masses[i].end());
    t.add_numbers(row);
  }
  return t;
}

inline json to_json(const CongruenceReport& r) {
  json j;
  j["case"] = to_string(r.case_label);
  j["C1"] = r.c_limsup;
  j["rows"] = json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"epsilon", row.epsilon},
                         {"dist_v_to_u", row.dist_v_to_u},
                         {"dist_u_to_v", row.dist_u_to_v},
                         {"sampling_tolerance", row.sampling_tolerance},
                         {"bound", row.bound},
                         {"pass", row.pass},
                         {"points_u", row.points_u},
                         {"points_v", row.points_v}});
  j["non_increasing"] = r.non_increasing;
  j["pass"] = r.pass;
  j["warnings"] = r.warnings;
  return j;
}

inline Table congruence_table(const CongruenceReport& r) {
  Table t{"congruence", {"epsilon", "dist_v_to_u", "dist_u_to_v", "sampling_tolerance", "bound", "pass"}, {}};
  for (const auto& row : r.rows)
    t.add({fmt17(row.epsilon), fmt17(row.dist_v_to_u), fmt17(row.dist_u_to_v), fmt17(row.sampling_tolerance),
           fmt17(row.bound), bool_cell(row.pass)});
  return t;
}

inline json to_json(const RegimeProbe& p) {
  json j;
  j["chi0"] = p.chi0;
  j["status"] = to_string(p.status);
  j["chi_blowup_time"] = opt(p.chi_blowup_time);
  j["w_blowup_time"] = opt(p.w_blowup_time);
  j["chi_nonincreasing"] = p.chi_nonincreasing;
  j["max_excess_over_chi0"] = p.max_excess_over_chi0;
  j["stays_in_annulus"] = opt(p.stays_in_annulus);
  j["terminal_chi"] = p.terminal_chi;
  j["terminal_minus_R2"] = opt(p.terminal_minus_r2);
  j["envelope_ok"] = p.envelope_ok;
  j["max_envelope_ratio"] = p.max_envelope_ratio;
  j["envelope_samples"] = p.envelope_samples;
  j["bernoulli_ok"] = opt(p.bernoulli_ok);
  return j;
}

inline json to_json(const RegimeVerification& v) {
  json j;
  j["regime"] = to_json(v.regime);
  j["g_norm2"] = v.g_norm2;
  j["probes"] = json::array();
  for (const auto& p : v.probes) j["probes"].push_back(to_json(p));
  j["asserted_pass"] = v.asserted_pass;
  return j;
}

inline std::vector<Table> regime_tables(const RegimeVerification& v) {
  std::vector<Table> out;
  Table s{"regime_summary",
          {"chi0", "status", "terminal_chi", "terminal_minus_R2", "chi_nonincreasing", "stays_in_annulus",
           "envelope_ok", "bernoulli_ok", "max_envelope_ratio"},
          {}};
  for (const auto& p : v.probes)
    s.add({fmt17(p.chi0), to_string(p.status), fmt17(p.terminal_chi), opt_cell(p.terminal_minus_r2),
           bool_cell(p.chi_nonincreasing), opt_bool_cell(p.stays_in_annulus), bool_cell(p.envelope_ok),
           opt_bool_cell(p.bernoulli_ok), fmt17(p.max_envelope_ratio)});
  out.push_back(std::move(s));
  for (std::size_t i = 0; i < v.probes.size(); ++i) {
    const auto& p = v.probes[i];
    Table t{"regime_probe" + std::to_string(i), {"t", "chi", "w"}, {}};
    for (std::size_t j = 0; j < p.times.size(); ++j)
      t.add({fmt17(p.times[j]), fmt17(p.chi[j]), j < p.w.size() ? fmt17(p.w[j]) : std::string()});
    out.push_back(std::move(t));
  }
  return out;
}

inline json to_json(const IdentityCheckReport& r) {
  return {{"draws", r.draws},
          {"half_width", r.half_width},
          {"seed", r.seed},
          {"max_self_adjoint_residual", r.max_self_adjoint_residual},
          {"max_negativity_residual", r.max_negativity_residual},
          {"max_positive_part", r.max_positive_part},
          {"max_operator_ratio", r.max_operator_ratio},
          {"alternating_ratio", r.alternating_ratio},
          {"max_balance_residual_ldgl", r.max_balance_residual_ldgl},
          {"max_balance_residual_nldgl", r.max_balance_residual_nldgl}};
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace dgl
