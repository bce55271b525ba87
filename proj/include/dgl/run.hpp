#pragma once

// Config-driven experiment dispatch: one JSON report, CSV tables and plot data
// per run, exit status by failure class.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dgl/config.hpp"
#include "dgl/experiments.hpp"
#include "dgl/identities.hpp"
#include "dgl/integrator.hpp"
#include "dgl/regimes.hpp"
#include "dgl/report.hpp"

namespace dgl {

enum ExitCode : int { kExitOk = 0, kExitHypothesis = 1, kExitConfig = 2, kExitNumerical = 3 };

inline constexpr const char* kOutputDirEnv = "DGL_OUTPUT_DIR";

struct RunOptions {
  std::optional<std::string> out_dir;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

/// What an experiment produced, before anything is written.
struct RunOutcome {
  json results;
  std::vector<Table> tables;
  int exit_code = kExitOk;
  std::optional<std::string> diagnostic;  ///< set when exit_code != 0
};

/// --out, then output.directory, then $DGL_OUTPUT_DIR, then ./dgl_out.
inline std::filesystem::path resolve_output_dir(const RunOptions& opts, const RunConfig* cfg) {
  if (opts.out_dir) return *opts.out_dir;
  if (cfg && cfg->output.directory) return *cfg->output.directory;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "dgl_out";
}

inline IntegratorOptions integrator_options(const RunConfig& c) {
  IntegratorOptions o;
  o.tolerances = {c.integrator.abs_tol, c.integrator.rel_tol};
  o.sample_stride = c.integrator.sample_stride;
  o.blowup_threshold = c.lattice.blowup_threshold;
  return o;
}

namespace detail {

inline InitialFamily family_from(const RunConfig& c, double eps, double c0, double cu0, double cv0,
                                 const ProfileSpec& u, const ProfileSpec& psi, const std::string& key) {
  InitialFamily f;
  f.epsilon = eps;
  f.c0 = c0;
  f.cu0 = cu0;
  f.cv0 = cv0;
  f.u_profile = build_profile(u, c.lattice.half_width, key + ".u_profile");
  f.perturb_profile = build_profile(psi, c.lattice.half_width, key + ".perturb_profile");
  return f;
}

inline RunOutcome run_simulate(const RunConfig& c, const SimulateSpec& s, const Forcing& g) {
  const LatticeState u0 = build_profile(s.initial, c.lattice.half_width, "experiment.initial");
  const Trajectory tr = integrate_adaptive(u0, c.model, g, s.horizon, integrator_options(c));
  RunOutcome out;
  double max_chi = 0.0;
  for (double v : tr.chi) max_chi = std::max(max_chi, v);
  out.results = {{"status", to_string(tr.status)},
                 {"blowup_time", opt(tr.blowup_time)},
                 {"t_end", tr.t_end},
                 {"initial_chi", norm2(u0)},
                 {"final_chi", norm2(tr.final_state)},
                 {"max_sampled_chi", max_chi},
                 {"samples", tr.times.size()},
                 {"accepted_steps", tr.accepted_steps},
                 {"rejected_steps", tr.rejected_steps}};
  Table t{"simulate", {"t", "chi"}, {}};
  for (std::size_t i = 0; i < tr.times.size(); ++i) t.add_numbers({tr.times[i], tr.chi[i]});
  out.tables.push_back(std::move(t));
  if (tr.status != RunStatus::Completed) {
    out.exit_code = kExitNumerical;
    out.diagnostic = std::string("integration stopped: ") + to_string(tr.status) + " at t = " + fmt17(tr.t_end);
  }
  return out;
}

inline RunOutcome run_classify(const RunConfig& c, const ClassifySpec& s, const Forcing& g) {
  RunOutcome out;
  const auto r = classify_regime(c.model, g.norm2, s.v0_norm2, s.capture_radius, s.absorb_margin);
  out.results = to_json(r);
  out.results["g_norm2"] = g.norm2;
  return out;
}

inline RunOutcome run_closeness_cfg(const RunConfig& c, const ClosenessSpec& s, const Forcing& g, unsigned threads) {
  RunOutcome out;
  std::vector<ClosenessReport> reps(s.epsilon_grid.size());
  std::vector<InitialFamily> fams;
  for (double eps : s.epsilon_grid)
    fams.push_back(family_from(c, eps, s.c0, s.cu0, s.cv0, s.u_profile, s.perturb_profile, "experiment"));
  for (const auto& f : fams) (void)make_initial_family(f);  // hypothesis errors before any integration
  const auto opts = integrator_options(c);
  parallel_for(fams.size(), threads, [&](std::size_t i) { reps[i] = run_closeness(fams[i], c.model, g, s.horizon, opts); });

  out.results["runs"] = json::array();
  Table summary{"closeness_summary", {"epsilon", "sup_distance_l2", "sup_distance_linf", "bound", "pass", "linf_pass"}, {}};
  bool pass = true;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    out.results["runs"].push_back(to_json(r));
    out.tables.push_back(closeness_table(r, "closeness_eps" + std::to_string(i)));
    summary.add({fmt17(r.epsilon), fmt17(r.sup_distance_l2), fmt17(r.sup_distance_linf), fmt17(r.bound_used),
                 bool_cell(r.pass), bool_cell(r.linf_pass)});
    pass = pass && r.pass && r.linf_pass;
    if (r.epsilon > 0.0 && r.sup_distance_l2 > 0.0) xs.push_back(r.epsilon), ys.push_back(r.sup_distance_l2);
    if (r.diagnostic && !out.diagnostic) {
      out.exit_code = kExitNumerical;
      out.diagnostic = "epsilon " + fmt17(r.epsilon) + ": " + *r.diagnostic;
    }
  }
  out.tables.push_back(std::move(summary));
  out.results["loglog_slope"] = xs.size() >= 2 ? json(loglog_slope(xs, ys)) : json(nullptr);
  out.results["pass"] = pass;
  return out;
}

inline RunOutcome run_congruence_cfg(const RunConfig& c, const CongruenceSpec& s, const Forcing& g, unsigned threads) {
  RunOutcome out;
  const InitialFamily tmpl = family_from(c, 0.0, s.c0, s.cu0, s.cv0, s.u_profile, s.perturb_profile, "experiment");
  const SamplingPlan plan{s.transient_cut, s.stride, s.horizon};
  const auto rep = run_congruence(c.model, g, s.epsilon_grid, tmpl, plan, integrator_options(c), s.phases, threads);
  out.results = to_json(rep);
  out.tables.push_back(congruence_table(rep));
  return out;
}

inline RunOutcome run_tail_cfg(const RunConfig& c, const TailSpec& s, const Forcing& g) {
  RunOutcome out;
  const LatticeState u0 = build_profile(s.initial, c.lattice.half_width, "experiment.initial");
  const auto rep = run_tail_study(c.model, g, u0, s.horizon, s.xi, s.k_grid, integrator_options(c));
  out.results = to_json(rep);
  out.results["pass"] = rep.hypotheses_hold ? json(rep.min_k_passing.has_value()) : json(nullptr);
  out.tables.push_back(tail_table(rep));
  return out;
}

inline RunOutcome run_regime_cfg(const RunConfig& c, const RegimeVerifySpec& s, const Forcing& g, unsigned threads) {
  RunOutcome out;
  const LatticeState phi = build_profile(s.profile, c.lattice.half_width, "experiment.profile");
  const auto rep = run_regime_verification(c.model, g, s.chi0_grid, s.horizon, phi, integrator_options(c), threads);
  out.results = to_json(rep);
  out.tables = regime_tables(rep);
  return out;
}

inline RunOutcome run_identity_cfg(const RunConfig& c, const IdentityCheckSpec& s, std::uint64_t seed) {
  RunOutcome out;
  const auto rep = run_identity_check(static_cast<std::size_t>(s.draws), c.lattice.half_width, seed);
  out.results = to_json(rep);
  return out;
}

inline json diagnostic_record(int code, const std::string& kind, const std::string& message,
                              const std::string& key = {}) {
  return {{"schema_version", kSchemaVersion},
          {"exit_code", code},
          {"error_kind", kind},
          {"key", key.empty() ? json(nullptr) : json(key)},
          {"message", message}};
}

}  // namespace detail

/// Executes an already-parsed configuration. Throws the library's exceptions unchanged.
inline RunOutcome execute(const RunConfig& c, unsigned threads, std::uint64_t seed) {
  const Forcing g = build_forcing(c);
  RunOutcome out = std::visit(
      [&](const auto& s) -> RunOutcome {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SimulateSpec>) return detail::run_simulate(c, s, g);
        else if constexpr (std::is_same_v<S, ClassifySpec>) return detail::run_classify(c, s, g);
        else if constexpr (std::is_same_v<S, ClosenessSpec>) return detail::run_closeness_cfg(c, s, g, threads);
        else if constexpr (std::is_same_v<S, CongruenceSpec>) return detail::run_congruence_cfg(c, s, g, threads);
        else if constexpr (std::is_same_v<S, TailSpec>) return detail::run_tail_cfg(c, s, g);
        else if constexpr (std::is_same_v<S, RegimeVerifySpec>) return detail::run_regime_cfg(c, s, g, threads);
        else return detail::run_identity_cfg(c, s, seed);
      },
      c.experiment);
  out.results["experiment"] = experiment_type(c.experiment);
  return out;
}

/// Loads, runs and writes one configuration. Returns the process exit status.
/// Files: report.json, <table>.csv, <table>.dat, plot.gp and, on failure, diagnostic.json.
inline int run_config(const std::string& config_path, const RunOptions& opts) {
  namespace fs = std::filesystem;
  const std::string start = utc_timestamp();
  std::optional<RunConfig> cfg;
  int code = kExitOk;
  json diag;
  std::optional<RunOutcome> outcome;
  std::uint64_t seed = opts.seed.value_or(0);

  try {
    cfg = load_config(config_path);
    seed = opts.seed.value_or(cfg->seed);
    outcome = execute(*cfg, std::max(1u, opts.threads), seed);
    code = outcome->exit_code;
    if (code != kExitOk) diag = detail::diagnostic_record(code, "numerical", outcome->diagnostic.value_or(""));
  } catch (const ConfigError& e) {
    code = kExitConfig;
    diag = detail::diagnostic_record(code, "config", e.what(), e.key);
  } catch (const HypothesisError& e) {
    code = kExitHypothesis;
    diag = detail::diagnostic_record(code, "hypothesis", e.what());
  } catch (const NumericalError& e) {
    code = kExitNumerical;
    diag = detail::diagnostic_record(code, "numerical", e.what());
  } catch (const std::invalid_argument& e) {
    code = kExitConfig;
    diag = detail::diagnostic_record(code, "config", e.what());
  } catch (const std::exception& e) {
    code = kExitNumerical;
    diag = detail::diagnostic_record(code, "numerical", e.what());
  }

  const fs::path dir = resolve_output_dir(opts, cfg ? &*cfg : nullptr);
  try {
    fs::create_directories(dir);
    if (code != kExitOk) {
      diag["config_path"] = config_path;
      write_text(dir / "diagnostic.json", dump_json(diag));
      std::fprintf(stderr, "error (%s): %s\n", diag["error_kind"].get<std::string>().c_str(),
                   diag["message"].get<std::string>().c_str());
    }
    if (outcome) {
      if (cfg->wants("json")) {
        json report;
        report["schema_version"] = kSchemaVersion;
        report["config_echo"] = to_json(*cfg);
        report["results"] = outcome->results;
        report["provenance"] = {{"start_time", start},
                                {"end_time", utc_timestamp()},
                                {"code_version", kCodeVersion},
                                {"seed", seed}};
        write_text(dir / "report.json", dump_json(report));
      }
      for (const auto& t : outcome->tables) {
        if (cfg->wants("csv")) write_text(dir / (t.name + ".csv"), to_csv(t));
        if (cfg->wants("plot")) write_text(dir / (t.name + ".dat"), to_plot_data(t));
      }
      if (cfg->wants("plot") && !outcome->tables.empty()) write_text(dir / "plot.gp", plot_script(outcome->tables));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error writing output: %s\n", e.what());
    if (code == kExitOk) code = kExitNumerical;
  }
  return code;
}

}  // namespace dgl
