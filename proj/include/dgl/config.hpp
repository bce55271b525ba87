#pragma once

// Strict JSON run configuration: parsing with dotted-key diagnostics,
// normalization (every default made explicit) and serialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dgl/errors.hpp"
#include "dgl/experiments.hpp"
#include "dgl/lattice.hpp"

namespace dgl {

using json = nlohmann::json;

/// A lattice sequence given inline or by file.
///   zero  : all zero
///   site  : scale * e_site
///   sites : explicit [n, re, im] entries
///   file  : whitespace-delimited "n re im" lines, '#' starts a comment
///   perturb_default : (e_1 - e_0)/sqrt(2)
/// `normalize` rescales to unit l2 norm before `scale` is applied.
struct ProfileSpec {
  std::string kind = "site";
  int site = 0;
  std::vector<std::tuple<int, double, double>> entries;
  std::string path;
  bool normalize = false;
  double scale = 1.0;

  static ProfileSpec at_site(int n, double scale = 1.0) {
    ProfileSpec p;
    p.site = n;
    p.scale = scale;
    return p;
  }
  static ProfileSpec perturb_default() {
    ProfileSpec p;
    p.kind = "perturb_default";
    return p;
  }
  friend bool operator==(const ProfileSpec&, const ProfileSpec&) = default;
};

struct LatticeSpec {
  int half_width = 256;
  double blowup_threshold = 1e8;
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

struct ForcingSpec {
  std::string kind = "single_site";  ///< single_site | profile_file
  int site = 0;
  std::string path;
  /// single_site: ||g||^2. profile_file: rescale the file profile to this ||g||^2 when set.
  std::optional<double> target_norm2 = 0.0;
  friend bool operator==(const ForcingSpec&, const ForcingSpec&) = default;
};

struct IntegratorSpec {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  double sample_stride = 0.1;
  friend bool operator==(const IntegratorSpec&, const IntegratorSpec&) = default;
};

struct SimulateSpec {
  double horizon = 10.0;
  ProfileSpec initial = ProfileSpec::at_site(0);
  friend bool operator==(const SimulateSpec&, const SimulateSpec&) = default;
};

struct ClassifySpec {
  std::optional<double> v0_norm2;
  std::optional<double> capture_radius;
  double absorb_margin = 1.1;
  friend bool operator==(const ClassifySpec&, const ClassifySpec&) = default;
};

struct ClosenessSpec {
  std::vector<double> epsilon_grid{0.1};
  double c0 = 1.0;
  double cu0 = 1.0;
  double cv0 = 1.0;
  double horizon = 50.0;
  ProfileSpec u_profile = ProfileSpec::at_site(0);
  ProfileSpec perturb_profile = ProfileSpec::perturb_default();
  friend bool operator==(const ClosenessSpec&, const ClosenessSpec&) = default;
};

struct CongruenceSpec {
  std::vector<double> epsilon_grid{0.2, 0.1, 0.05};
  double c0 = 1.0;
  double cu0 = 1.0;
  double cv0 = 1.0;
  ProfileSpec u_profile = ProfileSpec::at_site(0);
  ProfileSpec perturb_profile = ProfileSpec::perturb_default();
  double transient_cut = 20.0;
  double stride = 0.5;
  double horizon = 40.0;
  int phases = 4;
  friend bool operator==(const CongruenceSpec&, const CongruenceSpec&) = default;
};

struct TailSpec {
  double horizon = 50.0;
  double xi = 1e-8;
  std::vector<int> k_grid{0, 1, 2, 4, 8, 16, 32};
  ProfileSpec initial = ProfileSpec::at_site(0);
  friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

struct RegimeVerifySpec {
  std::vector<double> chi0_grid{0.1, 0.5, 0.97};
  double horizon = 50.0;
  ProfileSpec profile = ProfileSpec::at_site(0);
  friend bool operator==(const RegimeVerifySpec&, const RegimeVerifySpec&) = default;
};

struct IdentityCheckSpec {
  int draws = 1000;
  friend bool operator==(const IdentityCheckSpec&, const IdentityCheckSpec&) = default;
};

using ExperimentSpec = std::variant<SimulateSpec, ClassifySpec, ClosenessSpec, CongruenceSpec, TailSpec,
                                    RegimeVerifySpec, IdentityCheckSpec>;

inline const char* experiment_type(const ExperimentSpec& e) {
  static constexpr const char* names[] = {"simulate", "classify",     "closeness",     "congruence",
                                          "tail",     "regime_verify", "identity_check"};
  return names[e.index()];
}

struct OutputSpec {
  std::optional<std::string> directory;
  std::vector<std::string> formats{"json", "csv", "plot"};
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  ModelParams model;
  LatticeSpec lattice;
  ForcingSpec forcing;
  IntegratorSpec integrator;
  ExperimentSpec experiment = SimulateSpec{};
  OutputSpec output;
  std::uint64_t seed = 0;

  [[nodiscard]] bool wants(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
  }
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Reads one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  [[nodiscard]] std::string key(const std::string& k) const { return join_key(path_, k); }
  bool has(const std::string& k) const { return j_.contains(k); }

  const json* find(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& k, double fallback) {
    const json* v = find(k);
    return v ? as_number(*v, key(k)) : fallback;
  }
  std::optional<double> optional_number(const std::string& k, std::optional<double> fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    return as_number(*v, key(k));
  }
  int integer(const std::string& k, int fallback) {
    const json* v = find(k);
    return v ? as_int(*v, key(k)) : fallback;
  }
  bool boolean(const std::string& k, bool fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(key(k), "expected a boolean");
    return v->get<bool>();
  }
  std::string string(const std::string& k, const std::string& fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(key(k), "expected a string");
    return v->get<std::string>();
  }
  std::vector<double> numbers(const std::string& k, const std::vector<double>& fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) throw ConfigError(key(k), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], key(k) + "[" + std::to_string(i) + "]"));
    return out;
  }
  std::vector<int> integers(const std::string& k, const std::vector<int>& fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) throw ConfigError(key(k), "expected a non-empty array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_int((*v)[i], key(k) + "[" + std::to_string(i) + "]"));
    return out;
  }

  /// Rejects every key that was not read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where, "expected a finite number");
    return d;
  }
  static int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < -1000000000 || i > 1000000000) throw ConfigError(where, "integer out of range");
    return static_cast<int>(i);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

inline ProfileSpec parse_profile(const json* j, const std::string& path, const ProfileSpec& fallback) {
  if (!j) return fallback;
  ObjectReader r(*j, path);
  ProfileSpec p;
  p.kind = r.string("kind", "site");
  require(p.kind == "zero" || p.kind == "site" || p.kind == "sites" || p.kind == "file" || p.kind == "perturb_default",
          r.key("kind"), "must be one of zero, site, sites, file, perturb_default");
  if (p.kind == "site") p.site = r.integer("site", 0);
  if (p.kind == "sites") {
    const json* e = r.find("entries");
    require(e && e->is_array() && !e->empty(), r.key("entries"), "expected a non-empty array of [n, re, im]");
    for (std::size_t i = 0; i < e->size(); ++i) {
      const json& row = (*e)[i];
      const std::string where = r.key("entries") + "[" + std::to_string(i) + "]";
      require(row.is_array() && row.size() == 3, where, "expected [n, re, im]");
      p.entries.emplace_back(ObjectReader::as_int(row[0], where + "[0]"), ObjectReader::as_number(row[1], where + "[1]"),
                             ObjectReader::as_number(row[2], where + "[2]"));
    }
  }
  if (p.kind == "file") {
    p.path = r.string("path", "");
    require(!p.path.empty(), r.key("path"), "required for kind=file");
  }
  p.normalize = r.boolean("normalize", false);
  p.scale = r.number("scale", 1.0);
  r.finish();
  return p;
}

inline json profile_to_json(const ProfileSpec& p) {
  json j;
  j["kind"] = p.kind;
  if (p.kind == "site") j["site"] = p.site;
  if (p.kind == "sites") {
    j["entries"] = json::array();
    for (const auto& [n, re, im] : p.entries) j["entries"].push_back({n, re, im});
  }
  if (p.kind == "file") j["path"] = p.path;
  j["normalize"] = p.normalize;
  j["scale"] = p.scale;
  return j;
}

inline json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline void check_epsilons(const std::vector<double>& grid, const std::string& key) {
  for (double e : grid) require(e >= 0.0, key, "epsilon values must be non-negative");
}

inline ExperimentSpec parse_experiment(const json* j) {
  if (!j) throw ConfigError("experiment", "required");
  ObjectReader r(*j, "experiment");
  const json* type = r.find("type");
  if (!type) throw ConfigError("experiment.type", "required");
  if (!type->is_string()) throw ConfigError("experiment.type", "expected a string");
  const std::string t = type->get<std::string>();

  ExperimentSpec out;
  if (t == "simulate") {
    SimulateSpec s;
    s.horizon = r.number("horizon", s.horizon);
    require(s.horizon > 0.0, r.key("horizon"), "must be positive");
    s.initial = parse_profile(r.find("initial"), r.key("initial"), s.initial);
    out = s;
  } else if (t == "classify") {
    ClassifySpec s;
    s.v0_norm2 = r.optional_number("v0_norm2", s.v0_norm2);
    s.capture_radius = r.optional_number("capture_radius", s.capture_radius);
    s.absorb_margin = r.number("absorb_margin", s.absorb_margin);
    require(!s.v0_norm2 || *s.v0_norm2 >= 0.0, r.key("v0_norm2"), "must be non-negative");
    require(!s.capture_radius || *s.capture_radius >= 0.0, r.key("capture_radius"), "must be non-negative");
    require(s.absorb_margin > 1.0, r.key("absorb_margin"), "must exceed 1");
    out = s;
  } else if (t == "closeness") {
    ClosenessSpec s;
    s.epsilon_grid = r.numbers("epsilon_grid", s.epsilon_grid);
    check_epsilons(s.epsilon_grid, r.key("epsilon_grid"));
    s.c0 = r.number("c0", s.c0);
    s.cu0 = r.number("cu0", s.cu0);
    s.cv0 = r.number("cv0", s.cv0);
    require(s.c0 >= 0.0, r.key("c0"), "must be non-negative");
    require(s.cu0 >= 0.0, r.key("cu0"), "must be non-negative");
    require(s.cv0 >= 0.0, r.key("cv0"), "must be non-negative");
    s.horizon = r.number("horizon", s.horizon);
    require(s.horizon > 0.0, r.key("horizon"), "must be positive");
    s.u_profile = parse_profile(r.find("u_profile"), r.key("u_profile"), s.u_profile);
    s.perturb_profile = parse_profile(r.find("perturb_profile"), r.key("perturb_profile"), s.perturb_profile);
    out = s;
  } else if (t == "congruence") {
    CongruenceSpec s;
    s.epsilon_grid = r.numbers("epsilon_grid", s.epsilon_grid);
    check_epsilons(s.epsilon_grid, r.key("epsilon_grid"));
    s.c0 = r.number("c0", s.c0);
    s.cu0 = r.number("cu0", s.cu0);
    s.cv0 = r.number("cv0", s.cv0);
    require(s.c0 >= 0.0, r.key("c0"), "must be non-negative");
    require(s.cu0 >= 0.0, r.key("cu0"), "must be non-negative");
    require(s.cv0 >= 0.0, r.key("cv0"), "must be non-negative");
    s.u_profile = parse_profile(r.find("u_profile"), r.key("u_profile"), s.u_profile);
    s.perturb_profile = parse_profile(r.find("perturb_profile"), r.key("perturb_profile"), s.perturb_profile);
    s.transient_cut = r.number("transient_cut", s.transient_cut);
    s.stride = r.number("stride", s.stride);
    s.horizon = r.number("horizon", s.horizon);
    s.phases = r.integer("phases", s.phases);
    require(s.transient_cut >= 0.0, r.key("transient_cut"), "must be non-negative");
    require(s.stride > 0.0, r.key("stride"), "must be positive");
    require(s.horizon > s.transient_cut, r.key("horizon"), "must exceed transient_cut");
    require(s.phases >= 1, r.key("phases"), "must be >= 1");
    out = s;
  } else if (t == "tail") {
    TailSpec s;
    s.horizon = r.number("horizon", s.horizon);
    s.xi = r.number("xi", s.xi);
    s.k_grid = r.integers("k_grid", s.k_grid);
    require(s.horizon > 0.0, r.key("horizon"), "must be positive");
    require(s.xi > 0.0, r.key("xi"), "must be positive");
    for (int k : s.k_grid) require(k >= 0, r.key("k_grid"), "values must be non-negative");
    s.initial = parse_profile(r.find("initial"), r.key("initial"), s.initial);
    out = s;
  } else if (t == "regime_verify") {
    RegimeVerifySpec s;
    s.chi0_grid = r.numbers("chi0_grid", s.chi0_grid);
    for (double c : s.chi0_grid) require(c >= 0.0, r.key("chi0_grid"), "values must be non-negative");
    s.horizon = r.number("horizon", s.horizon);
    require(s.horizon > 0.0, r.key("horizon"), "must be positive");
    s.profile = parse_profile(r.find("profile"), r.key("profile"), s.profile);
    out = s;
  } else if (t == "identity_check") {
    IdentityCheckSpec s;
    s.draws = r.integer("draws", s.draws);
    require(s.draws >= 1, r.key("draws"), "must be >= 1");
    out = s;
  } else {
    throw ConfigError("experiment.type",
                      "unknown experiment '" + t +
                          "' (expected simulate, classify, closeness, congruence, tail, regime_verify, identity_check)");
  }
  r.finish();
  return out;
}

inline json experiment_to_json(const ExperimentSpec& e) {
  json j;
  j["type"] = experiment_type(e);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SimulateSpec>) {
          j["horizon"] = s.horizon;
          j["initial"] = profile_to_json(s.initial);
        } else if constexpr (std::is_same_v<S, ClassifySpec>) {
          j["v0_norm2"] = optional_to_json(s.v0_norm2);
          j["capture_radius"] = optional_to_json(s.capture_radius);
          j["absorb_margin"] = s.absorb_margin;
        } else if constexpr (std::is_same_v<S, ClosenessSpec>) {
          j["epsilon_grid"] = s.epsilon_grid;
          j["c0"] = s.c0;
          j["cu0"] = s.cu0;
          j["cv0"] = s.cv0;
          j["horizon"] = s.horizon;
          j["u_profile"] = profile_to_json(s.u_profile);
          j["perturb_profile"] = profile_to_json(s.perturb_profile);
        } else if constexpr (std::is_same_v<S, CongruenceSpec>) {
          j["epsilon_grid"] = s.epsilon_grid;
          j["c0"] = s.c0;
          j["cu0"] = s.cu0;
          j["cv0"] = s.cv0;
          j["u_profile"] = profile_to_json(s.u_profile);
          j["perturb_profile"] = profile_to_json(s.perturb_profile);
          j["transient_cut"] = s.transient_cut;
          j["stride"] = s.stride;
          j["horizon"] = s.horizon;
          j["phases"] = s.phases;
        } else if constexpr (std::is_same_v<S, TailSpec>) {
          j["horizon"] = s.horizon;
          j["xi"] = s.xi;
          j["k_grid"] = s.k_grid;
          j["initial"] = profile_to_json(s.initial);
        } else if constexpr (std::is_same_v<S, RegimeVerifySpec>) {
          j["chi0_grid"] = s.chi0_grid;
          j["horizon"] = s.horizon;
          j["profile"] = profile_to_json(s.profile);
        } else {
          j["draws"] = s.draws;
        }
      },
      e);
  return j;
}

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError naming the offending key.
inline RunConfig parse_config(const json& doc) {
  using detail::ObjectReader;
  using detail::require;
  ObjectReader top(doc, "");
  RunConfig c;

  if (const json* m = top.find("model")) {
    ObjectReader r(*m, "model");
    c.model.alpha = r.number("alpha", 0.0);
    c.model.beta = r.number("beta", 0.0);
    c.model.delta = r.number("delta", 2.0);
    c.model.gamma = r.number("gamma", 1.0);
    c.model.mu = r.number("mu", 0.0);
    r.finish();
  }
  if (const json* l = top.find("lattice")) {
    ObjectReader r(*l, "lattice");
    c.lattice.half_width = r.integer("half_width", c.lattice.half_width);
    c.lattice.blowup_threshold = r.number("blowup_threshold", c.lattice.blowup_threshold);
    require(c.lattice.half_width >= 1 && c.lattice.half_width <= 1000000, "lattice.half_width",
            "must be in [1, 1000000]");
    require(c.lattice.blowup_threshold > 0.0, "lattice.blowup_threshold", "must be positive");
    r.finish();
  }
  if (const json* f = top.find("forcing")) {
    ObjectReader r(*f, "forcing");
    c.forcing.kind = r.string("kind", c.forcing.kind);
    if (c.forcing.kind == "single_site") {
      c.forcing.site = r.integer("site", 0);
      c.forcing.target_norm2 = r.number("target_norm2", 0.0);
    } else if (c.forcing.kind == "profile_file") {
      c.forcing.path = r.string("path", "");
      require(!c.forcing.path.empty(), "forcing.path", "required for kind=profile_file");
      c.forcing.target_norm2 = r.optional_number("target_norm2", std::nullopt);
    } else {
      throw ConfigError("forcing.kind", "must be single_site or profile_file");
    }
    require(!c.forcing.target_norm2 || *c.forcing.target_norm2 >= 0.0, "forcing.target_norm2",
            "must be non-negative");
    r.finish();
  }
  if (c.forcing.kind == "single_site")
    require(std::abs(c.forcing.site) <= c.lattice.half_width, "forcing.site", "outside the lattice window");
  if (const json* i = top.find("integrator")) {
    ObjectReader r(*i, "integrator");
    c.integrator.abs_tol = r.number("abs_tol", c.integrator.abs_tol);
    c.integrator.rel_tol = r.number("rel_tol", c.integrator.rel_tol);
    c.integrator.sample_stride = r.number("sample_stride", c.integrator.sample_stride);
    require(c.integrator.abs_tol > 0.0, "integrator.abs_tol", "must be positive");
    require(c.integrator.rel_tol > 0.0, "integrator.rel_tol", "must be positive");
    require(c.integrator.sample_stride > 0.0, "integrator.sample_stride", "must be positive");
    r.finish();
  }
  c.experiment = detail::parse_experiment(top.find("experiment"));
  if (const json* o = top.find("output")) {
    ObjectReader r(*o, "output");
    if (const json* d = r.find("directory")) {
      if (!d->is_null()) {
        require(d->is_string() && !d->get<std::string>().empty(), "output.directory", "expected a non-empty string");
        c.output.directory = d->get<std::string>();
      }
    }
    if (const json* fm = r.find("formats")) {
      require(fm->is_array(), "output.formats", "expected an array of strings");
      c.output.formats.clear();
      for (const auto& v : *fm) {
        require(v.is_string(), "output.formats", "expected an array of strings");
        const auto s = v.get<std::string>();
        require(s == "json" || s == "csv" || s == "plot", "output.formats", "allowed values: json, csv, plot");
        if (!c.wants(s)) c.output.formats.push_back(s);
      }
    }
    r.finish();
  }
  if (const json* s = top.find("seed")) {
    require(s->is_number_unsigned(), "seed", "expected a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  }
  top.finish();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

namespace detail {

inline void resolve_path(std::string& p, const std::filesystem::path& base) {
  if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
}

inline void resolve_profile_paths(ProfileSpec& p, const std::filesystem::path& base) {
  if (p.kind == "file") resolve_path(p.path, base);
}

}  // namespace detail

/// Reads a config file. Relative profile and forcing paths are taken relative to the file's directory.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config_text(ss.str());
  const auto base = std::filesystem::path(path).parent_path();
  if (c.forcing.kind == "profile_file") detail::resolve_path(c.forcing.path, base);
  std::visit(
      [&](auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SimulateSpec> || std::is_same_v<S, TailSpec>) {
          detail::resolve_profile_paths(s.initial, base);
        } else if constexpr (std::is_same_v<S, ClosenessSpec> || std::is_same_v<S, CongruenceSpec>) {
          detail::resolve_profile_paths(s.u_profile, base);
          detail::resolve_profile_paths(s.perturb_profile, base);
        } else if constexpr (std::is_same_v<S, RegimeVerifySpec>) {
          detail::resolve_profile_paths(s.profile, base);
        }
      },
      c.experiment);
  return c;
}

/// Fully explicit form of a configuration; parse_config(to_json(c)) == c.
inline json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"alpha", c.model.alpha},
                {"beta", c.model.beta},
                {"delta", c.model.delta},
                {"gamma", c.model.gamma},
                {"mu", c.model.mu}};
  j["lattice"] = {{"half_width", c.lattice.half_width}, {"blowup_threshold", c.lattice.blowup_threshold}};
  json f;
  f["kind"] = c.forcing.kind;
  if (c.forcing.kind == "single_site") {
    f["site"] = c.forcing.site;
  } else {
    f["path"] = c.forcing.path;
  }
  f["target_norm2"] = detail::optional_to_json(c.forcing.target_norm2);
  j["forcing"] = f;
  j["integrator"] = {{"abs_tol", c.integrator.abs_tol},
                     {"rel_tol", c.integrator.rel_tol},
                     {"sample_stride", c.integrator.sample_stride}};
  j["experiment"] = detail::experiment_to_json(c.experiment);
  j["output"] = {{"directory", c.output.directory ? json(*c.output.directory) : json(nullptr)},
                 {"formats", c.output.formats}};
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Profiles

/// Reads "n re im" lines. Blank lines and text after '#' are ignored.
inline LatticeState read_profile_file(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) throw ConfigError(key, "cannot read profile file " + path);
  std::vector<std::tuple<int, double, double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long n;
    double re, im;
    if (!(ls >> n)) continue;
    if (!(ls >> re >> im) || n < -1000000000L || n > 1000000000L)
      throw ConfigError(key, path + ":" + std::to_string(line_no) + ": expected 'n re im'");
    std::string extra;
    if (ls >> extra) throw ConfigError(key, path + ":" + std::to_string(line_no) + ": trailing text");
    rows.emplace_back(static_cast<int>(n), re, im);
  }
  if (rows.empty()) return LatticeState{};
  int lo = std::get<0>(rows.front()), hi = lo;
  for (const auto& r : rows) lo = std::min(lo, std::get<0>(r)), hi = std::max(hi, std::get<0>(r));
  auto s = LatticeState::zeros(lo, static_cast<std::size_t>(hi - lo + 1));
  for (const auto& [n, re, im] : rows) s[n] += Complex(re, im);
  return s;
}

/// Materializes a profile on [-half_width, half_width].
inline LatticeState build_profile(const ProfileSpec& p, int half_width, const std::string& key) {
  LatticeState raw;
  if (p.kind == "zero") {
    raw = LatticeState::window(half_width);
  } else if (p.kind == "site") {
    if (std::abs(p.site) > half_width) throw ConfigError(key + ".site", "outside the lattice window");
    raw = LatticeState::unit(p.site, half_width);
  } else if (p.kind == "perturb_default") {
    raw = default_perturb_profile(half_width);
  } else {
    LatticeState src;
    if (p.kind == "sites") {
      int lo = std::get<0>(p.entries.front()), hi = lo;
      for (const auto& e : p.entries) lo = std::min(lo, std::get<0>(e)), hi = std::max(hi, std::get<0>(e));
      src = LatticeState::zeros(lo, static_cast<std::size_t>(hi - lo + 1));
      for (const auto& [n, re, im] : p.entries) src[n] += Complex(re, im);
    } else {
      src = read_profile_file(p.path, key + ".path");
    }
    for (int n = src.first(); n <= src.last() && !src.empty(); ++n)
      if (std::abs(n) > half_width && src.at(n) != Complex{})
        throw ConfigError(key, "profile is non-zero at site " + std::to_string(n) + ", outside the lattice window");
    raw = src.rewindowed(-half_width, static_cast<std::size_t>(2 * half_width + 1));
  }
  if (p.normalize) {
    const double n2 = norm2(raw);
    if (!(n2 > 0.0)) throw ConfigError(key + ".normalize", "cannot normalize a zero profile");
    raw *= Complex(1.0 / std::sqrt(n2));
  }
  if (p.scale != 1.0) raw *= Complex(p.scale);
  return raw;
}

inline Forcing build_forcing(const RunConfig& c) {
  if (c.forcing.kind == "single_site") return Forcing::single_site(c.forcing.site, c.forcing.target_norm2.value_or(0.0));
  ProfileSpec p;
  p.kind = "file";
  p.path = c.forcing.path;
  LatticeState g = build_profile(p, c.lattice.half_width, "forcing");
  if (c.forcing.target_norm2) {
    const double n2 = norm2(g);
    if (*c.forcing.target_norm2 > 0.0) {
      if (!(n2 > 0.0)) throw ConfigError("forcing.target_norm2", "cannot rescale a zero forcing profile");
      g *= Complex(std::sqrt(*c.forcing.target_norm2 / n2));
    } else {
      g *= Complex(0.0);
    }
  }
  return Forcing(std::move(g));
}

}  // namespace dgl
