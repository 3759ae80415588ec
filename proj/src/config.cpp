#include "lmfg/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace lmfg::cli {

namespace {

std::string joined(const std::vector<std::string>& errors) {
  std::string out = "invalid config:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

/// Walks the YAML tree, collecting every violation with its dotted path.
struct Reader {
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  /// False (and an error) unless `n` is a table; rejects keys outside `allowed`.
  bool table(const YAML::Node& n, const std::string& path, const std::vector<std::string>& allowed) {
    if (!n || n.IsNull()) return false;
    if (!n.IsMap()) {
      fail(path, "expected a table");
      return false;
    }
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(child(path, key), "unknown key (allowed: " + list + ")");
      }
    }
    return true;
  }

  template <class T>
  void scalar(const YAML::Node& n, const std::string& path, T& out) {
    if (!n) return;
    if (!n.IsScalar()) {
      fail(path, std::string("expected ") + type_name<T>());
      return;
    }
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      fail(path, std::string("expected ") + type_name<T>() + ", got '" + n.Scalar() + "'");
    }
  }

  /// A scalar or a sequence of scalars.
  template <class T>
  void list(const YAML::Node& n, const std::string& path, std::vector<T>& out) {
    if (!n) return;
    std::vector<T> v;
    if (n.IsScalar()) {
      T x{};
      const std::size_t before = errors.size();
      scalar(n, path, x);
      if (errors.size() == before) v.push_back(x);
    } else if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) {
        T x{};
        scalar(n[i], path + "[" + std::to_string(i) + "]", x);
        v.push_back(x);
      }
    } else {
      fail(path, "expected a value or a list");
      return;
    }
    out = std::move(v);
  }

  void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) fail(path, what);
  }
};

const std::vector<std::string> kVariants{"stable", "cgmy", "truncated", "sum"};

std::vector<std::string> measure_keys(const std::string& variant, bool component) {
  std::vector<std::string> k{"variant"};
  if (component) k.push_back("axis");
  if (variant == "stable") k.insert(k.end(), {"sigma"});
  if (variant == "cgmy") k.insert(k.end(), {"C", "G", "M", "Y"});
  if (variant == "truncated") k.insert(k.end(), {"sigma", "cutoff"});
  return k;
}

void read_measure(Reader& r, const YAML::Node& n, const std::string& path, MeasureConfig& m, bool component) {
  if (!n || !n.IsMap()) {
    r.fail(path, "expected a table");
    return;
  }
  r.scalar(n["variant"], child(path, "variant"), m.variant);
  if (m.variant == "sum" || std::find(kVariants.begin(), kVariants.end(), m.variant) == kVariants.end()) {
    r.fail(child(path, "variant"), "unknown variant '" + m.variant + "' (stable, cgmy, truncated" +
                                       (component ? ")" : ", sum)"));
    return;
  }
  r.table(n, path, measure_keys(m.variant, component));
  if (component) r.scalar(n["axis"], child(path, "axis"), m.axis);
  const auto order = [&](const char* key, double v) {
    r.check(v > 1.0 && v < 2.0, child(path, key), key + std::string(" = ") + fmt(v) + " is outside (1, 2)");
  };
  if (m.variant == "stable" || m.variant == "truncated") {
    r.scalar(n["sigma"], child(path, "sigma"), m.sigma);
    order("sigma", m.sigma);
  }
  if (m.variant == "truncated") {
    r.scalar(n["cutoff"], child(path, "cutoff"), m.cutoff);
    r.check(m.cutoff > 0.0, child(path, "cutoff"), "cutoff = " + fmt(m.cutoff) + " must be positive");
  }
  if (m.variant == "cgmy") {
    r.scalar(n["C"], child(path, "C"), m.C);
    r.scalar(n["G"], child(path, "G"), m.G);
    r.scalar(n["M"], child(path, "M"), m.M);
    r.scalar(n["Y"], child(path, "Y"), m.Y);
    r.check(m.C > 0.0, child(path, "C"), "C = " + fmt(m.C) + " must be positive");
    r.check(m.G > 0.0, child(path, "G"), "G = " + fmt(m.G) + " must be positive");
    r.check(m.M > 0.0, child(path, "M"), "M = " + fmt(m.M) + " must be positive");
    order("Y", m.Y);
  }
}

void read_spec(Reader& r, const YAML::Node& n, const std::string& path, SpecConfig& s, int dim) {
  if (!n || n.IsNull()) return;
  if (!n.IsMap()) {
    r.fail(path, "expected a table");
    return;
  }
  std::string variant = "stable";
  r.scalar(n["variant"], child(path, "variant"), variant);
  if (variant != "sum") {
    s.is_sum = false;
    read_measure(r, n, path, s.measure, false);
    const bool one_d = s.measure.variant != "stable";
    r.check(!one_d || dim == 1, path, s.measure.variant + " measures are one-dimensional; use variant sum for dim > 1");
    return;
  }
  s.is_sum = true;
  s.components.clear();
  r.table(n, path, {"variant", "components"});
  const YAML::Node comps = n["components"];
  if (!comps || !comps.IsSequence() || comps.size() == 0) {
    r.fail(child(path, "components"), "expected a non-empty list of measures");
    return;
  }
  std::set<int> axes;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string p = child(path, "components") + "[" + std::to_string(i) + "]";
    MeasureConfig m;
    read_measure(r, comps[i], p, m, true);
    r.check(m.axis >= 0 && m.axis < dim, child(p, "axis"),
            "axis = " + std::to_string(m.axis) + " is outside [0, " + std::to_string(dim) + ")");
    r.check(axes.insert(m.axis).second, child(p, "axis"), "axis " + std::to_string(m.axis) + " used twice");
    s.components.push_back(m);
  }
}

void read_grid(Reader& r, const YAML::Node& n, const std::string& path, GridConfig& g) {
  if (!r.table(n, path, {"dim", "half_extent", "points"})) return;
  r.scalar(n["dim"], child(path, "dim"), g.dim);
  if (!(g.dim >= 1 && g.dim <= 3)) {
    r.fail(child(path, "dim"), "dim = " + std::to_string(g.dim) + " is outside [1, 3]");
    return;
  }
  r.list(n["half_extent"], child(path, "half_extent"), g.half_extent);
  r.list(n["points"], child(path, "points"), g.points);
}

/// Broadcasts length-1 axis lists and validates their ranges.
void finish_grid(Reader& r, const std::string& path, GridConfig& g) {
  if (!(g.dim >= 1 && g.dim <= 3)) return;
  if (g.half_extent.size() == 1) g.half_extent.assign(g.dim, g.half_extent[0]);
  if (g.points.size() == 1) g.points.assign(g.dim, g.points[0]);
  r.check(static_cast<int>(g.half_extent.size()) == g.dim, child(path, "half_extent"), "needs one value or dim values");
  r.check(static_cast<int>(g.points.size()) == g.dim, child(path, "points"), "needs one value or dim values");
  for (std::size_t i = 0; i < g.half_extent.size(); ++i)
    r.check(g.half_extent[i] > 0.0, child(path, "half_extent"), "half_extent = " + fmt(g.half_extent[i]) + " must be positive");
  for (std::size_t i = 0; i < g.points.size(); ++i)
    r.check(g.points[i] >= 4 && g.points[i] % 2 == 0, child(path, "points"),
            "points = " + std::to_string(g.points[i]) + " must be even and >= 4");
}

void read_coupling(Reader& r, const YAML::Node& n, const std::string& path, CouplingConfig& c, bool allow_local) {
  if (!n || n.IsNull()) return;
  if (!n.IsMap()) {
    r.fail(path, "expected a table");
    return;
  }
  r.scalar(n["type"], child(path, "type"), c.type);
  if (c.type == "none") {
    r.table(n, path, {"type"});
  } else if (c.type == "nonlocal") {
    r.table(n, path, {"type", "kernel_width", "weight"});
    r.scalar(n["kernel_width"], child(path, "kernel_width"), c.kernel_width);
    r.scalar(n["weight"], child(path, "weight"), c.weight);
    r.check(c.kernel_width > 0.0, child(path, "kernel_width"), "kernel_width = " + fmt(c.kernel_width) + " must be positive");
  } else if (c.type == "local" && allow_local) {
    r.table(n, path, {"type", "weight", "exponent"});
    r.scalar(n["weight"], child(path, "weight"), c.weight);
    r.scalar(n["exponent"], child(path, "exponent"), c.exponent);
    r.check(c.exponent > 0.0, child(path, "exponent"), "exponent = " + fmt(c.exponent) + " must be positive");
  } else {
    r.fail(child(path, "type"), "unknown type '" + c.type + "' (none, nonlocal" + (allow_local ? ", local)" : ")"));
    return;
  }
  r.check(c.weight >= 0.0, child(path, "weight"), "weight = " + fmt(c.weight) + " must be >= 0");
}

void read_m0(Reader& r, const YAML::Node& n, const std::string& path, M0Config& m, int dim) {
  if (n && !n.IsNull()) {
    if (!n.IsMap()) {
      r.fail(path, "expected a table");
      return;
    }
    r.scalar(n["preset"], child(path, "preset"), m.preset);
    if (m.preset == "gaussian-bump") {
      r.table(n, path, {"preset", "center", "width"});
      r.list(n["center"], child(path, "center"), m.center);
    } else if (m.preset == "two-bumps") {
      r.table(n, path, {"preset", "centers", "width"});
      const YAML::Node cs = n["centers"];
      if (cs) {
        if (!cs.IsSequence() || cs.size() != 2) {
          r.fail(child(path, "centers"), "expected a list of two points");
        } else {
          m.centers.assign(2, {});
          for (std::size_t i = 0; i < 2; ++i) r.list(cs[i], child(path, "centers") + "[" + std::to_string(i) + "]", m.centers[i]);
        }
      }
    } else if (m.preset == "uniform") {
      r.table(n, path, {"preset"});
    } else {
      r.fail(child(path, "preset"), "unknown preset '" + m.preset + "' (gaussian-bump, uniform, two-bumps)");
      return;
    }
    r.scalar(n["width"], child(path, "width"), m.width);
  }
  if (m.preset == "uniform") return;
  r.check(m.width > 0.0, child(path, "width"), "width = " + fmt(m.width) + " must be positive");
  const auto fit = [&](std::vector<double>& c, const std::string& p) {
    if (c.size() == 1 && dim > 1) c.resize(dim, 0.0);
    r.check(static_cast<int>(c.size()) == dim, p, "needs dim coordinates");
  };
  if (m.preset == "gaussian-bump") fit(m.center, child(path, "center"));
  if (m.preset == "two-bumps")
    for (std::size_t i = 0; i < m.centers.size(); ++i) fit(m.centers[i], child(path, "centers") + "[" + std::to_string(i) + "]");
}

void read_solver(Reader& r, const YAML::Node& n, const std::string& path, SolverConfig& s) {
  if (r.table(n, path, {"n_t", "tol_d0", "max_outer", "damping", "scheme", "metric", "epsilon_schedule", "picard_tol",
                        "picard_max_sweeps", "picard_window", "positivity_tolerance", "positivity_hard_limit", "clip"})) {
    r.scalar(n["n_t"], child(path, "n_t"), s.n_t);
    r.scalar(n["tol_d0"], child(path, "tol_d0"), s.tol_d0);
    r.scalar(n["max_outer"], child(path, "max_outer"), s.max_outer);
    r.scalar(n["damping"], child(path, "damping"), s.damping);
    r.scalar(n["scheme"], child(path, "scheme"), s.scheme);
    r.scalar(n["metric"], child(path, "metric"), s.metric);
    r.list(n["epsilon_schedule"], child(path, "epsilon_schedule"), s.epsilon_schedule);
    r.scalar(n["picard_tol"], child(path, "picard_tol"), s.picard_tol);
    r.scalar(n["picard_max_sweeps"], child(path, "picard_max_sweeps"), s.picard_max_sweeps);
    r.scalar(n["picard_window"], child(path, "picard_window"), s.picard_window);
    r.scalar(n["positivity_tolerance"], child(path, "positivity_tolerance"), s.positivity_tolerance);
    r.scalar(n["positivity_hard_limit"], child(path, "positivity_hard_limit"), s.positivity_hard_limit);
    r.scalar(n["clip"], child(path, "clip"), s.clip);
  }
  r.check(s.n_t >= 1, child(path, "n_t"), "n_t = " + std::to_string(s.n_t) + " must be >= 1");
  r.check(s.tol_d0 > 0.0, child(path, "tol_d0"), "tol_d0 must be positive");
  r.check(s.max_outer >= 1, child(path, "max_outer"), "max_outer must be >= 1");
  r.check(s.damping > 0.0 && s.damping <= 1.0, child(path, "damping"), "damping = " + fmt(s.damping) + " is outside (0, 1]");
  r.check(s.scheme == "damped-picard" || s.scheme == "fictitious-play", child(path, "scheme"),
          "unknown scheme '" + s.scheme + "' (damped-picard, fictitious-play)");
  r.check(s.metric == "exact-lp" || s.metric == "grid-lp" || s.metric == "bounds", child(path, "metric"),
          "unknown metric '" + s.metric + "' (exact-lp, grid-lp, bounds)");
  r.check(!s.epsilon_schedule.empty(), child(path, "epsilon_schedule"), "must not be empty");
  for (std::size_t i = 0; i < s.epsilon_schedule.size(); ++i) {
    r.check(s.epsilon_schedule[i] > 0.0, child(path, "epsilon_schedule"), "entries must be positive");
    if (i) r.check(s.epsilon_schedule[i] < s.epsilon_schedule[i - 1], child(path, "epsilon_schedule"), "must decrease strictly");
  }
  r.check(s.picard_tol > 0.0, child(path, "picard_tol"), "picard_tol must be positive");
  r.check(s.picard_max_sweeps >= 1, child(path, "picard_max_sweeps"), "picard_max_sweeps must be >= 1");
  r.check(s.picard_window > 0.0, child(path, "picard_window"), "picard_window must be positive");
  r.check(s.positivity_tolerance >= 0.0, child(path, "positivity_tolerance"), "must be >= 0");
  r.check(s.positivity_hard_limit > 0.0, child(path, "positivity_hard_limit"), "must be positive");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(joined(errors)), errors_(std::move(errors)) {}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "sup-bound",  "lipschitz", "duhamel-residual", "mass",        "positivity",  "very-weak",   "lyapunov",
      "linf-bound", "equicontinuity", "convergence", "monotonicity", "uniqueness", "mc-vs-fp",    "decay",
      "kernel-mass"};
  return names;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({"syntax: " + std::string(e.what())});
  }
  RunConfig cfg;
  Reader r;
  if (root && !root.IsNull()) {
    if (r.table(root, "", {"problem", "solver", "diagnostics", "sde", "output", "seed"})) {
      const YAML::Node p = root["problem"];
      if (r.table(p, "problem", {"spec", "grid", "horizon", "hamiltonian", "coupling", "terminal", "m0"})) {
        read_grid(r, p["grid"], "problem.grid", cfg.problem.grid);
        finish_grid(r, "problem.grid", cfg.problem.grid);
        read_spec(r, p["spec"], "problem.spec", cfg.problem.spec, cfg.problem.grid.dim);
        r.scalar(p["horizon"], "problem.horizon", cfg.problem.horizon);
        const YAML::Node h = p["hamiltonian"];
        if (r.table(h, "problem.hamiltonian", {"preset", "parameter"})) {
          r.scalar(h["preset"], "problem.hamiltonian.preset", cfg.problem.hamiltonian.preset);
          r.scalar(h["parameter"], "problem.hamiltonian.parameter", cfg.problem.hamiltonian.parameter);
        }
        read_coupling(r, p["coupling"], "problem.coupling", cfg.problem.coupling, true);
        read_coupling(r, p["terminal"], "problem.terminal", cfg.problem.terminal, false);
        read_m0(r, p["m0"], "problem.m0", cfg.problem.m0, cfg.problem.grid.dim);
      } else {
        finish_grid(r, "problem.grid", cfg.problem.grid);
        read_m0(r, YAML::Node(), "problem.m0", cfg.problem.m0, cfg.problem.grid.dim);
      }
      read_solver(r, root["solver"], "solver", cfg.solver);
      const YAML::Node d = root["diagnostics"];
      if (r.table(d, "diagnostics", {"checks"})) {
        r.list(d["checks"], "diagnostics.checks", cfg.diagnostics.checks);
        for (const auto& c : cfg.diagnostics.checks)
          r.check(std::find(known_checks().begin(), known_checks().end(), c) != known_checks().end(), "diagnostics.checks",
                  "unknown check '" + c + "'");
      }
      const YAML::Node s = root["sde"];
      if (r.table(s, "sde", {"paths", "small_jump_eps", "wrap"})) {
        r.scalar(s["paths"], "sde.paths", cfg.sde.paths);
        r.scalar(s["small_jump_eps"], "sde.small_jump_eps", cfg.sde.small_jump_eps);
        r.scalar(s["wrap"], "sde.wrap", cfg.sde.wrap);
      }
      r.scalar(root["output"], "output", cfg.output);
      std::int64_t seed = 1;
      r.scalar(root["seed"], "seed", seed);
      r.check(seed >= 0, "seed", "seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(std::max<std::int64_t>(seed, 0));
    }
  } else {
    finish_grid(r, "problem.grid", cfg.problem.grid);
  }
  // ranges that do not depend on which keys were present
  r.check(cfg.problem.horizon > 0.0, "problem.horizon", "horizon = " + fmt(cfg.problem.horizon) + " must be positive");
  const auto& hp = cfg.problem.hamiltonian;
  const std::vector<std::string> presets{"quadratic", "eikonal", "zero", "stiff", "discounted"};
  if (std::find(presets.begin(), presets.end(), hp.preset) == presets.end())
    r.fail("problem.hamiltonian.preset", "unknown preset '" + hp.preset + "' (quadratic, eikonal, zero, stiff, discounted)");
  else if (hp.preset == "discounted")
    r.check(hp.parameter >= 0.0, "problem.hamiltonian.parameter", "parameter = " + fmt(hp.parameter) + " must be >= 0");
  else if (hp.preset == "quadratic" || hp.preset == "stiff")
    r.check(hp.parameter > 0.0, "problem.hamiltonian.parameter", "parameter = " + fmt(hp.parameter) + " must be positive");
  r.check(cfg.sde.paths >= 1, "sde.paths", "paths must be >= 1");
  r.check(cfg.sde.small_jump_eps > 0.0 && cfg.sde.small_jump_eps < 1.0, "sde.small_jump_eps", "must lie in (0, 1)");
  r.check(!cfg.output.empty(), "output", "must not be empty");
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

nlohmann::json measure_json(const MeasureConfig& m, bool component) {
  nlohmann::json j;
  if (component) j["axis"] = m.axis;
  j["variant"] = m.variant;
  if (m.variant == "stable") j["sigma"] = m.sigma;
  if (m.variant == "truncated") {
    j["sigma"] = m.sigma;
    j["cutoff"] = m.cutoff;
  }
  if (m.variant == "cgmy") {
    j["C"] = m.C;
    j["G"] = m.G;
    j["M"] = m.M;
    j["Y"] = m.Y;
  }
  return j;
}

nlohmann::json coupling_json(const CouplingConfig& c) {
  nlohmann::json j{{"type", c.type}};
  if (c.type == "nonlocal") {
    j["kernel_width"] = c.kernel_width;
    j["weight"] = c.weight;
  }
  if (c.type == "local") {
    j["weight"] = c.weight;
    j["exponent"] = c.exponent;
  }
  return j;
}

void emit(YAML::Emitter& out, const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object:
      out << YAML::BeginMap;
      for (const auto& [k, v] : j.items()) {
        out << YAML::Key << k << YAML::Value;
        emit(out, v);
      }
      out << YAML::EndMap;
      break;
    case nlohmann::json::value_t::array: {
      const bool flat = std::none_of(j.begin(), j.end(), [](const auto& v) { return v.is_object(); });
      out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
      for (const auto& v : j) emit(out, v);
      out << YAML::EndSeq;
      break;
    }
    case nlohmann::json::value_t::number_float:
      out << fmt(j.get<double>());
      break;
    case nlohmann::json::value_t::boolean:
      out << j.get<bool>();
      break;
    case nlohmann::json::value_t::string:
      out << j.get<std::string>();
      break;
    default:
      out << j.dump();
  }
}

}  // namespace

nlohmann::json to_json(const RunConfig& cfg) {
  using nlohmann::json;
  const auto& p = cfg.problem;
  json spec;
  if (p.spec.is_sum) {
    spec["variant"] = "sum";
    spec["components"] = json::array();
    for (const auto& c : p.spec.components) spec["components"].push_back(measure_json(c, true));
  } else {
    spec = measure_json(p.spec.measure, false);
  }
  json m0{{"preset", p.m0.preset}};
  if (p.m0.preset == "gaussian-bump") {
    m0["center"] = p.m0.center;
    m0["width"] = p.m0.width;
  }
  if (p.m0.preset == "two-bumps") {
    m0["centers"] = p.m0.centers;
    m0["width"] = p.m0.width;
  }
  const auto& s = cfg.solver;
  return json{
      {"problem",
       {{"spec", spec},
        {"grid", {{"dim", p.grid.dim}, {"half_extent", p.grid.half_extent}, {"points", p.grid.points}}},
        {"horizon", p.horizon},
        {"hamiltonian", {{"preset", p.hamiltonian.preset}, {"parameter", p.hamiltonian.parameter}}},
        {"coupling", coupling_json(p.coupling)},
        {"terminal", coupling_json(p.terminal)},
        {"m0", m0}}},
      {"solver",
       {{"n_t", s.n_t},
        {"tol_d0", s.tol_d0},
        {"max_outer", s.max_outer},
        {"damping", s.damping},
        {"scheme", s.scheme},
        {"metric", s.metric},
        {"epsilon_schedule", s.epsilon_schedule},
        {"picard_tol", s.picard_tol},
        {"picard_max_sweeps", s.picard_max_sweeps},
        {"picard_window", s.picard_window},
        {"positivity_tolerance", s.positivity_tolerance},
        {"positivity_hard_limit", s.positivity_hard_limit},
        {"clip", s.clip}}},
      {"diagnostics", {{"checks", cfg.diagnostics.checks}}},
      {"sde", {{"paths", cfg.sde.paths}, {"small_jump_eps", cfg.sde.small_jump_eps}, {"wrap", cfg.sde.wrap}}},
      {"output", cfg.output},
      {"seed", cfg.seed}};
}

std::string echo(const RunConfig& cfg) {
  // nlohmann::json sorts keys; emit problem/solver/... in the documented order instead
  const nlohmann::json j = to_json(cfg);
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const char* key : {"problem", "solver", "diagnostics", "sde", "output", "seed"}) {
    out << YAML::Key << key << YAML::Value;
    emit(out, j.at(key));
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace lmfg::cli
