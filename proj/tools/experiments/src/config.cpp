#include "stablepc/experiments/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "stablepc/errors.hpp"

namespace stablepc::experiments {

namespace {

struct ExperimentName {
  Experiment e;
  std::string_view name;
};

constexpr ExperimentName kExperiments[] = {
    {Experiment::fig1, "fig1"},
    {Experiment::fig2, "fig2"},
    {Experiment::fig3, "fig3"},
    {Experiment::fig4_left, "fig4-left"},
    {Experiment::fig4_right_synthetic, "fig4-right-synthetic"},
    {Experiment::fig5, "fig5"},
    {Experiment::shift, "shift"},
    {Experiment::custom, "custom"},
};

struct GeneratorName {
  Generator g;
  std::string_view name;
};

constexpr GeneratorName kGenerators[] = {
    {Generator::right, "right"},     {Generator::left, "left"},
    {Generator::trio, "trio"},       {Generator::shift, "shift"},
    {Generator::wishart, "wishart"}, {Generator::kernel, "kernel"},
};

SolverSpec spec(std::string name, std::size_t max_iters, std::size_t check_freq = 50) {
  return {std::move(name), max_iters, check_freq};
}

/// Budget used when a solver is requested that the preset does not list.
SolverSpec default_spec(const std::string& name) {
  if (name == "direct") return spec(name, 0);
  if (name == "meta") return spec(name, 10);
  if (name.starts_with("plsqr_ir") || name == "pcg_ir") return spec(name, 1000);
  return spec(name, 100);
}

template <class T>
T require_positive(const toml::node_view<const toml::node>& node, T fallback, const char* key) {
  if (!node) return fallback;
  if constexpr (std::is_integral_v<T>) {
    const auto v = node.value<std::int64_t>();
    if (!v || *v < 0) throw InvalidSpec(std::string("config: '") + key + "' must be a nonnegative integer");
    return static_cast<T>(*v);
  } else {
    const auto v = node.value<double>();
    if (!v || !(*v > 0.0)) throw InvalidSpec(std::string("config: '") + key + "' must be a positive number");
    return *v;
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [value, name] : kExperiments) {
    if (value == e) return name;
  }
  return "custom";
}

Experiment experiment_from_string(std::string_view s) {
  for (const auto& [value, name] : kExperiments) {
    if (name == s) return value;
  }
  throw InvalidSpec("unknown experiment '" + std::string(s) + "'");
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& entry : kExperiments) v.emplace_back(entry.name);
    return v;
  }();
  return names;
}

std::string_view to_string(Generator g) {
  for (const auto& [value, name] : kGenerators) {
    if (value == g) return name;
  }
  return "right";
}

Generator generator_from_string(std::string_view s) {
  for (const auto& [value, name] : kGenerators) {
    if (name == s) return value;
  }
  throw InvalidSpec("unknown generator '" + std::string(s) + "'");
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {
      "direct", "lsqr",   "plsqr", "plsqr_ir_auto", "plsqr_ir_fixed", "plsqr_ir_restart",
      "meta",   "gmres",  "cg",    "pcg",           "pcg_ir",         "left_plsqr",
      "cgnr_left", "cgne_left"};
  return names;
}

ExperimentConfig preset(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.out = std::string(to_string(e));
  ProblemParams& p = cfg.problem;
  switch (e) {
    case Experiment::fig1:
      p.generator = Generator::right;
      p.kappa_a = 1e10;
      p.kappa_pre = 4.0;
      cfg.solvers = {spec("direct", 0), spec("plsqr", 100), spec("plsqr_ir_auto", 1000, 50),
                     spec("gmres", 100), spec("meta", 10)};
      break;
    case Experiment::fig2:
      p.generator = Generator::trio;
      cfg.solvers = {spec("gmres", 100), spec("lsqr", 100)};
      break;
    case Experiment::fig3:
      p.generator = Generator::left;
      p.kappa_a = 1e10;
      p.kappa_pre = 4.0;
      cfg.solvers = {spec("direct", 0), spec("left_plsqr", 150), spec("cgnr_left", 150),
                     spec("cgne_left", 150)};
      break;
    case Experiment::fig4_left:
      p.generator = Generator::wishart;
      p.kappa_a = 1e10;
      p.wishart_factor = 4.0;
      cfg.solvers = {spec("direct", 0), spec("pcg", 200), spec("pcg_ir", 1000, 50)};
      break;
    case Experiment::fig4_right_synthetic:
      p.generator = Generator::kernel;
      p.lambda = 1e-10;
      p.rank = 100;
      p.dim = 10;
      cfg.measure_every = 10;
      cfg.solvers = {spec("direct", 0), spec("pcg", 1000), spec("pcg_ir", 3000, 150)};
      break;
    case Experiment::fig5:
      p.generator = Generator::right;
      p.kappa_a = 1e14;
      p.kappa_pre = 10.0;
      cfg.solvers = {spec("direct", 0), spec("plsqr", 300), spec("plsqr_ir_auto", 1000, 15),
                     spec("plsqr_ir_fixed", 1000, 15)};
      break;
    case Experiment::shift:
      p.generator = Generator::shift;
      p.n = 200;
      cfg.solvers = {spec("gmres", 200), spec("lsqr", 10)};
      break;
    case Experiment::custom:
      cfg.solvers = {spec("direct", 0), spec("plsqr_ir_auto", 1000, 50)};
      break;
  }
  return cfg;
}

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.n) cfg.problem.n = *o.n;
  if (o.kappa_a) cfg.problem.kappa_a = *o.kappa_a;
  if (o.kappa_pre) cfg.problem.kappa_pre = *o.kappa_pre;
  if (o.seed) cfg.problem.seed = *o.seed;
  if (o.data) cfg.problem.data = *o.data;
  if (o.out) cfg.out = *o.out;
  if (o.solvers) {
    std::vector<SolverSpec> chosen;
    for (const std::string& name : *o.solvers) {
      const auto it = std::find_if(cfg.solvers.begin(), cfg.solvers.end(),
                                   [&](const SolverSpec& s) { return s.name == name; });
      chosen.push_back(it != cfg.solvers.end() ? *it : default_spec(name));
    }
    cfg.solvers = std::move(chosen);
  }
  for (SolverSpec& s : cfg.solvers) {
    if (o.max_iters && s.name != "direct") s.max_iters = *o.max_iters;
    if (o.check_freq) s.check_freq = *o.check_freq;
  }
}

ExperimentConfig parse_config(std::string_view toml_text) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& err) {
    throw ParseError(std::string(err.description()), err.source().begin.line);
  }
  const toml::node_view<const toml::node> root{doc};

  const Experiment e = experiment_from_string(root["experiment"].value_or(std::string("custom")));
  ExperimentConfig cfg = preset(e);
  if (const auto out = root["out"].value<std::string>()) cfg.out = *out;
  cfg.measure_every = require_positive(root["measure_every"], cfg.measure_every, "measure_every");

  if (const auto* problem = doc["problem"].as_table()) {
    const toml::node_view<const toml::node> pv{*problem};
    ProblemParams& p = cfg.problem;
    if (const auto g = pv["generator"].value<std::string>()) p.generator = generator_from_string(*g);
    p.n = require_positive(pv["n"], p.n, "n");
    p.kappa_a = require_positive(pv["kappa_a"], p.kappa_a, "kappa_a");
    p.kappa_pre = require_positive(pv["kappa_pre"], p.kappa_pre, "kappa_pre");
    p.seed = require_positive(pv["seed"], p.seed, "seed");
    p.wishart_factor = require_positive(pv["wishart_factor"], p.wishart_factor, "wishart_factor");
    p.lambda = require_positive(pv["lambda"], p.lambda, "lambda");
    p.rank = require_positive(pv["rank"], p.rank, "rank");
    p.dim = require_positive(pv["dim"], p.dim, "dim");
    if (const auto d = pv["data"].value<std::string>()) p.data = *d;
  }

  if (const auto* solvers = doc["solver"].as_array()) {
    cfg.solvers.clear();
    for (const auto& node : *solvers) {
      const auto* t = node.as_table();
      if (!t) throw InvalidSpec("config: [[solver]] entries must be tables");
      const toml::node_view<const toml::node> sv{*t};
      const auto name = sv["name"].value<std::string>();
      if (!name) throw InvalidSpec("config: [[solver]] needs a name");
      SolverSpec s = default_spec(*name);
      s.max_iters = require_positive(sv["max_iters"], s.max_iters, "max_iters");
      s.check_freq = require_positive(sv["check_freq"], s.check_freq, "check_freq");
      cfg.solvers.push_back(std::move(s));
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_toml(const ExperimentConfig& cfg) {
  const ProblemParams& p = cfg.problem;
  toml::table problem{
      {"generator", std::string(to_string(p.generator))},
      {"n", static_cast<std::int64_t>(p.n)},
      {"kappa_a", p.kappa_a},
      {"kappa_pre", p.kappa_pre},
      {"seed", static_cast<std::int64_t>(p.seed)},
      {"wishart_factor", p.wishart_factor},
      {"lambda", p.lambda},
      {"rank", static_cast<std::int64_t>(p.rank)},
      {"dim", static_cast<std::int64_t>(p.dim)},
  };
  if (p.data) problem.insert("data", *p.data);

  toml::array solvers;
  for (const SolverSpec& s : cfg.solvers) {
    solvers.push_back(toml::table{{"name", s.name},
                                  {"max_iters", static_cast<std::int64_t>(s.max_iters)},
                                  {"check_freq", static_cast<std::int64_t>(s.check_freq)}});
  }
  toml::table doc{
      {"experiment", std::string(to_string(cfg.experiment))},
      {"out", cfg.out},
      {"measure_every", static_cast<std::int64_t>(cfg.measure_every)},
      {"problem", std::move(problem)},
      {"solver", std::move(solvers)},
  };
  std::ostringstream os;
  os << doc << '\n';
  return os.str();
}

void validate(const ExperimentConfig& cfg) {
  const ProblemParams& p = cfg.problem;
  if (p.n < 2) throw InvalidSpec("config: n must be at least 2");
  if (cfg.measure_every < 1) throw InvalidSpec("config: measure_every must be >= 1");
  if (cfg.solvers.empty()) throw InvalidSpec("config: no solvers selected");
  const auto& known = solver_names();
  for (const SolverSpec& s : cfg.solvers) {
    if (std::find(known.begin(), known.end(), s.name) == known.end()) {
      throw InvalidSpec("config: unknown solver '" + s.name + "'");
    }
    if (s.check_freq < 1) throw InvalidSpec("config: check_freq must be >= 1");
  }
  if ((p.generator == Generator::right || p.generator == Generator::left) &&
      !(p.kappa_pre >= 1.0 && p.kappa_pre <= p.kappa_a)) {
    throw InvalidSpec("config: need 1 <= kappa_pre <= kappa_a");
  }
  if (p.generator == Generator::kernel && p.rank > p.n) {
    throw InvalidSpec("config: rank exceeds n");
  }
}

}  // namespace stablepc::experiments
