#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stablepc::experiments {

/// Named experiment presets. `custom` takes its generator from the config.
enum class Experiment { fig1, fig2, fig3, fig4_left, fig4_right_synthetic, fig5, shift, custom };

std::string_view to_string(Experiment e);
/// Throws InvalidSpec for unknown names.
Experiment experiment_from_string(std::string_view s);
const std::vector<std::string>& experiment_names();

/// Problem generators reachable from a config.
enum class Generator { right, left, trio, shift, wishart, kernel };

std::string_view to_string(Generator g);
Generator generator_from_string(std::string_view s);

struct ProblemParams {
  Generator generator = Generator::right;
  std::size_t n = 1000;
  double kappa_a = 1e10;
  double kappa_pre = 4.0;        // κ(AP⁻¹) or κ(P⁻¹A)
  std::uint64_t seed = 1;
  double wishart_factor = 4.0;
  double lambda = 1e-10;         // kernel regularization
  std::size_t rank = 100;        // RPCholesky columns
  std::size_t dim = 10;          // synthetic kernel point dimension
  std::optional<std::string> data;  // LIBSVM file replacing synthetic points

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Iteration budget and refinement settings for one named solver.
struct SolverSpec {
  std::string name;
  std::size_t max_iters = 100;
  std::size_t check_freq = 50;

  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::custom;
  ProblemParams problem;
  std::vector<SolverSpec> solvers;
  /// Oracle measurement cadence (iterations); the final iterate is always measured.
  std::size_t measure_every = 1;
  std::string out = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Solver names understood by the runner.
const std::vector<std::string>& solver_names();

/// Parameters and per-solver budgets of a named preset.
ExperimentConfig preset(Experiment e);

/// Command-line style overrides applied on top of a preset or file.
struct Overrides {
  std::optional<std::size_t> n;
  std::optional<double> kappa_a;
  std::optional<double> kappa_pre;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> solvers;
  std::optional<std::size_t> check_freq;
  std::optional<std::size_t> max_iters;
  std::optional<std::string> out;
  std::optional<std::string> data;
};

void apply(ExperimentConfig& cfg, const Overrides& o);

/// Parses a TOML document. Keys absent from the document keep the values of
/// the named experiment's preset. Throws InvalidSpec on bad values and
/// ParseError on malformed TOML.
ExperimentConfig parse_config(std::string_view toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config.
std::string to_toml(const ExperimentConfig& cfg);

/// Throws InvalidSpec if the config cannot be run.
void validate(const ExperimentConfig& cfg);

}  // namespace stablepc::experiments
