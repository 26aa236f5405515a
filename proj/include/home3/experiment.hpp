#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "home3/optimizer.hpp"
#include "home3/problem.hpp"
#include "home3/record.hpp"

namespace home3 {

// Problem family plus its construction parameters. Synthetic inputs are
// generated from data_seed, so run seeds vary only initialization and
// stochasticity; csv_path substitutes an external matrix (or labeled table
// for logreg). init_scale 0 selects the family default (0.5 for the
// quadratic, 0.1 for the factorizations, 0.01 for logreg).
struct ProblemSpec {
  std::string family = "quadratic";  // quadratic|dictlearn|dnmf|dnmf_noisy|logreg
  std::size_t dim = 16;              // quadratic
  std::size_t rows = 40;
  std::size_t cols = 60;
  std::size_t rank = 5;
  std::uint64_t data_seed = 42;
  double lambda = 0.1;    // dictlearn sparsity trade-off
  std::size_t dict_rank = 5;
  std::vector<std::size_t> layer_dims = {8, 5};  // dnmf chain
  double noise_amplitude = 0.1;                  // noisy dnmf bound factor
  double penalty_mu = 1.0;
  double l2_reg = 1e-3;  // logreg
  std::string csv_path;
  double init_scale = 0.0;

  void validate() const;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<std::string> optimizers = {"home3"};  // step kinds plus "admm"
  HomeConfig opt;
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path output_dir = "out";
  std::string format = "csv";  // csv | json
  // Unset follows the default policy: on for dnmf_noisy, off otherwise.
  std::optional<bool> randomize;

  bool randomize_resolved() const {
    return randomize.value_or(problem.family == "dnmf_noisy");
  }
  void validate() const;
};

// key = value file, '#' comments; unknown keys are rejected.
ExperimentConfig load_config_file(const std::filesystem::path& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec);
DenseVector initial_point(const ProblemSpec& spec, std::size_t dim,
                          std::uint64_t seed);

struct RunOutcome {
  std::string optimizer;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::filesystem::path trace_path;
  RunRecord record;
};

struct ExperimentResult {
  std::vector<RunOutcome> outcomes;
  std::filesystem::path summary_path;
  int exit_code = 0;  // 0 ok, 2 when every run failed numerically
};

// Executes the optimizer x seed grid, one trace file per successful run plus
// summary.json (a pure function of the traces; wall-clock stats go to the
// log stream only). The output directory is created when missing. Numerical
// failures are recorded per run and do not stop the grid.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

std::filesystem::path trace_file_path(const ExperimentConfig& cfg,
                                      const std::string& optimizer,
                                      std::uint64_t seed);

}  // namespace home3
