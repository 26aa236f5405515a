#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "home3/acceptance.hpp"
#include "home3/analysis.hpp"
#include "home3/data.hpp"
#include "home3/experiment.hpp"
#include "home3/trace.hpp"

namespace {

// Exit codes: 0 success, 1 configuration error, 2 numerical failure in every
// run, 3 acceptance failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAcceptance = 3;

struct RunFlags {
  std::string config_path;
  std::string problem;
  std::vector<std::string> optimizers;
  std::vector<std::uint64_t> seeds;
  std::int64_t iters = -1;
  double beta1 = -1.0, beta2 = -1.0, beta3 = -1.0;
  double lr = -1.0, eps1 = -1.0, eps2 = -1.0;
  std::string randomize;
  std::string out_dir;
  std::string format;
  std::string csv;
  std::string layers;
  std::int64_t dim = -1, rows = -1, cols = -1, rank = -1, dict_rank = -1;
  double lambda = -1.0, noise_amplitude = -1.0, penalty_mu = -1.0, l2_reg = -1.0;
  double init_scale = -1.0;
  std::int64_t data_seed = -1;
  std::int64_t power = -1;
  double storm_a = -1.0;
};

// Flags win over config-file values.
home3::ExperimentConfig merge_flags(const RunFlags& f) {
  home3::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = home3::load_config_file(f.config_path);

  auto set = [&cfg](const std::string& key, const std::string& value) {
    home3::apply_config_line(cfg, key, value);
  };
  if (!f.problem.empty()) set("problem", f.problem);
  if (!f.optimizers.empty()) cfg.optimizers = f.optimizers;
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (f.iters >= 0) cfg.opt.max_iters = static_cast<std::uint64_t>(f.iters);
  if (f.beta1 >= 0) cfg.opt.beta1 = f.beta1;
  if (f.beta2 >= 0) cfg.opt.beta2 = f.beta2;
  if (f.beta3 >= 0) cfg.opt.beta3 = f.beta3;
  if (f.lr >= 0) cfg.opt.base_lr = f.lr;
  if (f.eps1 >= 0) cfg.opt.eps1 = f.eps1;
  if (f.eps2 >= 0) cfg.opt.eps2 = f.eps2;
  if (!f.randomize.empty()) set("randomize", f.randomize);
  if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
  if (!f.format.empty()) cfg.format = f.format;
  if (!f.csv.empty()) cfg.problem.csv_path = f.csv;
  if (!f.layers.empty()) set("layers", f.layers);
  if (f.dim >= 0) cfg.problem.dim = static_cast<std::size_t>(f.dim);
  if (f.rows >= 0) cfg.problem.rows = static_cast<std::size_t>(f.rows);
  if (f.cols >= 0) cfg.problem.cols = static_cast<std::size_t>(f.cols);
  if (f.rank >= 0) cfg.problem.rank = static_cast<std::size_t>(f.rank);
  if (f.dict_rank >= 0) cfg.problem.dict_rank = static_cast<std::size_t>(f.dict_rank);
  if (f.lambda >= 0) cfg.problem.lambda = f.lambda;
  if (f.noise_amplitude >= 0) cfg.problem.noise_amplitude = f.noise_amplitude;
  if (f.penalty_mu >= 0) cfg.problem.penalty_mu = f.penalty_mu;
  if (f.l2_reg >= 0) cfg.problem.l2_reg = f.l2_reg;
  if (f.init_scale >= 0) cfg.problem.init_scale = f.init_scale;
  if (f.data_seed >= 0) cfg.problem.data_seed = static_cast<std::uint64_t>(f.data_seed);
  if (f.power >= 1) cfg.opt.momentum_power = static_cast<int>(f.power);
  if (f.storm_a >= 0) cfg.opt.storm_a = f.storm_a;
  return cfg;
}

int cmd_run(const RunFlags& flags) {
  home3::ExperimentConfig cfg;
  try {
    cfg = merge_flags(flags);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const home3::ExperimentResult result = home3::run_experiment(cfg, std::cout);
    std::cout << "summary: " << result.summary_path.string() << "\n";
    if (result.exit_code == 2) {
      std::cerr << "all runs failed numerically\n";
      return kExitNumeric;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_accept(const std::string& report_path) {
  const auto results = home3::run_acceptance(std::cout);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";

  if (!report_path.empty()) {
    nlohmann::json report = nlohmann::json::array();
    for (const auto& r : results) {
      report.push_back({{"id", r.id},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"detail", r.detail},
                        {"seconds", r.seconds}});
    }
    const std::filesystem::path path(report_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << report.dump(2) << '\n';
    std::cout << "report: " << report_path << "\n";
  }
  return home3::all_passed(results) ? kExitOk : kExitAcceptance;
}

int cmd_rate(const std::string& trace_path, double floor, std::int64_t from,
             std::int64_t to) {
  try {
    const home3::RunRecord rec = home3::read_trace_csv(trace_path);
    home3::IndexRange window;
    window.first = from >= 0 ? static_cast<std::size_t>(from)
                             : std::max<std::size_t>(1, rec.losses.size() / 10);
    window.last = to >= 0 ? static_cast<std::size_t>(to) : rec.losses.size() - 1;
    const double slope = home3::rate_slope(rec.losses, floor, window);
    std::cout << "window [" << window.first << ", " << window.last << "], floor "
              << home3::format_double(floor) << "\n";
    std::cout << "slope " << home3::format_double(slope) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_icc(const std::string& table_path) {
  try {
    const home3::DenseMatrix table = home3::load_csv(table_path);
    std::vector<std::vector<double>> groups(table.rows);
    for (std::size_t i = 0; i < table.rows; ++i) {
      groups[i].resize(table.cols);
      for (std::size_t j = 0; j < table.cols; ++j) groups[i][j] = table(i, j);
    }
    const home3::IccReport rep = home3::icc_oneway(groups);
    std::cout << "groups " << rep.groups << ", raters " << rep.raters_per_group
              << "\n";
    std::cout << "ms_between " << home3::format_double(rep.ms_between)
              << ", ms_within " << home3::format_double(rep.ms_within) << "\n";
    std::cout << "icc " << home3::format_double(rep.icc)
              << (rep.degenerate ? " (degenerate: all values identical)" : "")
              << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "home3 - high-order momentum optimizer benchmark harness\n"
      "Optimizers: home3, adam, msgd, storm (and admm for dictlearn)."};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "run an optimizer x seed experiment grid");
  run->add_option("--config", flags.config_path, "key = value config file");
  run->add_option("--problem", flags.problem,
                  "quadratic|dictlearn|dnmf|dnmf_noisy|logreg");
  run->add_option("--optimizer", flags.optimizers, "optimizer (repeatable)");
  run->add_option("--seed", flags.seeds, "run seed (repeatable)");
  run->add_option("--iters", flags.iters, "iteration budget T");
  run->add_option("--beta1", flags.beta1, "first-moment decay");
  run->add_option("--beta2", flags.beta2, "second-moment decay");
  run->add_option("--beta3", flags.beta3, "third-moment decay");
  run->add_option("--lr", flags.lr, "base learning rate");
  run->add_option("--eps1", flags.eps1, "denominator epsilon");
  run->add_option("--eps2", flags.eps2, "stationarity trigger threshold");
  run->add_option("--randomize", flags.randomize, "on|off coordinate randomization");
  run->add_option("--out", flags.out_dir, "output directory");
  run->add_option("--format", flags.format, "trace format: csv|json");
  run->add_option("--csv", flags.csv, "input data CSV (labels last for logreg)");
  run->add_option("--dim", flags.dim, "quadratic dimension");
  run->add_option("--rows", flags.rows, "synthetic input rows");
  run->add_option("--cols", flags.cols, "synthetic input cols");
  run->add_option("--rank", flags.rank, "synthetic input rank");
  run->add_option("--dict-rank", flags.dict_rank, "dictionary inner dimension");
  run->add_option("--lambda", flags.lambda, "dictlearn sparsity trade-off");
  run->add_option("--layers", flags.layers, "dnmf layer dims, e.g. 8,5");
  run->add_option("--noise-amplitude", flags.noise_amplitude,
                  "noisy dnmf bound factor");
  run->add_option("--penalty-mu", flags.penalty_mu, "dnmf residual penalty weight");
  run->add_option("--l2-reg", flags.l2_reg, "logreg L2 regularization");
  run->add_option("--init-scale", flags.init_scale, "initialization scale");
  run->add_option("--data-seed", flags.data_seed, "synthetic data seed");
  run->add_option("--power", flags.power, "momentum power n (default 3)");
  run->add_option("--storm-a", flags.storm_a, "storm momentum parameter");

  std::string report_path;
  CLI::App* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--report", report_path, "write a JSON pass/fail report here");

  std::string trace_path;
  double floor = 0.0;
  std::int64_t from = -1, to = -1;
  CLI::App* rate = app.add_subcommand("rate", "log-log slope of a trace file");
  rate->add_option("--trace", trace_path, "trace CSV file")->required();
  rate->add_option("--floor", floor, "optimality-gap floor (default 0)");
  rate->add_option("--from", from, "window start iteration (>= 1)");
  rate->add_option("--to", to, "window end iteration (inclusive)");

  std::string table_path;
  CLI::App* icc = app.add_subcommand("icc", "ICC(1,1) of a groups-x-raters table");
  icc->add_option("--table", table_path, "numeric CSV, one group per row")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(flags);
  if (accept->parsed()) return cmd_accept(report_path);
  if (rate->parsed()) return cmd_rate(trace_path, floor, from, to);
  if (icc->parsed()) return cmd_icc(table_path);
  return kExitConfig;
}
