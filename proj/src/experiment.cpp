#include "home3/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "home3/admm.hpp"
#include "home3/analysis.hpp"
#include "home3/data.hpp"
#include "home3/problems.hpp"
#include "home3/trace.hpp"

namespace home3 {

void ProblemSpec::validate() const {
  static const char* families[] = {"quadratic", "dictlearn", "dnmf", "dnmf_noisy",
                                   "logreg"};
  bool known = false;
  for (const char* f : families) known = known || family == f;
  if (!known) throw std::invalid_argument("unknown problem family '" + family + "'");
  if (family == "quadratic" && dim == 0) {
    throw std::invalid_argument("quadratic problem needs dim >= 1");
  }
  if (init_scale < 0.0) throw std::invalid_argument("init_scale must be >= 0");
}

void ExperimentConfig::validate() const {
  problem.validate();
  opt.validate();
  if (optimizers.empty()) throw std::invalid_argument("no optimizers configured");
  if (seeds.empty()) throw std::invalid_argument("no seeds configured");
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("format must be csv or json, got '" + format + "'");
  }
  for (const std::string& name : optimizers) {
    if (name == "admm") {
      if (problem.family != "dictlearn") {
        throw std::invalid_argument(
            "the admm baseline applies to the dictlearn family only");
      }
      continue;
    }
    if (!parse_optimizer(name)) {
      throw std::invalid_argument("unknown optimizer '" + name + "'");
    }
  }
}

static std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

static bool parse_on_off(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("expected on/off, got '" + v + "'");
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "problem") cfg.problem.family = value;
  else if (key == "optimizers" || key == "optimizer") cfg.optimizers = split_list(value);
  else if (key == "seeds" || key == "seed") {
    cfg.seeds.clear();
    for (const std::string& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
  } else if (key == "iters") cfg.opt.max_iters = std::stoull(value);
  else if (key == "lr" || key == "base_lr") cfg.opt.base_lr = std::stod(value);
  else if (key == "beta1") cfg.opt.beta1 = std::stod(value);
  else if (key == "beta2") cfg.opt.beta2 = std::stod(value);
  else if (key == "beta3") cfg.opt.beta3 = std::stod(value);
  else if (key == "eps1") cfg.opt.eps1 = std::stod(value);
  else if (key == "eps2") cfg.opt.eps2 = std::stod(value);
  else if (key == "power") cfg.opt.momentum_power = std::stoi(value);
  else if (key == "storm_a") cfg.opt.storm_a = std::stod(value);
  else if (key == "grad_clip") cfg.opt.grad_clip_inf = std::stod(value);
  else if (key == "randomize") cfg.randomize = parse_on_off(value);
  else if (key == "out") cfg.output_dir = value;
  else if (key == "format") cfg.format = value;
  else if (key == "dim") cfg.problem.dim = std::stoull(value);
  else if (key == "rows") cfg.problem.rows = std::stoull(value);
  else if (key == "cols") cfg.problem.cols = std::stoull(value);
  else if (key == "rank") cfg.problem.rank = std::stoull(value);
  else if (key == "data_seed") cfg.problem.data_seed = std::stoull(value);
  else if (key == "lambda") cfg.problem.lambda = std::stod(value);
  else if (key == "dict_rank") cfg.problem.dict_rank = std::stoull(value);
  else if (key == "layers") {
    cfg.problem.layer_dims.clear();
    for (const std::string& s : split_list(value))
      cfg.problem.layer_dims.push_back(std::stoull(s));
  } else if (key == "noise_amplitude") cfg.problem.noise_amplitude = std::stod(value);
  else if (key == "penalty_mu") cfg.problem.penalty_mu = std::stod(value);
  else if (key == "l2_reg") cfg.problem.l2_reg = std::stod(value);
  else if (key == "csv") cfg.problem.csv_path = value;
  else if (key == "init_scale") cfg.problem.init_scale = std::stod(value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());

  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    try {
      apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

static DenseMatrix problem_input(const ProblemSpec& spec) {
  if (!spec.csv_path.empty()) return load_csv(spec.csv_path);
  return synth_lowrank(spec.rows, spec.cols, spec.rank, spec.data_seed).matrix;
}

static LogRegProblem synth_logreg(const ProblemSpec& spec) {
  // Logistic-model sample: gaussian features, labels drawn from the true
  // class probability under a gaussian weight vector.
  Rng rng(mix_seed(spec.data_seed, 0x10c9));
  const std::size_t n = spec.rows;
  const std::size_t d = spec.cols;
  LogRegProblem p;
  p.l2_reg = spec.l2_reg;
  p.features = DenseMatrix(n, d);
  for (double& v : p.features.data) v = rng.next_gaussian();
  DenseVector w_true(d);
  for (std::size_t j = 0; j < d; ++j) w_true[j] = rng.next_gaussian();
  p.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += p.features(i, j) * w_true[j];
    const double prob = 1.0 / (1.0 + std::exp(-z));
    p.labels.push_back(rng.next_unit() < prob ? 1 : 0);
  }
  return p;
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec) {
  spec.validate();
  if (spec.family == "quadratic") {
    return std::make_unique<QuadraticProblem>(spec.dim);
  }
  if (spec.family == "dictlearn") {
    DictLearnProblem p;
    p.input = problem_input(spec);
    p.lambda = spec.lambda;
    p.dict_rank = spec.dict_rank;
    return std::make_unique<DictLearnObjective>(std::move(p));
  }
  if (spec.family == "dnmf" || spec.family == "dnmf_noisy") {
    DnmfProblem p;
    p.input = problem_input(spec);
    p.layer_dims = spec.layer_dims;
    p.noise_amplitude = spec.family == "dnmf_noisy" ? spec.noise_amplitude : 0.0;
    p.penalty_mu = spec.penalty_mu;
    return std::make_unique<DnmfObjective>(std::move(p));
  }
  if (spec.family == "logreg") {
    if (!spec.csv_path.empty()) {
      return std::make_unique<LogRegObjective>(
          load_classification_csv(spec.csv_path, spec.l2_reg));
    }
    return std::make_unique<LogRegObjective>(synth_logreg(spec));
  }
  throw std::invalid_argument("unknown problem family '" + spec.family + "'");
}

static double family_init_scale(const ProblemSpec& spec) {
  if (spec.init_scale > 0.0) return spec.init_scale;
  if (spec.family == "quadratic") return 0.5;
  if (spec.family == "logreg") return 0.01;
  return 0.1;
}

DenseVector initial_point(const ProblemSpec& spec, std::size_t dim,
                          std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x1817));
  const double scale = family_init_scale(spec);
  DenseVector x0(dim);
  if (spec.family == "quadratic") {
    for (double& v : x0.data) v = rng.next_uniform(-scale, scale);
  } else {
    for (double& v : x0.data) v = scale * rng.next_gaussian();
  }
  return x0;
}

std::filesystem::path trace_file_path(const ExperimentConfig& cfg,
                                      const std::string& optimizer,
                                      std::uint64_t seed) {
  const std::string ext = cfg.format == "json" ? ".json" : ".csv";
  return cfg.output_dir / (cfg.problem.family + "_" + optimizer + "_seed" +
                           std::to_string(seed) + ext);
}

static RunOutcome execute_one(const ExperimentConfig& cfg,
                              const std::string& optimizer, std::uint64_t seed) {
  RunOutcome out;
  out.optimizer = optimizer;
  out.seed = seed;
  try {
    if (optimizer == "admm") {
      DictLearnProblem p;
      p.input = problem_input(cfg.problem);
      p.lambda = cfg.problem.lambda;
      p.dict_rank = cfg.problem.dict_rank;
      out.record = admm_dictlearn_run(p, seed, cfg.opt.max_iters);
    } else {
      const OptimizerKind kind = *parse_optimizer(optimizer);
      std::unique_ptr<Problem> problem = make_problem(cfg.problem);
      HomeConfig oc = cfg.opt;
      oc.seed = seed;
      oc.randomization_enabled = cfg.randomize_resolved();
      const DenseVector x0 = initial_point(cfg.problem, problem->dim(), seed);
      out.record = run(*problem, kind, oc, x0);
    }
    out.ok = true;
  } catch (const numeric_error& e) {
    out.error = e.what();
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);

  ExperimentResult result;
  std::size_t failures = 0;

  for (const std::string& optimizer : cfg.optimizers) {
    for (std::uint64_t seed : cfg.seeds) {
      RunOutcome out = execute_one(cfg, optimizer, seed);
      if (out.ok) {
        out.trace_path = trace_file_path(cfg, optimizer, seed);
        if (cfg.format == "json") {
          write_trace_json(out.trace_path, out.record);
        } else {
          write_trace_csv(out.trace_path, out.record);
        }
        log << optimizer << " seed " << seed << ": final loss "
            << format_double(out.record.losses.back()) << " ("
            << out.record.randomization_events.size() << " randomizations, "
            << format_double(out.record.wall_time_seconds) << " s)\n";
      } else {
        ++failures;
        log << optimizer << " seed " << seed << ": FAILED - " << out.error << "\n";
      }
      result.outcomes.push_back(std::move(out));
    }
  }

  // summary.json: derived from trace content only, so reruns are byte-stable.
  nlohmann::json summary;
  summary["problem"] = cfg.problem.family;
  summary["iters"] = cfg.opt.max_iters;
  nlohmann::json per_opt = nlohmann::json::object();
  for (const std::string& optimizer : cfg.optimizers) {
    std::vector<RunRecord> records;
    nlohmann::json finals = nlohmann::json::object();
    nlohmann::json failed = nlohmann::json::array();
    for (const RunOutcome& out : result.outcomes) {
      if (out.optimizer != optimizer) continue;
      if (out.ok) {
        records.push_back(out.record);
        finals[std::to_string(out.seed)] = out.record.losses.back();
      } else {
        failed.push_back(out.seed);
      }
    }
    nlohmann::json entry;
    entry["final_loss_by_seed"] = finals;
    entry["failed_seeds"] = failed;
    if (!records.empty()) {
      const SummaryStats stats = summarize(records);
      entry["median_final_loss"] = stats.median_final;
      entry["q25_final_loss"] = stats.q25_final;
      entry["q75_final_loss"] = stats.q75_final;
      entry["randomization_events"] = stats.total_randomizations;

      // Rate slope of the pointwise-median loss curve, floor 0, over the
      // window [max(1, T/10), T]; omitted when losses touch the floor.
      const std::size_t rows = records.front().losses.size();
      bool rectangular = true;
      for (const RunRecord& r : records) rectangular &= r.losses.size() == rows;
      if (rectangular && rows >= 4) {
        std::vector<double> median_curve(rows);
        std::vector<double> column(records.size());
        for (std::size_t t = 0; t < rows; ++t) {
          for (std::size_t r = 0; r < records.size(); ++r)
            column[r] = records[r].losses[t];
          std::sort(column.begin(), column.end());
          median_curve[t] = quantile_sorted(column, 0.5);
        }
        const IndexRange window{std::max<std::size_t>(1, (rows - 1) / 10), rows - 1};
        try {
          entry["rate_slope"] = rate_slope(median_curve, 0.0, window);
          entry["rate_slope_window"] = {window.first, window.last};
        } catch (const std::exception&) {
          entry["rate_slope"] = nullptr;
        }
      } else {
        entry["rate_slope"] = nullptr;
      }

      // ICC with seeds as groups, the last few losses as repeated measures.
      const std::size_t tail = std::min<std::size_t>(10, rows);
      if (records.size() >= 2 && tail >= 2 && rectangular) {
        std::vector<std::vector<double>> groups;
        for (const RunRecord& r : records) {
          groups.emplace_back(r.losses.end() - static_cast<long>(tail),
                              r.losses.end());
        }
        const IccReport icc = icc_oneway(groups);
        entry["icc_across_seeds"] = icc.icc;
        entry["icc_degenerate"] = icc.degenerate;
      } else {
        entry["icc_across_seeds"] = nullptr;
      }
    }
    per_opt[optimizer] = entry;
  }
  summary["optimizers"] = per_opt;

  result.summary_path = cfg.output_dir / "summary.json";
  std::ofstream sout(result.summary_path);
  if (!sout) {
    throw std::runtime_error("cannot write " + result.summary_path.string());
  }
  sout << summary.dump(2) << '\n';

  const std::size_t total = cfg.optimizers.size() * cfg.seeds.size();
  result.exit_code = failures == total ? 2 : 0;
  return result;
}

}  // namespace home3
