// Experiment runner: problems x surgery methods x optimizers behind
// reproducible, seed-addressed commands.
//
// Subcommands:
//   landscape2d   2D didactic landscape run (fixed init, Adam defaults)
//   quadratic     random quadratic family run with full conflict telemetry
//   mlp           minibatch multi-task MLP regression (CSV or synthetic data)
//   verify        randomized theorem-verification sweeps, JSON reports
//
// Every run writes <out>.csv (per-iteration telemetry), <out>_theta.csv
// (parameter snapshots) and <out>.json (summary). --parallel N launches runs
// for seeds seed..seed+N-1 concurrently, suffixing outputs with _seed<S>.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include "pcgrad/problems.hpp"
#include "pcgrad/rng.hpp"
#include "pcgrad/runner.hpp"
#include "pcgrad/telemetry.hpp"
#include "pcgrad/verify.hpp"

namespace {

using pcgrad::MultiTaskProblem;
using pcgrad::RunLog;
using pcgrad::RunSettings;
using pcgrad::Vec;

constexpr std::uint64_t kTagData = 0x64617461ull;
constexpr std::uint64_t kTagFdck = 0x6664636bull;

struct RunFlags {
  std::string method = "pcgrad";
  std::string optimizer = "sgd";
  double lr = 0.01;
  std::int64_t iters = 1000;
  std::uint64_t seed = 0;
  std::string out = "run";
  std::int64_t snapshot_every = 100;
  int parallel = 1;
  bool timing = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, const std::string& optimizer,
                   double lr, std::int64_t iters, const std::string& out) {
  f.optimizer = optimizer;
  f.lr = lr;
  f.iters = iters;
  f.out = out;
  cmd->add_option("--method", f.method, "Gradient combination rule")
      ->check(CLI::IsMember({"plain", "pcgrad", "direction_only", "magnitude_only"}))
      ->capture_default_str();
  cmd->add_option("--optimizer", f.optimizer, "Parameter update rule")
      ->check(CLI::IsMember({"sgd", "heavy_ball", "adam"}))
      ->capture_default_str();
  cmd->add_option("--lr", f.lr, "Step size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--iters", f.iters, "Iteration count")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Run seed (mandatory)")->required();
  cmd->add_option("--out", f.out, "Output path prefix")->capture_default_str();
  cmd->add_option("--snapshot-every", f.snapshot_every,
                  "Parameter snapshot cadence (0 disables periodic snapshots)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40))
      ->capture_default_str();
  cmd->add_option("--parallel", f.parallel,
                  "Run this many consecutive seeds concurrently")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  cmd->add_flag("--timing", f.timing, "Record wall time in the JSON summary");
  cmd->set_config("--config", "", "Flat key=value config file (flags override it)");
}

std::string output_base(const RunFlags& f, std::uint64_t seed) {
  if (f.parallel <= 1) return f.out;
  return f.out + "_seed" + std::to_string(seed);
}

// One seed's run: build, train, write the three artifacts.
void execute_one(const RunFlags& f, std::uint64_t seed,
                 const std::function<std::unique_ptr<MultiTaskProblem>(std::uint64_t)>& make,
                 const std::function<void(const MultiTaskProblem&, RunSettings&)>& tweak,
                 std::map<std::string, std::string> extra) {
  const auto started = std::chrono::steady_clock::now();
  const std::unique_ptr<MultiTaskProblem> problem = make(seed);
  RunSettings settings;
  settings.method = pcgrad::method_from_string(f.method);
  settings.optimizer = pcgrad::optimizer_kind_from_string(f.optimizer);
  settings.lr = f.lr;
  settings.iterations = f.iters;
  settings.seed = seed;
  settings.snapshot_every = f.snapshot_every;
  if (tweak) tweak(*problem, settings);

  const RunLog log = pcgrad::run_training(*problem, settings);

  const std::string base = output_base(f, seed);
  pcgrad::write_csv(log, base + ".csv");
  pcgrad::write_theta_csv(log, base + "_theta.csv");
  if (f.timing) {
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
    extra["wall_seconds"] = pcgrad::format_double(took.count());
  }
  pcgrad::write_summary_json(log, base + ".json", extra);

  std::ostringstream line;
  line << log.problem_id << " method=" << log.method_id << " optimizer=" << log.optimizer_id
       << " seed=" << seed << " iters=" << f.iters;
  if (log.has_final) line << " final_loss_total=" << pcgrad::format_double(log.final_loss_total);
  line << " -> " << base << ".csv\n";
  std::cout << line.str();
}

// Fan a run out over consecutive seeds; exceptions surface after join.
void execute_many(const RunFlags& f,
                  const std::function<std::unique_ptr<MultiTaskProblem>(std::uint64_t)>& make,
                  const std::function<void(const MultiTaskProblem&, RunSettings&)>& tweak,
                  const std::map<std::string, std::string>& extra) {
  if (f.parallel <= 1) {
    execute_one(f, f.seed, make, tweak, extra);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(f.parallel));
  for (int i = 0; i < f.parallel; ++i) {
    workers.emplace_back([&, i] {
      try {
        execute_one(f, f.seed + static_cast<std::uint64_t>(i), make, tweak, extra);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Map --problem values onto subcommands so either spelling launches a run.
std::string subcommand_for_problem(const std::string& name) {
  if (name == "didactic2d" || name == "landscape2d") return "landscape2d";
  if (name == "quadratic") return "quadratic";
  if (name == "mlp") return "mlp";
  throw CLI::ValidationError("--problem",
                             "unknown problem '" + name + "' (didactic2d|quadratic|mlp)");
}

// Rewrites "--problem X" into the matching subcommand token.
std::vector<std::string> preprocess_args(int argc, char** argv) {
  std::vector<std::string> args;
  std::optional<std::string> problem;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--problem") {
      if (i + 1 >= argc) throw CLI::ValidationError("--problem", "expected a value");
      problem = argv[++i];
      continue;
    }
    if (a.rfind("--problem=", 0) == 0) {
      problem = a.substr(std::string("--problem=").size());
      continue;
    }
    args.push_back(a);
  }
  if (problem.has_value()) {
    const std::string sub = subcommand_for_problem(*problem);
    if (!args.empty() && args.front() == sub) return args;  // redundant but consistent
    if (!args.empty() && (args.front() == "landscape2d" || args.front() == "quadratic" ||
                          args.front() == "mlp" || args.front() == "verify")) {
      throw CLI::ValidationError("--problem", "conflicts with subcommand '" + args.front() + "'");
    }
    args.insert(args.begin(), sub);
  }
  return args;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Gradient-surgery experiment runner"};
  app.require_subcommand(0, 1);
  app.set_help_all_flag("--help-all", "Expanded help for every subcommand");
  int exit_code = 0;

  // ----- landscape2d -----
  auto* landscape = app.add_subcommand(
      "landscape2d", "Two-task 2D didactic landscape (init [0.5, -3])");
  RunFlags lf;
  add_run_flags(landscape, lf, "adam", 0.001, 200000, "landscape2d");
  landscape->callback([&] {
    std::map<std::string, std::string> extra;
    extra["loss_floor"] = pcgrad::format_double(*pcgrad::Didactic2d{}.loss_floor());
    execute_many(
        lf, [](std::uint64_t) { return std::make_unique<pcgrad::Didactic2d>(); },
        [](const MultiTaskProblem&, RunSettings& s) {
          s.theta0 = pcgrad::Didactic2d::default_init();
        },
        extra);
  });

  // ----- quadratic -----
  auto* quadratic = app.add_subcommand(
      "quadratic", "Random convex quadratic tasks with conflict telemetry");
  RunFlags qf;
  int q_dim = 10;
  int q_tasks = 2;
  double q_mu = 0.1;
  double q_lam = 2.0;
  bool q_shared = false;
  bool q_inv_lipschitz = false;
  add_run_flags(quadratic, qf, "sgd", 0.1, 200, "quadratic");
  quadratic->add_option("--dim", q_dim, "Parameter dimension")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  quadratic->add_option("--tasks", q_tasks, "Task count")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  quadratic->add_option("--mu", q_mu, "Smallest task eigenvalue")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  quadratic->add_option("--lam", q_lam, "Largest task eigenvalue")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  quadratic->add_flag("--shared-center", q_shared, "All tasks share one minimizer");
  quadratic->add_flag("--step-inv-lipschitz", q_inv_lipschitz,
                      "Ignore --lr and step with 1/L of the generated instance");
  quadratic->callback([&] {
    if (q_lam < q_mu) throw CLI::ValidationError("--lam", "must be >= --mu");
    std::map<std::string, std::string> extra;
    extra["dim"] = std::to_string(q_dim);
    extra["tasks"] = std::to_string(q_tasks);
    extra["mu"] = pcgrad::format_double(q_mu);
    extra["lam"] = pcgrad::format_double(q_lam);
    extra["shared_center"] = q_shared ? "true" : "false";
    execute_many(
        qf,
        [&](std::uint64_t seed) -> std::unique_ptr<MultiTaskProblem> {
          if (q_shared) {
            return std::make_unique<pcgrad::QuadraticProblem>(
                pcgrad::quadratic_family_shared_center(seed, q_dim, q_tasks, q_mu, q_lam));
          }
          return std::make_unique<pcgrad::QuadraticProblem>(
              pcgrad::quadratic_family(seed, q_dim, q_tasks, q_mu, q_lam));
        },
        [&](const MultiTaskProblem& p, RunSettings& s) {
          if (q_inv_lipschitz) s.lr = 1.0 / *p.lipschitz_total();
        },
        extra);
  });

  // ----- mlp -----
  auto* mlp = app.add_subcommand(
      "mlp", "Task-conditioned MLP regression with stratified minibatches");
  RunFlags mf;
  std::string m_data;
  std::string m_widths = "16,16";
  int m_tasks = 2;
  int m_batch = 16;
  int m_samples = 256;
  int m_in_dim = 4;
  bool m_fd_check = false;
  add_run_flags(mlp, mf, "adam", 0.001, 2000, "mlp");
  mlp->add_option("--data", m_data,
                  "Training CSV (features..., target, task_id); omitted = synthetic "
                  "opposed-targets dataset")
      ->check(CLI::ExistingFile);
  mlp->add_option("--widths", m_widths, "Comma-separated hidden layer widths")
      ->capture_default_str();
  mlp->add_option("--tasks", m_tasks, "Task count (synthetic data is always 2)")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  mlp->add_option("--batch", m_batch, "Per-task batch size (0 = full batch)")
      ->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  mlp->add_option("--samples", m_samples, "Synthetic samples per task")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  mlp->add_option("--in-dim", m_in_dim, "Synthetic feature dimension")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  mlp->add_flag("--fd-check", m_fd_check,
                "Report the finite-difference gradient error before training");
  mlp->callback([&] {
    std::vector<int> widths;
    {
      std::stringstream ss(m_widths);
      std::string part;
      while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        widths.push_back(std::stoi(part));
        if (widths.back() < 1) throw CLI::ValidationError("--widths", "widths must be >= 1");
      }
    }
    std::map<std::string, std::string> extra;
    extra["widths"] = m_widths;
    extra["data"] = m_data.empty() ? "synthetic" : m_data;
    auto make = [&](std::uint64_t seed) -> std::unique_ptr<MultiTaskProblem> {
      std::vector<pcgrad::TaskDataset> data;
      int tasks = m_tasks;
      if (m_data.empty()) {
        tasks = 2;
        data = pcgrad::opposed_regression_dataset(pcgrad::rng::derive(seed, {kTagData}),
                                                  m_samples, m_in_dim);
      } else {
        data = pcgrad::load_csv_dataset(m_data, m_tasks);
      }
      pcgrad::MlpSpec spec;
      spec.in_dim = static_cast<int>(data[0].x[0].size());
      spec.hidden = widths;
      spec.out_dim = static_cast<int>(data[0].y[0].size());
      spec.num_tasks = tasks;
      return std::make_unique<pcgrad::MlpProblem>(spec, std::move(data));
    };
    if (m_fd_check) {
      const std::unique_ptr<MultiTaskProblem> probe = make(mf.seed);
      pcgrad::rng::SplitMix64 r(pcgrad::rng::derive(mf.seed, {kTagFdck}));
      Vec theta(probe->dimension());
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.5 * r.normal();
      const double err = pcgrad::finite_difference_max_rel_error(*probe, theta);
      extra["fd_check_max_rel_error"] = pcgrad::format_double(err);
      std::cout << "fd-check max_rel_error=" << pcgrad::format_double(err) << "\n";
    }
    execute_many(
        mf, make,
        [&](const MultiTaskProblem&, RunSettings& s) { s.batch_size = m_batch; }, extra);
  });

  // ----- verify -----
  auto* verify = app.add_subcommand(
      "verify", "Randomized verification sweeps; exit 1 on any violation");
  std::uint64_t v_seed = 0;
  std::int64_t v_trials = 0;
  int v_parallel = 1;
  std::string v_out = "verify_reports.json";
  bool v_literal = false;
  bool v_timing = false;
  verify->add_option("--seed", v_seed, "Sweep seed (mandatory)")->required();
  verify->add_option("--trials", v_trials,
                     "Trials per sweep (0 = acceptance-scale defaults)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 32))
      ->capture_default_str();
  verify->add_option("--parallel", v_parallel, "Worker threads per sweep")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  verify->add_option("--out", v_out, "Report JSON path")->capture_default_str();
  verify->add_flag("--literal-momentum-step", v_literal,
                   "Use the unsquared momentum step-size form (for comparison)");
  verify->add_flag("--timing", v_timing, "Record wall time in the report file");
  verify->set_config("--config", "", "Flat key=value config file (flags override it)");
  verify->callback([&] {
    const auto started = std::chrono::steady_clock::now();
    pcgrad::SweepOptions opts;
    opts.seed = v_seed;
    opts.trials = v_trials;
    opts.threads = v_parallel;
    opts.squared_schedule = !v_literal;
    opts.keep_records = false;  // summaries only; records are a library feature
    const std::vector<pcgrad::TheoremReport> reports = pcgrad::run_verification_suite(opts);

    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    std::int64_t total_violations = 0;
    for (const auto& r : reports) {
      j.push_back(r.to_json());
      total_violations += r.violations;
      std::cout << r.theorem_id << ": trials=" << r.trials << " applicable=" << r.applicable
                << " violations=" << r.violations << " worst_margin="
                << (std::isfinite(r.worst_margin) ? pcgrad::format_double(r.worst_margin)
                                                  : std::string("n/a"))
                << "\n";
    }
    nlohmann::ordered_json out_doc;
    if (v_timing) {
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
      out_doc["wall_seconds"] = took.count();
      out_doc["reports"] = j;
    } else {
      out_doc = j;
    }
    std::ofstream f(v_out, std::ios::binary);
    if (!f) throw pcgrad::Error("cannot open for writing: " + v_out);
    f << out_doc.dump(2) << "\n";
    std::cout << "reports -> " << v_out << "\n";
    if (total_violations > 0) {
      std::cout << "total violations=" << total_violations << "\n";
      exit_code = 1;
    }
  });

  try {
    std::vector<std::string> args = preprocess_args(argc, argv);
    // CLI11 consumes arguments back to front.
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help() << "\n";
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const pcgrad::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
