#include "pcgrad/runner.hpp"

#include <cmath>

#include "pcgrad/rng.hpp"

namespace pcgrad {

Method method_from_string(const std::string& name) {
  if (name == "plain") return Method::kPlain;
  if (name == "pcgrad") return Method::kPcgrad;
  if (name == "direction_only") return Method::kDirectionOnly;
  if (name == "magnitude_only") return Method::kMagnitudeOnly;
  throw ConfigError("unknown method: " + name);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kPlain: return "plain";
    case Method::kPcgrad: return "pcgrad";
    case Method::kDirectionOnly: return "direction_only";
    case Method::kMagnitudeOnly: return "magnitude_only";
  }
  return "?";
}

Vec combined_update(Method method, const TaskGradients& grads, std::uint64_t step_seed) {
  switch (method) {
    case Method::kPlain:
      return grads.sum();
    case Method::kPcgrad:
      return pcgrad(grads, step_seed).update;
    case Method::kDirectionOnly:
      try {
        return direction_only_variant(grads, step_seed);
      } catch (const DegenerateGradient&) {
        return grads.sum();
      }
    case Method::kMagnitudeOnly:
      try {
        return magnitude_only_variant(grads, step_seed);
      } catch (const DegenerateGradient&) {
        return grads.sum();
      }
  }
  throw ConfigError("combined_update: bad method");
}

namespace {

// without-replacement prefix of a shuffled index range
std::vector<int> sample_batch(int population, int batch, rng::SplitMix64& r) {
  std::vector<int> idx(static_cast<std::size_t>(population));
  for (int i = 0; i < population; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (batch <= 0 || batch >= population) return idx;
  for (int i = 0; i < batch; ++i) {
    const int j = i + static_cast<int>(r.index(static_cast<std::size_t>(population - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(batch));
  return idx;
}

}  // namespace

RunLog run_training(const MultiTaskProblem& problem, const RunSettings& settings) {
  if (settings.iterations < 1) throw ConfigError("run_training: iterations >= 1 required");
  if (!(settings.lr > 0.0)) throw ConfigError("run_training: lr > 0 required");

  const auto* mlp = dynamic_cast<const MlpProblem*>(&problem);
  const bool minibatch = mlp != nullptr && settings.batch_size > 0;

  Vec theta;
  if (settings.theta0.has_value()) {
    if (settings.theta0->size() != problem.dimension()) {
      throw DimensionMismatch("run_training: theta0 dimension mismatch");
    }
    theta = *settings.theta0;
  } else if (problem.id() == "didactic2d") {
    theta = Didactic2d::default_init();
  } else {
    theta = Vec::Zero(problem.dimension());
  }

  Optimizer opt = Optimizer::make(settings.optimizer, settings.lr);

  RunLog log;
  log.problem_id = problem.id();
  log.method_id = to_string(settings.method);
  log.optimizer_id = to_string(settings.optimizer);
  log.seed = settings.seed;
  log.snapshot_every = settings.snapshot_every;
  log.hyperparams["lr"] = format_double(settings.lr);
  log.hyperparams["iterations"] = std::to_string(settings.iterations);
  if (minibatch) log.hyperparams["batch_size"] = std::to_string(settings.batch_size);

  const int n_tasks = problem.num_tasks();

  for (std::int64_t k = 0; k < settings.iterations; ++k) {
    const std::uint64_t step_seed =
        rng::derive(settings.seed, {0x73746570ull /*'step'*/, static_cast<std::uint64_t>(k)});

    // stratified equal-size per-task batches for the stochastic path
    std::vector<std::vector<int>> batches;
    std::vector<Vec> task_grads;
    std::vector<double> task_losses(static_cast<std::size_t>(n_tasks));
    task_grads.reserve(static_cast<std::size_t>(n_tasks));
    if (minibatch) {
      batches.resize(static_cast<std::size_t>(n_tasks));
      for (int i = 0; i < n_tasks; ++i) {
        rng::SplitMix64 r(rng::derive(step_seed, {0x62617463ull /*'batc'*/,
                                                  static_cast<std::uint64_t>(i)}));
        const int m = static_cast<int>(mlp->data(i).x.size());
        batches[static_cast<std::size_t>(i)] = sample_batch(m, settings.batch_size, r);
        task_grads.push_back(mlp->batch_grad(i, theta, batches[static_cast<std::size_t>(i)]));
        task_losses[static_cast<std::size_t>(i)] =
            mlp->batch_loss(i, theta, batches[static_cast<std::size_t>(i)]);
      }
    } else {
      for (int i = 0; i < n_tasks; ++i) {
        task_grads.push_back(problem.grad(i, theta));
        task_losses[static_cast<std::size_t>(i)] = problem.loss(i, theta);
      }
    }
    TaskGradients grads(task_grads);

    const Vec update = combined_update(settings.method, grads, step_seed);
    const Vec theta_next = opt.step(theta, update);

    double loss_before = 0.0;
    for (double l : task_losses) loss_before += l;
    double loss_after = 0.0;
    if (minibatch) {
      for (int i = 0; i < n_tasks; ++i) {
        loss_after += mlp->batch_loss(i, theta_next, batches[static_cast<std::size_t>(i)]);
      }
    } else {
      loss_after = problem.total_loss(theta_next);
    }
    const double grad_dot_step = grads.sum().dot(theta_next - theta);

    LogRow row;
    row.triad = triad_diagnostics(grads, loss_before, loss_after, grad_dot_step, k);
    row.task_losses = task_losses;
    row.loss_total = loss_before;
    log.record(std::move(row));

    if (settings.snapshot_every > 0 && k % settings.snapshot_every == 0) {
      log.snapshot(k, theta);
    }
    theta = theta_next;
  }

  log.snapshot(settings.iterations, theta);
  log.final_task_losses.resize(static_cast<std::size_t>(n_tasks));
  log.final_loss_total = 0.0;
  for (int i = 0; i < n_tasks; ++i) {
    // final losses are whole-dataset values even on stochastic runs
    const double l = problem.loss(i, theta);
    log.final_task_losses[static_cast<std::size_t>(i)] = l;
    log.final_loss_total += l;
  }
  log.has_final = true;
  return log;
}

}  // namespace pcgrad
