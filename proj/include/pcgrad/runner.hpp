#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pcgrad/optim.hpp"
#include "pcgrad/problems.hpp"
#include "pcgrad/telemetry.hpp"

namespace pcgrad {

enum class Method { kPlain, kPcgrad, kDirectionOnly, kMagnitudeOnly };

Method method_from_string(const std::string& name);
std::string to_string(Method m);

struct RunSettings {
  Method method = Method::kPcgrad;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 0.001;
  std::int64_t iterations = 1000;
  std::uint64_t seed = 0;
  std::int64_t snapshot_every = 100;
  std::optional<Vec> theta0;  // problem-specific default when absent
  int batch_size = 0;         // MLP only; 0 = full batch
};

// One optimization run with full triad telemetry. Per iteration: task
// gradients at theta_k, the chosen combination rule, one optimizer step.
// Deterministic given (problem, settings).
RunLog run_training(const MultiTaskProblem& problem, const RunSettings& settings);

// The combination rule on its own (shared by run_training and the verifier).
// Falls back to the plain sum when a rescaling variant hits a degenerate norm
// (e.g. all gradients vanished inside a clamp region).
Vec combined_update(Method method, const TaskGradients& grads, std::uint64_t step_seed);

}  // namespace pcgrad
