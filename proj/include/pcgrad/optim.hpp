#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "pcgrad/vecmath.hpp"

namespace pcgrad {

// theta - t * update
struct Sgd {
  double lr = 0.01;
  std::int64_t step_count = 0;

  Vec step(const Vec& theta, const Vec& update);
};

// theta - alpha * update + beta * (theta - theta_prev). The previous iterate
// starts at theta_0, so the first step is plain gradient descent. The
// verifier supplies per-step (alpha_k, beta_k) via step_with.
struct HeavyBall {
  double alpha = 0.01;
  double beta = 0.9;
  std::int64_t step_count = 0;
  std::optional<Vec> prev_theta;

  Vec step(const Vec& theta, const Vec& update) {
    return step_with(theta, update, alpha, beta);
  }
  Vec step_with(const Vec& theta, const Vec& update, double alpha_k, double beta_k);
};

// Standard bias-corrected Adam, consuming `update` in place of the gradient.
struct Adam {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step_count = 0;
  Vec m;  // first moment
  Vec v;  // second moment, entries >= 0

  Vec step(const Vec& theta, const Vec& update);
};

enum class OptimizerKind { kSgd, kHeavyBall, kAdam };

OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string to_string(OptimizerKind k);

// Single-owner mutable state for one optimization run.
class Optimizer {
 public:
  static Optimizer make(OptimizerKind kind, double lr);

  Vec step(const Vec& theta, const Vec& update);
  std::int64_t step_count() const;
  OptimizerKind kind() const { return kind_; }

  std::variant<Sgd, HeavyBall, Adam> state;

 private:
  OptimizerKind kind_ = OptimizerKind::kSgd;
};

}  // namespace pcgrad
