#include "pcgrad/optim.hpp"

#include <cmath>

namespace pcgrad {

Vec Sgd::step(const Vec& theta, const Vec& update) {
  require_same_dim(theta, update, "sgd_step");
  ++step_count;
  return theta - lr * update;
}

Vec HeavyBall::step_with(const Vec& theta, const Vec& update, double alpha_k,
                         double beta_k) {
  require_same_dim(theta, update, "heavy_ball_step");
  if (!prev_theta.has_value()) prev_theta = theta;
  Vec next = theta - alpha_k * update + beta_k * (theta - *prev_theta);
  prev_theta = theta;
  ++step_count;
  return next;
}

Vec Adam::step(const Vec& theta, const Vec& update) {
  require_same_dim(theta, update, "adam_step");
  if (m.size() == 0) {
    m = Vec::Zero(theta.size());
    v = Vec::Zero(theta.size());
  }
  ++step_count;
  m = beta1 * m + (1.0 - beta1) * update;
  v = beta2 * v + (1.0 - beta2) * update.cwiseProduct(update);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  Vec m_hat = m / bc1;
  Vec v_hat = v / bc2;
  return theta - lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "heavy_ball") return OptimizerKind::kHeavyBall;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kHeavyBall: return "heavy_ball";
    case OptimizerKind::kAdam: return "adam";
  }
  return "?";
}

Optimizer Optimizer::make(OptimizerKind kind, double lr) {
  Optimizer o;
  o.kind_ = kind;
  switch (kind) {
    case OptimizerKind::kSgd: o.state = Sgd{lr}; break;
    case OptimizerKind::kHeavyBall: o.state = HeavyBall{lr, 0.9}; break;
    case OptimizerKind::kAdam: {
      Adam a;
      a.lr = lr;
      o.state = a;
      break;
    }
  }
  return o;
}

Vec Optimizer::step(const Vec& theta, const Vec& update) {
  return std::visit([&](auto& s) { return s.step(theta, update); }, state);
}

std::int64_t Optimizer::step_count() const {
  return std::visit([](const auto& s) { return s.step_count; }, state);
}

}  // namespace pcgrad
