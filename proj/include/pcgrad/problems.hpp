#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcgrad/surgery.hpp"
#include "pcgrad/vecmath.hpp"

namespace pcgrad {

// An evaluatable multi-task family {L_i} with analytic gradients and optional
// regularity metadata. Evaluation is pure and thread-safe; instances are
// immutable after construction.
class MultiTaskProblem {
 public:
  virtual ~MultiTaskProblem() = default;

  virtual std::string id() const = 0;
  virtual int dimension() const = 0;
  virtual int num_tasks() const = 0;
  virtual double loss(int task, const Vec& theta) const = 0;
  virtual Vec grad(int task, const Vec& theta) const = 0;

  // Lipschitz constant of the summed gradient, when known analytically.
  virtual std::optional<double> lipschitz_total() const { return std::nullopt; }
  // Lower bound on the summed loss, when known analytically.
  virtual std::optional<double> loss_floor() const { return std::nullopt; }

  double total_loss(const Vec& theta) const;
  Vec total_grad(const Vec& theta) const;
  TaskGradients gradients(const Vec& theta) const;
};

// ---------------------------------------------------------------------------
// 2D didactic landscape:
//   L1 = 20 ln(max(|0.5 th1 + tanh th2|, 5e-6))
//   L2 = 25 ln(max(|0.5 th1 - tanh th2 + 2|, 5e-6))
// Gradient is zero inside and at the boundary of the clamp region.
class Didactic2d : public MultiTaskProblem {
 public:
  static constexpr double kClamp = 5e-6;

  std::string id() const override { return "didactic2d"; }
  int dimension() const override { return 2; }
  int num_tasks() const override { return 2; }
  double loss(int task, const Vec& theta) const override;
  Vec grad(int task, const Vec& theta) const override;
  std::optional<double> loss_floor() const override;  // 45 ln(5e-6)

  static Vec default_init();  // [0.5, -3]
};

// ---------------------------------------------------------------------------
// Quadratic tasks L_i = 0.5 (th - c_i)^T A_i (th - c_i)
struct QuadraticTask {
  Mat A;      // symmetric PSD
  Vec center;
  double mu = 0.0;   // smallest eigenvalue of A
  double lam = 0.0;  // largest eigenvalue of A
};

class QuadraticProblem : public MultiTaskProblem {
 public:
  QuadraticProblem(std::vector<QuadraticTask> tasks, std::string id = "quadratic");

  std::string id() const override { return id_; }
  int dimension() const override { return static_cast<int>(tasks_[0].center.size()); }
  int num_tasks() const override { return static_cast<int>(tasks_.size()); }
  double loss(int task, const Vec& theta) const override;
  Vec grad(int task, const Vec& theta) const override;
  std::optional<double> lipschitz_total() const override { return lipschitz_; }
  std::optional<double> loss_floor() const override;

  const QuadraticTask& task(int i) const { return tasks_[static_cast<std::size_t>(i)]; }
  const Mat& total_hessian() const { return total_hessian_; }
  double lambda_min_total() const { return lambda_min_total_; }

  // Minimizer of the summed loss (strongly convex case), if A is invertible.
  std::optional<Vec> total_minimizer() const;

 private:
  std::vector<QuadraticTask> tasks_;
  std::string id_;
  Mat total_hessian_;
  double lipschitz_ = 0.0;
  double lambda_min_total_ = 0.0;
};

// Random tasks with eigenvalues drawn uniformly from [mu, lam] (conjugated by
// a random orthogonal matrix) and gaussian centers. mu == lam produces exact
// multiples of the identity. Reported per-task mu_i / L_i are the extreme
// drawn eigenvalues, so they are exact.
QuadraticProblem quadratic_family(std::uint64_t seed, int dim, int num_tasks,
                                  double mu, double lam);

// Shared-minimizer variant (all centers equal): the setting where the
// stacked-error norm to theta* is well-defined for momentum verification.
QuadraticProblem quadratic_family_shared_center(std::uint64_t seed, int dim,
                                                int num_tasks, double mu, double lam);

// ---------------------------------------------------------------------------
// Quadratic plus bounded sinusoidal perturbation (smooth nonconvex):
//   L_i = 0.5 (th-c_i)^T A_i (th-c_i) + a_i * sum_d sin(w_i th_d + p_id)
// Lipschitz constant lam_max(sum A_i) + sum_i a_i w_i^2 and loss floor
// -(dim) * sum_i a_i are both analytic.
class SineQuadraticProblem : public MultiTaskProblem {
 public:
  SineQuadraticProblem(std::vector<QuadraticTask> tasks, std::vector<double> amp,
                       std::vector<double> freq, std::vector<Vec> phase);

  std::string id() const override { return "sine_quadratic"; }
  int dimension() const override { return static_cast<int>(tasks_[0].center.size()); }
  int num_tasks() const override { return static_cast<int>(tasks_.size()); }
  double loss(int task, const Vec& theta) const override;
  Vec grad(int task, const Vec& theta) const override;
  std::optional<double> lipschitz_total() const override { return lipschitz_; }
  std::optional<double> loss_floor() const override { return floor_; }

 private:
  std::vector<QuadraticTask> tasks_;
  std::vector<double> amp_, freq_;
  std::vector<Vec> phase_;
  double lipschitz_ = 0.0;
  double floor_ = 0.0;
};

SineQuadraticProblem sine_quadratic_family(std::uint64_t seed, int dim, int num_tasks);

// ---------------------------------------------------------------------------
// Task-conditioned MLP regression: input [x; onehot(task)], tanh hidden
// layers, linear output, per-task mean squared error
//   L_i(theta) = (1/m_i) sum_k |f(x_k, i) - y_k|^2.
// Parameter flattening: layer by layer, weights row-major, then biases.
struct MlpSpec {
  int in_dim = 1;
  std::vector<int> hidden;  // widths of tanh layers
  int out_dim = 1;
  int num_tasks = 2;

  int input_width() const { return in_dim + num_tasks; }
  int param_count() const;
};

struct TaskDataset {
  std::vector<Vec> x;  // each in_dim
  std::vector<Vec> y;  // each out_dim
};

class MlpProblem : public MultiTaskProblem {
 public:
  MlpProblem(MlpSpec spec, std::vector<TaskDataset> data);

  std::string id() const override { return "mlp"; }
  int dimension() const override { return spec_.param_count(); }
  int num_tasks() const override { return spec_.num_tasks; }
  double loss(int task, const Vec& theta) const override;
  Vec grad(int task, const Vec& theta) const override;

  // Same loss/gradient restricted to a subset of the task's samples.
  double batch_loss(int task, const Vec& theta, const std::vector<int>& idx) const;
  Vec batch_grad(int task, const Vec& theta, const std::vector<int>& idx) const;

  Vec forward(int task, const Vec& theta, const Vec& x) const;
  const MlpSpec& spec() const { return spec_; }
  const TaskDataset& data(int task) const { return data_[static_cast<std::size_t>(task)]; }

 private:
  MlpSpec spec_;
  std::vector<TaskDataset> data_;
};

// CSV layout: feature columns..., target, task_id (integer, last column).
std::vector<TaskDataset> load_csv_dataset(const std::string& path, int num_tasks);
void save_csv_dataset(const std::string& path, const std::vector<TaskDataset>& data);

// Two regression tasks with opposite targets (y and -y) on shared features:
// a minimal conflicting-gradient dataset.
std::vector<TaskDataset> opposed_regression_dataset(std::uint64_t seed, int samples,
                                                    int in_dim);

}  // namespace pcgrad
