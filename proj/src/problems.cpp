#include "pcgrad/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcgrad/rng.hpp"

namespace pcgrad {

double MultiTaskProblem::total_loss(const Vec& theta) const {
  double s = 0.0;
  for (int i = 0; i < num_tasks(); ++i) s += loss(i, theta);
  return s;
}

Vec MultiTaskProblem::total_grad(const Vec& theta) const {
  Vec g = Vec::Zero(theta.size());
  for (int i = 0; i < num_tasks(); ++i) g += grad(i, theta);
  return g;
}

TaskGradients MultiTaskProblem::gradients(const Vec& theta) const {
  std::vector<Vec> gs;
  gs.reserve(static_cast<std::size_t>(num_tasks()));
  for (int i = 0; i < num_tasks(); ++i) gs.push_back(grad(i, theta));
  return TaskGradients(std::move(gs));
}

// ---------------------------------------------------------------------------

namespace {

double didactic_u(int task, const Vec& th) {
  return task == 0 ? 0.5 * th[0] + std::tanh(th[1])
                   : 0.5 * th[0] - std::tanh(th[1]) + 2.0;
}

}  // namespace

double Didactic2d::loss(int task, const Vec& theta) const {
  const double scale = task == 0 ? 20.0 : 25.0;
  const double u = didactic_u(task, theta);
  return scale * std::log(std::max(std::abs(u), kClamp));
}

Vec Didactic2d::grad(int task, const Vec& theta) const {
  const double scale = task == 0 ? 20.0 : 25.0;
  const double u = didactic_u(task, theta);
  Vec g = Vec::Zero(2);
  if (std::abs(u) > kClamp) {
    const double ch = std::cosh(theta[1]);
    const double sech2 = 1.0 / (ch * ch);
    g[0] = scale / u * 0.5;
    g[1] = scale / u * (task == 0 ? sech2 : -sech2);
  }
  return g;
}

std::optional<double> Didactic2d::loss_floor() const {
  return 45.0 * std::log(kClamp);
}

Vec Didactic2d::default_init() {
  Vec v(2);
  v << 0.5, -3.0;
  return v;
}

// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(std::vector<QuadraticTask> tasks, std::string id)
    : tasks_(std::move(tasks)), id_(std::move(id)) {
  if (tasks_.empty()) throw ConfigError("QuadraticProblem: need at least one task");
  const Eigen::Index dim = tasks_[0].center.size();
  total_hessian_ = Mat::Zero(dim, dim);
  for (const auto& t : tasks_) {
    if (t.center.size() != dim || t.A.rows() != dim || t.A.cols() != dim) {
      throw DimensionMismatch("QuadraticProblem: inconsistent task dimensions");
    }
    total_hessian_ += t.A;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(total_hessian_);
  lipschitz_ = es.eigenvalues().maxCoeff();
  lambda_min_total_ = es.eigenvalues().minCoeff();
}

double QuadraticProblem::loss(int task, const Vec& theta) const {
  const auto& t = tasks_[static_cast<std::size_t>(task)];
  const Vec d = theta - t.center;
  return 0.5 * d.dot(t.A * d);
}

Vec QuadraticProblem::grad(int task, const Vec& theta) const {
  const auto& t = tasks_[static_cast<std::size_t>(task)];
  return t.A * (theta - t.center);
}

std::optional<Vec> QuadraticProblem::total_minimizer() const {
  if (lambda_min_total_ <= 1e-12) return std::nullopt;
  Vec rhs = Vec::Zero(dimension());
  for (const auto& t : tasks_) rhs += t.A * t.center;
  return total_hessian_.ldlt().solve(rhs);
}

std::optional<double> QuadraticProblem::loss_floor() const {
  auto m = total_minimizer();
  if (!m) return std::nullopt;
  return total_loss(*m);
}

namespace {

Mat random_orthogonal(int dim, rng::SplitMix64& r) {
  Mat G(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) G(i, j) = r.normal();
  }
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  // sign-fix so the factorization is unique
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    if (R(i, i) < 0.0) Q.col(i) *= -1.0;
  }
  return Q;
}

QuadraticTask random_quadratic_task(int dim, double mu, double lam,
                                    rng::SplitMix64& r) {
  QuadraticTask t;
  t.center = Vec(dim);
  for (int i = 0; i < dim; ++i) t.center[i] = r.normal();
  if (mu == lam) {
    t.A = mu * Mat::Identity(dim, dim);
    t.mu = t.lam = mu;
    return t;
  }
  Vec evs(dim);
  for (int i = 0; i < dim; ++i) evs[i] = r.uniform(mu, lam);
  Mat Q = random_orthogonal(dim, r);
  t.A = Q * evs.asDiagonal() * Q.transpose();
  t.A = 0.5 * (t.A + t.A.transpose()).eval();  // keep symmetric to rounding
  t.mu = evs.minCoeff();
  t.lam = evs.maxCoeff();
  return t;
}

}  // namespace

QuadraticProblem quadratic_family(std::uint64_t seed, int dim, int num_tasks,
                                  double mu, double lam) {
  if (!(0.0 <= mu && mu <= lam)) throw ConfigError("quadratic_family: need 0 <= mu <= lam");
  if (dim < 1 || num_tasks < 1) throw ConfigError("quadratic_family: need dim, tasks >= 1");
  rng::SplitMix64 r(rng::derive(seed, {0x71756164ull /*'quad'*/}));
  std::vector<QuadraticTask> tasks;
  tasks.reserve(static_cast<std::size_t>(num_tasks));
  for (int i = 0; i < num_tasks; ++i) {
    tasks.push_back(random_quadratic_task(dim, mu, lam, r));
  }
  return QuadraticProblem(std::move(tasks));
}

QuadraticProblem quadratic_family_shared_center(std::uint64_t seed, int dim,
                                                int num_tasks, double mu, double lam) {
  if (!(0.0 <= mu && mu <= lam)) throw ConfigError("quadratic_family: need 0 <= mu <= lam");
  rng::SplitMix64 r(rng::derive(seed, {0x71736863ull /*'qshc'*/}));
  std::vector<QuadraticTask> tasks;
  Vec c(dim);
  for (int i = 0; i < dim; ++i) c[i] = r.normal();
  for (int i = 0; i < num_tasks; ++i) {
    QuadraticTask t = random_quadratic_task(dim, mu, lam, r);
    t.center = c;
    tasks.push_back(std::move(t));
  }
  return QuadraticProblem(std::move(tasks), "quadratic_shared");
}

// ---------------------------------------------------------------------------

SineQuadraticProblem::SineQuadraticProblem(std::vector<QuadraticTask> tasks,
                                           std::vector<double> amp,
                                           std::vector<double> freq,
                                           std::vector<Vec> phase)
    : tasks_(std::move(tasks)),
      amp_(std::move(amp)),
      freq_(std::move(freq)),
      phase_(std::move(phase)) {
  const int n = static_cast<int>(tasks_.size());
  if (static_cast<int>(amp_.size()) != n || static_cast<int>(freq_.size()) != n ||
      static_cast<int>(phase_.size()) != n) {
    throw DimensionMismatch("SineQuadraticProblem: per-task parameter count mismatch");
  }
  Mat total = Mat::Zero(dimension(), dimension());
  for (const auto& t : tasks_) total += t.A;
  Eigen::SelfAdjointEigenSolver<Mat> es(total);
  double pert = 0.0;
  double floor_pert = 0.0;
  for (int i = 0; i < n; ++i) {
    pert += amp_[i] * freq_[i] * freq_[i];
    floor_pert += amp_[i];
  }
  lipschitz_ = es.eigenvalues().maxCoeff() + pert;
  floor_ = -static_cast<double>(dimension()) * floor_pert;
}

double SineQuadraticProblem::loss(int task, const Vec& theta) const {
  const auto& t = tasks_[static_cast<std::size_t>(task)];
  const Vec d = theta - t.center;
  double s = 0.5 * d.dot(t.A * d);
  const double a = amp_[static_cast<std::size_t>(task)];
  const double w = freq_[static_cast<std::size_t>(task)];
  const Vec& p = phase_[static_cast<std::size_t>(task)];
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    s += a * std::sin(w * theta[k] + p[k]);
  }
  return s;
}

Vec SineQuadraticProblem::grad(int task, const Vec& theta) const {
  const auto& t = tasks_[static_cast<std::size_t>(task)];
  Vec g = t.A * (theta - t.center);
  const double a = amp_[static_cast<std::size_t>(task)];
  const double w = freq_[static_cast<std::size_t>(task)];
  const Vec& p = phase_[static_cast<std::size_t>(task)];
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    g[k] += a * w * std::cos(w * theta[k] + p[k]);
  }
  return g;
}

SineQuadraticProblem sine_quadratic_family(std::uint64_t seed, int dim, int num_tasks) {
  rng::SplitMix64 r(rng::derive(seed, {0x73696e65ull /*'sine'*/}));
  std::vector<QuadraticTask> tasks;
  std::vector<double> amp, freq;
  std::vector<Vec> phase;
  for (int i = 0; i < num_tasks; ++i) {
    tasks.push_back(random_quadratic_task(dim, 0.2, 2.0, r));
    amp.push_back(r.uniform(0.01, 0.1));
    freq.push_back(r.uniform(0.5, 2.0));
    Vec p(dim);
    for (int k = 0; k < dim; ++k) p[k] = r.uniform(0.0, 6.283185307179586);
    phase.push_back(std::move(p));
  }
  return SineQuadraticProblem(std::move(tasks), std::move(amp), std::move(freq),
                              std::move(phase));
}

// ---------------------------------------------------------------------------

int MlpSpec::param_count() const {
  int count = 0;
  int prev = input_width();
  for (int h : hidden) {
    count += h * prev + h;
    prev = h;
  }
  count += out_dim * prev + out_dim;
  return count;
}

MlpProblem::MlpProblem(MlpSpec spec, std::vector<TaskDataset> data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  if (static_cast<int>(data_.size()) != spec_.num_tasks) {
    throw DimensionMismatch("MlpProblem: dataset count != num_tasks");
  }
  for (const auto& d : data_) {
    if (d.x.size() != d.y.size()) {
      throw DimensionMismatch("MlpProblem: inputs/targets length mismatch");
    }
    for (const auto& x : d.x) {
      if (x.size() != spec_.in_dim) throw DimensionMismatch("MlpProblem: bad input width");
    }
    for (const auto& y : d.y) {
      if (y.size() != spec_.out_dim) throw DimensionMismatch("MlpProblem: bad target width");
    }
  }
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstW = Eigen::Map<const RowMat>;
using MutW = Eigen::Map<RowMat>;

// widths of the affine chain: input_width -> hidden... -> out_dim
std::vector<int> layer_widths(const MlpSpec& s) {
  std::vector<int> w;
  w.push_back(s.input_width());
  for (int h : s.hidden) w.push_back(h);
  w.push_back(s.out_dim);
  return w;
}

}  // namespace

Vec MlpProblem::forward(int task, const Vec& theta, const Vec& x) const {
  if (theta.size() != spec_.param_count()) {
    throw DimensionMismatch("MlpProblem: theta size != param_count");
  }
  const auto widths = layer_widths(spec_);
  Vec act(spec_.input_width());
  act.head(spec_.in_dim) = x;
  act.tail(spec_.num_tasks).setZero();
  act[spec_.in_dim + task] = 1.0;  // one-hot task encoding

  const double* p = theta.data();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int win = widths[l];
    const int wout = widths[l + 1];
    ConstW W(p, wout, win);
    p += wout * win;
    Eigen::Map<const Vec> b(p, wout);
    p += wout;
    Vec z = W * act + b;
    const bool last = (l + 2 == widths.size());
    act = last ? z : z.array().tanh().matrix();
  }
  return act;
}

namespace {

// shared forward+backward over a sample list; returns (loss, grad) with grad
// optional to let loss-only evaluation skip the backward pass
double mlp_eval(const MlpSpec& spec, const TaskDataset& data, int task,
                const Vec& theta, const std::vector<int>& idx, Vec* grad_out) {
  if (theta.size() != spec.param_count()) {
    throw DimensionMismatch("MlpProblem: theta size != param_count");
  }
  const auto widths = layer_widths(spec);
  const std::size_t layers = widths.size() - 1;
  const double m = static_cast<double>(idx.size());

  if (grad_out) grad_out->setZero();
  double total = 0.0;

  std::vector<Vec> acts(layers + 1);
  for (int sample : idx) {
    const Vec& x = data.x[static_cast<std::size_t>(sample)];
    const Vec& y = data.y[static_cast<std::size_t>(sample)];

    acts[0] = Vec(spec.input_width());
    acts[0].head(spec.in_dim) = x;
    acts[0].tail(spec.num_tasks).setZero();
    acts[0][spec.in_dim + task] = 1.0;

    const double* p = theta.data();
    for (std::size_t l = 0; l < layers; ++l) {
      const int win = widths[l];
      const int wout = widths[l + 1];
      ConstW W(p, wout, win);
      p += wout * win;
      Eigen::Map<const Vec> b(p, wout);
      p += wout;
      Vec z = W * acts[l] + b;
      acts[l + 1] = (l + 1 == layers) ? z : z.array().tanh().matrix();
    }

    const Vec err = acts[layers] - y;
    total += err.squaredNorm() / m;

    if (!grad_out) continue;

    // backward: delta starts at d(loss)/d(output)
    Vec delta = (2.0 / m) * err;
    // walk layers from last to first; recompute flat offsets per layer
    for (std::size_t l = layers; l-- > 0;) {
      int offset = 0;
      for (std::size_t k = 0; k < l; ++k) {
        offset += widths[k + 1] * widths[k] + widths[k + 1];
      }
      const int win = widths[l];
      const int wout = widths[l + 1];
      ConstW W(theta.data() + offset, wout, win);
      MutW gW(grad_out->data() + offset, wout, win);
      Eigen::Map<Vec> gb(grad_out->data() + offset + wout * win, wout);

      gW.noalias() += delta * acts[l].transpose();
      gb += delta;
      if (l > 0) {
        Vec back = W.transpose() * delta;
        // tanh'(z) = 1 - tanh(z)^2, and acts[l] stores tanh(z)
        delta = back.cwiseProduct(Vec::Ones(win) - acts[l].cwiseProduct(acts[l]));
      }
    }
  }
  return total;
}

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

}  // namespace

double MlpProblem::loss(int task, const Vec& theta) const {
  const auto& d = data_[static_cast<std::size_t>(task)];
  return mlp_eval(spec_, d, task, theta, all_indices(d.x.size()), nullptr);
}

Vec MlpProblem::grad(int task, const Vec& theta) const {
  const auto& d = data_[static_cast<std::size_t>(task)];
  Vec g(spec_.param_count());
  mlp_eval(spec_, d, task, theta, all_indices(d.x.size()), &g);
  return g;
}

double MlpProblem::batch_loss(int task, const Vec& theta,
                              const std::vector<int>& idx) const {
  return mlp_eval(spec_, data_[static_cast<std::size_t>(task)], task, theta, idx, nullptr);
}

Vec MlpProblem::batch_grad(int task, const Vec& theta,
                           const std::vector<int>& idx) const {
  Vec g(spec_.param_count());
  mlp_eval(spec_, data_[static_cast<std::size_t>(task)], task, theta, idx, &g);
  return g;
}

// ---------------------------------------------------------------------------

std::vector<TaskDataset> load_csv_dataset(const std::string& path, int num_tasks) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open dataset: " + path);
  std::vector<TaskDataset> data(static_cast<std::size_t>(num_tasks));
  std::string line;
  int cols = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (first) {
      first = false;
      // allow a header row
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;
    }
    if (cols == -1) {
      cols = static_cast<int>(fields.size());
      if (cols < 3) throw DataFormatError("dataset needs >= 3 columns (features, target, task_id)");
    } else if (static_cast<int>(fields.size()) != cols) {
      throw DataFormatError("ragged dataset row");
    }
    const int in_dim = cols - 2;
    Vec x(in_dim);
    for (int i = 0; i < in_dim; ++i) x[i] = std::stod(fields[static_cast<std::size_t>(i)]);
    Vec y(1);
    y[0] = std::stod(fields[static_cast<std::size_t>(cols - 2)]);
    const int task = static_cast<int>(std::stol(fields[static_cast<std::size_t>(cols - 1)]));
    if (task < 0 || task >= num_tasks) {
      throw DataFormatError("task_id out of range: " + std::to_string(task));
    }
    data[static_cast<std::size_t>(task)].x.push_back(std::move(x));
    data[static_cast<std::size_t>(task)].y.push_back(std::move(y));
  }
  for (const auto& d : data) {
    if (d.x.empty()) throw DataFormatError("dataset has an empty task");
  }
  return data;
}

void save_csv_dataset(const std::string& path, const std::vector<TaskDataset>& data) {
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot write dataset: " + path);
  if (data.empty() || data[0].x.empty()) throw DataFormatError("empty dataset");
  const Eigen::Index in_dim = data[0].x[0].size();
  for (Eigen::Index i = 0; i < in_dim; ++i) out << "f" << i << ",";
  out << "target,task_id\n";
  char buf[64];
  for (std::size_t t = 0; t < data.size(); ++t) {
    for (std::size_t k = 0; k < data[t].x.size(); ++k) {
      for (Eigen::Index i = 0; i < in_dim; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", data[t].x[k][i]);
        out << buf << ",";
      }
      std::snprintf(buf, sizeof(buf), "%.17g", data[t].y[k][0]);
      out << buf << "," << t << "\n";
    }
  }
}

std::vector<TaskDataset> opposed_regression_dataset(std::uint64_t seed, int samples,
                                                    int in_dim) {
  rng::SplitMix64 r(rng::derive(seed, {0x6f707273ull /*'oprs'*/}));
  Vec w(in_dim);
  for (int i = 0; i < in_dim; ++i) w[i] = r.normal();
  w.normalize();
  std::vector<TaskDataset> data(2);
  for (int k = 0; k < samples; ++k) {
    Vec x(in_dim);
    for (int i = 0; i < in_dim; ++i) x[i] = r.normal();
    Vec y(1);
    y[0] = w.dot(x);
    data[0].x.push_back(x);
    data[0].y.push_back(y);
    y[0] = -y[0];
    data[1].x.push_back(std::move(x));
    data[1].y.push_back(std::move(y));
  }
  return data;
}

}  // namespace pcgrad
