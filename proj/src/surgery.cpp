#include "pcgrad/surgery.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "pcgrad/rng.hpp"

namespace pcgrad {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TaskGradients::TaskGradients(std::vector<Vec> g, std::vector<std::string> ids)
    : grads(std::move(g)), task_ids(std::move(ids)) {
  if (grads.empty()) throw DimensionMismatch("TaskGradients: need at least one task");
  const Eigen::Index dim = grads[0].size();
  if (dim < 1) throw DimensionMismatch("TaskGradients: dimension must be >= 1");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != dim) {
      throw DimensionMismatch("TaskGradients: task " + std::to_string(i) +
                              " has mismatched dimension");
    }
    require_finite(grads[i], "TaskGradients task " + std::to_string(i));
  }
  if (task_ids.empty()) {
    for (std::size_t i = 0; i < grads.size(); ++i) task_ids.push_back(std::to_string(i));
  } else if (task_ids.size() != grads.size()) {
    throw DimensionMismatch("TaskGradients: task_ids length mismatch");
  }
}

Vec TaskGradients::sum() const {
  Vec s = Vec::Zero(dimension());
  for (const auto& g : grads) s += g;
  return s;
}

SurgeryOutcome pcgrad(const TaskGradients& grads, std::uint64_t seed) {
  const int n = grads.num_tasks();
  const Eigen::Index dim = grads.dimension();

  std::vector<double> norms(n);
  for (int i = 0; i < n; ++i) norms[i] = grads.grads[i].norm();

  SurgeryOutcome out;
  out.modified.reserve(n);
  out.order_used.assign(n, {});

  // pre-surgery pairwise cosines, ordered pairs
  std::vector<std::vector<double>> cos_pre(n, std::vector<double>(n, kNaN));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (norms[i] > kNormEpsilon && norms[j] > kNormEpsilon) {
        cos_pre[i][j] = cosine(grads.grads[i], grads.grads[j]);
      }
    }
  }

  std::vector<std::vector<bool>> fired(n, std::vector<bool>(n, false));

  for (int i = 0; i < n; ++i) {
    Vec g = grads.grads[i];

    std::vector<int> order;
    order.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    rng::SplitMix64 r(rng::derive(seed, {0x70636772ull /*'pcgr'*/, static_cast<std::uint64_t>(i)}));
    rng::shuffle(order, r);
    out.order_used[i] = order;

    for (int j : order) {
      if (norms[j] <= kNormEpsilon) continue;  // skipped as projection target
      const double d = g.dot(grads.grads[j]);
      if (d < 0.0) {
        g -= (d / (norms[j] * norms[j])) * grads.grads[j];
        fired[i][j] = true;
      }
    }
    out.modified.push_back(std::move(g));
  }

  out.update = Vec::Zero(dim);
  for (const auto& g : out.modified) out.update += g;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.pair_stats.push_back({i, j, cos_pre[i][j], fired[i][j]});
    }
  }
  return out;
}

Vec two_task_closed_form(const Vec& g1, const Vec& g2) {
  require_same_dim(g1, g2, "two_task_closed_form");
  const double n1 = g1.norm();
  const double n2 = g2.norm();
  if (n1 <= kNormEpsilon || n2 <= kNormEpsilon) {
    throw DegenerateGradient("two_task_closed_form: near-zero norm");
  }
  const double c = cosine(g1, g2);
  if (c >= 0.0) return g1 + g2;
  const double R = n1 / n2;
  return (1.0 - c / R) * g1 + (1.0 - c * R) * g2;
}

double magnitude_similarity(const Vec& g1, const Vec& g2) {
  require_same_dim(g1, g2, "magnitude_similarity");
  const double n1 = g1.norm();
  const double n2 = g2.norm();
  if (n1 <= kNormEpsilon || n2 <= kNormEpsilon) {
    throw DegenerateGradient("magnitude_similarity: near-zero norm");
  }
  return 2.0 * n1 * n2 / (n1 * n1 + n2 * n2);
}

double curvature_bounding_measure(const Vec& g1, const Vec& g2) {
  require_same_dim(g1, g2, "curvature_bounding_measure");
  const double n1 = g1.norm();
  const double n2 = g2.norm();
  if (n1 <= kNormEpsilon || n2 <= kNormEpsilon) {
    throw DegenerateGradient("curvature_bounding_measure: near-zero norm");
  }
  const double sum2 = (g1 + g2).squaredNorm();
  if (std::sqrt(sum2) <= kNormEpsilon) {
    throw DegenerateSum("curvature_bounding_measure: undefined at exact opposition");
  }
  const double c = cosine(g1, g2);
  return (1.0 - c * c) * (g1 - g2).squaredNorm() / sum2;
}

Vec direction_only_variant(const TaskGradients& grads, std::uint64_t seed) {
  const Vec g = grads.sum();
  const Vec upd = pcgrad(grads, seed).update;
  const double ng = g.norm();
  const double nu = upd.norm();
  if (ng <= kNormEpsilon || nu <= kNormEpsilon) {
    throw DegenerateGradient("direction_only_variant: near-zero norm");
  }
  return upd * (ng / nu);
}

Vec magnitude_only_variant(const TaskGradients& grads, std::uint64_t seed) {
  const Vec g = grads.sum();
  const Vec upd = pcgrad(grads, seed).update;
  const double ng = g.norm();
  const double nu = upd.norm();
  if (ng <= kNormEpsilon || nu <= kNormEpsilon) {
    throw DegenerateGradient("magnitude_only_variant: near-zero norm");
  }
  return g * (nu / ng);
}

double TriadSample::cos_min() const {
  double m = kNaN;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (degenerate[p]) continue;
    if (std::isnan(m) || cos_phi[p] < m) m = cos_phi[p];
  }
  return m;
}

double TriadSample::cos_mean() const {
  double s = 0.0;
  int k = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (degenerate[p]) continue;
    s += cos_phi[p];
    ++k;
  }
  return k == 0 ? kNaN : s / k;
}

double TriadSample::phi_min() const {
  double m = kNaN;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (degenerate[p]) continue;
    if (std::isnan(m) || phi_similarity[p] < m) m = phi_similarity[p];
  }
  return m;
}

double TriadSample::cond_a_frac() const {
  int k = 0, hits = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (degenerate[p]) continue;
    ++k;
    if (cond_a_flag[p]) ++hits;
  }
  return k == 0 ? 0.0 : static_cast<double>(hits) / k;
}

double TriadSample::xi_le1_frac() const {
  int k = 0, hits = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (degenerate[p] || !xi_defined[p]) continue;
    ++k;
    if (xi_le_one_flag[p]) ++hits;
  }
  return k == 0 ? 0.0 : static_cast<double>(hits) / k;
}

TriadSample triad_diagnostics(const TaskGradients& grads, double loss_before,
                              double loss_after, double grad_dot_step,
                              std::int64_t iteration) {
  TriadSample s;
  s.iteration = iteration;
  s.curvature_est = 2.0 * (loss_after - loss_before - grad_dot_step);

  const int n = grads.num_tasks();
  int valid = 0, conflicting = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      s.pairs.emplace_back(i, j);
      const Vec& a = grads.grads[i];
      const Vec& b = grads.grads[j];
      const bool degenerate =
          a.norm() <= kNormEpsilon || b.norm() <= kNormEpsilon;
      s.degenerate.push_back(degenerate);
      if (degenerate) {
        s.cos_phi.push_back(kNaN);
        s.phi_similarity.push_back(kNaN);
        s.cond_a_flag.push_back(false);
        s.xi_le_one_flag.push_back(false);
        s.xi_defined.push_back(false);
        continue;
      }
      const double c = cosine(a, b);
      const double phi = magnitude_similarity(a, b);
      s.cos_phi.push_back(c);
      s.phi_similarity.push_back(phi);
      s.cond_a_flag.push_back(c <= -phi);
      ++valid;
      if (c < 0.0) ++conflicting;
      const double sum_norm = (a + b).norm();
      if (sum_norm <= kNormEpsilon) {
        s.xi_defined.push_back(false);
        s.xi_le_one_flag.push_back(false);
      } else {
        s.xi_defined.push_back(true);
        s.xi_le_one_flag.push_back(curvature_bounding_measure(a, b) <= 1.0);
      }
    }
  }
  s.pct_conflicting = valid == 0 ? 0.0 : static_cast<double>(conflicting) / valid;
  return s;
}

}  // namespace pcgrad
