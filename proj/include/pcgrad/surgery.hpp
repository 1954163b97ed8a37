#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgrad/vecmath.hpp"

namespace pcgrad {

// Per-task gradients g_1..g_n at one parameter point.
struct TaskGradients {
  std::vector<Vec> grads;
  std::vector<std::string> task_ids;  // optional labels; filled with indices if empty

  TaskGradients() = default;
  explicit TaskGradients(std::vector<Vec> g, std::vector<std::string> ids = {});

  int num_tasks() const { return static_cast<int>(grads.size()); }
  Eigen::Index dimension() const { return grads.empty() ? 0 : grads[0].size(); }
  Vec sum() const;
};

// One ordered pair (i <- j): cos is the pre-surgery cos(g_i, g_j); projected
// says whether task i's working gradient was projected against g_j when j
// came up in i's visiting order.
struct PairStat {
  int i = 0;
  int j = 0;
  double cos_phi = 0.0;  // NaN when either norm is degenerate
  bool projected = false;
};

struct SurgeryOutcome {
  std::vector<Vec> modified;            // g_i^pc per task
  Vec update;                           // sum of modified
  std::vector<PairStat> pair_stats;     // all ordered pairs i != j
  std::vector<std::vector<int>> order_used;  // visiting order of j per task i
};

// One iteration's conflict/magnitude/curvature diagnostics. Pairwise lists
// run over unordered pairs (i < j) in lexicographic order.
struct TriadSample {
  std::int64_t iteration = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> cos_phi;        // NaN for degenerate pairs
  std::vector<double> phi_similarity; // NaN for degenerate pairs
  std::vector<bool> cond_a_flag;      // cos <= -phi
  std::vector<bool> xi_le_one_flag;   // xi <= 1 (false when xi undefined)
  std::vector<bool> degenerate;       // either norm <= eps: excluded from fractions
  std::vector<bool> xi_defined;       // sum norm > eps
  double pct_conflicting = 0.0;       // #(cos<0) / #valid pairs (0 if no valid pairs)
  double curvature_est = 0.0;         // 2 (L_after - L_before - grad.step)

  double cos_min() const;
  double cos_mean() const;
  double phi_min() const;
  double cond_a_frac() const;
  double xi_le1_frac() const;
};

// Projecting-conflicting-gradients update. For each task i the working copy
// starts at g_i and is projected out of every conflicting g_j, visiting the
// other tasks in a random order drawn from a sub-seed of (seed, i).
// Zero-norm task gradients pass through unchanged and are skipped as
// projection targets. Deterministic given (grads, seed).
SurgeryOutcome pcgrad(const TaskGradients& grads, std::uint64_t seed);

// Two-task identity: (1 - cos/R) g1 + (1 - cos R) g2 for cos < 0 with
// R = |g1|/|g2|; plain sum otherwise. Matches pcgrad on two tasks.
Vec two_task_closed_form(const Vec& g1, const Vec& g2);

// 2|g1||g2| / (|g1|^2 + |g2|^2), in (0, 1], 1 iff equal norms.
double magnitude_similarity(const Vec& g1, const Vec& g2);

// xi = (1 - cos^2) |g1-g2|^2 / |g1+g2|^2; DegenerateSum at exact opposition.
double curvature_bounding_measure(const Vec& g1, const Vec& g2);

// Ablations: surgery direction with original magnitude, and vice versa.
Vec direction_only_variant(const TaskGradients& grads, std::uint64_t seed);
Vec magnitude_only_variant(const TaskGradients& grads, std::uint64_t seed);

TriadSample triad_diagnostics(const TaskGradients& grads, double loss_before,
                              double loss_after, double grad_dot_step,
                              std::int64_t iteration);

}  // namespace pcgrad
