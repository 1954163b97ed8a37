#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pcgrad/surgery.hpp"

namespace pcgrad {

// One recorded iteration: triad diagnostics plus losses.
struct LogRow {
  TriadSample triad;
  std::vector<double> task_losses;
  double loss_total = 0.0;
};

// Per-run capture. The header seed fully determines the run (replay);
// parameter snapshots are kept separate from the per-iteration rows and
// written to their own file at the configured cadence.
struct RunLog {
  std::string problem_id;
  std::string method_id;
  std::string optimizer_id;
  std::uint64_t seed = 0;
  std::int64_t snapshot_every = 100;
  std::map<std::string, std::string> hyperparams;  // ordered -> stable output

  std::vector<LogRow> rows;
  std::vector<std::pair<std::int64_t, Vec>> theta_snapshots;

  // state after the last step (rows hold pre-step states)
  std::vector<double> final_task_losses;
  double final_loss_total = 0.0;
  bool has_final = false;

  void record(LogRow row);           // enforces strictly increasing iteration
  void snapshot(std::int64_t iter, const Vec& theta);
};

// 17-significant-digit decimal: round-trip exact for 64-bit floats.
std::string format_double(double v);

// Columns: iter, loss_total, loss_task_0..loss_task_{n-1}, cos_min, cos_mean,
// pct_conflicting, phi_min, curvature_est, cond_a_frac, xi_le1_frac.
void write_csv(const RunLog& log, const std::string& path);

// Companion file: iter, theta_0..theta_{n-1}.
void write_theta_csv(const RunLog& log, const std::string& path);

// Deterministic run summary (final losses, iteration count, config echo).
// Wall time deliberately lives outside this file; see the CLI --timing flag.
void write_summary_json(const RunLog& log, const std::string& path,
                        const std::map<std::string, std::string>& extra = {});

// Parse-back used by round-trip tests.
std::vector<std::vector<double>> read_csv_numeric(const std::string& path);

}  // namespace pcgrad
