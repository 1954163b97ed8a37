#include "pcgrad/telemetry.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pcgrad {

void RunLog::record(LogRow row) {
  if (!rows.empty() && row.triad.iteration <= rows.back().triad.iteration) {
    throw OutOfOrderIteration("record: iteration " +
                              std::to_string(row.triad.iteration) +
                              " not after " +
                              std::to_string(rows.back().triad.iteration));
  }
  rows.push_back(std::move(row));
}

void RunLog::snapshot(std::int64_t iter, const Vec& theta) {
  theta_snapshots.emplace_back(iter, theta);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const RunLog& log, const std::string& path) {
  if (log.rows.empty()) throw Error("write_csv: empty log");
  std::ofstream out(path);
  if (!out) throw Error("write_csv: cannot open " + path);

  const std::size_t n_tasks = log.rows[0].task_losses.size();
  out << "iter,loss_total";
  for (std::size_t i = 0; i < n_tasks; ++i) out << ",loss_task_" << i;
  out << ",cos_min,cos_mean,pct_conflicting,phi_min,curvature_est,cond_a_frac,xi_le1_frac\n";

  for (const auto& row : log.rows) {
    out << row.triad.iteration << ',' << format_double(row.loss_total);
    for (double l : row.task_losses) out << ',' << format_double(l);
    out << ',' << format_double(row.triad.cos_min());
    out << ',' << format_double(row.triad.cos_mean());
    out << ',' << format_double(row.triad.pct_conflicting);
    out << ',' << format_double(row.triad.phi_min());
    out << ',' << format_double(row.triad.curvature_est);
    out << ',' << format_double(row.triad.cond_a_frac());
    out << ',' << format_double(row.triad.xi_le1_frac());
    out << '\n';
  }
  if (!out) throw Error("write_csv: write failure on " + path);
}

void write_theta_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_theta_csv: cannot open " + path);
  if (log.theta_snapshots.empty()) throw Error("write_theta_csv: no snapshots");
  const Eigen::Index dim = log.theta_snapshots[0].second.size();
  out << "iter";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",theta_" << i;
  out << '\n';
  for (const auto& [iter, theta] : log.theta_snapshots) {
    out << iter;
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << format_double(theta[i]);
    out << '\n';
  }
}

void write_summary_json(const RunLog& log, const std::string& path,
                        const std::map<std::string, std::string>& extra) {
  nlohmann::ordered_json j;
  j["problem"] = log.problem_id;
  j["method"] = log.method_id;
  j["optimizer"] = log.optimizer_id;
  j["seed"] = log.seed;
  j["snapshot_every"] = log.snapshot_every;
  j["hyperparams"] = log.hyperparams;
  j["iterations"] = log.rows.empty() ? 0 : log.rows.back().triad.iteration + 1;
  if (log.has_final) {
    j["final"]["loss_total"] = log.final_loss_total;
    for (std::size_t i = 0; i < log.final_task_losses.size(); ++i) {
      j["final"]["loss_task_" + std::to_string(i)] = log.final_task_losses[i];
    }
  } else if (!log.rows.empty()) {
    const auto& last = log.rows.back();
    j["final"]["loss_total"] = last.loss_total;
    for (std::size_t i = 0; i < last.task_losses.size(); ++i) {
      j["final"]["loss_task_" + std::to_string(i)] = last.task_losses[i];
    }
  }
  if (!log.theta_snapshots.empty()) {
    const auto& [iter, theta] = log.theta_snapshots.back();
    j["final"]["theta_iter"] = iter;
    auto& arr = j["final"]["theta"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < theta.size(); ++i) arr.push_back(theta[i]);
  }
  for (const auto& [k, v] : extra) j[k] = v;
  std::ofstream out(path);
  if (!out) throw Error("write_summary_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

std::vector<std::vector<double>> read_csv_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_csv_numeric: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pcgrad
