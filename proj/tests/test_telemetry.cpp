#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgrad/surgery.hpp"
#include "pcgrad/telemetry.hpp"
#include "test_support.hpp"

using namespace pcgrad;
using test_support::slurp;
using test_support::vec;

namespace {

LogRow minimal_row(std::int64_t iter, double loss) {
  LogRow row;
  row.triad = triad_diagnostics(TaskGradients({vec({1, 0}), vec({0, 1})}), 0, 0, 0, iter);
  row.task_losses = {loss * 0.25, loss * 0.75};
  row.loss_total = loss;
  return row;
}

bool same_bits(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b && std::signbit(a) == std::signbit(b);
}

}  // namespace

TEST_CASE("record enforces strictly increasing iterations") {
  RunLog log;
  log.record(minimal_row(0, 1.0));
  CHECK(log.rows.size() == 1);
  CHECK_THROWS_AS(log.record(minimal_row(0, 1.0)), OutOfOrderIteration);
  CHECK_THROWS_AS(log.record(minimal_row(-3, 1.0)), OutOfOrderIteration);
  log.record(minimal_row(7, 2.0));
  CHECK(log.rows.size() == 2);

  RunLog bulk;
  for (int i = 0; i < 100000; ++i) bulk.rows.push_back(minimal_row(i, 0.0));
  CHECK(bulk.rows.size() == 100000);
  CHECK(bulk.rows.back().triad.iteration == 99999);
}

TEST_CASE("format_double survives a round trip for adversarial values") {
  const double cases[] = {0.1,
                          1.0 / 3.0,
                          3.141592653589793,
                          -0.0,
                          0.0,
                          1e308,
                          -1e308,
                          5e-324,
                          2.2250738585072014e-308,
                          1.7976931348623157e308,
                          -549.27326904885782,
                          std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::quiet_NaN()};
  for (double v : cases) {
    const double back = std::strtod(format_double(v).c_str(), nullptr);
    CHECK_MESSAGE(same_bits(v, back), "value " << format_double(v));
  }
}

TEST_CASE("csv writing: header shape, row count, lossless round trip") {
  const std::string path = "test_telemetry_roundtrip.csv";
  RunLog log;
  log.record(minimal_row(0, 1.0 / 3.0));

  SUBCASE("one-row log gives header plus one line") {
    write_csv(log, path);
    const std::string text = slurp(path);
    CHECK(text ==
          "iter,loss_total,loss_task_0,loss_task_1,cos_min,cos_mean,pct_conflicting,"
          "phi_min,curvature_est,cond_a_frac,xi_le1_frac\n"
          "0,0.33333333333333331,0.083333333333333329,0.25,0,0,0,1,0,0,1\n");
  }

  SUBCASE("adversarial values round-trip exactly, including nan and inf") {
    LogRow wild = minimal_row(5, -549.27326904885782);
    wild.task_losses = {1e300, 5e-324};
    wild.triad.curvature_est = std::numeric_limits<double>::infinity();
    log.record(std::move(wild));
    // a row whose pairs are all degenerate writes nan statistics
    LogRow nan_row;
    nan_row.triad = triad_diagnostics(TaskGradients({vec({0, 0}), vec({0, 0})}), 0, 0, 0, 9);
    nan_row.task_losses = {0.1, 0.2};
    nan_row.loss_total = 0.1 + 0.2;
    log.record(std::move(nan_row));

    write_csv(log, path);
    const auto rows = read_csv_numeric(path);
    REQUIRE(rows.size() == log.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& mem = log.rows[i];
      REQUIRE(rows[i].size() == 11);
      CHECK(rows[i][0] == static_cast<double>(mem.triad.iteration));
      CHECK(same_bits(rows[i][1], mem.loss_total));
      CHECK(same_bits(rows[i][2], mem.task_losses[0]));
      CHECK(same_bits(rows[i][3], mem.task_losses[1]));
      CHECK(same_bits(rows[i][4], mem.triad.cos_min()));
      CHECK(same_bits(rows[i][5], mem.triad.cos_mean()));
      CHECK(same_bits(rows[i][6], mem.triad.pct_conflicting));
      CHECK(same_bits(rows[i][7], mem.triad.phi_min()));
      CHECK(same_bits(rows[i][8], mem.triad.curvature_est));
      CHECK(same_bits(rows[i][9], mem.triad.cond_a_frac()));
      CHECK(same_bits(rows[i][10], mem.triad.xi_le1_frac()));
    }
  }

  SUBCASE("identical logs serialize to identical bytes") {
    write_csv(log, path);
    const std::string once = slurp(path);
    write_csv(log, path);
    CHECK(slurp(path) == once);
  }

  std::remove(path.c_str());
}

TEST_CASE("csv writing: error paths") {
  RunLog empty;
  CHECK_THROWS_AS(write_csv(empty, "unused.csv"), Error);
  CHECK_THROWS_AS(write_theta_csv(empty, "unused.csv"), Error);
  RunLog log;
  log.record(minimal_row(0, 1.0));
  CHECK_THROWS_AS(write_csv(log, "no_such_dir/x.csv"), Error);
  CHECK_THROWS_AS(read_csv_numeric("no_such_file.csv"), Error);
}

TEST_CASE("theta snapshots round-trip through their own file") {
  const std::string path = "test_telemetry_theta.csv";
  RunLog log;
  log.snapshot(0, vec({0.5, -3.0}));
  log.snapshot(100, vec({1.0 / 3.0, 1e-12}));
  write_theta_csv(log, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("iter,theta_0,theta_1\n", 0) == 0);
  const auto rows = read_csv_numeric(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == 0.0);
  CHECK(same_bits(rows[0][1], 0.5));
  CHECK(same_bits(rows[0][2], -3.0));
  CHECK(rows[1][0] == 100.0);
  CHECK(same_bits(rows[1][1], 1.0 / 3.0));
  CHECK(same_bits(rows[1][2], 1e-12));
  std::remove(path.c_str());
}

TEST_CASE("summary json: deterministic bytes and expected fields") {
  const std::string path = "test_telemetry_summary.json";
  RunLog log;
  log.problem_id = "didactic2d";
  log.method_id = "pcgrad";
  log.optimizer_id = "adam";
  log.seed = 42;
  log.hyperparams["lr"] = "0.001";
  log.record(minimal_row(0, 3.0));
  log.record(minimal_row(1, 2.5));
  log.final_task_losses = {1.0, 0.5};
  log.final_loss_total = 1.5;
  log.has_final = true;
  log.snapshot(1, vec({0.25, 0.75}));

  write_summary_json(log, path, {{"note", "unit"}});
  const std::string once = slurp(path);
  write_summary_json(log, path, {{"note", "unit"}});
  CHECK(slurp(path) == once);

  const auto j = nlohmann::json::parse(once);
  CHECK(j["problem"] == "didactic2d");
  CHECK(j["method"] == "pcgrad");
  CHECK(j["optimizer"] == "adam");
  CHECK(j["seed"] == 42);
  CHECK(j["iterations"] == 2);
  CHECK(j["hyperparams"]["lr"] == "0.001");
  CHECK(j["final"]["loss_total"] == 1.5);
  CHECK(j["final"]["loss_task_1"] == 0.5);
  CHECK(j["final"]["theta_iter"] == 1);
  CHECK(j["note"] == "unit");
  std::remove(path.c_str());
}
