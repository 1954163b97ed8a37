// Python bindings: surgery operations, bundled problems, the training runner,
// and the verification sweeps. Parameter vectors cross the boundary as numpy
// arrays; reports can be serialized with .json() for downstream tooling.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcgrad/optim.hpp"
#include "pcgrad/problems.hpp"
#include "pcgrad/runner.hpp"
#include "pcgrad/surgery.hpp"
#include "pcgrad/telemetry.hpp"
#include "pcgrad/vecmath.hpp"
#include "pcgrad/verify.hpp"

namespace py = pybind11;
using namespace pcgrad;

PYBIND11_MODULE(pcgrad_py, m) {
  m.doc() = "Conflicting-gradient surgery: projection ops, problems, runner, verifier";

  py::register_exception<Error>(m, "PcgradError");

  // -- vector helpers -------------------------------------------------------
  m.def("cosine", &cosine, py::arg("a"), py::arg("b"),
        "cos(a, b) clamped to [-1, 1]; raises on degenerate norms");
  m.def("project_out", &project_out, py::arg("g"), py::arg("onto"),
        "g minus its projection onto `onto`");

  // -- surgery --------------------------------------------------------------
  py::class_<TaskGradients>(m, "TaskGradients")
      .def(py::init<std::vector<Vec>, std::vector<std::string>>(), py::arg("grads"),
           py::arg("task_ids") = std::vector<std::string>{})
      .def_readonly("grads", &TaskGradients::grads)
      .def_readonly("task_ids", &TaskGradients::task_ids)
      .def("num_tasks", &TaskGradients::num_tasks)
      .def("dimension", &TaskGradients::dimension)
      .def("sum", &TaskGradients::sum);

  py::class_<PairStat>(m, "PairStat")
      .def_readonly("i", &PairStat::i)
      .def_readonly("j", &PairStat::j)
      .def_readonly("cos_phi", &PairStat::cos_phi)
      .def_readonly("projected", &PairStat::projected);

  py::class_<SurgeryOutcome>(m, "SurgeryOutcome")
      .def_readonly("modified", &SurgeryOutcome::modified)
      .def_readonly("update", &SurgeryOutcome::update)
      .def_readonly("pair_stats", &SurgeryOutcome::pair_stats)
      .def_readonly("order_used", &SurgeryOutcome::order_used);

  py::class_<TriadSample>(m, "TriadSample")
      .def_readonly("iteration", &TriadSample::iteration)
      .def_readonly("pairs", &TriadSample::pairs)
      .def_readonly("cos_phi", &TriadSample::cos_phi)
      .def_readonly("phi_similarity", &TriadSample::phi_similarity)
      .def_readonly("pct_conflicting", &TriadSample::pct_conflicting)
      .def_readonly("curvature_est", &TriadSample::curvature_est)
      .def("cos_min", &TriadSample::cos_min)
      .def("cos_mean", &TriadSample::cos_mean)
      .def("phi_min", &TriadSample::phi_min)
      .def("cond_a_frac", &TriadSample::cond_a_frac)
      .def("xi_le1_frac", &TriadSample::xi_le1_frac);

  m.def("pcgrad", &pcgrad::pcgrad, py::arg("grads"), py::arg("seed"),
        "Project each task gradient out of the conflicting others");
  m.def("two_task_closed_form", &two_task_closed_form, py::arg("g1"), py::arg("g2"));
  m.def("magnitude_similarity", &magnitude_similarity, py::arg("g1"), py::arg("g2"));
  m.def("curvature_bounding_measure", &curvature_bounding_measure, py::arg("g1"),
        py::arg("g2"));
  m.def("direction_only_variant", &direction_only_variant, py::arg("grads"),
        py::arg("seed"));
  m.def("magnitude_only_variant", &magnitude_only_variant, py::arg("grads"),
        py::arg("seed"));
  m.def("triad_diagnostics", &triad_diagnostics, py::arg("grads"),
        py::arg("loss_before"), py::arg("loss_after"), py::arg("grad_dot_step"),
        py::arg("iteration"));

  // -- problems -------------------------------------------------------------
  py::class_<MultiTaskProblem>(m, "MultiTaskProblem")
      .def("id", &MultiTaskProblem::id)
      .def("dimension", &MultiTaskProblem::dimension)
      .def("num_tasks", &MultiTaskProblem::num_tasks)
      .def("loss", &MultiTaskProblem::loss, py::arg("task"), py::arg("theta"))
      .def("grad", &MultiTaskProblem::grad, py::arg("task"), py::arg("theta"))
      .def("total_loss", &MultiTaskProblem::total_loss, py::arg("theta"))
      .def("total_grad", &MultiTaskProblem::total_grad, py::arg("theta"))
      .def("gradients", &MultiTaskProblem::gradients, py::arg("theta"))
      .def("lipschitz_total", &MultiTaskProblem::lipschitz_total)
      .def("loss_floor", &MultiTaskProblem::loss_floor);

  py::class_<Didactic2d, MultiTaskProblem>(m, "Didactic2d")
      .def(py::init<>())
      .def_static("default_init", &Didactic2d::default_init);

  py::class_<QuadraticTask>(m, "QuadraticTask")
      .def(py::init<>())
      .def_readwrite("A", &QuadraticTask::A)
      .def_readwrite("center", &QuadraticTask::center)
      .def_readwrite("mu", &QuadraticTask::mu)
      .def_readwrite("lam", &QuadraticTask::lam);

  py::class_<QuadraticProblem, MultiTaskProblem>(m, "QuadraticProblem")
      .def(py::init<std::vector<QuadraticTask>, std::string>(), py::arg("tasks"),
           py::arg("id") = std::string("quadratic"))
      .def("task", &QuadraticProblem::task, py::arg("i"),
           py::return_value_policy::reference_internal)
      .def("total_hessian", &QuadraticProblem::total_hessian,
           py::return_value_policy::reference_internal)
      .def("lambda_min_total", &QuadraticProblem::lambda_min_total)
      .def("total_minimizer", &QuadraticProblem::total_minimizer);

  py::class_<SineQuadraticProblem, MultiTaskProblem>(m, "SineQuadraticProblem");

  m.def("quadratic_family", &quadratic_family, py::arg("seed"), py::arg("dim"),
        py::arg("num_tasks"), py::arg("mu"), py::arg("lam"));
  m.def("quadratic_family_shared_center", &quadratic_family_shared_center,
        py::arg("seed"), py::arg("dim"), py::arg("num_tasks"), py::arg("mu"),
        py::arg("lam"));
  m.def("sine_quadratic_family", &sine_quadratic_family, py::arg("seed"),
        py::arg("dim"), py::arg("num_tasks"));

  py::class_<MlpSpec>(m, "MlpSpec")
      .def(py::init<>())
      .def_readwrite("in_dim", &MlpSpec::in_dim)
      .def_readwrite("hidden", &MlpSpec::hidden)
      .def_readwrite("out_dim", &MlpSpec::out_dim)
      .def_readwrite("num_tasks", &MlpSpec::num_tasks)
      .def("input_width", &MlpSpec::input_width)
      .def("param_count", &MlpSpec::param_count);

  py::class_<TaskDataset>(m, "TaskDataset")
      .def(py::init<>())
      .def_readwrite("x", &TaskDataset::x)
      .def_readwrite("y", &TaskDataset::y);

  py::class_<MlpProblem, MultiTaskProblem>(m, "MlpProblem")
      .def(py::init<MlpSpec, std::vector<TaskDataset>>(), py::arg("spec"),
           py::arg("data"))
      .def("batch_loss", &MlpProblem::batch_loss, py::arg("task"), py::arg("theta"),
           py::arg("idx"))
      .def("batch_grad", &MlpProblem::batch_grad, py::arg("task"), py::arg("theta"),
           py::arg("idx"))
      .def("forward", &MlpProblem::forward, py::arg("task"), py::arg("theta"),
           py::arg("x"))
      .def("spec", &MlpProblem::spec, py::return_value_policy::reference_internal)
      .def("data", &MlpProblem::data, py::arg("task"),
           py::return_value_policy::reference_internal);

  m.def("load_csv_dataset", &load_csv_dataset, py::arg("path"), py::arg("num_tasks"));
  m.def("save_csv_dataset", &save_csv_dataset, py::arg("path"), py::arg("data"));
  m.def("opposed_regression_dataset", &opposed_regression_dataset, py::arg("seed"),
        py::arg("samples"), py::arg("in_dim"));

  // -- optimizers and the runner ---------------------------------------------
  py::enum_<OptimizerKind>(m, "OptimizerKind")
      .value("sgd", OptimizerKind::kSgd)
      .value("heavy_ball", OptimizerKind::kHeavyBall)
      .value("adam", OptimizerKind::kAdam);

  py::class_<Optimizer>(m, "Optimizer")
      .def_static("make", &Optimizer::make, py::arg("kind"), py::arg("lr"))
      .def("step", &Optimizer::step, py::arg("theta"), py::arg("update"))
      .def("step_count", &Optimizer::step_count)
      .def("kind", &Optimizer::kind);

  py::enum_<Method>(m, "Method")
      .value("plain", Method::kPlain)
      .value("pcgrad", Method::kPcgrad)
      .value("direction_only", Method::kDirectionOnly)
      .value("magnitude_only", Method::kMagnitudeOnly);

  py::class_<RunSettings>(m, "RunSettings")
      .def(py::init<>())
      .def_readwrite("method", &RunSettings::method)
      .def_readwrite("optimizer", &RunSettings::optimizer)
      .def_readwrite("lr", &RunSettings::lr)
      .def_readwrite("iterations", &RunSettings::iterations)
      .def_readwrite("seed", &RunSettings::seed)
      .def_readwrite("snapshot_every", &RunSettings::snapshot_every)
      .def_readwrite("theta0", &RunSettings::theta0)
      .def_readwrite("batch_size", &RunSettings::batch_size);

  py::class_<LogRow>(m, "LogRow")
      .def_readonly("triad", &LogRow::triad)
      .def_readonly("task_losses", &LogRow::task_losses)
      .def_readonly("loss_total", &LogRow::loss_total);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("problem_id", &RunLog::problem_id)
      .def_readonly("method_id", &RunLog::method_id)
      .def_readonly("optimizer_id", &RunLog::optimizer_id)
      .def_readonly("seed", &RunLog::seed)
      .def_readonly("hyperparams", &RunLog::hyperparams)
      .def_readonly("rows", &RunLog::rows)
      .def_readonly("theta_snapshots", &RunLog::theta_snapshots)
      .def_readonly("final_task_losses", &RunLog::final_task_losses)
      .def_readonly("final_loss_total", &RunLog::final_loss_total)
      .def_readonly("has_final", &RunLog::has_final);

  m.def("run_training", &run_training, py::arg("problem"), py::arg("settings"));
  m.def("combined_update", &combined_update, py::arg("method"), py::arg("grads"),
        py::arg("step_seed"));

  m.def("write_csv", &write_csv, py::arg("log"), py::arg("path"));
  m.def("write_theta_csv", &write_theta_csv, py::arg("log"), py::arg("path"));
  m.def("write_summary_json", &write_summary_json, py::arg("log"), py::arg("path"),
        py::arg("extra") = std::map<std::string, std::string>{});
  m.def("read_csv_numeric", &read_csv_numeric, py::arg("path"));
  m.def("format_double", &format_double, py::arg("v"));

  // -- verification -----------------------------------------------------------
  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("index", &TrialRecord::index)
      .def_readonly("inputs_hash", &TrialRecord::inputs_hash)
      .def_readonly("applicable", &TrialRecord::applicable)
      .def_readonly("pass_", &TrialRecord::pass)
      .def_readonly("margin", &TrialRecord::margin);

  py::class_<TheoremReport>(m, "TheoremReport")
      .def_readonly("theorem_id", &TheoremReport::theorem_id)
      .def_readonly("trials", &TheoremReport::trials)
      .def_readonly("applicable", &TheoremReport::applicable)
      .def_readonly("violations", &TheoremReport::violations)
      .def_readonly("worst_margin", &TheoremReport::worst_margin)
      .def_readonly("seed", &TheoremReport::seed)
      .def_readonly("stats", &TheoremReport::stats)
      .def_readonly("records", &TheoremReport::records)
      .def("json", [](const TheoremReport& r) { return r.to_json().dump(2); });

  py::class_<ConditionalVerdict>(m, "ConditionalVerdict")
      .def_readonly("applicable", &ConditionalVerdict::applicable)
      .def_readonly("margin", &ConditionalVerdict::margin)
      .def_readonly("cos_phi", &ConditionalVerdict::cos_phi)
      .def_readonly("phi", &ConditionalVerdict::phi)
      .def_readonly("xi", &ConditionalVerdict::xi)
      .def_readonly("ell", &ConditionalVerdict::ell)
      .def_readonly("lipschitz", &ConditionalVerdict::lipschitz)
      .def_readonly("t_threshold", &ConditionalVerdict::t_threshold)
      .def_readonly("branch1", &ConditionalVerdict::branch1)
      .def_readonly("branch2", &ConditionalVerdict::branch2)
      .def_readonly("surrogate_nonneg", &ConditionalVerdict::surrogate_nonneg);

  py::class_<GateVerdict>(m, "GateVerdict")
      .def_readonly("applicable", &GateVerdict::applicable)
      .def_readonly("cos_gate", &GateVerdict::cos_gate)
      .def_readonly("margin", &GateVerdict::margin);

  py::class_<PropositionVerdict>(m, "PropositionVerdict")
      .def_readonly("stalled", &PropositionVerdict::stalled)
      .def_readonly("alpha", &PropositionVerdict::alpha)
      .def_readonly("min_grad_sq", &PropositionVerdict::min_grad_sq)
      .def_readonly("bound", &PropositionVerdict::bound)
      .def_readonly("margin_rel", &PropositionVerdict::margin_rel)
      .def_readonly("pass_", &PropositionVerdict::pass);

  py::class_<HeavyBallVerdict>(m, "HeavyBallVerdict")
      .def_readonly("steps", &HeavyBallVerdict::steps)
      .def_readonly("step_violations", &HeavyBallVerdict::step_violations)
      .def_readonly("worst_margin", &HeavyBallVerdict::worst_margin)
      .def_readonly("spectral_violations", &HeavyBallVerdict::spectral_violations)
      .def_readonly("final_error", &HeavyBallVerdict::final_error)
      .def_readonly("skipped", &HeavyBallVerdict::skipped)
      .def_readonly("conflicted", &HeavyBallVerdict::conflicted);

  m.def("check_theorem1_decrease", &check_theorem1_decrease, py::arg("problem"),
        py::arg("theta"), py::arg("t"), py::arg("step_seed") = 0);
  m.def("check_theorem2_sufficient", &check_theorem2_sufficient, py::arg("problem"),
        py::arg("theta"), py::arg("t"));
  m.def("check_theorem3_iff", &check_theorem3_iff, py::arg("problem"),
        py::arg("theta"), py::arg("t"));
  m.def("check_corollary_ntasks", &check_corollary_ntasks, py::arg("problem"),
        py::arg("theta"), py::arg("t"), py::arg("seed") = 0);
  m.def("check_proposition_nonconvex", &check_proposition_nonconvex,
        py::arg("grad_sq"), py::arg("cos_phi"), py::arg("loss_start"),
        py::arg("loss_floor"), py::arg("t"), py::arg("k_steps"));
  m.def("check_heavyball_contraction", &check_heavyball_contraction,
        py::arg("problem"), py::arg("theta0"), py::arg("steps"),
        py::arg("squared_schedule") = true);
  m.def("curvature_integral_quadratic", &curvature_integral_quadratic,
        py::arg("problem"), py::arg("theta"), py::arg("theta_prime"));
  m.def("finite_difference_max_rel_error", &finite_difference_max_rel_error,
        py::arg("problem"), py::arg("theta"), py::arg("eps") = 1e-6);

  py::class_<SweepOptions>(m, "SweepOptions")
      .def(py::init<>())
      .def_readwrite("seed", &SweepOptions::seed)
      .def_readwrite("trials", &SweepOptions::trials)
      .def_readwrite("threads", &SweepOptions::threads)
      .def_readwrite("squared_schedule", &SweepOptions::squared_schedule)
      .def_readwrite("keep_records", &SweepOptions::keep_records);

  m.def("sweep_theorem1", &sweep_theorem1, py::arg("opts"));
  m.def("sweep_theorem2", &sweep_theorem2, py::arg("opts"));
  m.def("sweep_theorem3", &sweep_theorem3, py::arg("opts"));
  m.def("sweep_corollary1", &sweep_corollary1, py::arg("opts"));
  m.def("sweep_proposition1", &sweep_proposition1, py::arg("opts"));
  m.def("sweep_heavyball", &sweep_heavyball, py::arg("opts"));
  m.def("sweep_curvature", &sweep_curvature, py::arg("opts"));
  m.def("run_verification_suite", &run_verification_suite, py::arg("opts"));
}
