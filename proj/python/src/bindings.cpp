#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "penalearn/cli.hpp"
#include "penalearn/errors.hpp"
#include "penalearn/harness.hpp"
#include "penalearn/model_io.hpp"
#include "penalearn/oracle.hpp"
#include "penalearn/penalty.hpp"
#include "penalearn/trainer.hpp"

namespace py = pybind11;
using namespace penalearn;

namespace {

py::dict log_entry_dict(const TrainLogEntry& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["mean_loss"] = e.mean_loss;
  d["mean_objective"] = e.mean_objective;
  d["mean_penalty"] = e.mean_penalty;
  d["feasible_frac"] = e.feasible_frac;
  d["elapsed_s"] = e.elapsed_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_penalearn, m) {
  m.doc() = "Learn-to-optimize engine: MLP solvers trained with piece-wise penalties";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<RegistryError>(m, "RegistryError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<OracleFailedError>(m, "OracleFailedError", base.ptr());
  py::register_exception<TrainingDivergedError>(m, "TrainingDivergedError", base.ptr());

  py::class_<ProblemSpec>(m, "Problem")
      .def_readonly("name", &ProblemSpec::name)
      .def_readonly("decision_dim", &ProblemSpec::decision_dim)
      .def_readonly("param_dim", &ProblemSpec::param_dim)
      .def_readonly("default_net_shape", &ProblemSpec::default_net_shape)
      .def_property_readonly("constraint_count", &ProblemSpec::constraint_count)
      .def_property_readonly("param_ranges",
                             [](const ProblemSpec& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& r : s.param_ranges) out.emplace_back(r.low, r.high);
                               return out;
                             })
      .def("__repr__", [](const ProblemSpec& s) { return "<Problem " + s.name + ">"; });

  m.def("problem_names", &problem_names);
  m.def("make_problem", &make_problem, py::arg("name"));
  m.def("make_quadratic_problem", &make_quadratic_problem);
  m.def(
      "sample_params",
      [](const ProblemSpec& spec, std::size_t count, std::uint64_t seed) { return sample_params(spec, count, seed).values; },
      py::arg("problem"), py::arg("count"), py::arg("seed") = 0);
  m.def(
      "objective",
      [](const ProblemSpec& spec, const Vec& x, const Vec& p) {
        const ValueGrad vg = eval_objective(spec, x, p);
        return py::make_tuple(vg.value, vg.grad);
      },
      py::arg("problem"), py::arg("x"), py::arg("p"), "f0(x; p) and its gradient in x");
  m.def(
      "max_violation",
      [](const ProblemSpec& spec, const Vec& x, const Vec& p) { return violation_report(x, p, spec).max_violation(); },
      py::arg("problem"), py::arg("x"), py::arg("p"));

  py::enum_<PenaltyMode>(m, "PenaltyMode")
      .value("piecewise", PenaltyMode::piecewise)
      .value("indicator", PenaltyMode::indicator)
      .value("none", PenaltyMode::none);

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init(&PenaltyConfig::uniform), py::arg("eta") = 1e8, py::arg("gamma") = 2.0,
           py::arg("mode") = PenaltyMode::piecewise)
      .def_readwrite("mode", &PenaltyConfig::mode)
      .def_readwrite("eta_ineq", &PenaltyConfig::eta_ineq)
      .def_readwrite("eta_eq", &PenaltyConfig::eta_eq)
      .def_readwrite("gamma", &PenaltyConfig::gamma)
      .def_readwrite("indicator_big", &PenaltyConfig::indicator_big)
      .def_readwrite("eq_tolerance", &PenaltyConfig::eq_tolerance);

  m.def(
      "total_loss",
      [](const ProblemSpec& spec, const Vec& x, const Vec& p, const PenaltyConfig& cfg) {
        const LossEval le = total_loss(x, p, spec, cfg);
        py::dict d;
        d["loss"] = le.loss;
        d["objective"] = le.objective;
        d["penalty"] = le.penalty;
        d["grad"] = le.grad;
        return d;
      },
      py::arg("problem"), py::arg("x"), py::arg("p"), py::arg("penalty") = PenaltyConfig{});

  py::class_<Mlp>(m, "Mlp")
      .def(py::init<std::vector<int>>(), py::arg("layer_sizes"))
      .def_static("xavier", &Mlp::xavier, py::arg("layer_sizes"), py::arg("seed") = 0)
      .def_property_readonly("layer_sizes", &Mlp::layer_sizes)
      .def_property_readonly("parameter_count", [](const Mlp& n) { return n.params().parameter_count(); })
      .def_property_readonly("mac_count", [](const Mlp& n) { return mac_count(n.layer_sizes()); })
      .def("predict", [](const Mlp& n, const Vec& p) -> Vec { return mlp_predict(n, p); }, py::arg("p"))
      .def(
          "forward", [](const Mlp& n, const Mat& batch) -> Mat { return mlp_forward(n, batch).output(); },
          py::arg("batch"), "outputs for a batch of parameter rows")
      .def("flat_params", [](const Mlp& n) { return n.params().flatten(); })
      .def("to_string", &model_to_string)
      .def_static("from_string", &model_from_string, py::arg("text"))
      .def("save", [](const Mlp& n, const std::filesystem::path& path) { save_model(n, path); }, py::arg("path"))
      .def_static("load", &load_model, py::arg("path"));

  m.def("mac_count", [](const std::vector<int>& sizes) { return mac_count(sizes); }, py::arg("layer_sizes"));

  py::class_<AdamConfig>(m, "AdamConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &AdamConfig::learning_rate)
      .def_readwrite("beta1", &AdamConfig::beta1)
      .def_readwrite("beta2", &AdamConfig::beta2)
      .def_readwrite("epsilon", &AdamConfig::epsilon);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("sample_count", &TrainConfig::sample_count)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("adam", &TrainConfig::adam)
      .def_readwrite("penalty", &TrainConfig::penalty)
      .def_readwrite("log_every", &TrainConfig::log_every)
      .def_readwrite("net_shape", &TrainConfig::net_shape)
      .def_readwrite("feasibility_tolerance", &TrainConfig::feasibility_tolerance)
      .def_readwrite("divergence_limit", &TrainConfig::divergence_limit)
      .def_readwrite("normalize_inputs", &TrainConfig::normalize_inputs)
      .def_readwrite("grad_clip", &TrainConfig::grad_clip);

  m.def(
      "train",
      [](const ProblemSpec& spec, const TrainConfig& cfg) {
        TrainResult result = [&] {
          py::gil_scoped_release release;
          return train(spec, cfg);
        }();
        py::list log;
        for (const auto& e : result.log) log.append(log_entry_dict(e));
        return py::make_tuple(std::move(result.net), log);
      },
      py::arg("problem"), py::arg("config") = TrainConfig{}, "returns (net, log)");

  py::class_<OracleConfig>(m, "OracleConfig")
      .def(py::init<>())
      .def_readwrite("grid_points_per_dim", &OracleConfig::grid_points_per_dim)
      .def_readwrite("starts", &OracleConfig::starts)
      .def_readwrite("descent_steps", &OracleConfig::descent_steps)
      .def_readwrite("descent_lr", &OracleConfig::descent_lr)
      .def_readwrite("eta_schedule", &OracleConfig::eta_schedule)
      .def_readwrite("gamma", &OracleConfig::gamma)
      .def_readwrite("tolerance", &OracleConfig::tolerance)
      .def_readwrite("feasibility_tolerance", &OracleConfig::feasibility_tolerance)
      .def_readwrite("seed", &OracleConfig::seed)
      .def_property(
          "grid_bounds",
          [](const OracleConfig& c) {
            std::vector<std::pair<double, double>> out;
            for (const auto& r : c.grid_bounds) out.emplace_back(r.low, r.high);
            return out;
          },
          [](OracleConfig& c, const std::vector<std::pair<double, double>>& bounds) {
            c.grid_bounds.clear();
            for (const auto& [lo, hi] : bounds) c.grid_bounds.push_back({lo, hi});
          });

  py::class_<OracleSolution>(m, "OracleSolution")
      .def_readonly("x", &OracleSolution::x)
      .def_readonly("objective", &OracleSolution::objective)
      .def_readonly("max_violation", &OracleSolution::max_violation)
      .def_readonly("feasible", &OracleSolution::feasible)
      .def_readonly("solve_time_s", &OracleSolution::solve_time_s)
      .def_property_readonly("method", [](const OracleSolution& s) { return std::string(to_string(s.method)); });

  m.def("oracle_solve", &solve, py::arg("problem"), py::arg("p"), py::arg("config") = OracleConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("grid_scan", &grid_scan, py::arg("problem"), py::arg("p"), py::arg("config") = OracleConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<BenchAggregates>(m, "BenchAggregates")
      .def_readonly("defined", &BenchAggregates::defined)
      .def_readonly("median_gap", &BenchAggregates::median_gap)
      .def_readonly("p95_gap", &BenchAggregates::p95_gap)
      .def_readonly("feasible_frac_loose", &BenchAggregates::feasible_frac_loose)
      .def_readonly("feasible_frac_strict", &BenchAggregates::feasible_frac_strict)
      .def_readonly("speedup", &BenchAggregates::speedup)
      .def_readonly("oracle_failures", &BenchAggregates::oracle_failures)
      .def_readonly("mac_count", &BenchAggregates::mac_count);

  py::class_<BenchReport>(m, "BenchReport")
      .def_readonly("aggregates", &BenchReport::aggregates)
      .def_property_readonly("row_count", [](const BenchReport& r) { return r.rows.size(); })
      .def("to_csv", &bench_csv);

  m.def(
      "benchmark",
      [](const ProblemSpec& spec, const Mlp& net, const Mat& params, const OracleConfig& oracle, int forward_reps,
         int threads) {
        ParamSet ps;
        ps.values = params;
        BenchOptions options;
        options.forward_reps = forward_reps;
        options.threads = threads;
        py::gil_scoped_release release;
        return run_benchmark(spec, net, oracle, ps, options);
      },
      py::arg("problem"), py::arg("net"), py::arg("params"), py::arg("oracle") = OracleConfig{},
      py::arg("forward_reps") = 100, py::arg("threads") = 1);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "penalearn");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "runs the command line tool in-process; returns (status, stdout, stderr)");
}
