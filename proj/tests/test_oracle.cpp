#include <doctest.h>

#include <cmath>
#include <limits>

#include "penalearn/errors.hpp"
#include "penalearn/oracle.hpp"
#include "penalearn/penalty.hpp"
#include "penalearn/random.hpp"

using namespace penalearn;

namespace {

Vec vec_of(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

double cell_width(const OracleConfig& cfg, int dim = 0) {
  const auto b = cfg.bounds(dim);
  return (b.high - b.low) / (cfg.grid_points_per_dim - 1);
}

}  // namespace

TEST_CASE("grid scan finds interior rosenbrock optimum") {
  const auto spec = make_problem("rosenbrock-1c");
  OracleConfig cfg;
  cfg.grid_bounds = {{-1.5, 1.5}};
  const OracleSolution sol = grid_scan(spec, vec_of({5.0, 0.1}), cfg);
  const double cell = cell_width(cfg);
  CHECK(std::abs(sol.x[0] - 0.1) <= cell);
  CHECK(std::abs(sol.x[1] - 0.01) <= cell);
  CHECK(sol.feasible);
  CHECK(sol.method == OracleMethod::grid);
}

TEST_CASE("grid scan finds the ackley origin") {
  const auto spec = make_problem("ackley-1c");
  OracleConfig cfg;
  const OracleSolution sol = grid_scan(spec, vec_of({20, 0.2, 0.5, 0.5, 20}), cfg);
  CHECK(sol.x.norm() <= cell_width(cfg));
}

TEST_CASE("empty feasible set is reported, not hidden") {
  const auto spec = make_problem("rosenbrock-3c");
  OracleConfig cfg;
  const OracleSolution grid = grid_scan(spec, vec_of({1.0, 1.0}), cfg);
  CHECK(grid.max_violation > 0.0);
  CHECK_FALSE(grid.feasible);
  const OracleSolution sol = solve(spec, vec_of({1.0, 1.0}), cfg);
  CHECK(sol.max_violation > 0.0);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.x.allFinite());
}

TEST_CASE("grid scan rejects high dimensions") {
  ProblemSpec spec = make_quadratic_problem();
  spec.decision_dim = 4;
  spec.objective = [](const Vec& x, const Vec&) { return ValueGrad{x.squaredNorm(), 2.0 * x}; };
  CHECK_THROWS_AS(grid_scan(spec, Vec::Zero(1), OracleConfig{}), UnsupportedError);
  // Descent alone still works above the grid limit.
  OracleConfig cfg;
  cfg.starts = 3;
  const OracleSolution sol = solve(spec, Vec::Zero(1), cfg);
  CHECK(sol.x.norm() < 1e-6);
}

TEST_CASE("solve reproduces the rosenbrock reference optima") {
  const auto spec = make_problem("rosenbrock-1c");
  OracleConfig cfg;
  const OracleSolution boundary = solve(spec, vec_of({1.0, 1.0}), cfg);
  CHECK((boundary.x - vec_of({0.8082, 0.5889})).norm() <= 1e-2);
  CHECK(boundary.feasible);
  const OracleSolution interior = solve(spec, vec_of({25.0, 0.3}), cfg);
  CHECK((interior.x - vec_of({0.3, 0.09})).norm() <= 1e-2);
  const OracleSolution second = solve(spec, vec_of({5.0, 0.1}), cfg);
  CHECK((second.x - vec_of({0.1, 0.01})).norm() <= 1e-2);
}

TEST_CASE("solve hits the analytic optimum of the convex toy") {
  const auto spec = make_quadratic_problem();
  for (double p : {-0.7, 0.0, 0.35, 1.0}) {
    const OracleSolution sol = solve(spec, vec_of({p}), OracleConfig{});
    CHECK(std::abs(sol.x[0] - p) <= 1e-6);
    CHECK(sol.solve_time_s > 0.0);
  }
}

TEST_CASE("oracle properties over sampled parameters") {
  for (const char* name : {"rosenbrock-1c", "ackley-1c"}) {
    const auto spec = make_problem(name);
    const ParamSet ps = sample_params(spec, 12, 77);
    OracleConfig cfg;
    for (Eigen::Index i = 0; i < ps.size(); ++i) {
      CAPTURE(name);
      CAPTURE(i);
      const Vec p = ps.row(i);
      const OracleSolution sol = solve(spec, p, cfg);
      const OracleSolution grid = grid_scan(spec, p, cfg);
      // Feasible-first dominance: a feasible grid candidate exists, so the
      // answer must be feasible.
      REQUIRE(grid.feasible);
      CHECK(sol.feasible);
      CHECK(sol.objective <= grid.objective + 1e-6);

      const OracleSolution again = solve(spec, p, cfg);
      CHECK(again.x == sol.x);
    }
  }
}

TEST_CASE("rosenbrock solutions satisfy KKT stationarity") {
  const auto spec = make_problem("rosenbrock-1c");
  const ParamSet ps = sample_params(spec, 20, 5);
  for (Eigen::Index i = 0; i < ps.size(); ++i) {
    const Vec p = ps.row(i);
    const OracleSolution sol = solve(spec, p, OracleConfig{});
    const Vec grad_f = eval_objective(spec, sol.x, p).grad;
    const auto ce = eval_constraints(spec, sol.x, p);
    const double residual = ce.ineq_values[0];
    const Vec& normal = ce.ineq_grads[0];
    CAPTURE(p.transpose());
    if (residual < -1e-6) {
      CHECK(grad_f.norm() <= 1e-3);
    } else {
      const double lambda = -grad_f.dot(normal) / normal.squaredNorm();
      CHECK(lambda >= -1e-6);
      CHECK((grad_f + lambda * normal).norm() <= 1e-3);
    }
  }
}

TEST_CASE("all starts failing raises") {
  ProblemSpec spec = make_quadratic_problem();
  spec.objective = [](const Vec&, const Vec&) {
    return ValueGrad{std::numeric_limits<double>::quiet_NaN(), Vec::Zero(1)};
  };
  CHECK_THROWS_AS(solve(spec, Vec::Zero(1), OracleConfig{}), OracleFailedError);
}

TEST_CASE("oracle config validation") {
  OracleConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eta_schedule = {1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = OracleConfig{};
  cfg.grid_points_per_dim = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = OracleConfig{};
  cfg.starts = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
