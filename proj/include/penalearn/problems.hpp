#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "penalearn/mlp.hpp"

namespace penalearn {

struct ValueGrad {
  double value = 0.0;
  Vec grad;  // d value / d x, length = decision dim
};

// (x, p) -> value and gradient in x. Must be pure.
using Evaluator = std::function<ValueGrad(const Vec& x, const Vec& p)>;

// g(x; p) compared against a constant bound. The residual is g - bound; a
// residual <= 0 (inequality) or == 0 (equality) means satisfied.
struct Constraint {
  std::string label;
  Evaluator function;
  double bound = 0.0;
};

struct ParamRange {
  double low = 0.0;
  double high = 0.0;
};

// A parameterized problem  min_x f0(x; p)  s.t.  f_i(x; p) <= c_i,  h_j(x; p) = b_j.
struct ProblemSpec {
  std::string name;
  int decision_dim = 0;
  int param_dim = 0;
  Evaluator objective;
  std::vector<Constraint> inequalities;
  std::vector<Constraint> equalities;
  std::vector<ParamRange> param_ranges;
  std::vector<int> default_net_shape;

  std::size_t constraint_count() const { return inequalities.size() + equalities.size(); }
};

// Residuals g - bound and their x-gradients, in registry order.
struct ConstraintEval {
  Vec ineq_values;
  Vec eq_values;
  std::vector<Vec> ineq_grads;
  std::vector<Vec> eq_grads;
};

struct ParamSet {
  Mat values;  // count x param_dim
  std::uint64_t seed = 0;

  Eigen::Index size() const { return values.rows(); }
  Vec row(Eigen::Index i) const { return values.row(i).transpose(); }
};

// Registered names: rosenbrock-1c, rosenbrock-3c, ackley-1c, ackley-3c.
std::vector<std::string> problem_names();

// Throws RegistryError listing the known names.
ProblemSpec make_problem(std::string_view name);

// Unregistered 1-d convex fixture: min (x - p)^2, no constraints, p in [-1, 1].
ProblemSpec make_quadratic_problem();

// Throws DimensionError on shape mismatch and EvaluationError (index -1) on a
// non-finite result.
ValueGrad eval_objective(const ProblemSpec& spec, const Vec& x, const Vec& p);

ConstraintEval eval_constraints(const ProblemSpec& spec, const Vec& x, const Vec& p);

// `count` rows, each coordinate uniform in its range; reproducible from seed.
ParamSet sample_params(const ProblemSpec& spec, std::size_t count, std::uint64_t seed);

void check_shapes(const ProblemSpec& spec, const Vec& x, const Vec& p);

}  // namespace penalearn
