#include "penalearn/problems.hpp"

#include <cmath>
#include <numbers>

#include "penalearn/errors.hpp"
#include "penalearn/random.hpp"

namespace penalearn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// c1 (x2 - x1^2)^2 + (c2 - x1)^2
ValueGrad rosenbrock(const Vec& x, const Vec& p) {
  const double c1 = p[0], c2 = p[1];
  const double valley = x[1] - x[0] * x[0];
  const double lead = c2 - x[0];
  ValueGrad out{c1 * valley * valley + lead * lead, Vec(2)};
  out.grad[0] = -4.0 * c1 * x[0] * valley - 2.0 * lead;
  out.grad[1] = 2.0 * c1 * valley;
  return out;
}

// -c1 exp(-c2 sqrt(c3 (x1^2 + x2^2))) - exp(c4 (cos 2 pi x1 + cos 2 pi x2)) + e + c5
// The radial term has no derivative at the origin; zero is used there.
ValueGrad ackley(const Vec& x, const Vec& p) {
  const double c1 = p[0], c2 = p[1], c3 = p[2], c4 = p[3], c5 = p[4];
  const double radius = std::sqrt(c3 * (x[0] * x[0] + x[1] * x[1]));
  const double radial = std::exp(-c2 * radius);
  const double cos_sum = std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1]);
  const double wave = std::exp(c4 * cos_sum);
  ValueGrad out{-c1 * radial - wave + std::numbers::e + c5, Vec(2)};
  for (int i = 0; i < 2; ++i) {
    const double d_radius = radius > 0.0 ? c3 * x[i] / radius : 0.0;
    out.grad[i] = c1 * c2 * radial * d_radius + wave * c4 * kTwoPi * std::sin(kTwoPi * x[i]);
  }
  return out;
}

Constraint squared_norm_at_most(double bound, std::string label) {
  return {std::move(label),
          [](const Vec& x, const Vec&) {
            ValueGrad out{x.squaredNorm(), 2.0 * x};
            return out;
          },
          bound};
}

Constraint coordinate_at_most(int index, double bound, std::string label) {
  return {std::move(label),
          [index](const Vec& x, const Vec&) {
            ValueGrad out{x[index], Vec::Zero(x.size())};
            out.grad[index] = 1.0;
            return out;
          },
          bound};
}

ProblemSpec rosenbrock_base(std::string name) {
  ProblemSpec spec;
  spec.name = std::move(name);
  spec.decision_dim = 2;
  spec.param_dim = 2;
  spec.objective = rosenbrock;
  spec.param_ranges = {{0.0, 30.0}, {0.0, 1.0}};
  return spec;
}

ProblemSpec ackley_base(std::string name) {
  ProblemSpec spec;
  spec.name = std::move(name);
  spec.decision_dim = 2;
  spec.param_dim = 5;
  spec.objective = ackley;
  spec.param_ranges = {{0.0, 30.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 30.0}};
  spec.default_net_shape = {5, 10, 20, 20, 20, 10, 2};
  return spec;
}

// Unit disk plus two half-planes; the intersection is empty.
void add_three_constraints(ProblemSpec& spec) {
  spec.inequalities.push_back(squared_norm_at_most(1.0, "x1^2+x2^2<=1"));
  spec.inequalities.push_back(coordinate_at_most(0, -2.5, "x1<=-2.5"));
  spec.inequalities.push_back(coordinate_at_most(1, -1.0, "x2<=-1"));
}

}  // namespace

std::vector<std::string> problem_names() {
  return {"rosenbrock-1c", "rosenbrock-3c", "ackley-1c", "ackley-3c"};
}

ProblemSpec make_problem(std::string_view name) {
  if (name == "rosenbrock-1c") {
    auto spec = rosenbrock_base(std::string(name));
    spec.inequalities.push_back(squared_norm_at_most(1.0, "x1^2+x2^2<=1"));
    spec.default_net_shape = {2, 20, 20, 2};
    return spec;
  }
  if (name == "rosenbrock-3c") {
    auto spec = rosenbrock_base(std::string(name));
    add_three_constraints(spec);
    spec.default_net_shape = {2, 10, 20, 20, 20, 10, 2};
    return spec;
  }
  if (name == "ackley-1c") {
    auto spec = ackley_base(std::string(name));
    spec.inequalities.push_back(squared_norm_at_most(25.0, "x1^2+x2^2<=25"));
    return spec;
  }
  if (name == "ackley-3c") {
    auto spec = ackley_base(std::string(name));
    add_three_constraints(spec);
    return spec;
  }
  std::string known;
  for (const auto& n : problem_names()) known += (known.empty() ? "" : ", ") + n;
  throw RegistryError("unknown problem '" + std::string(name) + "' (known: " + known + ")");
}

ProblemSpec make_quadratic_problem() {
  ProblemSpec spec;
  spec.name = "quadratic";
  spec.decision_dim = 1;
  spec.param_dim = 1;
  spec.objective = [](const Vec& x, const Vec& p) {
    const double d = x[0] - p[0];
    ValueGrad out{d * d, Vec(1)};
    out.grad[0] = 2.0 * d;
    return out;
  };
  spec.param_ranges = {{-1.0, 1.0}};
  spec.default_net_shape = {1, 8, 1};
  return spec;
}

void check_shapes(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  if (x.size() != spec.decision_dim) {
    throw DimensionError(spec.name + ": decision vector has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(spec.decision_dim));
  }
  if (p.size() != spec.param_dim) {
    throw DimensionError(spec.name + ": parameter vector has length " + std::to_string(p.size()) +
                         ", expected " + std::to_string(spec.param_dim));
  }
}

ValueGrad eval_objective(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  check_shapes(spec, x, p);
  ValueGrad out = spec.objective(x, p);
  if (!std::isfinite(out.value) || !out.grad.allFinite()) {
    throw EvaluationError(spec.name + ": non-finite objective", -1);
  }
  return out;
}

ConstraintEval eval_constraints(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  check_shapes(spec, x, p);
  ConstraintEval out;
  out.ineq_values.resize(static_cast<Eigen::Index>(spec.inequalities.size()));
  out.eq_values.resize(static_cast<Eigen::Index>(spec.equalities.size()));
  long index = 0;
  auto run = [&](const std::vector<Constraint>& list, Vec& values, std::vector<Vec>& grads) {
    grads.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i, ++index) {
      ValueGrad vg = list[i].function(x, p);
      const double residual = vg.value - list[i].bound;
      if (!std::isfinite(residual) || !vg.grad.allFinite()) {
        throw EvaluationError(spec.name + ": non-finite constraint '" + list[i].label + "'", index);
      }
      values[static_cast<Eigen::Index>(i)] = residual;
      grads.push_back(std::move(vg.grad));
    }
  };
  run(spec.inequalities, out.ineq_values, out.ineq_grads);
  run(spec.equalities, out.eq_values, out.eq_grads);
  return out;
}

ParamSet sample_params(const ProblemSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ConfigError("sample count must be >= 1");
  ParamSet set{Mat(static_cast<Eigen::Index>(count), spec.param_dim), seed};
  Rng rng(seed);
  for (Eigen::Index r = 0; r < set.values.rows(); ++r) {
    for (int c = 0; c < spec.param_dim; ++c) {
      const auto& range = spec.param_ranges[static_cast<std::size_t>(c)];
      set.values(r, c) = rng.uniform(range.low, range.high);
    }
  }
  return set;
}

}  // namespace penalearn
