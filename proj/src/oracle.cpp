#include "penalearn/oracle.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "penalearn/errors.hpp"
#include "penalearn/penalty.hpp"
#include "penalearn/random.hpp"

namespace penalearn {

using Clock = std::chrono::steady_clock;

void OracleConfig::validate() const {
  if (grid_points_per_dim < 2) throw ConfigError("grid_points_per_dim must be >= 2");
  if (starts < 1) throw ConfigError("oracle starts must be >= 1");
  if (descent_steps < 1) throw ConfigError("descent_steps must be >= 1");
  if (!(descent_lr > 0.0)) throw ConfigError("descent_lr must be > 0");
  if (eta_schedule.empty()) throw ConfigError("eta_schedule must not be empty");
  for (std::size_t i = 0; i < eta_schedule.size(); ++i) {
    if (!(eta_schedule[i] > 0.0) || !std::isfinite(eta_schedule[i])) throw ConfigError("eta_schedule entries must be finite and > 0");
    if (i > 0 && !(eta_schedule[i] > eta_schedule[i - 1])) throw ConfigError("eta_schedule must be strictly increasing");
  }
  if (!(gamma >= 1.0)) throw ConfigError("oracle gamma must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("oracle tolerance must be > 0");
  if (!(feasibility_tolerance >= 0.0)) throw ConfigError("oracle feasibility tolerance must be >= 0");
  for (const auto& b : grid_bounds) {
    if (!(b.low < b.high)) throw ConfigError("grid bounds need low < high");
  }
}

ParamRange OracleConfig::bounds(int dim) const {
  if (grid_bounds.empty()) return {-6.0, 6.0};
  if (grid_bounds.size() == 1) return grid_bounds.front();
  return grid_bounds.at(static_cast<std::size_t>(dim));
}

std::string_view to_string(OracleMethod method) {
  return method == OracleMethod::grid ? "grid" : "descent";
}

namespace {

struct Candidate {
  Vec x;
  double objective = 0.0;
  double penalized = 0.0;  // f0 + Omega at the final eta
  double violation = 0.0;
  bool feasible = false;
  OracleMethod method = OracleMethod::descent;
};

Candidate score(const ProblemSpec& spec, const Vec& x, const Vec& p, const PenaltyConfig& final_penalty,
                double feasibility_tolerance, OracleMethod method) {
  const LossEval le = total_loss(x, p, spec, final_penalty);
  const ViolationReport vr = violation_report(x, p, spec);
  return {x, le.objective, le.loss, vr.max_violation(), vr.max_violation() <= feasibility_tolerance, method};
}

// Feasible first, then objective; infeasible candidates by penalized value.
bool better(const Candidate& a, const Candidate& b) {
  if (a.feasible != b.feasible) return a.feasible;
  return a.feasible ? a.objective < b.objective : a.penalized < b.penalized;
}

// BFGS with Armijo backtracking on f0 + Omega(eta). Returns nullopt when the
// iterate leaves the finite domain.
std::optional<Vec> bfgs(const ProblemSpec& spec, const Vec& p, Vec x, const PenaltyConfig& penalty,
                        const OracleConfig& cfg) {
  const Eigen::Index n = x.size();
  using Dense = Eigen::MatrixXd;
  try {
    LossEval cur = total_loss(x, p, spec, penalty);
    Dense inv_hessian = Dense::Identity(n, n);
    bool fresh = true;
    for (int it = 0; it < cfg.descent_steps; ++it) {
      const double gnorm = cur.grad.lpNorm<Eigen::Infinity>();
      if (gnorm == 0.0) break;
      Vec dir = -(inv_hessian * cur.grad);
      double slope = cur.grad.dot(dir);
      if (!(slope < 0.0)) {
        inv_hessian.setIdentity();
        fresh = true;
        dir = -cur.grad;
        slope = cur.grad.dot(dir);
      }
      if (fresh) {
        // Unit-length first move; the curvature scale is unknown.
        const double scale = 1.0 / std::max(1.0, dir.norm());
        dir *= scale;
        slope *= scale;
      }
      double step = cfg.descent_lr;
      std::optional<LossEval> next;
      Vec trial;
      for (int k = 0; k < 80; ++k, step *= 0.5) {
        trial = x + step * dir;
        LossEval le = total_loss(trial, p, spec, penalty);
        if (le.loss <= cur.loss + 1e-4 * step * slope) {
          next = std::move(le);
          break;
        }
      }
      if (!next) {
        if (fresh) break;
        inv_hessian.setIdentity();
        fresh = true;
        continue;
      }
      const Vec s = trial - x;
      const Vec y = next->grad - cur.grad;
      x = trial;
      cur = std::move(*next);
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        if (fresh) inv_hessian *= sy / y.squaredNorm();
        const double rho = 1.0 / sy;
        const Dense left = Dense::Identity(n, n) - rho * s * y.transpose();
        inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
        fresh = false;
      }
      if (s.lpNorm<Eigen::Infinity>() <= cfg.tolerance * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
    }
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
  if (!x.allFinite()) return std::nullopt;
  return x;
}

}  // namespace

OracleSolution grid_scan(const ProblemSpec& spec, const Vec& p, const OracleConfig& cfg) {
  cfg.validate();
  const int dim = spec.decision_dim;
  if (dim > 3) throw UnsupportedError("grid scan supports at most 3 decision dimensions");
  check_shapes(spec, Vec::Zero(dim), p);
  const auto t0 = Clock::now();
  const PenaltyConfig final_penalty = PenaltyConfig::uniform(cfg.final_eta(), cfg.gamma);
  const int per_dim = cfg.grid_points_per_dim;

  std::optional<Candidate> best;
  std::vector<int> index(static_cast<std::size_t>(dim), 0);
  Vec x(dim);
  for (;;) {
    for (int d = 0; d < dim; ++d) {
      const ParamRange b = cfg.bounds(d);
      x[d] = b.low + (b.high - b.low) * static_cast<double>(index[static_cast<std::size_t>(d)]) / (per_dim - 1);
    }
    try {
      Candidate c = score(spec, x, p, final_penalty, cfg.feasibility_tolerance, OracleMethod::grid);
      if (!best || better(c, *best)) best = std::move(c);
    } catch (const EvaluationError&) {
    }
    int d = 0;
    while (d < dim && ++index[static_cast<std::size_t>(d)] == per_dim) index[static_cast<std::size_t>(d++)] = 0;
    if (d == dim) break;
  }
  if (!best) throw OracleFailedError("grid scan found no finite point");
  OracleSolution out{best->x, best->objective, best->violation, best->feasible, 0.0, OracleMethod::grid};
  out.solve_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

OracleSolution solve(const ProblemSpec& spec, const Vec& p, const OracleConfig& cfg) {
  cfg.validate();
  const int dim = spec.decision_dim;
  check_shapes(spec, Vec::Zero(dim), p);
  const auto t0 = Clock::now();
  const PenaltyConfig final_penalty = PenaltyConfig::uniform(cfg.final_eta(), cfg.gamma);

  std::optional<Candidate> best;
  auto consider = [&](const Vec& x, OracleMethod method) {
    try {
      Candidate c = score(spec, x, p, final_penalty, cfg.feasibility_tolerance, method);
      if (!best || better(c, *best)) best = std::move(c);
    } catch (const EvaluationError&) {
    }
  };

  int remaining = cfg.starts;
  if (dim <= 3) {
    const OracleSolution grid = grid_scan(spec, p, cfg);
    consider(grid.x, OracleMethod::grid);
    // Polish the grid point at the final weight only, so descent cannot
    // raise f0 + Omega above the grid value.
    if (auto x = bfgs(spec, p, grid.x, final_penalty, cfg)) consider(*x, OracleMethod::descent);
    --remaining;
  }

  Rng rng(cfg.seed);
  for (int s = 0; s < remaining; ++s) {
    Vec x(dim);
    for (int d = 0; d < dim; ++d) {
      const ParamRange b = cfg.bounds(d);
      x[d] = rng.uniform(b.low, b.high);
    }
    std::optional<Vec> iterate = x;
    for (double eta : cfg.eta_schedule) {
      iterate = bfgs(spec, p, *iterate, PenaltyConfig::uniform(eta, cfg.gamma), cfg);
      if (!iterate) break;
    }
    if (iterate) consider(*iterate, OracleMethod::descent);
  }

  if (!best) throw OracleFailedError(spec.name + ": every oracle start diverged");
  OracleSolution out{best->x, best->objective, best->violation, best->feasible, 0.0, best->method};
  out.solve_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace penalearn
