#include "penalearn/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "penalearn/errors.hpp"

namespace penalearn {

PenaltyMode parse_penalty_mode(std::string_view text) {
  if (text == "piecewise") return PenaltyMode::piecewise;
  if (text == "indicator") return PenaltyMode::indicator;
  if (text == "none") return PenaltyMode::none;
  throw ConfigError("unknown penalty mode '" + std::string(text) + "' (piecewise|indicator|none)");
}

std::string_view to_string(PenaltyMode mode) {
  switch (mode) {
    case PenaltyMode::piecewise: return "piecewise";
    case PenaltyMode::indicator: return "indicator";
    case PenaltyMode::none: return "none";
  }
  return "?";
}

PenaltyConfig PenaltyConfig::uniform(double eta, double gamma, PenaltyMode mode) {
  PenaltyConfig cfg;
  cfg.mode = mode;
  cfg.eta_ineq = {eta};
  cfg.eta_eq = {eta};
  cfg.gamma = gamma;
  return cfg;
}

void PenaltyConfig::validate(const ProblemSpec& spec) const {
  auto check_list = [](const std::vector<double>& etas, std::size_t count, const char* kind) {
    if (etas.size() != 1 && etas.size() != count && !(count == 0)) {
      throw ConfigError(std::string(kind) + " weight list has " + std::to_string(etas.size()) +
                        " entries, problem has " + std::to_string(count) + " constraints");
    }
    for (double eta : etas) {
      if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("penalty weight eta must be finite and >= 0");
    }
  };
  check_list(eta_ineq, spec.inequalities.size(), "inequality");
  check_list(eta_eq, spec.equalities.size(), "equality");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 1");
  if (!(indicator_big > 0.0) || !std::isfinite(indicator_big)) throw ConfigError("indicator_big must be finite and > 0");
  if (!(eq_tolerance >= 0.0)) throw ConfigError("eq_tolerance must be >= 0");
}

double PenaltyConfig::ineq_weight(std::size_t i) const {
  return eta_ineq.size() == 1 ? eta_ineq.front() : eta_ineq.at(i);
}

double PenaltyConfig::eq_weight(std::size_t j) const {
  return eta_eq.size() == 1 ? eta_eq.front() : eta_eq.at(j);
}

PenaltyTerm ineq_penalty(double residual, double eta, double gamma) {
  if (!(residual > 0.0)) return {};
  return {eta * std::pow(residual, gamma), eta * gamma * std::pow(residual, gamma - 1.0)};
}

PenaltyTerm eq_penalty(double residual, double eta, double gamma) {
  if (residual == 0.0) return {};
  const double magnitude = std::abs(residual);
  const double slope = eta * gamma * std::pow(magnitude, gamma - 1.0);
  return {eta * std::pow(magnitude, gamma), residual > 0.0 ? slope : -slope};
}

namespace {

bool eq_violated(double residual, double tolerance) { return std::abs(residual) > tolerance; }

}  // namespace

double penalty_value(const ConstraintEval& residuals, const PenaltyConfig& cfg) {
  double omega = 0.0;
  switch (cfg.mode) {
    case PenaltyMode::none:
      break;
    case PenaltyMode::piecewise:
      for (Eigen::Index i = 0; i < residuals.ineq_values.size(); ++i) {
        omega += ineq_penalty(residuals.ineq_values[i], cfg.ineq_weight(static_cast<std::size_t>(i)), cfg.gamma).value;
      }
      for (Eigen::Index j = 0; j < residuals.eq_values.size(); ++j) {
        omega += eq_penalty(residuals.eq_values[j], cfg.eq_weight(static_cast<std::size_t>(j)), cfg.gamma).value;
      }
      break;
    case PenaltyMode::indicator: {
      long violated = 0;
      for (Eigen::Index i = 0; i < residuals.ineq_values.size(); ++i) violated += residuals.ineq_values[i] > 0.0;
      for (Eigen::Index j = 0; j < residuals.eq_values.size(); ++j) {
        violated += eq_violated(residuals.eq_values[j], cfg.eq_tolerance);
      }
      omega = cfg.indicator_big * static_cast<double>(violated);
      break;
    }
  }
  return omega;
}

LossEval total_loss(const Vec& x, const Vec& p, const ProblemSpec& problem, const PenaltyConfig& cfg) {
  ValueGrad f0 = eval_objective(problem, x, p);
  LossEval out;
  out.objective = f0.value;
  out.grad = std::move(f0.grad);
  if (cfg.mode != PenaltyMode::none) {
    const ConstraintEval residuals = eval_constraints(problem, x, p);
    out.penalty = penalty_value(residuals, cfg);
    if (cfg.mode == PenaltyMode::piecewise) {
      for (std::size_t i = 0; i < residuals.ineq_grads.size(); ++i) {
        const auto term = ineq_penalty(residuals.ineq_values[static_cast<Eigen::Index>(i)], cfg.ineq_weight(i), cfg.gamma);
        if (term.derivative != 0.0) out.grad += term.derivative * residuals.ineq_grads[i];
      }
      for (std::size_t j = 0; j < residuals.eq_grads.size(); ++j) {
        const auto term = eq_penalty(residuals.eq_values[static_cast<Eigen::Index>(j)], cfg.eq_weight(j), cfg.gamma);
        if (term.derivative != 0.0) out.grad += term.derivative * residuals.eq_grads[j];
      }
    }
  }
  out.loss = out.objective + out.penalty;
  if (!std::isfinite(out.loss) || !out.grad.allFinite()) {
    throw EvaluationError(problem.name + ": non-finite penalized loss", -1);
  }
  return out;
}

ViolationReport violation_report(const Vec& x, const Vec& p, const ProblemSpec& problem, double eq_tolerance) {
  const ConstraintEval residuals = eval_constraints(problem, x, p);
  ViolationReport report;
  for (Eigen::Index i = 0; i < residuals.ineq_values.size(); ++i) {
    report.max_ineq_violation = std::max(report.max_ineq_violation, residuals.ineq_values[i]);
  }
  for (Eigen::Index j = 0; j < residuals.eq_values.size(); ++j) {
    report.max_eq_violation = std::max(report.max_eq_violation, std::abs(residuals.eq_values[j]));
  }
  report.feasible = report.max_ineq_violation <= 0.0 && report.max_eq_violation <= eq_tolerance;
  return report;
}

bool feasible_within(const ViolationReport& report, double tolerance) {
  return report.max_ineq_violation <= tolerance && report.max_eq_violation <= tolerance;
}

}  // namespace penalearn
