#pragma once

#include <string_view>
#include <vector>

#include "penalearn/problems.hpp"

namespace penalearn {

enum class PenaltyMode {
  piecewise,  // eta * max(0, r)^gamma and eta * |r|^gamma
  indicator,  // 0 / "infinity" step, zero gradient; diagnostic only
  none,       // loss is the bare objective
};

PenaltyMode parse_penalty_mode(std::string_view text);
std::string_view to_string(PenaltyMode mode);

struct PenaltyConfig {
  PenaltyMode mode = PenaltyMode::piecewise;
  // Per-constraint weights. A single entry is broadcast to every constraint
  // of that kind.
  std::vector<double> eta_ineq{1e8};
  std::vector<double> eta_eq{1e8};
  double gamma = 2.0;
  // Finite stand-in for the indicator's infinity.
  double indicator_big = 1e12;
  double eq_tolerance = 0.0;

  static PenaltyConfig uniform(double eta, double gamma, PenaltyMode mode = PenaltyMode::piecewise);

  // Throws ConfigError on eta < 0, gamma < 1, indicator_big <= 0, negative
  // eq_tolerance, or weight lists that neither broadcast nor match `spec`.
  void validate(const ProblemSpec& spec) const;
  double ineq_weight(std::size_t i) const;
  double eq_weight(std::size_t j) const;
};

struct PenaltyTerm {
  double value = 0.0;
  double derivative = 0.0;  // d value / d residual
};

// 0 for residual <= 0, else eta * residual^gamma.
PenaltyTerm ineq_penalty(double residual, double eta, double gamma);

// eta * |residual|^gamma. The derivative at residual == 0 is taken as 0,
// which also fixes the gamma == 1 kink.
PenaltyTerm eq_penalty(double residual, double eta, double gamma);

struct LossEval {
  double loss = 0.0;       // objective + penalty
  double objective = 0.0;  // f0
  double penalty = 0.0;    // Omega (or indicator_big * violated count)
  Vec grad;                // d loss / d x
};

// f0(x;p) + Omega(x;p) and its exact x-gradient. In indicator mode the
// penalty contributes nothing to the gradient.
LossEval total_loss(const Vec& x, const Vec& p, const ProblemSpec& problem, const PenaltyConfig& cfg);

// Omega alone, from precomputed residuals.
double penalty_value(const ConstraintEval& residuals, const PenaltyConfig& cfg);

struct ViolationReport {
  double max_ineq_violation = 0.0;  // max(0, max_i (f_i - c_i))
  double max_eq_violation = 0.0;    // max_j |h_j - b_j|
  bool feasible = true;

  double max_violation() const { return max_ineq_violation > max_eq_violation ? max_ineq_violation : max_eq_violation; }
};

ViolationReport violation_report(const Vec& x, const Vec& p, const ProblemSpec& problem, double eq_tolerance = 0.0);

// True when both violations are within `tolerance` (used for the 0.1 / 1e-3
// feasibility fractions).
bool feasible_within(const ViolationReport& report, double tolerance);

}  // namespace penalearn
