#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "penalearn/problems.hpp"

namespace penalearn {

// Per-instance reference solver: a dense grid scan plus multi-start BFGS
// descent on f0 + Omega with an increasing penalty weight.
struct OracleConfig {
  int grid_points_per_dim = 201;
  std::vector<ParamRange> grid_bounds;  // empty: [-6, 6] in every dimension
  int starts = 16;
  int descent_steps = 500;   // iterations per penalty stage
  double descent_lr = 1.0;   // initial line-search step
  std::vector<double> eta_schedule{1.0, 1e2, 1e4, 1e6, 1e8};
  double gamma = 2.0;
  double tolerance = 1e-12;  // relative step size at which descent stops
  double feasibility_tolerance = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
  ParamRange bounds(int dim) const;
  double final_eta() const { return eta_schedule.back(); }
};

enum class OracleMethod { grid, descent };

std::string_view to_string(OracleMethod method);

struct OracleSolution {
  Vec x;
  double objective = 0.0;
  double max_violation = 0.0;
  bool feasible = false;  // max_violation <= feasibility_tolerance
  double solve_time_s = 0.0;
  OracleMethod method = OracleMethod::descent;
};

// Grid minimizer of f0 over feasible points, or of f0 + Omega(final eta)
// when no grid point is feasible. Throws UnsupportedError above 3 dims.
OracleSolution grid_scan(const ProblemSpec& spec, const Vec& p, const OracleConfig& cfg);

// Multi-start penalized descent, one start seeded from the grid scan when the
// dimension permits. Feasible candidates rank ahead of infeasible ones, then
// by objective. Throws OracleFailedError when every start diverges.
OracleSolution solve(const ProblemSpec& spec, const Vec& p, const OracleConfig& cfg);

}  // namespace penalearn
