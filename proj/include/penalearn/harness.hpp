#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "penalearn/mlp.hpp"
#include "penalearn/oracle.hpp"
#include "penalearn/problems.hpp"

namespace penalearn {

struct BenchRow {
  Vec params;
  Vec x_dnn;
  Vec x_oracle;  // NaN-filled when the oracle failed
  double f0_dnn = 0.0;
  double f0_oracle = 0.0;
  double gap = 0.0;       // f0_dnn - f0_oracle
  double viol_dnn = 0.0;  // max constraint violation of x_dnn
  double t_fwd_ns = 0.0;
  double t_oracle_ns = 0.0;

  bool oracle_failed() const;
};

struct BenchAggregates {
  bool defined = false;  // false for an empty report (and no gap rows)
  double median_gap = 0.0;
  double p95_gap = 0.0;
  double feasible_frac_loose = 0.0;   // viol_dnn <= 0.1
  double feasible_frac_strict = 0.0;  // viol_dnn <= 1e-3
  double speedup = 0.0;               // median t_oracle / median t_fwd
  std::size_t oracle_failures = 0;
  std::uint64_t mac_count = 0;
};

struct BenchReport {
  int param_dim = 0;
  int decision_dim = 0;
  std::vector<BenchRow> rows;
  BenchAggregates aggregates;
};

struct BenchOptions {
  int forward_reps = 100;
  double loose_tolerance = 0.1;
  double strict_tolerance = 1e-3;
  // Oracle solves run on up to this many threads; timings are only
  // comparable across rows with threads == 1.
  int threads = 1;
};

BenchReport run_benchmark(const ProblemSpec& spec, const Mlp& net, const OracleConfig& oracle_cfg,
                          const ParamSet& params, const BenchOptions& options = {});

BenchAggregates compute_aggregates(const std::vector<BenchRow>& rows, std::uint64_t mac_count,
                                   const BenchOptions& options = {});

// Rows as CSV, aggregates as trailing '#'-prefixed key=value lines.
std::string bench_csv(const BenchReport& report);
BenchReport parse_bench_csv(const std::string& text);

// Mean wall time of one single-instance forward pass over `reps` calls.
double time_forward_ns(const Mlp& net, const Vec& params, int reps);

// Fixed parameter sets of the published comparison tables: the Rosenbrock
// table for rosenbrock-*, the Ackley table for ackley-*.
std::vector<Vec> table_parameters(const std::string& problem_name);

struct TableRow {
  Vec params;
  std::optional<Vec> published_reference;  // interior-point column
  std::optional<Vec> published_dnn;
  Vec x_oracle;
  Vec x_dnn;
  double f0_oracle = 0.0;
  double f0_dnn = 0.0;
  double viol_oracle = 0.0;
  double viol_dnn = 0.0;
};

struct TableRepro {
  std::string problem;
  std::vector<TableRow> rows;
  // Set when no oracle row is feasible (the -3c variants).
  bool infeasible_warning = false;
};

TableRepro table_repro(const ProblemSpec& spec, const Mlp& net, const OracleConfig& oracle_cfg);
std::string format_table(const TableRepro& table);
std::string table_csv(const TableRepro& table);

}  // namespace penalearn
