#include "penalearn/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "penalearn/errors.hpp"
#include "penalearn/model_io.hpp"
#include "penalearn/penalty.hpp"
#include "penalearn/trainer.hpp"

namespace penalearn {

using Clock = std::chrono::steady_clock;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Nearest-rank percentile.
double percentile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

Vec vec_of(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

bool BenchRow::oracle_failed() const { return std::isnan(f0_oracle); }

double time_forward_ns(const Mlp& net, const Vec& params, int reps) {
  reps = std::max(reps, 1);
  double sink = 0.0;
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) sink += mlp_predict(net, params)[0];
  const auto t1 = Clock::now();
  // Keep the loop observable.
  if (std::isnan(sink)) return kNaN;
  return std::max(1e-3, std::chrono::duration<double, std::nano>(t1 - t0).count() / reps);
}

BenchAggregates compute_aggregates(const std::vector<BenchRow>& rows, std::uint64_t mac_count,
                                   const BenchOptions& options) {
  BenchAggregates agg;
  agg.mac_count = mac_count;
  if (rows.empty()) {
    agg.median_gap = agg.p95_gap = agg.feasible_frac_loose = agg.feasible_frac_strict = agg.speedup = kNaN;
    return agg;
  }
  std::vector<double> gaps, t_fwd, t_oracle;
  std::size_t loose = 0, strict = 0;
  for (const auto& r : rows) {
    if (r.oracle_failed()) {
      ++agg.oracle_failures;
    } else {
      gaps.push_back(r.gap);
    }
    t_fwd.push_back(r.t_fwd_ns);
    t_oracle.push_back(r.t_oracle_ns);
    loose += r.viol_dnn <= options.loose_tolerance;
    strict += r.viol_dnn <= options.strict_tolerance;
  }
  const double n = static_cast<double>(rows.size());
  agg.feasible_frac_loose = static_cast<double>(loose) / n;
  agg.feasible_frac_strict = static_cast<double>(strict) / n;
  agg.speedup = median_of(t_oracle) / median_of(t_fwd);
  agg.defined = !gaps.empty();
  agg.median_gap = gaps.empty() ? kNaN : median_of(gaps);
  agg.p95_gap = gaps.empty() ? kNaN : percentile_of(gaps, 0.95);
  return agg;
}

BenchReport run_benchmark(const ProblemSpec& spec, const Mlp& net, const OracleConfig& oracle_cfg,
                          const ParamSet& params, const BenchOptions& options) {
  check_net_fits(net, spec);
  oracle_cfg.validate();
  BenchReport report;
  report.param_dim = spec.param_dim;
  report.decision_dim = spec.decision_dim;
  const auto n = static_cast<std::size_t>(params.size());
  if (n > 0 && params.values.cols() != spec.param_dim) throw DimensionError("parameter set has wrong dimension");
  report.rows.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto& row = report.rows[i];
    row.params = params.row(static_cast<Eigen::Index>(i));
    row.x_dnn = mlp_predict(net, row.params);
    row.f0_dnn = eval_objective(spec, row.x_dnn, row.params).value;
    row.viol_dnn = violation_report(row.x_dnn, row.params, spec).max_violation();
    row.t_fwd_ns = time_forward_ns(net, row.params, options.forward_reps);
  }

  auto oracle_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& row = report.rows[i];
      const auto t0 = Clock::now();
      try {
        const OracleSolution sol = solve(spec, row.params, oracle_cfg);
        row.x_oracle = sol.x;
        row.f0_oracle = sol.objective;
        row.gap = row.f0_dnn - row.f0_oracle;
      } catch (const OracleFailedError&) {
        row.x_oracle = Vec::Constant(spec.decision_dim, kNaN);
        row.f0_oracle = row.gap = kNaN;
      }
      row.t_oracle_ns = std::max(1e-3, std::chrono::duration<double, std::nano>(Clock::now() - t0).count());
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    oracle_rows(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(oracle_rows, begin, end);
    }
  }

  report.aggregates = compute_aggregates(report.rows, mac_count(net.layer_sizes()), options);
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream os;
  for (int i = 0; i < report.param_dim; ++i) os << 'c' << i + 1 << ',';
  for (int i = 0; i < report.decision_dim; ++i) os << "x_dnn" << i + 1 << ',';
  for (int i = 0; i < report.decision_dim; ++i) os << "x_oracle" << i + 1 << ',';
  os << "f0_dnn,f0_oracle,gap,viol_dnn,t_fwd_ns,t_oracle_ns\n";
  for (const auto& r : report.rows) {
    for (Eigen::Index i = 0; i < r.params.size(); ++i) os << format_double(r.params[i]) << ',';
    for (Eigen::Index i = 0; i < r.x_dnn.size(); ++i) os << format_double(r.x_dnn[i]) << ',';
    for (Eigen::Index i = 0; i < r.x_oracle.size(); ++i) os << format_double(r.x_oracle[i]) << ',';
    os << format_double(r.f0_dnn) << ',' << format_double(r.f0_oracle) << ',' << format_double(r.gap) << ','
       << format_double(r.viol_dnn) << ',' << format_double(r.t_fwd_ns) << ',' << format_double(r.t_oracle_ns)
       << '\n';
  }
  const auto& a = report.aggregates;
  os << "# rows=" << report.rows.size() << '\n';
  os << "# defined=" << (a.defined ? 1 : 0) << '\n';
  os << "# median_gap=" << format_double(a.median_gap) << '\n';
  os << "# p95_gap=" << format_double(a.p95_gap) << '\n';
  os << "# feasible_frac_0.1=" << format_double(a.feasible_frac_loose) << '\n';
  os << "# feasible_frac_0.001=" << format_double(a.feasible_frac_strict) << '\n';
  os << "# speedup=" << format_double(a.speedup) << '\n';
  os << "# oracle_failures=" << a.oracle_failures << '\n';
  os << "# mac_count=" << a.mac_count << '\n';
  return os.str();
}

BenchReport parse_bench_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty bench report", 1);
  ++lineno;

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream cs(s);
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    return cells;
  };
  auto number = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("malformed number '" + s + "'", lineno);
    return v;
  };

  BenchReport report;
  const auto header = split(line);
  for (const auto& h : header) {
    if (starts_with(h, "x_dnn")) ++report.decision_dim;
    else if (starts_with(h, "c") && h.size() > 1 && std::isdigit(static_cast<unsigned char>(h[1]))) ++report.param_dim;
  }
  const std::size_t expected = static_cast<std::size_t>(report.param_dim + 2 * report.decision_dim) + 6;
  if (header.size() != expected || header.back() != "t_oracle_ns") throw ParseError("unexpected bench header", lineno);

  std::map<std::string, std::string> meta;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("malformed aggregate line", lineno);
      meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != expected) throw ParseError("row has " + std::to_string(cells.size()) + " cells", lineno);
    BenchRow row;
    std::size_t at = 0;
    auto take_vec = [&](int n) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v[i] = number(cells[at++]);
      return v;
    };
    row.params = take_vec(report.param_dim);
    row.x_dnn = take_vec(report.decision_dim);
    row.x_oracle = take_vec(report.decision_dim);
    row.f0_dnn = number(cells[at++]);
    row.f0_oracle = number(cells[at++]);
    row.gap = number(cells[at++]);
    row.viol_dnn = number(cells[at++]);
    row.t_fwd_ns = number(cells[at++]);
    row.t_oracle_ns = number(cells[at++]);
    report.rows.push_back(std::move(row));
  }
  auto meta_number = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(std::string("missing aggregate '") + key + "'", lineno);
    return number(it->second);
  };
  auto& a = report.aggregates;
  if (static_cast<std::size_t>(meta_number("rows")) != report.rows.size()) throw ParseError("row count mismatch", lineno);
  a.defined = meta_number("defined") != 0.0;
  a.median_gap = meta_number("median_gap");
  a.p95_gap = meta_number("p95_gap");
  a.feasible_frac_loose = meta_number("feasible_frac_0.1");
  a.feasible_frac_strict = meta_number("feasible_frac_0.001");
  a.speedup = meta_number("speedup");
  a.oracle_failures = static_cast<std::size_t>(meta_number("oracle_failures"));
  a.mac_count = static_cast<std::uint64_t>(meta_number("mac_count"));
  return report;
}

std::vector<Vec> table_parameters(const std::string& problem_name) {
  if (starts_with(problem_name, "rosenbrock")) {
    return {vec_of({1.0, 1.0}), vec_of({5.0, 0.1}), vec_of({25.0, 0.3})};
  }
  if (starts_with(problem_name, "ackley")) {
    return {vec_of({20.0, 0.2, 0.05, 0.05, 20.0}), vec_of({20.0, 0.2, 0.5, 0.5, 20.0}),
            vec_of({20.0, 0.05, 0.5, 0.5, 20.0})};
  }
  throw RegistryError("no comparison table for problem '" + problem_name + "'");
}

namespace {

struct PublishedRow {
  Vec reference;
  Vec dnn;
};

std::vector<PublishedRow> published_rows(const std::string& problem_name) {
  if (problem_name == "rosenbrock-1c") {
    return {{vec_of({0.8082, 0.5889}), vec_of({0.8394, 0.6040})},
            {vec_of({0.1000, 0.0100}), vec_of({0.1014, 0.0174})},
            {vec_of({0.3000, 0.0900}), vec_of({0.3109, 0.0957})}};
  }
  if (problem_name == "ackley-1c") {
    return {{vec_of({5.8e-12, 1.2e-12}), vec_of({-5.6177e-6, 7.2256e-5})},
            {vec_of({1.7e-11, 3.5e-11}), vec_of({-6.8992e-6, 7.7887e-5})},
            {vec_of({1e-11, 1.2e-11}), vec_of({-7.0035e-6, 7.8982e-5})}};
  }
  return {};
}

std::string join(const Vec& v, const char* sep, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
  return os.str();
}

}  // namespace

TableRepro table_repro(const ProblemSpec& spec, const Mlp& net, const OracleConfig& oracle_cfg) {
  check_net_fits(net, spec);
  const auto params = table_parameters(spec.name);
  const auto published = published_rows(spec.name);
  TableRepro table;
  table.problem = spec.name;
  bool any_feasible = false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    TableRow row;
    row.params = params[i];
    if (i < published.size()) {
      row.published_reference = published[i].reference;
      row.published_dnn = published[i].dnn;
    }
    const OracleSolution sol = solve(spec, row.params, oracle_cfg);
    row.x_oracle = sol.x;
    row.f0_oracle = sol.objective;
    row.viol_oracle = sol.max_violation;
    any_feasible = any_feasible || sol.feasible;
    row.x_dnn = mlp_predict(net, row.params);
    row.f0_dnn = eval_objective(spec, row.x_dnn, row.params).value;
    row.viol_dnn = violation_report(row.x_dnn, row.params, spec).max_violation();
    table.rows.push_back(std::move(row));
  }
  table.infeasible_warning = !any_feasible;
  return table;
}

std::string format_table(const TableRepro& table) {
  std::ostringstream os;
  if (table.infeasible_warning) {
    os << "WARNING: " << table.problem
       << " has an empty feasible set; every solution below violates a constraint.\n";
  }
  const std::vector<std::string> head{"params", "published ref", "published dnn", "oracle", "dnn", "viol oracle", "viol dnn"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& r : table.rows) {
    std::ostringstream vo, vd;
    vo << std::setprecision(4) << r.viol_oracle;
    vd << std::setprecision(4) << r.viol_dnn;
    cells.push_back({join(r.params, ",", 6), r.published_reference ? join(*r.published_reference, ", ", 5) : "-",
                     r.published_dnn ? join(*r.published_dnn, ", ", 5) : "-", join(r.x_oracle, ", ", 5),
                     join(r.x_dnn, ", ", 5), vo.str(), vd.str()});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << std::left << std::setw(static_cast<int>(width[c])) << row[c] << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return os.str();
}

std::string table_csv(const TableRepro& table) {
  std::ostringstream os;
  if (table.rows.empty()) return "";
  const Eigen::Index np = table.rows.front().params.size();
  const Eigen::Index nx = table.rows.front().x_dnn.size();
  for (Eigen::Index i = 0; i < np; ++i) os << 'c' << i + 1 << ',';
  for (const char* col : {"published_ref", "published_dnn", "x_oracle", "x_dnn"})
    for (Eigen::Index i = 0; i < nx; ++i) os << col << i + 1 << ',';
  os << "f0_oracle,f0_dnn,viol_oracle,viol_dnn\n";
  auto put = [&](const std::optional<Vec>& v) {
    for (Eigen::Index i = 0; i < nx; ++i) os << (v ? format_double((*v)[i]) : std::string()) << ',';
  };
  for (const auto& r : table.rows) {
    for (Eigen::Index i = 0; i < np; ++i) os << format_double(r.params[i]) << ',';
    put(r.published_reference);
    put(r.published_dnn);
    put(r.x_oracle);
    put(r.x_dnn);
    os << format_double(r.f0_oracle) << ',' << format_double(r.f0_dnn) << ',' << format_double(r.viol_oracle) << ','
       << format_double(r.viol_dnn) << '\n';
  }
  return os.str();
}

}  // namespace penalearn
