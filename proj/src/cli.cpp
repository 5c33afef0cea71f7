#include "penalearn/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "penalearn/errors.hpp"
#include "penalearn/model_io.hpp"

namespace penalearn {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"problem", "", "rosenbrock-1c|rosenbrock-3c|ackley-1c|ackley-3c", "problem name (required)"},
      {"seed", "0", ">= 0", "master seed; PENALEARN_SEED is used when unset"},
      {"threads", "1", ">= 1", "worker cap for oracle solves; 1 keeps every sum in fixed order"},
      {"model", "penalearn.model", "path", "model file written by train, read by eval/bench/table"},
      {"output", "", "path", "CSV output file (stdout when empty)"},
      {"samples", "1000", ">= 1", "training sample count N_s"},
      {"epochs", "5000", ">= 1", "training epochs N_e"},
      {"batch_size", "100", "[1, samples]", "minibatch size"},
      {"log_every", "100", ">= 1", "epochs between training log rows"},
      {"lr", "0.001", "> 0", "ADAM learning rate"},
      {"beta1", "0.9", "(0, 1)", "ADAM first-moment decay"},
      {"beta2", "0.999", "(0, 1)", "ADAM second-moment decay"},
      {"adam_eps", "1e-8", "> 0", "ADAM epsilon"},
      {"penalty", "piecewise", "piecewise|indicator|none", "constraint penalty mode"},
      {"eta", "1e8", ">= 0, one value or one per inequality", "inequality penalty weight(s)"},
      {"eta_eq", "1e8", ">= 0, one value or one per equality", "equality penalty weight(s)"},
      {"gamma", "2", ">= 1", "penalty exponent"},
      {"indicator_big", "1e12", "> 0", "finite value standing in for an infinite indicator penalty"},
      {"eq_tolerance", "0", ">= 0", "|h - b| accepted as satisfied"},
      {"feasibility_tol", "0.1", ">= 0", "violation tolerance behind the logged feasibility fraction"},
      {"grad_clip", "1", ">= 0 (0 disables)", "global L2 norm cap on each batch gradient"},
      {"normalize_inputs", "1", "0|1", "train on parameters rescaled from their ranges to [-1, 1]"},
      {"divergence_limit", "1e15", "> 0", "abort training when a batch mean loss exceeds this"},
      {"net_shape", "", "comma list, >= 3 sizes", "network layer sizes (problem default when empty)"},
      {"grid_points", "201", ">= 2", "oracle grid points per dimension"},
      {"grid_low", "-6", "< grid_high", "oracle grid lower bound (every dimension)"},
      {"grid_high", "6", "> grid_low", "oracle grid upper bound (every dimension)"},
      {"starts", "16", ">= 1", "oracle descent starts"},
      {"descent_steps", "500", ">= 1", "oracle BFGS iterations per penalty stage"},
      {"descent_lr", "1", "> 0", "oracle initial line-search step"},
      {"eta_schedule", "1,1e2,1e4,1e6,1e8", "strictly increasing, > 0", "oracle penalty weight stages"},
      {"oracle_tol", "1e-12", "> 0", "oracle relative step tolerance"},
      {"params", "", "comma list of param_dim values", "single instance for oracle/eval/bench"},
      {"eval_samples", "", ">= 1", "eval sample count (defaults to samples)"},
      {"eval_seed", "", ">= 0", "eval/bench sampling seed (defaults to seed: training samples)"},
      {"bench_samples", "100", ">= 1", "bench sample count"},
      {"forward_reps", "100", ">= 100", "forward-pass repetitions per timing"},
      {"speedup_threshold", "10", "> 0", "bench reports whether speedup reaches this"},
  };
  return keys;
}

namespace {

const ConfigKey& find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return k;
  }
  throw UsageError("unknown config key '" + name + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw UsageError("invalid value '" + value + "' for '" + key + "' (accepted: " + find_key(key).range + ")");
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const std::string t = trim(value);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) bad_value(key, value);
  return v;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const std::string t = trim(value);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, value);
  return v;
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const std::string t = trim(value);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, value);
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) bad_value(key, value);
  return out;
}

long long at_least(const std::string& key, const std::string& value, long long low) {
  const long long v = to_integer(key, value);
  if (v < low) bad_value(key, value);
  return v;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    find_key(key);
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> v;
  for (const auto& k : config_keys()) v[k.name] = k.default_value;
  bool seed_given = false;
  if (file) {
    for (auto& [key, value] : read_config_file(*file)) {
      v[key] = value;
      seed_given = seed_given || key == "seed";
    }
  }
  for (const auto& [key, value] : overrides) {
    find_key(key);
    v[key] = value;
    seed_given = seed_given || key == "seed";
  }
  if (!seed_given) {
    if (const char* env = std::getenv("PENALEARN_SEED"); env && *env) v["seed"] = env;
  }

  RunConfig cfg;
  cfg.problem = v["problem"];
  if (cfg.problem.empty()) throw UsageError("missing required key 'problem' (accepted: " + find_key("problem").range + ")");
  cfg.seed = to_seed("seed", v["seed"]);
  cfg.threads = static_cast<int>(at_least("threads", v["threads"], 1));
  cfg.model = v["model"];
  if (cfg.model.empty()) bad_value("model", v["model"]);
  cfg.output = v["output"];

  auto& t = cfg.train;
  t.seed = cfg.seed;
  t.sample_count = static_cast<std::size_t>(at_least("samples", v["samples"], 1));
  t.epochs = static_cast<int>(at_least("epochs", v["epochs"], 1));
  t.batch_size = static_cast<std::size_t>(at_least("batch_size", v["batch_size"], 1));
  if (t.batch_size > t.sample_count) bad_value("batch_size", v["batch_size"]);
  t.log_every = static_cast<int>(at_least("log_every", v["log_every"], 1));

  t.adam.learning_rate = to_double("lr", v["lr"]);
  if (!(t.adam.learning_rate > 0.0)) bad_value("lr", v["lr"]);
  t.adam.beta1 = to_double("beta1", v["beta1"]);
  if (!(t.adam.beta1 > 0.0 && t.adam.beta1 < 1.0)) bad_value("beta1", v["beta1"]);
  t.adam.beta2 = to_double("beta2", v["beta2"]);
  if (!(t.adam.beta2 > 0.0 && t.adam.beta2 < 1.0)) bad_value("beta2", v["beta2"]);
  t.adam.epsilon = to_double("adam_eps", v["adam_eps"]);
  if (!(t.adam.epsilon > 0.0)) bad_value("adam_eps", v["adam_eps"]);

  auto& pen = t.penalty;
  try {
    pen.mode = parse_penalty_mode(trim(v["penalty"]));
  } catch (const ConfigError&) {
    bad_value("penalty", v["penalty"]);
  }
  pen.eta_ineq = to_list("eta", v["eta"]);
  for (double e : pen.eta_ineq) if (!(e >= 0.0)) bad_value("eta", v["eta"]);
  pen.eta_eq = to_list("eta_eq", v["eta_eq"]);
  for (double e : pen.eta_eq) if (!(e >= 0.0)) bad_value("eta_eq", v["eta_eq"]);
  pen.gamma = to_double("gamma", v["gamma"]);
  if (!(pen.gamma >= 1.0)) bad_value("gamma", v["gamma"]);
  pen.indicator_big = to_double("indicator_big", v["indicator_big"]);
  if (!(pen.indicator_big > 0.0)) bad_value("indicator_big", v["indicator_big"]);
  pen.eq_tolerance = to_double("eq_tolerance", v["eq_tolerance"]);
  if (!(pen.eq_tolerance >= 0.0)) bad_value("eq_tolerance", v["eq_tolerance"]);
  t.feasibility_tolerance = to_double("feasibility_tol", v["feasibility_tol"]);
  if (!(t.feasibility_tolerance >= 0.0)) bad_value("feasibility_tol", v["feasibility_tol"]);
  t.divergence_limit = to_double("divergence_limit", v["divergence_limit"]);
  if (!(t.divergence_limit > 0.0)) bad_value("divergence_limit", v["divergence_limit"]);
  t.grad_clip = to_double("grad_clip", v["grad_clip"]);
  if (!(t.grad_clip >= 0.0)) bad_value("grad_clip", v["grad_clip"]);
  {
    const std::string flag = trim(v["normalize_inputs"]);
    if (flag != "0" && flag != "1") bad_value("normalize_inputs", v["normalize_inputs"]);
    t.normalize_inputs = flag == "1";
  }
  if (!trim(v["net_shape"]).empty()) {
    for (double s : to_list("net_shape", v["net_shape"])) {
      if (s < 1.0 || s != std::floor(s)) bad_value("net_shape", v["net_shape"]);
      t.net_shape.push_back(static_cast<int>(s));
    }
    if (t.net_shape.size() < 3) bad_value("net_shape", v["net_shape"]);
  }

  auto& o = cfg.oracle;
  o.seed = derive_seed(cfg.seed, 7);
  o.grid_points_per_dim = static_cast<int>(at_least("grid_points", v["grid_points"], 2));
  const double low = to_double("grid_low", v["grid_low"]);
  const double high = to_double("grid_high", v["grid_high"]);
  if (!(low < high)) bad_value("grid_high", v["grid_high"]);
  o.grid_bounds = {{low, high}};
  o.starts = static_cast<int>(at_least("starts", v["starts"], 1));
  o.descent_steps = static_cast<int>(at_least("descent_steps", v["descent_steps"], 1));
  o.descent_lr = to_double("descent_lr", v["descent_lr"]);
  if (!(o.descent_lr > 0.0)) bad_value("descent_lr", v["descent_lr"]);
  o.eta_schedule = to_list("eta_schedule", v["eta_schedule"]);
  for (std::size_t i = 0; i < o.eta_schedule.size(); ++i) {
    if (!(o.eta_schedule[i] > 0.0) || (i > 0 && !(o.eta_schedule[i] > o.eta_schedule[i - 1]))) {
      bad_value("eta_schedule", v["eta_schedule"]);
    }
  }
  o.gamma = pen.gamma;
  o.tolerance = to_double("oracle_tol", v["oracle_tol"]);
  if (!(o.tolerance > 0.0)) bad_value("oracle_tol", v["oracle_tol"]);

  if (!trim(v["params"]).empty()) {
    const auto list = to_list("params", v["params"]);
    cfg.params = Vec::Map(list.data(), static_cast<Eigen::Index>(list.size()));
  }
  cfg.eval_samples = v["eval_samples"].empty() ? t.sample_count
                                               : static_cast<std::size_t>(at_least("eval_samples", v["eval_samples"], 1));
  cfg.eval_seed = v["eval_seed"].empty() ? cfg.seed : to_seed("eval_seed", v["eval_seed"]);
  cfg.bench_samples = static_cast<std::size_t>(at_least("bench_samples", v["bench_samples"], 1));
  cfg.forward_reps = static_cast<int>(at_least("forward_reps", v["forward_reps"], 100));
  cfg.speedup_threshold = to_double("speedup_threshold", v["speedup_threshold"]);
  if (!(cfg.speedup_threshold > 0.0)) bad_value("speedup_threshold", v["speedup_threshold"]);

  // Problem-dependent checks, still before any work starts.
  ProblemSpec spec;
  try {
    spec = make_problem(cfg.problem);
  } catch (const RegistryError& e) {
    throw UsageError(std::string("problem: ") + e.what());
  }
  try {
    t.validate(spec);
    o.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (cfg.params && cfg.params->size() != spec.param_dim) {
    throw UsageError("params has " + std::to_string(cfg.params->size()) + " values, " + spec.name + " needs " +
                     std::to_string(spec.param_dim));
  }
  return cfg;
}

namespace {

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_file_atomic(cfg.output, text);
  }
}

Mlp load_required_model(const RunConfig& cfg) {
  if (!std::filesystem::exists(cfg.model)) {
    throw UsageError("model file '" + cfg.model.string() + "' not found (run 'train' first or pass --model)");
  }
  return load_model(cfg.model);
}

ParamSet instance_params(const RunConfig& cfg, const ProblemSpec& spec, std::size_t count) {
  if (cfg.params) return ParamSet{cfg.params->transpose(), cfg.eval_seed};
  return sample_params(spec, count, cfg.eval_seed);
}

std::string join(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = make_problem(cfg.problem);
  if (cfg.command == "train") {
    const TrainResult result = train(spec, cfg.train);
    save_model(result.net, cfg.model);
    emit(cfg, train_log_csv(result.log), out);
    const auto& last = result.log.back();
    err << "trained " << spec.name << " for " << last.epoch << " epochs: mean loss " << last.mean_loss
        << ", feasible fraction " << last.feasible_frac << ", model " << cfg.model.string() << '\n';
    return 0;
  }
  if (cfg.command == "eval") {
    const Mlp net = load_required_model(cfg);
    const auto reports = evaluate(net, spec, instance_params(cfg, spec, cfg.eval_samples), cfg.train.penalty);
    emit(cfg, eval_csv(reports), out);
    return 0;
  }
  if (cfg.command == "oracle") {
    if (!cfg.params) throw UsageError("oracle needs --params (comma-separated, " + std::to_string(spec.param_dim) + " values)");
    const OracleSolution sol = solve(spec, *cfg.params, cfg.oracle);
    std::ostringstream os;
    os << "problem " << spec.name << '\n'
       << "params " << join(*cfg.params) << '\n'
       << "x " << join(sol.x) << '\n'
       << "objective " << format_double(sol.objective) << '\n'
       << "max_violation " << format_double(sol.max_violation) << '\n'
       << "feasible " << (sol.feasible ? 1 : 0) << '\n'
       << "method " << to_string(sol.method) << '\n'
       << "solve_time_s " << format_double(sol.solve_time_s) << '\n';
    emit(cfg, os.str(), out);
    return 0;
  }
  if (cfg.command == "bench") {
    const Mlp net = load_required_model(cfg);
    BenchOptions options;
    options.forward_reps = cfg.forward_reps;
    options.threads = cfg.threads;
    const BenchReport report =
        run_benchmark(spec, net, cfg.oracle, instance_params(cfg, spec, cfg.bench_samples), options);
    emit(cfg, bench_csv(report), out);
    const double speedup = report.aggregates.speedup;
    err << spec.name << ": speedup " << speedup << "x (threshold " << cfg.speedup_threshold << "x: "
        << (speedup >= cfg.speedup_threshold ? "met" : "NOT met") << ")\n";
    return 0;
  }
  if (cfg.command == "table") {
    const Mlp net = load_required_model(cfg);
    const TableRepro table = table_repro(spec, net, cfg.oracle);
    out << format_table(table);
    if (!cfg.output.empty()) write_file_atomic(cfg.output, table_csv(table));
    return 0;
  }
  throw UsageError("unknown command '" + cfg.command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised learn-to-optimize engine with piece-wise penalty constraints", "penalearn"};
  app.require_subcommand(1);
  std::string config_file;
  std::map<std::string, std::string> flags;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"train", "train a network; writes the model file and the training log CSV"},
      {"eval", "run a trained model on sampled or given parameters; writes an evaluation CSV"},
      {"oracle", "solve one instance (--params) with the numerical oracle"},
      {"bench", "compare a trained model against the oracle; writes a benchmark CSV"},
      {"table", "reproduce the fixed-parameter comparison table for a problem"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_file, "flat key = value config file; flags override it");
    for (const auto& key : config_keys()) {
      std::string desc = key.help + " [default: " + (key.default_value.empty() ? "none" : key.default_value) +
                         "; range: " + key.range + "]";
      sub->add_option_function<std::string>(
          "--" + key.name, [&flags, name = key.name](const std::string& value) { flags[name] = value; }, desc);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "penalearn: usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig cfg = parse_config(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file), flags);
    cfg.command = app.get_subcommands().front()->get_name();
    return dispatch(cfg, out, err);
  } catch (const UsageError& e) {
    err << "penalearn: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "penalearn: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace penalearn
