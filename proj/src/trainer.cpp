#include "penalearn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "penalearn/errors.hpp"
#include "penalearn/model_io.hpp"
#include "penalearn/random.hpp"

namespace penalearn {

using Clock = std::chrono::steady_clock;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void TrainConfig::validate(const ProblemSpec& spec) const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (sample_count < 1) throw ConfigError("sample_count must be >= 1");
  if (batch_size < 1 || batch_size > sample_count) throw ConfigError("batch_size must be in [1, sample_count]");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (!(feasibility_tolerance >= 0.0)) throw ConfigError("feasibility tolerance must be >= 0");
  if (!(divergence_limit > 0.0)) throw ConfigError("divergence limit must be > 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
  adam.validate();
  penalty.validate(spec);
  const auto shape = resolved_shape(spec);
  if (shape.size() < 3) throw ConfigError("network shape needs at least one hidden layer");
  if (shape.front() != spec.param_dim || shape.back() != spec.decision_dim) {
    throw ConfigError("network shape must map " + std::to_string(spec.param_dim) + " inputs to " +
                      std::to_string(spec.decision_dim) + " outputs");
  }
}

std::vector<int> TrainConfig::resolved_shape(const ProblemSpec& spec) const {
  return net_shape.empty() ? spec.default_net_shape : net_shape;
}

void check_net_fits(const Mlp& net, const ProblemSpec& spec) {
  if (net.input_dim() != spec.param_dim || net.output_dim() != spec.decision_dim) {
    throw DimensionError("network maps " + std::to_string(net.input_dim()) + " -> " +
                         std::to_string(net.output_dim()) + " but " + spec.name + " needs " +
                         std::to_string(spec.param_dim) + " -> " + std::to_string(spec.decision_dim));
  }
}

InputScaling InputScaling::identity(int dim) { return {Vec::Zero(dim), Vec::Ones(dim)}; }

InputScaling InputScaling::from_ranges(const std::vector<ParamRange>& ranges) {
  const auto n = static_cast<Eigen::Index>(ranges.size());
  InputScaling s{Vec(n), Vec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = ranges[static_cast<std::size_t>(i)];
    const double half = 0.5 * (r.high - r.low);
    s.offset[i] = 0.5 * (r.low + r.high);
    s.scale[i] = half > 0.0 ? 1.0 / half : 1.0;
  }
  return s;
}

Mat InputScaling::apply(const Mat& params) const {
  Mat out = params;
  out.rowwise() -= offset.transpose();
  out.array().rowwise() *= scale.transpose().array();
  return out;
}

Mlp fold_input_scaling(const Mlp& net, const InputScaling& scaling) {
  if (scaling.scale.size() != net.input_dim()) throw DimensionError("input scaling does not match network");
  MlpParams params = net.params();
  const Mat& w = net.params().weights.front();
  params.biases.front() -= w * scaling.scale.cwiseProduct(scaling.offset);
  params.weights.front() = w * scaling.scale.asDiagonal();
  return Mlp(net.layer_sizes(), std::move(params));
}

namespace {

struct BatchPass {
  MeanLoss mean;
  Mat upstream;  // d(batch mean loss) / d x*, one row per sample
};

// `first_index` only labels errors with a position in the caller's sample set.
BatchPass penalized_pass(const Mat& outputs, const ProblemSpec& spec, const Mat& params,
                         const PenaltyConfig& penalty, double feasibility_tolerance, bool want_grad,
                         const std::vector<Eigen::Index>* sample_ids = nullptr) {
  const Eigen::Index n = outputs.rows();
  BatchPass pass;
  if (want_grad) pass.upstream.resize(n, outputs.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  long feasible = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const Vec x = outputs.row(r).transpose();
    const Vec p = params.row(r).transpose();
    LossEval le;
    try {
      le = total_loss(x, p, spec, penalty);
    } catch (const EvaluationError& e) {
      const long id = sample_ids ? static_cast<long>((*sample_ids)[static_cast<std::size_t>(r)]) : static_cast<long>(r);
      throw TrainingDivergedError(std::string(e.what()) + " at sample " + std::to_string(id), -1, id);
    }
    pass.mean.loss += le.loss;
    pass.mean.objective += le.objective;
    pass.mean.penalty += le.penalty;
    if (feasible_within(violation_report(x, p, spec), feasibility_tolerance)) ++feasible;
    if (want_grad) pass.upstream.row(r) = le.grad.transpose() * inv_n;
  }
  pass.mean.loss *= inv_n;
  pass.mean.objective *= inv_n;
  pass.mean.penalty *= inv_n;
  pass.mean.feasible_frac = static_cast<double>(feasible) * inv_n;
  return pass;
}

void clip_global_norm(MlpParams& grads, double limit) {
  double sq = 0.0;
  for (const auto& w : grads.weights) sq += w.squaredNorm();
  for (const auto& b : grads.biases) sq += b.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm <= limit) return;
  const double factor = limit / norm;
  for (auto& w : grads.weights) w *= factor;
  for (auto& b : grads.biases) b *= factor;
}

}  // namespace

MeanLoss mean_loss(const Mlp& net, const ProblemSpec& spec, const Mat& params, const PenaltyConfig& penalty,
                   double feasibility_tolerance) {
  check_net_fits(net, spec);
  const ForwardTrace trace = mlp_forward(net, params);
  return penalized_pass(trace.output(), spec, params, penalty, feasibility_tolerance, false).mean;
}

BatchGradient batch_gradient(const Mlp& net, const ProblemSpec& spec, const Mat& params,
                             const PenaltyConfig& penalty, double feasibility_tolerance) {
  check_net_fits(net, spec);
  const ForwardTrace trace = mlp_forward(net, params);
  BatchPass pass = penalized_pass(trace.output(), spec, params, penalty, feasibility_tolerance, true);
  return {pass.mean, mlp_backward(net, trace, pass.upstream).param_grads};
}

TrainResult train(const ProblemSpec& spec, const TrainConfig& cfg) {
  cfg.validate(spec);
  ParamSet samples = sample_params(spec, cfg.sample_count, cfg.seed);
  Mlp net = Mlp::xavier(cfg.resolved_shape(spec), derive_seed(cfg.seed, 1));
  return train_from(spec, cfg, std::move(net), std::move(samples));
}

TrainResult train_from(const ProblemSpec& spec, const TrainConfig& cfg, Mlp net, ParamSet samples) {
  cfg.validate(spec);
  check_net_fits(net, spec);
  if (samples.values.cols() != spec.param_dim) throw DimensionError("sample set has wrong parameter dimension");
  if (static_cast<std::size_t>(samples.size()) < cfg.batch_size) throw ConfigError("batch_size exceeds sample count");

  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const InputScaling scaling = cfg.normalize_inputs ? InputScaling::from_ranges(spec.param_ranges)
                                                     : InputScaling::identity(spec.param_dim);
  const Mat inputs = scaling.apply(samples.values);

  TrainLog log;
  auto record = [&](int epoch) {
    MeanLoss m;
    try {
      m = penalized_pass(mlp_forward(net, inputs).output(), spec, samples.values, cfg.penalty,
                         cfg.feasibility_tolerance, false)
              .mean;
    } catch (const TrainingDivergedError& e) {
      throw TrainingDivergedError(std::string("training diverged at epoch ") + std::to_string(epoch) + ": " + e.what(),
                                  epoch, e.sample());
    }
    if (!std::isfinite(m.loss)) {
      throw TrainingDivergedError("non-finite mean loss at epoch " + std::to_string(epoch), epoch, -1);
    }
    log.push_back({epoch, m.loss, m.objective, m.penalty, m.feasible_frac, elapsed()});
  };

  AdamState adam = AdamState::for_network(net, cfg.adam);
  Rng shuffle_rng(derive_seed(cfg.seed, 2));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t batch = cfg.batch_size;
  Mat batch_params(static_cast<Eigen::Index>(batch), spec.param_dim);
  Mat batch_inputs(static_cast<Eigen::Index>(batch), spec.param_dim);
  std::vector<Eigen::Index> batch_ids(batch);

  record(0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    // Trailing samples that do not fill a batch form a smaller last batch.
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      const auto rows = static_cast<Eigen::Index>(end - begin);
      if (batch_params.rows() != rows) {
        batch_params.resize(rows, spec.param_dim);
        batch_inputs.resize(rows, spec.param_dim);
      }
      batch_ids.resize(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = static_cast<Eigen::Index>(i - begin);
        batch_params.row(r) = samples.values.row(order[i]);
        batch_inputs.row(r) = inputs.row(order[i]);
        batch_ids[i - begin] = order[i];
      }
      const ForwardTrace trace = mlp_forward(net, batch_inputs);
      BatchPass pass;
      try {
        pass = penalized_pass(trace.output(), spec, batch_params, cfg.penalty, cfg.feasibility_tolerance, true,
                              &batch_ids);
      } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what(), epoch,
                                    e.sample());
      }
      if (!(pass.mean.loss <= cfg.divergence_limit)) {
        throw TrainingDivergedError("training diverged at epoch " + std::to_string(epoch) + ": batch mean loss " +
                                        format_double(pass.mean.loss) + " exceeds limit",
                                    epoch, -1);
      }
      MlpParams grads = mlp_backward(net, trace, pass.upstream).param_grads;
      if (cfg.grad_clip > 0.0) clip_global_norm(grads, cfg.grad_clip);
      adam_step(net, adam, grads);
    }
    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs) record(epoch);
  }
  return {fold_input_scaling(net, scaling), std::move(log), std::move(samples)};
}

std::string train_log_csv(const TrainLog& log) {
  std::ostringstream os;
  os << "epoch,mean_loss,mean_objective,mean_penalty,feasible_frac,elapsed_s\n";
  for (const auto& e : log) {
    os << e.epoch << ',' << format_double(e.mean_loss) << ',' << format_double(e.mean_objective) << ','
       << format_double(e.mean_penalty) << ',' << format_double(e.feasible_frac) << ',' << format_double(e.elapsed_s)
       << '\n';
  }
  return os.str();
}

std::vector<EvalReport> evaluate(const Mlp& net, const ProblemSpec& spec, const ParamSet& params,
                                 const PenaltyConfig& cfg) {
  check_net_fits(net, spec);
  if (params.size() > 0 && params.values.cols() != spec.param_dim) {
    throw DimensionError("parameter set has wrong dimension");
  }
  std::vector<EvalReport> reports;
  reports.reserve(static_cast<std::size_t>(params.size()));
  for (Eigen::Index r = 0; r < params.size(); ++r) {
    EvalReport rep;
    rep.params = params.row(r);
    const auto t0 = Clock::now();
    rep.solution = mlp_predict(net, rep.params);
    const auto t1 = Clock::now();
    rep.t_forward_ns = std::max(1.0, std::chrono::duration<double, std::nano>(t1 - t0).count());
    rep.objective = eval_objective(spec, rep.solution, rep.params).value;
    rep.violation = violation_report(rep.solution, rep.params, spec, cfg.eq_tolerance);
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string eval_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  const Eigen::Index np = reports.empty() ? 0 : reports.front().params.size();
  const Eigen::Index nx = reports.empty() ? 0 : reports.front().solution.size();
  for (Eigen::Index i = 0; i < np; ++i) os << 'c' << i + 1 << ',';
  for (Eigen::Index i = 0; i < nx; ++i) os << 'x' << i + 1 << ',';
  os << "objective,max_ineq_violation,max_eq_violation,feasible,t_forward_ns\n";
  for (const auto& r : reports) {
    for (Eigen::Index i = 0; i < np; ++i) os << format_double(r.params[i]) << ',';
    for (Eigen::Index i = 0; i < nx; ++i) os << format_double(r.solution[i]) << ',';
    os << format_double(r.objective) << ',' << format_double(r.violation.max_ineq_violation) << ','
       << format_double(r.violation.max_eq_violation) << ',' << (r.violation.feasible ? 1 : 0) << ','
       << format_double(r.t_forward_ns) << '\n';
  }
  return os.str();
}

}  // namespace penalearn
