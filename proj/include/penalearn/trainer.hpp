#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "penalearn/adam.hpp"
#include "penalearn/mlp.hpp"
#include "penalearn/penalty.hpp"
#include "penalearn/problems.hpp"

namespace penalearn {

struct TrainConfig {
  std::size_t sample_count = 1000;
  int epochs = 5000;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;
  AdamConfig adam;
  PenaltyConfig penalty;
  int log_every = 100;
  std::vector<int> net_shape;  // empty: the problem's default shape
  // Tolerance behind the logged feasibility fraction.
  double feasibility_tolerance = 0.1;
  // Abort when a batch mean loss exceeds this.
  double divergence_limit = 1e15;
  // Train on parameters mapped affinely from their sampling ranges onto
  // [-1, 1]; the map is folded into the first layer of the returned net.
  bool normalize_inputs = true;
  // Rescale each batch gradient to at most this global L2 norm (0: off).
  // With eta = 1e8 a single violated sample otherwise inflates ADAM's second
  // moment for ~1/(1 - beta2) steps and freezes progress on the objective.
  double grad_clip = 1.0;

  void validate(const ProblemSpec& spec) const;
  std::vector<int> resolved_shape(const ProblemSpec& spec) const;
};

struct TrainLogEntry {
  int epoch = 0;  // number of completed epochs
  double mean_loss = 0.0;
  double mean_objective = 0.0;
  double mean_penalty = 0.0;
  double feasible_frac = 0.0;
  double elapsed_s = 0.0;
};

using TrainLog = std::vector<TrainLogEntry>;

struct TrainResult {
  Mlp net;
  TrainLog log;
  ParamSet samples;
};

// Mean of f0 + Omega over a set of parameter rows, plus the decomposition.
struct MeanLoss {
  double loss = 0.0;
  double objective = 0.0;
  double penalty = 0.0;
  double feasible_frac = 0.0;
};

struct BatchGradient {
  MeanLoss mean;
  MlpParams grads;  // gradient of the batch-mean loss w.r.t. the network
};

// Forward every row of `params` through the net and average the penalized
// loss. Rows are summed in order, so results are deterministic.
MeanLoss mean_loss(const Mlp& net, const ProblemSpec& spec, const Mat& params, const PenaltyConfig& penalty,
                   double feasibility_tolerance);

BatchGradient batch_gradient(const Mlp& net, const ProblemSpec& spec, const Mat& params,
                             const PenaltyConfig& penalty, double feasibility_tolerance = 0.1);

// Sample N_s parameter vectors, then for each epoch reshuffle and take one
// ADAM step per minibatch on the batch-mean of f0 + Omega. Throws
// TrainingDivergedError on a non-finite or runaway loss.
TrainResult train(const ProblemSpec& spec, const TrainConfig& cfg);

// Same loop on a caller-supplied starting network and sample set.
TrainResult train_from(const ProblemSpec& spec, const TrainConfig& cfg, Mlp net, ParamSet samples);

// epoch,mean_loss,mean_objective,mean_penalty,feasible_frac,elapsed_s
std::string train_log_csv(const TrainLog& log);

struct EvalReport {
  Vec params;
  Vec solution;
  double objective = 0.0;
  ViolationReport violation;
  double t_forward_ns = 0.0;
};

// x* = forward(p) per row, scored against the problem. Throws DimensionError
// when the net does not fit the problem.
std::vector<EvalReport> evaluate(const Mlp& net, const ProblemSpec& spec, const ParamSet& params,
                                 const PenaltyConfig& cfg);

// c1..,x1..,objective,max_ineq_violation,max_eq_violation,feasible,t_forward_ns
std::string eval_csv(const std::vector<EvalReport>& reports);

void check_net_fits(const Mlp& net, const ProblemSpec& spec);

// Affine input map p -> (p - offset) .* scale that sends each sampling range
// onto [-1, 1]. Degenerate ranges get scale 1.
struct InputScaling {
  Vec offset;
  Vec scale;

  static InputScaling identity(int dim);
  static InputScaling from_ranges(const std::vector<ParamRange>& ranges);
  Mat apply(const Mat& params) const;
};

// Network on raw inputs equivalent to `net` applied after `scaling`.
Mlp fold_input_scaling(const Mlp& net, const InputScaling& scaling);

// Derive an independent seed stream (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace penalearn
