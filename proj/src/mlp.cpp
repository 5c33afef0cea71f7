#include "penalearn/mlp.hpp"

#include <cmath>
#include <string>

#include "penalearn/errors.hpp"
#include "penalearn/random.hpp"

namespace penalearn {

namespace {

void validate_layer_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 3) {
    throw DimensionError("network needs at least one hidden layer (got " +
                         std::to_string(sizes.size()) + " layer sizes)");
  }
  for (int s : sizes) {
    if (s <= 0) throw DimensionError("layer sizes must be positive");
  }
}

}  // namespace

MlpParams MlpParams::zeros_like(const MlpParams& other) {
  MlpParams out;
  out.weights.reserve(other.weights.size());
  out.biases.reserve(other.biases.size());
  for (const auto& w : other.weights) out.weights.push_back(Mat::Zero(w.rows(), w.cols()));
  for (const auto& b : other.biases) out.biases.push_back(Vec::Zero(b.size()));
  return out;
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    if (weights[t].rows() != other.weights[t].rows() || weights[t].cols() != other.weights[t].cols())
      return false;
  }
  for (std::size_t t = 0; t < biases.size(); ++t) {
    if (biases[t].size() != other.biases[t].size()) return false;
  }
  return true;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t t = 0; t < weights.size(); ++t) {
    flat.insert(flat.end(), weights[t].data(), weights[t].data() + weights[t].size());
    flat.insert(flat.end(), biases[t].data(), biases[t].data() + biases[t].size());
  }
  return flat;
}

void MlpParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw DimensionError("flat parameter length mismatch");
  std::size_t at = 0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    for (Eigen::Index i = 0; i < weights[t].size(); ++i) weights[t].data()[i] = flat[at++];
    for (Eigen::Index i = 0; i < biases[t].size(); ++i) biases[t][i] = flat[at++];
  }
}

Mlp::Mlp(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  validate_layer_sizes(layer_sizes_);
  for (std::size_t t = 0; t + 1 < layer_sizes_.size(); ++t) {
    params_.weights.push_back(Mat::Zero(layer_sizes_[t + 1], layer_sizes_[t]));
    params_.biases.push_back(Vec::Zero(layer_sizes_[t + 1]));
  }
}

Mlp::Mlp(std::vector<int> layer_sizes, MlpParams params) : Mlp(std::move(layer_sizes)) {
  if (!params.same_shape(params_)) throw DimensionError("parameter shapes do not match layer sizes");
  for (const auto& w : params.weights) {
    if (!w.allFinite()) throw InputError("non-finite weight");
  }
  for (const auto& b : params.biases) {
    if (!b.allFinite()) throw InputError("non-finite bias");
  }
  params_ = std::move(params);
}

Mlp Mlp::xavier(std::vector<int> layer_sizes, std::uint64_t seed) {
  Mlp net(std::move(layer_sizes));
  Rng rng(seed);
  for (std::size_t t = 0; t < net.layer_count(); ++t) {
    auto& w = net.params_.weights[t];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  }
  return net;
}

ForwardTrace mlp_forward(const Mlp& net, const Mat& batch) {
  if (batch.cols() != net.input_dim()) {
    throw DimensionError("input has " + std::to_string(batch.cols()) + " columns, network expects " +
                         std::to_string(net.input_dim()));
  }
  if (!batch.allFinite()) throw InputError("non-finite network input");

  const auto& p = net.params();
  const std::size_t layers = net.layer_count();
  ForwardTrace trace;
  trace.pre_activations.reserve(layers);
  trace.activations.reserve(layers + 1);
  trace.activations.push_back(batch);
  for (std::size_t t = 0; t < layers; ++t) {
    Mat z = trace.activations.back() * p.weights[t].transpose();
    z.rowwise() += p.biases[t].transpose();
    trace.pre_activations.push_back(z);
    if (t + 1 < layers) {
      trace.activations.push_back(z.array().tanh().matrix());
    } else {
      trace.activations.push_back(std::move(z));
    }
  }
  return trace;
}

Vec mlp_predict(const Mlp& net, const Vec& input) {
  Mat batch = input.transpose();
  return mlp_forward(net, batch).output().row(0).transpose();
}

BackwardResult mlp_backward(const Mlp& net, const ForwardTrace& trace, const Mat& upstream) {
  const std::size_t layers = net.layer_count();
  if (trace.activations.size() != layers + 1 || trace.pre_activations.size() != layers) {
    throw TraceError("trace layer count does not match network");
  }
  const Eigen::Index batch = trace.batch_size();
  for (std::size_t t = 0; t <= layers; ++t) {
    if (trace.activations[t].rows() != batch || trace.activations[t].cols() != net.layer_sizes()[t]) {
      throw TraceError("trace activation shape does not match network at layer " + std::to_string(t));
    }
  }
  if (upstream.rows() != batch || upstream.cols() != net.output_dim()) {
    throw DimensionError("upstream gradient shape does not match network output");
  }

  const auto& p = net.params();
  BackwardResult out{MlpParams::zeros_like(p), Mat()};
  Mat delta = upstream;  // identity output layer
  for (std::size_t t = layers; t-- > 0;) {
    out.param_grads.weights[t].noalias() = delta.transpose() * trace.activations[t];
    out.param_grads.biases[t] = delta.colwise().sum().transpose();
    Mat back = delta * p.weights[t];
    if (t > 0) {
      const auto& a = trace.activations[t];
      back.array() *= (1.0 - a.array().square());
    }
    delta = std::move(back);
  }
  out.input_grads = std::move(delta);
  return out;
}

std::uint64_t mac_count(std::span<const int> layer_sizes) {
  if (layer_sizes.size() < 3) throw DimensionError("mac_count needs at least one hidden layer");
  std::uint64_t total = 0;
  for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
    if (layer_sizes[t] <= 0 || layer_sizes[t + 1] <= 0) throw DimensionError("layer sizes must be positive");
    total += static_cast<std::uint64_t>(layer_sizes[t]) * static_cast<std::uint64_t>(layer_sizes[t + 1]);
  }
  return total;
}

std::uint64_t training_mac_estimate(std::span<const int> layer_sizes, std::uint64_t epochs,
                                    std::uint64_t samples) {
  return epochs * samples * mac_count(layer_sizes);
}

}  // namespace penalearn
