#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace penalearn {

using Vec = Eigen::VectorXd;
// Batches are row-major: one sample per row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class HiddenActivation { tanh };
enum class OutputActivation { identity };

// Weights and biases of a dense network. Also used as the gradient container
// and for the ADAM moment tensors, which share the same shapes.
struct MlpParams {
  std::vector<Mat> weights;  // layer t: fan_out x fan_in
  std::vector<Vec> biases;   // layer t: fan_out

  static MlpParams zeros_like(const MlpParams& other);
  bool same_shape(const MlpParams& other) const;
  std::size_t parameter_count() const;
  // Flat view in (W_0, b_0, W_1, b_1, ...) order, W row-major.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
};

// Dense feed-forward network p -> x*. tanh on every hidden layer, identity
// on the output layer. Requires at least one hidden layer.
class Mlp {
 public:
  // All-zero weights and biases.
  explicit Mlp(std::vector<int> layer_sizes);
  Mlp(std::vector<int> layer_sizes, MlpParams params);

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp xavier(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  std::size_t layer_count() const { return layer_sizes_.size() - 1; }

  const MlpParams& params() const { return params_; }
  MlpParams& mutable_params() { return params_; }

  HiddenActivation hidden_activation() const { return HiddenActivation::tanh; }
  OutputActivation output_activation() const { return OutputActivation::identity; }

 private:
  std::vector<int> layer_sizes_;
  MlpParams params_;
};

// Cached activations for one batch. activations[0] is the input batch,
// pre_activations[t] = activations[t] * W_t^T + b_t and activations[t + 1]
// is its image under the layer's activation.
struct ForwardTrace {
  std::vector<Mat> pre_activations;
  std::vector<Mat> activations;

  Eigen::Index batch_size() const { return activations.empty() ? 0 : activations.front().rows(); }
  const Mat& output() const { return activations.back(); }
};

struct BackwardResult {
  MlpParams param_grads;
  Mat input_grads;
};

// Throws DimensionError on column mismatch, InputError on non-finite input.
ForwardTrace mlp_forward(const Mlp& net, const Mat& batch);

// Convenience: forward a single input vector, returning only the output.
Vec mlp_predict(const Mlp& net, const Vec& input);

// Gradients of sum over the batch of L given upstream dL/doutput.
// Throws TraceError if the trace does not belong to `net`.
BackwardResult mlp_backward(const Mlp& net, const ForwardTrace& trace, const Mat& upstream);

// Forward multiply-accumulate count n*m1 + sum m_i*m_{i+1} + m_l*k.
std::uint64_t mac_count(std::span<const int> layer_sizes);

// Training cost proxy: epochs * samples * mac_count.
std::uint64_t training_mac_estimate(std::span<const int> layer_sizes, std::uint64_t epochs,
                                    std::uint64_t samples);

}  // namespace penalearn
