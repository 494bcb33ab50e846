#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace gridroute {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.bias.size() == b.bias.size() && a.weights == b.weights && a.bias == b.bias;
  }
};

/// Default Q-network shape: 13 -> 512 -> 512 -> 12.
std::vector<int> default_layer_sizes(int num_agents = 3, int num_landmarks = 5, int hidden = 512);

/// Fully connected network, rectifier on every hidden layer and identity on
/// the output layer.
class QNetwork {
public:
  QNetwork() = default;
  /// Zero-initialised network with the given layer widths (at least two).
  explicit QNetwork(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

/// He-normal weights (variance 2/fan_in), zero biases; deterministic per seed.
QNetwork init_network(std::uint64_t seed, const std::vector<int>& layer_sizes = default_layer_sizes());

/// Input of every layer plus the final output, one column per sample.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  const Eigen::MatrixXd& output() const { return activations.back(); }
};

ForwardCache forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs);

/// Throws NumericalError if the output is not finite.
Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& input);

using Gradients = std::vector<DenseLayer>;

Gradients zero_gradients(const QNetwork& net);
double squared_norm(const Gradients& grads);
bool all_finite(const Gradients& grads);

/// Gradient of sum_b <grad_output[:,b], net(input[:,b])> with respect to
/// every parameter. The rectifier derivative at exactly 0 is 0.
Gradients backward_batch(const QNetwork& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_output);

Gradients backward(const QNetwork& net, const Eigen::VectorXd& input, const Eigen::VectorXd& grad_output);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  Gradients first_moment;
  Gradients second_moment;

  static AdamState for_network(const QNetwork& net, AdamConfig config = {});
};

/// Bias-corrected Adam update, in place.
void adam_step(QNetwork& net, const Gradients& grads, AdamState& adam);

/// Independent deep copy used as the frozen target network.
inline QNetwork sync_target(const QNetwork& source) { return source; }

}  // namespace gridroute
