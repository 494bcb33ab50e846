#include "gridroute/neural_net.hpp"

#include <cmath>
#include <string>

#include "gridroute/error.hpp"
#include "gridroute/rng.hpp"

namespace gridroute {

std::vector<int> default_layer_sizes(int num_agents, int num_landmarks, int hidden) {
  return {num_agents + 2 * num_landmarks, hidden, hidden, 4 * num_agents};
}

QNetwork::QNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ValidationError("network needs at least an input and an output layer");
  for (int s : sizes_) {
    if (s <= 0) throw ValidationError("layer width must be positive");
  }
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[i + 1], sizes_[i]), Eigen::VectorXd::Zero(sizes_[i + 1])});
  }
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool QNetwork::all_finite() const { return gridroute::all_finite(layers_); }

QNetwork init_network(std::uint64_t seed, const std::vector<int>& layer_sizes) {
  QNetwork net(layer_sizes);
  Rng rng(seed);
  for (auto& layer : net.layers()) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.weights.cols()));
    // Row-major fill so the draw order matches the serialised layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = stddev * rng.normal();
    }
  }
  return net;
}

ForwardCache forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_size()) {
    throw ValidationError("input length " + std::to_string(inputs.rows()) + " does not match network input " +
                          std::to_string(net.input_size()));
  }
  const auto& layers = net.layers();
  ForwardCache cache;
  cache.activations.reserve(layers.size() + 1);
  cache.activations.push_back(inputs);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weights * cache.activations.back();
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size()) z = z.cwiseMax(0.0);
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& input) {
  Eigen::VectorXd q = forward_batch(net, input).output().col(0);
  if (!q.allFinite()) throw NumericalError("non-finite network output");
  return q;
}

Gradients zero_gradients(const QNetwork& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

double squared_norm(const Gradients& grads) {
  double s = 0.0;
  for (const auto& g : grads) s += g.weights.squaredNorm() + g.bias.squaredNorm();
  return s;
}

bool all_finite(const Gradients& grads) {
  for (const auto& g : grads) {
    if (!g.weights.allFinite() || !g.bias.allFinite()) return false;
  }
  return true;
}

Gradients backward_batch(const QNetwork& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_output) {
  const auto& layers = net.layers();
  if (grad_output.rows() != net.output_size() || grad_output.cols() != cache.output().cols()) {
    throw ValidationError("output gradient shape does not match forward pass");
  }
  Gradients grads(layers.size());
  Eigen::MatrixXd delta = grad_output;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[i];
    grads[i].weights = delta * input.transpose();
    grads[i].bias = delta.rowwise().sum();
    if (i == 0) break;
    Eigen::MatrixXd upstream = layers[i].weights.transpose() * delta;
    // activations[i] is relu(z) of layer i-1; relu(z) > 0 exactly when z > 0.
    delta = upstream.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

Gradients backward(const QNetwork& net, const Eigen::VectorXd& input, const Eigen::VectorXd& grad_output) {
  return backward_batch(net, forward_batch(net, input), grad_output);
}

AdamState AdamState::for_network(const QNetwork& net, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.first_moment = zero_gradients(net);
  s.second_moment = zero_gradients(net);
  return s;
}

void adam_step(QNetwork& net, const Gradients& grads, AdamState& adam) {
  auto& layers = net.layers();
  auto same_shape = [](const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.bias.size() == b.bias.size();
  };
  bool ok = grads.size() == layers.size() && adam.first_moment.size() == layers.size() &&
            adam.second_moment.size() == layers.size();
  for (std::size_t i = 0; ok && i < layers.size(); ++i) {
    ok = same_shape(layers[i], grads[i]) && same_shape(layers[i], adam.first_moment[i]) &&
         same_shape(layers[i], adam.second_moment[i]);
  }
  if (!ok) throw ValidationError("Adam state does not match network shape");
  ++adam.step;
  const AdamConfig& hp = adam.config;
  const double t = static_cast<double>(adam.step);
  const double correction1 = 1.0 - std::pow(hp.beta1, t);
  const double correction2 = 1.0 - std::pow(hp.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = hp.beta1 * m + (1.0 - hp.beta1) * grad;
    v = hp.beta2 * v + (1.0 - hp.beta2) * grad.cwiseProduct(grad);
    param.array() -= hp.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + hp.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weights, grads[i].weights, adam.first_moment[i].weights, adam.second_moment[i].weights);
    update(layers[i].bias, grads[i].bias, adam.first_moment[i].bias, adam.second_moment[i].bias);
  }
}

}  // namespace gridroute
