#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrm/common.hpp"

namespace rrm {

enum class Activation { Tanh, Identity };

struct MlpShape {
  int inputs = 24;
  int hidden = 128;
  int hidden_layers = 2;
  int outputs = 4;
  Activation activation = Activation::Tanh;

  bool operator==(const MlpShape&) const = default;
};

/// Forward-pass intermediates kept for backpropagation.
struct MlpCache {
  Eigen::MatrixXd input;                    // in x B
  std::vector<Eigen::MatrixXd> activated;   // per hidden layer, hidden x B
  Eigen::MatrixXd output;                   // out x B
};

/// Fully connected net: hidden layers with a shared activation and a linear
/// head. Parameters live in one flat vector laid out layer by layer as
/// [W (row-major out x in), b]; gradients use the same layout.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpShape shape);
  /// Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  Mlp(MlpShape shape, Rng& rng);

  const MlpShape& shape() const { return shape_; }
  std::size_t num_parameters() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Columns of `batch` are examples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, MlpCache& cache) const;
  Eigen::VectorXd forward_one(std::span<const double> input) const;

  /// Gradient of (1/B) * sum_b g_b . out_b w.r.t. every parameter, where
  /// g_b is column b of `output_grad`.
  std::vector<double> backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad) const;

  int num_layers() const { return shape_.hidden_layers + 1; }
  int layer_inputs(int layer) const;
  int layer_outputs(int layer) const;
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(layer_inputs(layer)) * layer_outputs(layer);
  }

 private:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> weights(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  MlpShape shape_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Number of parameters of a net with this shape.
std::size_t parameter_count(const MlpShape& shape);

struct AdamConfig {
  double learning_rate = 0.01;
  int decay_every = 5000;   // steps between learning-rate halvings
  double decay_factor = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 0.001;
};

struct AdamState {
  AdamConfig config{};
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t num_parameters)
      : config(cfg), m(num_parameters, 0.0), v(num_parameters, 0.0) {}

  double learning_rate() const { return learning_rate_at(config, step); }
  static double learning_rate_at(const AdamConfig& cfg, long step);
};

/// One Adam step on grad + l2 * param.
void adam_update(Mlp& net, std::span<const double> grads, AdamState& state);

/// Binary checkpoint: "RRMCKPT1", u64 LE header length, JSON header
/// (shape, adam step, schedule), then the parameters as LE float64.
void save_checkpoint(const Mlp& net, long adam_step, const AdamConfig& adam,
                     const std::string& path);
struct Checkpoint {
  Mlp net;
  long adam_step = 0;
  AdamConfig adam{};
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rrm
