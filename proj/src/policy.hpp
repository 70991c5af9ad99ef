#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace risauction {

class Rng;

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Fully connected network with tanh hidden layers and a linear output.
/// Inputs are column-major batches: one column per sample.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}; all parameters start at zero.
  explicit Mlp(const std::vector<std::size_t>& sizes);

  /// Orthogonal weights (gain sqrt(2) on hidden layers, `output_gain` on the
  /// last one) and zero biases.
  void orthogonal_init(Rng& rng, double output_gain);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each hidden output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const;

  /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_out, Mlp& grads) const;

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;

  std::vector<DenseLayer> layers;
};

/// Separate actor and critic networks over the same observation.
struct PolicyParams {
  Mlp actor;   // obs -> one logit per RIS slot
  Mlp critic;  // obs -> scalar value

  static PolicyParams create(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                             Rng& rng);
  /// Same shapes, every parameter zero.
  static PolicyParams zeros_like(const PolicyParams& other);

  std::size_t obs_dim() const { return actor.input_size(); }
  std::size_t act_dim() const { return actor.output_size(); }
  std::vector<std::size_t> hidden_sizes() const;

  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& values);
  std::size_t parameter_count() const { return actor.parameter_count() + critic.parameter_count(); }
  bool is_finite() const;
};

struct PolicyOutput {
  Eigen::VectorXd probabilities;  // per bid bit, sigmoid of the actor logits
  double value = 0.0;
};

/// Throws ArgumentError on non-finite observations, StructureError on a
/// dimension mismatch.
PolicyOutput policy_forward(const PolicyParams& params, const Eigen::VectorXd& obs);

double sigmoid(double z);
/// log(1 + e^z) without overflow.
double softplus(double z);

/// sum_r bit_r log p_r + (1 - bit_r) log(1 - p_r), evaluated from logits.
double bernoulli_log_prob(const Eigen::VectorXd& logits, const std::vector<std::uint8_t>& bits);

}  // namespace risauction
