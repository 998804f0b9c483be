#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace cier::rl {

enum class OutputActivation { Linear, ScaledTanh };

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  /// Gradient with respect to the network input (in x batch).
  Eigen::MatrixXd input;

  Eigen::VectorXd flatten() const;
};

/// Fully connected network with tanh hidden layers. Inputs and outputs are
/// column-major batches (features x batch). A ScaledTanh head maps to
/// offset + scale * tanh(z) elementwise.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, each hidden output, network output
    Eigen::MatrixXd head_tanh;                 // tanh(z) of the output layer (ScaledTanh only)
  };

  Mlp() = default;
  /// `sizes` lists input, hidden and output widths (at least two entries).
  /// Hidden layers start uniform in +-1/sqrt(fan_in), the output layer in
  /// +-final_init.
  Mlp(std::vector<int> sizes, OutputActivation head, std::mt19937_64& rng, double final_init = 3e-3);

  void set_output_range(const Eigen::VectorXd& low, const Eigen::VectorXd& high);

  int input_size() const noexcept { return sizes_.front(); }
  int output_size() const noexcept { return sizes_.back(); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  OutputActivation head() const noexcept { return head_; }

  /// Throws ShapeError when the input has the wrong row count.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache& cache) const;

  /// Gradients of sum(upstream .* output) for the batch cached by the last
  /// forward call. Throws ShapeError.
  MlpGradients backward(const Cache& cache, const Eigen::MatrixXd& upstream) const;

  std::vector<Eigen::MatrixXd>& weights() noexcept { return weights_; }
  std::vector<Eigen::VectorXd>& biases() noexcept { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const noexcept { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const noexcept { return biases_; }

  std::size_t parameter_count() const;
  /// Weights then biases, layer by layer, column-major.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  bool finite() const;

 private:
  std::vector<int> sizes_;
  OutputActivation head_ = OutputActivation::Linear;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
  Eigen::VectorXd out_offset_;
  Eigen::VectorXd out_scale_;
};

/// theta_target <- tau * theta + (1 - tau) * theta_target, elementwise.
void soft_update(Mlp& target, const Mlp& source, double tau);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Descends along `grads`.
  void step(Mlp& net, const MlpGradients& grads);
  double learning_rate() const noexcept { return lr_; }

 private:
  double lr_ = 1e-3;
  double b1_ = 0.9;
  double b2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace cier::rl
