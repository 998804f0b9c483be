#include "cier/mlp.hpp"

#include "cier/error.hpp"

#include <cmath>
#include <string>

namespace cier::rl {

namespace {

// Eigen vectorizes exp but not tanh for doubles; this form is about three
// times faster and saturates correctly at both ends.
Eigen::MatrixXd tanh_of(const Eigen::MatrixXd& z) {
  return (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix();
}

}  // namespace

Eigen::VectorXd MlpGradients::flatten() const {
  Eigen::Index n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& w : weights) {
    out.segment(at, w.size()) = w.reshaped();
    at += w.size();
  }
  for (const auto& b : biases) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

Mlp::Mlp(std::vector<int> sizes, OutputActivation head, std::mt19937_64& rng, double final_init)
    : sizes_(std::move(sizes)), head_(head) {
  if (sizes_.size() < 2) fail(Errc::ConfigError, "a network needs input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) fail(Errc::ConfigError, "layer sizes must be positive");
  }
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double bound = l + 1 == layers ? final_init : 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    }
    Eigen::VectorXd b(out);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = u(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
  out_offset_ = Eigen::VectorXd::Zero(sizes_.back());
  out_scale_ = Eigen::VectorXd::Ones(sizes_.back());
}

void Mlp::set_output_range(const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
  if (low.size() != output_size() || high.size() != output_size()) fail(Errc::ShapeError, "output range size");
  out_offset_ = (high + low) / 2.0;
  out_scale_ = (high - low) / 2.0;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Cache cache;
  return forward(input, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache& cache) const {
  if (input.rows() != input_size()) {
    fail(Errc::ShapeError, "network input has " + std::to_string(input.rows()) + " rows, expected " +
                               std::to_string(input_size()));
  }
  cache.activations.clear();
  cache.activations.push_back(input);
  const std::size_t layers = weights_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = weights_[l] * cache.activations.back();
    z.colwise() += biases_[l];
    if (l + 1 < layers) {
      cache.activations.push_back(tanh_of(z));
    } else if (head_ == OutputActivation::ScaledTanh) {
      cache.head_tanh = tanh_of(z);
      Eigen::MatrixXd y = out_scale_.asDiagonal() * cache.head_tanh;
      y.colwise() += out_offset_;
      cache.activations.push_back(std::move(y));
    } else {
      cache.activations.push_back(std::move(z));
    }
  }
  return cache.activations.back();
}

MlpGradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& upstream) const {
  const std::size_t layers = weights_.size();
  if (cache.activations.size() != layers + 1) fail(Errc::ShapeError, "backward without a matching forward pass");
  const Eigen::MatrixXd& out = cache.activations.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    fail(Errc::ShapeError, "upstream gradient is " + std::to_string(upstream.rows()) + "x" +
                               std::to_string(upstream.cols()) + ", output is " + std::to_string(out.rows()) + "x" +
                               std::to_string(out.cols()));
  }
  MlpGradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);

  Eigen::MatrixXd delta;  // gradient with respect to the pre-activation of layer l
  if (head_ == OutputActivation::ScaledTanh) {
    delta = (out_scale_.asDiagonal() * upstream).array() * (1.0 - cache.head_tanh.array().square());
  } else {
    delta = upstream;
  }
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& in = cache.activations[l];
    g.weights[l] = delta * in.transpose();
    g.biases[l] = delta.rowwise().sum();
    Eigen::MatrixXd back = weights_[l].transpose() * delta;
    if (l > 0) {
      delta = back.array() * (1.0 - in.array().square());
    } else {
      g.input = std::move(back);
    }
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases_) n += static_cast<std::size_t>(b.size());
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  MlpGradients view{weights_, biases_, {}};
  return view.flatten();
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) fail(Errc::ShapeError, "parameter vector size");
  Eigen::Index at = 0;
  for (auto& w : weights_) {
    w.reshaped() = flat.segment(at, w.size());
    at += w.size();
  }
  for (auto& b : biases_) {
    b = flat.segment(at, b.size());
    at += b.size();
  }
}

bool Mlp::finite() const {
  for (const auto& w : weights_) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases_) {
    if (!b.allFinite()) return false;
  }
  return true;
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) fail(Errc::ConfigError, "tau must be in (0, 1]");
  if (target.sizes() != source.sizes()) fail(Errc::ShapeError, "soft update between different architectures");
  for (std::size_t l = 0; l < target.layer_count(); ++l) {
    target.weights()[l] = tau * source.weights()[l] + (1.0 - tau) * target.weights()[l];
    target.biases()[l] = tau * source.biases()[l] + (1.0 - tau) * target.biases()[l];
  }
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  if (!(lr > 0.0)) fail(Errc::ConfigError, "learning rate must be positive");
  for (const auto& w : net.weights()) {
    mw_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    vw_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases()) {
    mb_.push_back(Eigen::VectorXd::Zero(b.size()));
    vb_.push_back(Eigen::VectorXd::Zero(b.size()));
  }
}

void Adam::step(Mlp& net, const MlpGradients& grads) {
  if (grads.weights.size() != mw_.size() || grads.biases.size() != mb_.size()) {
    fail(Errc::ShapeError, "gradient layer count does not match the optimizer");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  for (std::size_t l = 0; l < mw_.size(); ++l) {
    mw_[l] = b1_ * mw_[l] + (1.0 - b1_) * grads.weights[l];
    vw_[l] = b2_ * vw_[l] + (1.0 - b2_) * grads.weights[l].array().square().matrix();
    net.weights()[l].array() -= step * mw_[l].array() / (vw_[l].array().sqrt() + eps_);
    mb_[l] = b1_ * mb_[l] + (1.0 - b1_) * grads.biases[l];
    vb_[l] = b2_ * vb_[l] + (1.0 - b2_) * grads.biases[l].array().square().matrix();
    net.biases()[l].array() -= step * mb_[l].array() / (vb_[l].array().sqrt() + eps_);
  }
}

}  // namespace cier::rl
