#include "nlpr/train/optimizer.hpp"

#include <cmath>

namespace nlpr::train {

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Sgd::Sgd(std::vector<ad::Tensor> params, double learning_rate)
    : Optimizer(std::move(params)), lr_(learning_rate) {}

void Sgd::step() {
  if (lr_ == 0.0) return zero_grad();
  for (auto& p : params_) p.mutable_value() -= lr_ * p.grad();
  zero_grad();
}

Adam::Adam(std::vector<ad::Tensor> params, double learning_rate, double beta1, double beta2, double epsilon)
    : Optimizer(std::move(params)), lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : params_) {
    first_.push_back(ad::Matrix<double>::Zero(p.rows(), p.cols()));
    second_.push_back(ad::Matrix<double>::Zero(p.rows(), p.cols()));
  }
}

void Adam::step() {
  // lr * m / (sqrt(v) + eps) can be -0.0, which would flip the sign bit of a -0.0 weight.
  if (lr_ == 0.0) return zero_grad();
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& g = params_[k].grad();
    first_[k] = beta1_ * first_[k] + (1.0 - beta1_) * g;
    second_[k] = beta2_ * second_[k] + (1.0 - beta2_) * g.cwiseProduct(g);
    const auto m_hat = first_[k].array() / c1;
    const auto v_hat = second_[k].array() / c2;
    params_[k].mutable_value().array() -= lr_ * m_hat / (v_hat.sqrt() + epsilon_);
  }
  zero_grad();
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, std::vector<ad::Tensor> params,
                                          double learning_rate) {
  if (kind == OptimizerKind::Sgd) return std::make_unique<Sgd>(std::move(params), learning_rate);
  return std::make_unique<Adam>(std::move(params), learning_rate);
}

}  // namespace nlpr::train
