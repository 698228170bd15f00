#ifndef NLPR_TRAIN_OPTIMIZER_HPP
#define NLPR_TRAIN_OPTIMIZER_HPP

#include <memory>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/train/config.hpp"

namespace nlpr::train {

/// Applies the accumulated gradients to a fixed parameter list, then clears them.
class Optimizer {
 public:
  explicit Optimizer(std::vector<ad::Tensor> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;
  virtual void step() = 0;
  void zero_grad();
  const std::vector<ad::Tensor>& params() const { return params_; }

 protected:
  std::vector<ad::Tensor> params_;
};

class Sgd final : public Optimizer {
 public:
  Sgd(std::vector<ad::Tensor> params, double learning_rate);
  void step() override;

 private:
  double lr_;
};

class Adam final : public Optimizer {
 public:
  Adam(std::vector<ad::Tensor> params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step() override;

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long steps_ = 0;
  std::vector<ad::Matrix<double>> first_, second_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, std::vector<ad::Tensor> params,
                                          double learning_rate);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_OPTIMIZER_HPP
