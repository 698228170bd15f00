#ifndef NLPR_AUTODIFF_GRAD_CHECK_HPP
#define NLPR_AUTODIFF_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <string>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"

namespace nlpr::ad {

template <typename Scalar>
struct GradCheckResult {
  Scalar max_relative_error = Scalar(0);
  std::string worst_parameter;  // name of the parameter holding the worst coordinate
  Index worst_index = -1;
  Scalar analytic = Scalar(0);
  Scalar numeric = Scalar(0);
};

/// Compares reverse-mode gradients of f against central differences, coordinate by
/// coordinate. f must rebuild its graph from the parameters on every call. The relative
/// error of a coordinate is |a - n| / max(1e-8, |a| + |n|).
template <typename Scalar, typename F>
GradCheckResult<Scalar> grad_check(F&& f, std::vector<BasicTensor<Scalar>> params,
                                   std::type_identity_t<Scalar> eps = Scalar(1e-5)) {
  if (!(eps > Scalar(0))) throw DomainError("grad_check: eps must be positive");

  for (auto& p : params) p.zero_grad();
  const auto loss = f();
  if (!std::isfinite(loss.item())) throw DomainError("grad_check: f is not finite");
  backward(loss);

  std::vector<Matrix<Scalar>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad());

  GradCheckResult<Scalar> result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].mutable_value();
    for (Index i = 0; i < value.size(); ++i) {
      const Scalar saved = value.data()[i];
      value.data()[i] = saved + eps;
      const Scalar up = f().item();
      value.data()[i] = saved - eps;
      const Scalar down = f().item();
      value.data()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw DomainError("grad_check: f is not finite near " + params[k].name());
      }
      const Scalar numeric = (up - down) / (Scalar(2) * eps);
      const Scalar a = analytic[k].data()[i];
      const Scalar err =
          std::abs(a - numeric) / std::max(Scalar(1e-8), std::abs(a) + std::abs(numeric));
      if (result.worst_index < 0 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = params[k].name();
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace nlpr::ad

#endif  // NLPR_AUTODIFF_GRAD_CHECK_HPP
