#include "nlpr/text/attention.hpp"

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"

namespace nlpr::text {

using ad::Tensor;

AttentionPooling word_attention_steps(std::span<const Tensor> states, const Tensor& beta,
                                      std::span<const int> lengths) {
  if (states.empty()) throw ContractError("word_attention: no states");
  if (beta.cols() != 1 || beta.rows() != states[0].cols()) {
    throw ShapeError("word_attention: beta " + beta.shape_string() + " does not match states " +
                     states[0].shape_string());
  }
  for (int len : lengths) {
    if (len < 1) throw DomainError("word_attention: true length must be >= 1");
  }
  std::vector<Tensor> logits;
  logits.reserve(states.size());
  for (const auto& h : states) logits.push_back(ad::matmul(h, beta));
  const Tensor weights = ad::masked_softmax_rows(ad::concat(logits, 1), lengths);

  Tensor pooled;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const Tensor term = ad::mul_colwise(states[t], ad::slice_cols(weights, static_cast<Eigen::Index>(t), 1));
    pooled = pooled.defined() ? pooled + term : term;
  }
  return {weights, pooled};
}

AttentionPooling word_attention(const Tensor& states, const Tensor& beta, int true_length) {
  if (true_length < 1) throw DomainError("word_attention: true length must be >= 1");
  if (true_length > states.rows()) {
    throw ContractError("word_attention: true length exceeds sequence length");
  }
  std::vector<Tensor> rows;
  for (Eigen::Index t = 0; t < states.rows(); ++t) rows.push_back(ad::slice_rows(states, t, 1));
  const int lengths[1] = {true_length};
  return word_attention_steps(rows, beta, lengths);
}

}  // namespace nlpr::text
