#ifndef NLPR_TEXT_ATTENTION_HPP
#define NLPR_TEXT_ATTENTION_HPP

#include <span>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"

namespace nlpr::text {

struct AttentionPooling {
  ad::Tensor weights;  // B x T; zero past each sequence's true length
  ad::Tensor pooled;   // B x 2H, sum_t weights[:, t] * states[t]
};

/// Word attention over BLSTM states: softmax of beta^T h_t over the first lengths[b]
/// steps of each sequence, then the weighted sum of the states. beta is 2H x 1.
AttentionPooling word_attention_steps(std::span<const ad::Tensor> states, const ad::Tensor& beta,
                                      std::span<const int> lengths);

/// Single sequence form: states is T x 2H; weights come back as 1 x T.
AttentionPooling word_attention(const ad::Tensor& states, const ad::Tensor& beta, int true_length);

}  // namespace nlpr::text

#endif  // NLPR_TEXT_ATTENTION_HPP
