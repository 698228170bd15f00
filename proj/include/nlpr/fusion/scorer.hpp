#ifndef NLPR_FUSION_SCORER_HPP
#define NLPR_FUSION_SCORER_HPP

#include <span>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/random.hpp"

namespace nlpr::fusion {

using ad::Tensor;

enum class FusionMode {
  Product,  // (W_v v + b_v) (.) (W_t t + b_t)
  Concat,   // ablation: tanh([W_v v + b_v | W_t t + b_t])
};

/// Score s = W_out . fuse(W_v v + b_v, W_t t + b_t) + b_out.
struct ScorerParams {
  Tensor visual_weight;  // "W_v", d x visual_dim
  Tensor visual_bias;    // "b_v", 1 x d
  Tensor text_weight;    // "W_t", d x text_dim
  Tensor text_bias;      // "b_t", 1 x d
  Tensor output_weight;  // "W_out", 1 x d (1 x 2d for Concat)
  Tensor output_bias;    // "b_out", 1 x 1
  FusionMode mode = FusionMode::Product;

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static ScorerParams init(int visual_dim, int text_dim, int fusion_dim, Rng& rng,
                           FusionMode mode = FusionMode::Product);
  std::vector<Tensor> parameters() const;
  int fusion_dim() const { return static_cast<int>(visual_weight.rows()); }
};

/// [global | local | spatial] along columns; each input is B x dim.
Tensor build_visual_vector(const Tensor& global_weighted, const Tensor& local, const Tensor& spatial);

/// [query | attributes] along columns.
Tensor build_text_vector(const Tensor& query_pooled, const Tensor& attribute_pooled);

struct ScoreResult {
  Tensor logits;  // B x 1, pre-sigmoid
  Tensor fused;   // B x d (B x 2d for Concat)
};

/// visual is B x visual_dim, text is B x text_dim.
ScoreResult score(const Tensor& visual, const Tensor& text, const ScorerParams& params);

/// Mean sigmoid cross-entropy of the logits against 0/1 labels.
Tensor training_loss(const Tensor& logits, std::span<const int> labels);

}  // namespace nlpr::fusion

#endif  // NLPR_FUSION_SCORER_HPP
