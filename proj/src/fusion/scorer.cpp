#include "nlpr/fusion/scorer.hpp"

#include <cmath>

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"

namespace nlpr::fusion {

using ad::Matrix;

namespace {

Tensor uniform_weight(int rows, int cols, Rng& rng, const char* name) {
  Matrix<double> m(rows, cols);
  const double bound = 1.0 / std::sqrt(double(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return Tensor::parameter(std::move(m), name);
}

}  // namespace

ScorerParams ScorerParams::init(int visual_dim, int text_dim, int fusion_dim, Rng& rng, FusionMode mode) {
  if (visual_dim < 1 || text_dim < 1 || fusion_dim < 1) {
    throw ContractError("scorer dimensions must be positive");
  }
  ScorerParams p;
  p.mode = mode;
  p.visual_weight = uniform_weight(fusion_dim, visual_dim, rng, "W_v");
  p.visual_bias = Tensor::parameter(Matrix<double>::Zero(1, fusion_dim), "b_v");
  p.text_weight = uniform_weight(fusion_dim, text_dim, rng, "W_t");
  p.text_bias = Tensor::parameter(Matrix<double>::Zero(1, fusion_dim), "b_t");
  const int out_in = mode == FusionMode::Concat ? 2 * fusion_dim : fusion_dim;
  p.output_weight = uniform_weight(1, out_in, rng, "W_out");
  p.output_bias = Tensor::parameter(Matrix<double>::Zero(1, 1), "b_out");
  return p;
}

std::vector<Tensor> ScorerParams::parameters() const {
  return {visual_weight, visual_bias, text_weight, text_bias, output_weight, output_bias};
}

Tensor build_visual_vector(const Tensor& global_weighted, const Tensor& local, const Tensor& spatial) {
  if (spatial.cols() != 8) throw ShapeError("build_visual_vector: spatial feature must have 8 columns, got " + spatial.shape_string());
  return ad::concat<double>({global_weighted, local, spatial}, 1);
}

Tensor build_text_vector(const Tensor& query_pooled, const Tensor& attribute_pooled) {
  if (query_pooled.cols() != attribute_pooled.cols()) {
    throw ShapeError("build_text_vector: query " + query_pooled.shape_string() + " vs attributes " +
                     attribute_pooled.shape_string());
  }
  return ad::concat<double>({query_pooled, attribute_pooled}, 1);
}

ScoreResult score(const Tensor& visual, const Tensor& text, const ScorerParams& params) {
  if (visual.cols() != params.visual_weight.cols()) {
    throw ShapeError("score: visual input " + visual.shape_string() + " vs W_v " +
                     params.visual_weight.shape_string());
  }
  if (text.cols() != params.text_weight.cols()) {
    throw ShapeError("score: text input " + text.shape_string() + " vs W_t " +
                     params.text_weight.shape_string());
  }
  if (visual.rows() != text.rows()) {
    throw ShapeError("score: batch sizes differ, " + visual.shape_string() + " vs " + text.shape_string());
  }
  const Tensor v = ad::add_rowwise(ad::matmul(visual, ad::transpose(params.visual_weight)), params.visual_bias);
  const Tensor t = ad::add_rowwise(ad::matmul(text, ad::transpose(params.text_weight)), params.text_bias);
  ScoreResult out;
  out.fused = params.mode == FusionMode::Product ? ad::mul(v, t) : ad::tanh(ad::concat<double>({v, t}, 1));
  out.logits = ad::add_rowwise(ad::matmul(out.fused, ad::transpose(params.output_weight)), params.output_bias);
  return out;
}

Tensor training_loss(const Tensor& logits, std::span<const int> labels) {
  return ad::mean(ad::sigmoid_cross_entropy(logits, labels));
}

}  // namespace nlpr::fusion
