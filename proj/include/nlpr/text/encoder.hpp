#ifndef NLPR_TEXT_ENCODER_HPP
#define NLPR_TEXT_ENCODER_HPP

#include <span>
#include <string>
#include <vector>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/random.hpp"
#include "nlpr/text/attributes.hpp"
#include "nlpr/text/blstm.hpp"
#include "nlpr/text/vocabulary.hpp"

namespace nlpr::text {

/// Shared embedding table, separate BLSTMs for the query and the attribute sequence,
/// and the word-attention projection.
struct TextEncoderParams {
  ad::Tensor embedding;  // V x k
  BlstmParams query;
  BlstmParams attributes;
  ad::Tensor attention;  // 2H x 1

  static TextEncoderParams init(ad::Matrix<double> embedding_table, int hidden, Rng& rng);

  int hidden() const { return query.hidden; }
  /// Trainable tensors; the embedding is included only while it requires gradients.
  std::vector<ad::Tensor> parameters() const;
};

struct TextQuery {
  PreparedSequence words;
  std::vector<int> attribute_ids;  // kCategoryCount entries in canonical order
};

TextQuery make_text_query(std::span<const std::string> tokens, const Attributes& attributes,
                          const Vocabulary& vocab, int max_tokens);

struct EncodedText {
  ad::Tensor features;      // Q x 4H, [query | attributes]
  ad::Tensor query;         // Q x 2H
  ad::Tensor attributes;    // Q x 2H
  ad::Tensor word_weights;  // Q x N
};

/// Encodes Q queries at once. All word sequences must share one padded length.
EncodedText encode_text(const TextEncoderParams& params, std::span<const TextQuery> queries);

/// Per-step embedding lookups: step t is the Q x k matrix of the t-th ids.
std::vector<ad::Tensor> embed_steps(const ad::Tensor& table, std::span<const std::vector<int>> ids);

/// Attribute encoding: canonical ordering, embedding, BLSTM, unweighted mean over the
/// sequence. Returns 1 x 2H.
ad::Tensor encode_attributes(std::span<const std::string> values, const Vocabulary& vocab,
                             const ad::Tensor& table, const BlstmParams& params);

/// Batched form over pre-resolved id sequences; Q x 2H.
ad::Tensor encode_attribute_ids(std::span<const std::vector<int>> ids, const ad::Tensor& table,
                                const BlstmParams& params);

}  // namespace nlpr::text

#endif  // NLPR_TEXT_ENCODER_HPP
