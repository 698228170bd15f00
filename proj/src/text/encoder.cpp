#include "nlpr/text/encoder.hpp"

#include <cmath>

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"
#include "nlpr/text/attention.hpp"

namespace nlpr::text {

using ad::Matrix;
using ad::Tensor;

TextEncoderParams TextEncoderParams::init(Matrix<double> embedding_table, int hidden, Rng& rng) {
  TextEncoderParams p;
  const int dim = static_cast<int>(embedding_table.cols());
  p.embedding = Tensor::parameter(std::move(embedding_table), "embedding");
  p.query = BlstmParams::init(dim, hidden, rng, "query_encoder");
  p.attributes = BlstmParams::init(dim, hidden, rng, "attribute_encoder");
  Matrix<double> beta(2 * hidden, 1);
  const double bound = 1.0 / std::sqrt(2.0 * hidden);
  for (Eigen::Index i = 0; i < beta.size(); ++i) beta.data()[i] = rng.uniform(-bound, bound);
  p.attention = Tensor::parameter(std::move(beta), "word_attention.beta");
  return p;
}

std::vector<Tensor> TextEncoderParams::parameters() const {
  std::vector<Tensor> out;
  if (embedding.requires_grad()) out.push_back(embedding);
  for (const auto& t : query.parameters()) out.push_back(t);
  for (const auto& t : attributes.parameters()) out.push_back(t);
  out.push_back(attention);
  return out;
}

TextQuery make_text_query(std::span<const std::string> tokens, const Attributes& attributes,
                          const Vocabulary& vocab, int max_tokens) {
  TextQuery q;
  q.words = prepare_sequence(tokens, vocab, max_tokens);
  for (const auto& tok : attribute_tokens(attributes)) q.attribute_ids.push_back(vocab.index_of(tok));
  return q;
}

std::vector<Tensor> embed_steps(const Tensor& table, std::span<const std::vector<int>> ids) {
  if (ids.empty()) throw ContractError("embed_steps: empty batch");
  const std::size_t steps = ids[0].size();
  if (steps == 0) throw ContractError("embed_steps: sequences must be non-empty");
  for (const auto& seq : ids) {
    if (seq.size() != steps) throw ShapeError("embed_steps: sequences have different lengths");
  }
  std::vector<Tensor> out;
  out.reserve(steps);
  std::vector<int> column(ids.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < ids.size(); ++b) column[b] = ids[b][t];
    out.push_back(ad::gather_rows(table, column));
  }
  return out;
}

Tensor encode_attribute_ids(std::span<const std::vector<int>> ids, const Tensor& table,
                            const BlstmParams& params) {
  const auto states = blstm_forward_steps(embed_steps(table, ids), params);
  Tensor total = states[0];
  for (std::size_t t = 1; t < states.size(); ++t) total = total + states[t];
  return ad::scale(total, 1.0 / static_cast<double>(states.size()));
}

Tensor encode_attributes(std::span<const std::string> values, const Vocabulary& vocab,
                         const Tensor& table, const BlstmParams& params) {
  std::vector<int> ids;
  for (const auto& tok : attribute_tokens(attributes_from_values(values))) ids.push_back(vocab.index_of(tok));
  const std::vector<std::vector<int>> batch{ids};
  return encode_attribute_ids(batch, table, params);
}

EncodedText encode_text(const TextEncoderParams& params, std::span<const TextQuery> queries) {
  if (queries.empty()) throw ContractError("encode_text: no queries");
  std::vector<std::vector<int>> words, attrs;
  std::vector<int> lengths;
  for (const auto& q : queries) {
    words.push_back(q.words.ids);
    attrs.push_back(q.attribute_ids);
    lengths.push_back(q.words.length);
  }
  EncodedText out;
  const auto states = blstm_forward_steps(embed_steps(params.embedding, words), params.query);
  auto pooled = word_attention_steps(states, params.attention, lengths);
  out.query = pooled.pooled;
  out.word_weights = pooled.weights;
  out.attributes = encode_attribute_ids(attrs, params.embedding, params.attributes);
  out.features = ad::concat<double>({out.query, out.attributes}, 1);
  return out;
}

}  // namespace nlpr::text
