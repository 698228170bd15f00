#include "nlpr/train/evaluate.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"
#include "nlpr/train/trainer.hpp"

namespace nlpr::train {

using ad::Matrix;
using ad::Tensor;
using nlohmann::ordered_json;

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

EvalReport summarize(std::vector<QueryRecord> queries, bool per_person) {
  EvalReport r;
  r.per_person = per_person;
  for (auto& q : queries) {
    q.hit_at_1 = !q.ranking.empty() && q.ranking[0].correct;
    q.hit_at_2 = q.hit_at_1 || (q.ranking.size() > 1 && q.ranking[1].correct);
    r.correct_at_1 += q.hit_at_1;
    r.correct_at_2 += q.hit_at_2;
    r.flagged += q.flagged;
  }
  r.total = queries.size();
  if (r.total > 0) {
    r.rec_at_1 = static_cast<double>(r.correct_at_1) / static_cast<double>(r.total);
    r.rec_at_2 = static_cast<double>(r.correct_at_2) / static_cast<double>(r.total);
  }
  r.queries = std::move(queries);
  return r;
}

namespace {

// Logits for every (query, proposal) pair; row q holds query q's scores.
Matrix<double> score_block(const Model& model, const Matrix<double>& visual, std::span<const text::TextQuery> queries,
                           text::EncodedText* encoded_out = nullptr) {
  const auto encoded = text::encode_text(model.text, queries);
  const auto q = static_cast<int>(queries.size());
  const auto p = static_cast<int>(visual.rows());
  std::vector<int> text_rows, visual_rows;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < p; ++j) {
      text_rows.push_back(i);
      visual_rows.push_back(j);
    }
  }
  const Tensor v = ad::gather_rows(Tensor::constant(visual), visual_rows);
  const Tensor t = ad::gather_rows(encoded.features, text_rows);
  const auto logits = fusion::score(v, t, model.scorer).logits.value();
  if (encoded_out) *encoded_out = encoded;
  return Eigen::Map<const Matrix<double>>(logits.data(), q, p);
}

}  // namespace

EvalReport evaluate(const Model& model, const std::vector<data::Scene>& scenes, const VisualSource& visuals,
                    bool per_person) {
  std::vector<QueryRecord> records;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto& scene = scenes[s];
    const auto candidates = candidate_proposals(scene, model.config);
    std::vector<text::TextQuery> queries;
    std::vector<QueryRecord> pending;
    for (std::size_t p = 0; p < scene.persons.size(); ++p) {
      const auto& person = scene.persons[p];
      const std::size_t count = per_person ? 1 : person.descriptions.size();
      for (std::size_t d = 0; d < count; ++d) {
        QueryRecord q;
        q.scene = s;
        q.image_ref = scene.image_ref;
        q.person = p;
        q.description = d;
        q.token_count = static_cast<int>(person.descriptions[d].size());
        q.gt_area = person.gt_box.area();
        q.flagged = candidates.empty();
        pending.push_back(std::move(q));
        queries.push_back(description_query(model, scenes, {s, p, d}));
      }
    }
    if (!candidates.empty() && !queries.empty()) {
      const Matrix<double> block = score_block(model, visuals.proposal_vectors(s, candidates), queries);
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto& gt = scene.persons[pending[i].person].gt_box;
        std::vector<double> row(block.cols());
        for (Eigen::Index j = 0; j < block.cols(); ++j) row[static_cast<std::size_t>(j)] = block(static_cast<Eigen::Index>(i), j);
        for (auto j : rank_order(row)) {
          const auto idx = candidates[j];
          const double overlap = geometry::iou(scene.proposals[idx], gt);
          pending[i].ranking.push_back({idx, row[j], overlap, overlap >= kCorrectIou});
        }
      }
    }
    for (auto& q : pending) records.push_back(std::move(q));
  }
  return summarize(std::move(records), per_person);
}

std::vector<double> default_edges(BucketAxis axis) {
  if (axis == BucketAxis::DescriptionLength) return {5, 10, 15, 20, 25};
  return {5000, 10000, 20000, 40000, 80000};
}

BucketTable bucket_report(const EvalReport& report, BucketAxis axis, std::span<const double> edges) {
  if (edges.size() < 2) throw ContractError("bucket_report: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ContractError("bucket_report: edges must be strictly increasing");
  }
  BucketTable table;
  table.axis = axis;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) table.buckets.push_back({edges[i], edges[i + 1], false, 0, 0, 0.0});
  table.buckets.push_back({edges.back(), std::numeric_limits<double>::infinity(), true, 0, 0, 0.0});
  for (const auto& q : report.queries) {
    const double value = axis == BucketAxis::DescriptionLength ? static_cast<double>(q.token_count) : q.gt_area;
    Bucket* target = &table.buckets.back();
    for (std::size_t i = 0; i + 1 < table.buckets.size(); ++i) {
      if (value >= table.buckets[i].lower && value < table.buckets[i].upper) target = &table.buckets[i];
    }
    ++target->count;
    target->correct += q.hit_at_1;
    ++table.total;
  }
  for (auto& b : table.buckets) {
    if (b.count) b.rec_at_1 = static_cast<double>(b.correct) / static_cast<double>(b.count);
  }
  return table;
}

ordered_json report_json(const EvalReport& report, std::span<const BucketTable> tables) {
  ordered_json j;
  j["mode"] = report.per_person ? "per_person" : "per_description";
  j["rec_at_1"] = report.rec_at_1;
  j["rec_at_2"] = report.rec_at_2;
  j["total"] = report.total;
  j["correct_at_1"] = report.correct_at_1;
  j["correct_at_2"] = report.correct_at_2;
  j["flagged"] = report.flagged;
  ordered_json buckets = ordered_json::object();
  for (const auto& t : tables) {
    ordered_json rows = ordered_json::array();
    for (const auto& b : t.buckets) {
      ordered_json row{{"lower", b.lower}};
      if (b.overflow) {
        row["upper"] = nullptr;
        row["overflow"] = true;
      } else {
        row["upper"] = b.upper;
      }
      row["count"] = b.count;
      row["correct"] = b.correct;
      row["rec_at_1"] = b.rec_at_1;
      rows.push_back(std::move(row));
    }
    buckets[t.axis == BucketAxis::DescriptionLength ? "description_length" : "proposal_size"] = std::move(rows);
  }
  j["buckets"] = std::move(buckets);
  ordered_json queries = ordered_json::array();
  for (const auto& q : report.queries) {
    ordered_json qj{{"scene", q.scene},           {"image_ref", q.image_ref}, {"person", q.person},
                    {"description", q.description}, {"tokens", q.token_count}, {"gt_area", q.gt_area},
                    {"hit_at_1", q.hit_at_1},       {"hit_at_2", q.hit_at_2},   {"flagged", q.flagged}};
    ordered_json ranking = ordered_json::array();
    for (const auto& r : q.ranking) {
      ranking.push_back({{"proposal", r.proposal}, {"score", r.score}, {"iou", r.iou}, {"correct", r.correct}});
    }
    qj["ranking"] = std::move(ranking);
    queries.push_back(std::move(qj));
  }
  j["queries"] = std::move(queries);
  return j;
}

QueryOutput query(const Model& model, const data::Scene& scene, const visual::ChannelGrid& image,
                  const std::string& text, std::span<const std::string> attribute_values) {
  const auto tokens = text::tokenize(text);
  if (tokens.empty()) throw ContractError("query: empty text");
  if (scene.proposals.empty()) throw ContractError("query: scene has no proposals");

  QueryOutput out;
  out.all_unknown_tokens = std::none_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return model.vocab.contains(t) && model.vocab.index_of(t) != text::kUnknownIndex;
  });
  std::vector<std::string> values;
  for (const auto& v : attribute_values) {
    if (text::normalize_value(v) != text::kUnknownValue) values.push_back(text::normalize_value(v));
  }
  const std::array<text::TextQuery, 1> q{
      text::make_text_query(tokens, text::attributes_from_values(values), model.vocab, model.config.max_tokens)};

  const std::vector<data::Scene> one{scene};
  data::ImageStore store;
  store.emplace(scene.image_ref, image);
  BackboneVisuals visuals(model, one, store);
  std::vector<std::size_t> all(scene.proposals.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  text::EncodedText encoded;
  const Matrix<double> block = score_block(model, visuals.proposal_vectors(0, all), q, &encoded);
  std::vector<double> row(all.size());
  for (std::size_t j = 0; j < all.size(); ++j) row[j] = block(0, static_cast<Eigen::Index>(j));
  for (auto j : rank_order(row)) out.ranking.push_back({j, row[j], 0.0, false});

  const int length = q[0].words.length;
  out.tokens.assign(tokens.begin(), tokens.begin() + length);
  for (int t = 0; t < length; ++t) out.word_weights.push_back(encoded.word_weights.value()(0, t));
  out.map = visuals.attention(0);
  return out;
}

ordered_json query_json(const data::Scene& scene, const QueryOutput& output) {
  ordered_json j;
  j["image_ref"] = scene.image_ref;
  j["width"] = scene.width;
  j["height"] = scene.height;
  ordered_json ranking = ordered_json::array();
  for (const auto& r : output.ranking) {
    const auto& b = scene.proposals[r.proposal];
    ordered_json box{{"x_min", b.x_min()}, {"y_min", b.y_min()}, {"x_max", b.x_max()}, {"y_max", b.y_max()}};
    if (b.confidence()) box["confidence"] = *b.confidence();
    ranking.push_back({{"proposal", r.proposal}, {"score", r.score}, {"box", std::move(box)}});
  }
  j["ranking"] = std::move(ranking);
  ordered_json words = ordered_json::array();
  for (std::size_t t = 0; t < output.tokens.size(); ++t) {
    words.push_back({{"token", output.tokens[t]}, {"weight", output.word_weights[t]}});
  }
  j["word_attention"] = std::move(words);
  j["all_unknown_tokens"] = output.all_unknown_tokens;
  ordered_json map = ordered_json::array();
  for (Eigen::Index i = 0; i < output.map.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < output.map.cols(); ++k) row.push_back(output.map(i, k));
    map.push_back(std::move(row));
  }
  j["attention_map"] = std::move(map);
  return j;
}

}  // namespace nlpr::train
