#ifndef NLPR_TRAIN_EVALUATE_HPP
#define NLPR_TRAIN_EVALUATE_HPP

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlpr/data/dataset.hpp"
#include "nlpr/train/model.hpp"
#include "nlpr/train/visual_source.hpp"

namespace nlpr::train {

inline constexpr double kCorrectIou = 0.5;

struct RankedProposal {
  std::size_t proposal = 0;  // index into the scene's proposal list
  double score = 0.0;
  double iou = 0.0;          // with the queried person's ground truth
  bool correct = false;
};

struct QueryRecord {
  std::size_t scene = 0;
  std::string image_ref;
  std::size_t person = 0;
  std::size_t description = 0;
  int token_count = 0;   // before truncation
  double gt_area = 0.0;
  std::vector<RankedProposal> ranking;  // best first
  bool hit_at_1 = false;
  bool hit_at_2 = false;
  bool flagged = false;  // scene had no candidate proposals
};

struct EvalReport {
  bool per_person = false;
  std::size_t total = 0;
  std::size_t correct_at_1 = 0;
  std::size_t correct_at_2 = 0;
  std::size_t flagged = 0;
  double rec_at_1 = 0.0;
  double rec_at_2 = 0.0;
  std::vector<QueryRecord> queries;
};

/// Indices sorted by descending score; equal scores keep the lower index first.
std::vector<std::size_t> rank_order(std::span<const double> scores);

/// Fills hit flags from the rankings and the counts / fractions from the hits.
EvalReport summarize(std::vector<QueryRecord> queries, bool per_person);

/// Scores every candidate proposal of every scene for each (person, description) query, or
/// for each person's first description when per_person is set.
EvalReport evaluate(const Model& model, const std::vector<data::Scene>& scenes, const VisualSource& visuals,
                    bool per_person);

enum class BucketAxis { DescriptionLength, ProposalSize };

struct Bucket {
  double lower = 0.0;
  double upper = 0.0;    // exclusive
  bool overflow = false;  // values outside [edges.front(), edges.back())
  std::size_t count = 0;
  std::size_t correct = 0;
  double rec_at_1 = 0.0;  // 0 for an empty bucket
};

struct BucketTable {
  BucketAxis axis = BucketAxis::DescriptionLength;
  std::vector<Bucket> buckets;  // edges.size() - 1 ranges, then the overflow bucket
  std::size_t total = 0;
};

/// Throws ContractError unless edges has >= 2 strictly increasing entries.
BucketTable bucket_report(const EvalReport& report, BucketAxis axis, std::span<const double> edges);

std::vector<double> default_edges(BucketAxis axis);

nlohmann::ordered_json report_json(const EvalReport& report, std::span<const BucketTable> tables);

struct QueryOutput {
  std::vector<RankedProposal> ranking;  // every proposal, best first; iou/correct unset
  std::vector<std::string> tokens;      // tokens the attention weights refer to
  std::vector<double> word_weights;
  visual::AttentionMap map;
  bool all_unknown_tokens = false;
};

/// Ranks all proposals of one scene for a free-text query and attribute values.
QueryOutput query(const Model& model, const data::Scene& scene, const visual::ChannelGrid& image,
                  const std::string& text, std::span<const std::string> attribute_values);

nlohmann::ordered_json query_json(const data::Scene& scene, const QueryOutput& output);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_EVALUATE_HPP
