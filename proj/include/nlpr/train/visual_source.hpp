#ifndef NLPR_TRAIN_VISUAL_SOURCE_HPP
#define NLPR_TRAIN_VISUAL_SOURCE_HPP

#include <span>
#include <vector>

#include "nlpr/data/dataset.hpp"
#include "nlpr/train/model.hpp"
#include "nlpr/visual/attention_map.hpp"
#include "nlpr/visual/features.hpp"

namespace nlpr::train {

/// Proposals a scene is scored over: confidence >= conf_thresh and area >= min_area.
std::vector<std::size_t> candidate_proposals(const data::Scene& scene, const TrainConfig& config);

/// Boxes the scene's attention map is built from: the candidates, else every proposal,
/// else the annotated persons. Empty only for a scene with none of these.
std::vector<geometry::Box> attention_boxes(const data::Scene& scene, const TrainConfig& config);

/// Visual vectors [weighted global | local | spatial] for the proposals of a scene list.
class VisualSource {
 public:
  virtual ~VisualSource() = default;
  virtual int dim() const = 0;
  virtual ad::Matrix<double> proposal_vectors(std::size_t scene, std::span<const std::size_t> proposals) const = 0;
  virtual const visual::AttentionMap& attention(std::size_t scene) const = 0;
};

/// Runs the model's frozen backbone over raw images; also describes arbitrary boxes.
class BackboneVisuals final : public VisualSource {
 public:
  BackboneVisuals(const Model& model, const std::vector<data::Scene>& scenes, const data::ImageStore& images);

  int dim() const override { return model_.config.visual_dim(); }
  ad::Matrix<double> proposal_vectors(std::size_t scene, std::span<const std::size_t> proposals) const override;
  const visual::AttentionMap& attention(std::size_t scene) const override { return maps_.at(scene); }
  ad::Matrix<double> box_vectors(std::size_t scene, std::span<const geometry::Box> boxes) const;

 private:
  const Model& model_;
  const std::vector<data::Scene>& scenes_;
  std::vector<const visual::ChannelGrid*> images_;
  std::vector<visual::AttentionMap> maps_;
  std::vector<Eigen::RowVectorXd> globals_;
};

/// Reads grids and per-proposal local descriptors produced elsewhere, matched by image_ref.
class PrecomputedVisuals final : public VisualSource {
 public:
  PrecomputedVisuals(const TrainConfig& config, const std::vector<data::Scene>& scenes,
                     std::vector<visual::PrecomputedRecord> records);

  int dim() const override { return config_.visual_dim(); }
  ad::Matrix<double> proposal_vectors(std::size_t scene, std::span<const std::size_t> proposals) const override;
  const visual::AttentionMap& attention(std::size_t scene) const override { return maps_.at(scene); }

 private:
  TrainConfig config_;
  const std::vector<data::Scene>& scenes_;
  std::vector<visual::PrecomputedRecord> records_;  // aligned with scenes
  std::vector<visual::AttentionMap> maps_;
  std::vector<Eigen::RowVectorXd> globals_;
};

/// Records for `scenes` computed with the model's backbone, for the precomputed-feature file.
std::vector<visual::PrecomputedRecord> extract_features(const Model& model, const std::vector<data::Scene>& scenes,
                                                        const data::ImageStore& images);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_VISUAL_SOURCE_HPP
