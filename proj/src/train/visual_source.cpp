#include "nlpr/train/visual_source.hpp"

#include "nlpr/error.hpp"

namespace nlpr::train {

using ad::Matrix;
using geometry::Box;

std::vector<std::size_t> candidate_proposals(const data::Scene& scene, const TrainConfig& config) {
  return geometry::filter_proposal_indices(scene.proposals, config.conf_thresh, config.min_area);
}

std::vector<Box> attention_boxes(const data::Scene& scene, const TrainConfig& config) {
  std::vector<Box> boxes;
  for (auto i : candidate_proposals(scene, config)) boxes.push_back(scene.proposals[i]);
  if (boxes.empty()) boxes = scene.proposals;
  if (boxes.empty()) {
    for (const auto& p : scene.persons) boxes.push_back(p.gt_box);
  }
  return boxes;
}

namespace {

struct Context {
  visual::AttentionMap map;
  Eigen::RowVectorXd global;
};

Context scene_context(const visual::ChannelGrid& grid, const data::Scene& scene, const TrainConfig& config) {
  const auto boxes = attention_boxes(scene, config);
  if (boxes.empty()) {
    return {visual::AttentionMap::Zero(grid.rows, grid.cols), Eigen::RowVectorXd::Zero(grid.channels)};
  }
  auto v = visual::scene_visuals(grid, boxes);
  return {std::move(v.map), std::move(v.weighted_global)};
}

void write_row(Matrix<double>& out, Eigen::Index r, const Eigen::RowVectorXd& global, const Eigen::RowVectorXd& local,
               const Box& box, const data::Scene& scene) {
  const auto spatial = geometry::spatial_features(box, scene.width, scene.height);
  out.row(r).head(global.size()) = global;
  out.row(r).segment(global.size(), local.size()) = local;
  out.row(r).tail(8) = spatial.transpose();
}

}  // namespace

BackboneVisuals::BackboneVisuals(const Model& model, const std::vector<data::Scene>& scenes,
                                 const data::ImageStore& images)
    : model_(model), scenes_(scenes) {
  const auto& c = model.config;
  for (const auto& scene : scenes) {
    auto it = images.find(scene.image_ref);
    if (it == images.end()) throw ContractError("no image payload for " + scene.image_ref);
    if (it->second.channels != c.input_channels) {
      throw ShapeError("image " + scene.image_ref + " has " + std::to_string(it->second.channels) +
                       " channels, model expects " + std::to_string(c.input_channels));
    }
    images_.push_back(&it->second);
    const auto grid = model.backbone.global_map(it->second, c.grid_rows, c.grid_cols);
    auto ctx = scene_context(grid, scene, c);
    maps_.push_back(std::move(ctx.map));
    globals_.push_back(std::move(ctx.global));
  }
}

Matrix<double> BackboneVisuals::box_vectors(std::size_t scene, std::span<const Box> boxes) const {
  Matrix<double> out(static_cast<Eigen::Index>(boxes.size()), dim());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto local = visual::local_feature(*images_.at(scene), boxes[i], model_.backbone);
    write_row(out, static_cast<Eigen::Index>(i), globals_.at(scene), local.values, boxes[i], scenes_.at(scene));
  }
  return out;
}

Matrix<double> BackboneVisuals::proposal_vectors(std::size_t scene, std::span<const std::size_t> proposals) const {
  std::vector<Box> boxes;
  for (auto i : proposals) boxes.push_back(scenes_.at(scene).proposals.at(i));
  return box_vectors(scene, boxes);
}

PrecomputedVisuals::PrecomputedVisuals(const TrainConfig& config, const std::vector<data::Scene>& scenes,
                                       std::vector<visual::PrecomputedRecord> records)
    : config_(config), scenes_(scenes) {
  const int local_dim = config.local_channels * config.pool_rows * config.pool_cols;
  for (const auto& scene : scenes) {
    auto it = std::find_if(records.begin(), records.end(),
                           [&](const visual::PrecomputedRecord& r) { return r.image_ref == scene.image_ref; });
    if (it == records.end()) throw ContractError("no precomputed features for " + scene.image_ref);
    if (it->grid.channels != config.global_channels || it->locals.cols() != local_dim) {
      throw ShapeError("precomputed features for " + scene.image_ref + " do not match the model dimensions");
    }
    if (it->locals.rows() != static_cast<Eigen::Index>(scene.proposals.size())) {
      throw ShapeError("precomputed features for " + scene.image_ref + " cover a different proposal count");
    }
    records_.push_back(*it);
  }
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto grid = visual::resize_bilinear(records_[s].grid, config.grid_rows, config.grid_cols);
    auto ctx = scene_context(grid, scenes[s], config);
    maps_.push_back(std::move(ctx.map));
    globals_.push_back(std::move(ctx.global));
  }
}

Matrix<double> PrecomputedVisuals::proposal_vectors(std::size_t scene, std::span<const std::size_t> proposals) const {
  Matrix<double> out(static_cast<Eigen::Index>(proposals.size()), dim());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Eigen::RowVectorXd local = records_.at(scene).locals.row(static_cast<Eigen::Index>(proposals[i]));
    write_row(out, static_cast<Eigen::Index>(i), globals_.at(scene), local,
              scenes_.at(scene).proposals.at(proposals[i]), scenes_.at(scene));
  }
  return out;
}

std::vector<visual::PrecomputedRecord> extract_features(const Model& model, const std::vector<data::Scene>& scenes,
                                                        const data::ImageStore& images) {
  std::vector<visual::PrecomputedRecord> out;
  const auto& c = model.config;
  for (const auto& scene : scenes) {
    auto it = images.find(scene.image_ref);
    if (it == images.end()) throw ContractError("no image payload for " + scene.image_ref);
    visual::PrecomputedRecord r{scene.image_ref, model.backbone.global_map(it->second, c.grid_rows, c.grid_cols),
                                Matrix<double>(static_cast<Eigen::Index>(scene.proposals.size()),
                                               model.backbone.local_dim())};
    for (std::size_t i = 0; i < scene.proposals.size(); ++i) {
      r.locals.row(static_cast<Eigen::Index>(i)) =
          visual::local_feature(it->second, scene.proposals[i], model.backbone).values;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nlpr::train
