#ifndef NLPR_VISUAL_FEATURES_HPP
#define NLPR_VISUAL_FEATURES_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nlpr/visual/attention_map.hpp"
#include "nlpr/visual/grid.hpp"

namespace nlpr::visual {

/// Image-level visual context shared by every proposal of a scene.
struct SceneVisuals {
  ChannelGrid global_grid;
  AttentionMap map;
  Eigen::RowVectorXd weighted_global;  // 1 x C
};

/// Attention map of the given proposals over the grid, and the weighted global feature.
SceneVisuals scene_visuals(ChannelGrid global_grid, const std::vector<Box>& proposals);

/// Features computed elsewhere (e.g. by a large pretrained network): the global grid of an
/// image plus one local descriptor per proposal, in the scene's proposal order.
struct PrecomputedRecord {
  std::string image_ref;
  ChannelGrid grid;
  Matrix<double> locals;  // proposals x local_dim
};

/// Writes "<path>" (little-endian f64: grid values then local rows, per record) and the
/// JSON sidecar "<path>.json" declaring dimensions and byte offsets.
void save_precomputed_features(const std::filesystem::path& path, std::span<const PrecomputedRecord> records);
std::vector<PrecomputedRecord> load_precomputed_features(const std::filesystem::path& path);

}  // namespace nlpr::visual

#endif  // NLPR_VISUAL_FEATURES_HPP
