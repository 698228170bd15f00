#ifndef NLPR_TRAIN_CONFIG_HPP
#define NLPR_TRAIN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "nlpr/fusion/scorer.hpp"
#include "nlpr/visual/backbone.hpp"

namespace nlpr::train {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 128;  // tuples per step, rounded up to whole descriptions
  std::uint64_t seed = 1;

  int embedding_dim = 64;    // k
  int hidden = 128;          // H, per direction
  int fusion_dim = 256;      // d
  int global_channels = 16;  // C, width of the global feature map
  int local_channels = 16;   // second conv block; local descriptor is local_channels * pool cells
  int input_channels = 12;   // channels of the raw image grid
  int pool_rows = 4;
  int pool_cols = 2;
  int grid_rows = 16;        // G
  int grid_cols = 16;
  int crop_size = 32;        // S
  int max_tokens = 20;       // N

  int augment_k = 3;
  double iou_min = 0.5;
  double conf_thresh = 0.5;
  double min_area = 5000.0;

  OptimizerKind optimizer = OptimizerKind::Adam;
  fusion::FusionMode fusion = fusion::FusionMode::Product;
  bool train_embedding = true;
  bool per_person = false;  // evaluation: one query per person (first description)

  /// Throws ContractError when a size or rate is out of range.
  void validate() const;

  visual::BackboneConfig backbone() const;
  int visual_dim() const;
  int text_dim() const { return 4 * hidden; }

  nlohmann::ordered_json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
};

TrainConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const TrainConfig& config);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_CONFIG_HPP
