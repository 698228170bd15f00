#include "nlpr/train/config.hpp"

#include <fstream>

#include "nlpr/error.hpp"

namespace nlpr::train {

using nlohmann::json;
using nlohmann::ordered_json;

void TrainConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ContractError(std::string("config: ") + name + " must be positive");
  };
  if (epochs < 0) throw ContractError("config: epochs must be non-negative");
  if (!(learning_rate >= 0.0)) throw ContractError("config: learning_rate must be non-negative");
  positive(batch_size, "batch_size");
  positive(embedding_dim, "embedding_dim");
  positive(hidden, "hidden");
  positive(fusion_dim, "fusion_dim");
  positive(global_channels, "global_channels");
  positive(local_channels, "local_channels");
  positive(input_channels, "input_channels");
  positive(pool_rows, "pool_rows");
  positive(pool_cols, "pool_cols");
  positive(grid_rows, "grid_rows");
  positive(grid_cols, "grid_cols");
  positive(crop_size, "crop_size");
  positive(max_tokens, "max_tokens");
  positive(augment_k, "augment_k");
  if (crop_size < 2 * pool_rows || crop_size < 2 * pool_cols) {
    throw ContractError("config: crop_size too small for the pooled layout");
  }
  if (!(iou_min > 0.0 && iou_min < 1.0)) throw ContractError("config: iou_min must lie in (0, 1)");
  if (!(conf_thresh >= 0.0 && conf_thresh <= 1.0)) throw ContractError("config: conf_thresh must lie in [0, 1]");
  if (!(min_area >= 0.0)) throw ContractError("config: min_area must be non-negative");
}

visual::BackboneConfig TrainConfig::backbone() const {
  return {input_channels, global_channels, local_channels, pool_rows, pool_cols, crop_size};
}

int TrainConfig::visual_dim() const {
  return global_channels + local_channels * pool_rows * pool_cols + 8;
}

ordered_json TrainConfig::to_json() const {
  return ordered_json{
      {"epochs", epochs},
      {"learning_rate", learning_rate},
      {"batch_size", batch_size},
      {"seed", seed},
      {"embedding_dim", embedding_dim},
      {"hidden", hidden},
      {"fusion_dim", fusion_dim},
      {"global_channels", global_channels},
      {"local_channels", local_channels},
      {"input_channels", input_channels},
      {"pool_rows", pool_rows},
      {"pool_cols", pool_cols},
      {"grid_rows", grid_rows},
      {"grid_cols", grid_cols},
      {"crop_size", crop_size},
      {"max_tokens", max_tokens},
      {"augment_k", augment_k},
      {"iou_min", iou_min},
      {"conf_thresh", conf_thresh},
      {"min_area", min_area},
      {"optimizer", optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
      {"fusion", fusion == fusion::FusionMode::Product ? "product" : "concat"},
      {"train_embedding", train_embedding},
      {"per_person", per_person},
  };
}

TrainConfig TrainConfig::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<int>();
      else if (key == "hidden") c.hidden = value.get<int>();
      else if (key == "fusion_dim") c.fusion_dim = value.get<int>();
      else if (key == "global_channels") c.global_channels = value.get<int>();
      else if (key == "local_channels") c.local_channels = value.get<int>();
      else if (key == "input_channels") c.input_channels = value.get<int>();
      else if (key == "pool_rows") c.pool_rows = value.get<int>();
      else if (key == "pool_cols") c.pool_cols = value.get<int>();
      else if (key == "grid_rows") c.grid_rows = value.get<int>();
      else if (key == "grid_cols") c.grid_cols = value.get<int>();
      else if (key == "crop_size") c.crop_size = value.get<int>();
      else if (key == "max_tokens") c.max_tokens = value.get<int>();
      else if (key == "augment_k") c.augment_k = value.get<int>();
      else if (key == "iou_min") c.iou_min = value.get<double>();
      else if (key == "conf_thresh") c.conf_thresh = value.get<double>();
      else if (key == "min_area") c.min_area = value.get<double>();
      else if (key == "train_embedding") c.train_embedding = value.get<bool>();
      else if (key == "per_person") c.per_person = value.get<bool>();
      else if (key == "optimizer") {
        const auto name = value.get<std::string>();
        if (name == "adam") c.optimizer = OptimizerKind::Adam;
        else if (name == "sgd") c.optimizer = OptimizerKind::Sgd;
        else throw ParseError("config: optimizer must be \"adam\" or \"sgd\"", 0);
      } else if (key == "fusion") {
        const auto name = value.get<std::string>();
        if (name == "product") c.fusion = fusion::FusionMode::Product;
        else if (name == "concat") c.fusion = fusion::FusionMode::Concat;
        else throw ParseError("config: fusion must be \"product\" or \"concat\"", 0);
      } else {
        throw ParseError("config: unknown key '" + key + "'", 0);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  return TrainConfig::from_json(j);
}

void save_config(const std::filesystem::path& path, const TrainConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << config.to_json().dump(2) << '\n';
}

}  // namespace nlpr::train
