#ifndef NLPR_TRAIN_MODEL_HPP
#define NLPR_TRAIN_MODEL_HPP

#include <filesystem>
#include <vector>

#include "nlpr/autodiff/checkpoint.hpp"
#include "nlpr/data/dataset.hpp"
#include "nlpr/fusion/scorer.hpp"
#include "nlpr/text/encoder.hpp"
#include "nlpr/text/vocabulary.hpp"
#include "nlpr/train/config.hpp"
#include "nlpr/visual/backbone.hpp"

namespace nlpr::train {

struct Model {
  TrainConfig config;
  text::Vocabulary vocab;
  text::TextEncoderParams text;
  fusion::ScorerParams scorer;
  visual::TinyBackbone backbone;

  /// Tensors updated by the optimizer.
  std::vector<ad::Tensor> parameters() const;
  /// Every learned tensor, trainable or not, in checkpoint order.
  std::vector<ad::Tensor> named_tensors() const;
};

/// Attribute catalogue tokens first (canonical order), then description tokens in order of
/// first appearance.
text::Vocabulary build_vocabulary(const std::vector<data::Scene>& scenes);

Model init_model(const TrainConfig& config, text::Vocabulary vocab, Rng& rng,
                 const text::EmbeddingFile* pretrained = nullptr);

/// Metadata carries the config and vocabulary as JSON.
ad::Checkpoint to_checkpoint(const Model& model, const nlohmann::ordered_json& extra = {});
Model model_from_checkpoint(const ad::Checkpoint& checkpoint);
Model load_model(const std::filesystem::path& path);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_MODEL_HPP
