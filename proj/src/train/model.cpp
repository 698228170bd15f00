#include "nlpr/train/model.hpp"

#include "nlpr/error.hpp"
#include "nlpr/text/attributes.hpp"

namespace nlpr::train {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<ad::Tensor> Model::parameters() const {
  auto out = text.parameters();
  for (const auto& t : scorer.parameters()) out.push_back(t);
  return out;
}

std::vector<ad::Tensor> Model::named_tensors() const {
  std::vector<ad::Tensor> out{text.embedding};
  for (const auto& t : text.query.parameters()) out.push_back(t);
  for (const auto& t : text.attributes.parameters()) out.push_back(t);
  out.push_back(text.attention);
  for (const auto& t : scorer.parameters()) out.push_back(t);
  return out;
}

text::Vocabulary build_vocabulary(const std::vector<data::Scene>& scenes) {
  text::Vocabulary vocab;
  for (auto c : text::all_categories()) {
    for (auto v : text::catalogue_values(c)) vocab.add(v);
  }
  for (const auto& s : scenes) {
    for (const auto& p : s.persons) {
      for (const auto& d : p.descriptions) {
        for (const auto& tok : d) vocab.add(tok);
      }
    }
  }
  return vocab;
}

Model init_model(const TrainConfig& config, text::Vocabulary vocab, Rng& rng,
                 const text::EmbeddingFile* pretrained) {
  config.validate();
  Rng embed_rng = rng.fork();
  Rng text_rng = rng.fork();
  Rng scorer_rng = rng.fork();
  Rng backbone_rng = rng.fork();
  auto table = text::build_embedding_table(vocab, config.embedding_dim, embed_rng, pretrained);
  auto text_params = text::TextEncoderParams::init(std::move(table), config.hidden, text_rng);
  text_params.embedding.set_requires_grad(config.train_embedding);
  auto scorer = fusion::ScorerParams::init(config.visual_dim(), config.text_dim(), config.fusion_dim,
                                           scorer_rng, config.fusion);
  visual::TinyBackbone backbone(config.backbone(), backbone_rng);
  return Model{config, std::move(vocab), std::move(text_params), std::move(scorer), std::move(backbone)};
}

ad::Checkpoint to_checkpoint(const Model& model, const ordered_json& extra) {
  ordered_json meta;
  meta["format"] = "nlpr-model";
  meta["config"] = model.config.to_json();
  meta["vocabulary"] = model.vocab.tokens();
  if (!extra.is_null()) meta["training"] = extra;
  ad::Checkpoint ckpt;
  ckpt.metadata = meta.dump();
  for (const auto& t : model.named_tensors()) ckpt.tensors.push_back({t.name(), t.value()});
  for (auto& w : model.backbone.named_weights()) ckpt.tensors.push_back(std::move(w));
  return ckpt;
}

Model model_from_checkpoint(const ad::Checkpoint& checkpoint) {
  json meta;
  try {
    meta = json::parse(checkpoint.metadata);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), 0);
  }
  if (!meta.contains("config") || !meta.contains("vocabulary")) {
    throw ParseError("checkpoint metadata lacks config or vocabulary", 0);
  }
  const TrainConfig config = TrainConfig::from_json(meta["config"]);
  const auto tokens = meta["vocabulary"].get<std::vector<std::string>>();
  // Build the structure with throwaway values, then overwrite every tensor by name.
  Rng rng(0);
  Model model = init_model(config, text::Vocabulary::from_tokens(tokens), rng);
  for (auto& t : model.named_tensors()) {
    const auto& stored = checkpoint.at(t.name());
    if (stored.rows() != t.rows() || stored.cols() != t.cols()) {
      throw ShapeError("checkpoint tensor " + t.name() + " has the wrong shape");
    }
    t.mutable_value() = stored;
  }
  model.backbone = visual::TinyBackbone::from_checkpoint(config.backbone(), checkpoint);
  return model;
}

Model load_model(const std::filesystem::path& path) {
  return model_from_checkpoint(ad::load_checkpoint(path));
}

}  // namespace nlpr::train
