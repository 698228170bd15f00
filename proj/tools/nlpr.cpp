// Command-line front end: dataset preparation and generation, training, evaluation,
// single queries and attention-map dumps. Every command prints a JSON summary on stdout.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nlpr/data/dataset.hpp"
#include "nlpr/data/prep.hpp"
#include "nlpr/data/synthetic.hpp"
#include "nlpr/error.hpp"
#include "nlpr/train/evaluate.hpp"
#include "nlpr/train/trainer.hpp"
#include "nlpr/visual/features.hpp"
#include "nlpr/visual/ppm.hpp"

namespace {

using nlohmann::ordered_json;
using namespace nlpr;

struct Global {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

train::TrainConfig resolve_config(const Global& g) {
  train::TrainConfig c = g.config_path.empty() ? train::TrainConfig{} : train::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  return c;
}

void write_json(const std::string& path, const ordered_json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void require_out(const Global& g, const char* command) {
  if (g.out.empty()) throw CLI::ValidationError(std::string(command) + " needs --out");
}

std::size_t find_scene(const std::vector<data::Scene>& scenes, const std::string& key) {
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (scenes[i].image_ref == key) return i;
  }
  try {
    const auto idx = std::stoul(key);
    if (idx < scenes.size()) return idx;
  } catch (const std::exception&) {
  }
  throw ContractError("no scene '" + key + "' in the dataset");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieve people in street scenes from natural-language descriptions"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config_path, "JSON training configuration");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--out", g.out, "Primary output file");

  // prep
  auto* prep = app.add_subcommand("prep", "Turn mask annotations into a dataset file");
  std::string prep_input;
  data::PrepOptions prep_options;
  prep->add_option("input", prep_input, "Raw annotation JSONL")->required();
  prep->add_option("--min-area", prep_options.min_area, "Smallest person box kept, in pixels");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset with image payloads");
  data::SyntheticConfig synth;
  int scene_count = 100;
  std::string prefix = "synthetic/";
  gen->add_option("--scenes", scene_count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--persons", synth.persons, "Persons per scene")->check(CLI::PositiveNumber);
  gen->add_option("--descriptions", synth.descriptions, "Descriptions per person")->check(CLI::PositiveNumber);
  gen->add_option("--voters", synth.voters, "Annotators per attribute")->check(CLI::PositiveNumber);
  gen->add_option("--vote-noise", synth.vote_noise, "Chance of a wrong vote");
  gen->add_option("--pixel-noise", synth.pixel_noise, "Background noise level");
  gen->add_option("--good-proposals", synth.good_proposals, "Confident boxes per person");
  gen->add_option("--prefix", prefix, "Image reference prefix");

  // train
  auto* tr = app.add_subcommand("train", "Train a model and write a checkpoint");
  std::string train_data, embeddings;
  std::optional<int> epochs, batch;
  std::optional<double> lr;
  tr->add_option("data", train_data, "Training dataset (JSONL with image payloads)")->required();
  tr->add_option("--epochs", epochs, "Override the configured epoch count");
  tr->add_option("--lr", lr, "Override the learning rate");
  tr->add_option("--batch", batch, "Override the batch size");
  tr->add_option("--embeddings", embeddings, "Pretrained word vectors (text format)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate Rec@1 / Rec@2 of a checkpoint");
  std::string model_path, eval_data, features_path;
  bool per_person = false;
  ev->add_option("--model", model_path, "Checkpoint")->required();
  ev->add_option("data", eval_data, "Evaluation dataset")->required();
  ev->add_flag("--per-person", per_person, "One query per person instead of per description");
  ev->add_option("--features", features_path, "Precomputed feature file instead of the built-in backbone");

  // query
  auto* qu = app.add_subcommand("query", "Rank the proposals of one scene for a description");
  std::string query_data, scene_key, text;
  std::vector<std::string> attrs;
  qu->add_option("--model", model_path, "Checkpoint")->required();
  qu->add_option("data", query_data, "Dataset holding the scene")->required();
  qu->add_option("--scene", scene_key, "Scene index or image_ref")->required();
  qu->add_option("--text", text, "Description")->required();
  qu->add_option("--attr", attrs, "Attribute value (repeatable)");

  // attn-dump
  auto* ad_cmd = app.add_subcommand("attn-dump", "Write the proposal attention map of a scene");
  std::string dump_data, ppm_path;
  int cell_px = 8;
  ad_cmd->add_option("data", dump_data, "Dataset holding the scene")->required();
  ad_cmd->add_option("--scene", scene_key, "Scene index or image_ref")->required();
  ad_cmd->add_option("--ppm", ppm_path, "Also render the map as a binary PPM");
  ad_cmd->add_option("--cell-px", cell_px, "PPM pixels per map cell")->check(CLI::PositiveNumber);

  // extract
  auto* ex = app.add_subcommand("extract", "Write backbone features for every proposal");
  std::string extract_data;
  ex->add_option("--model", model_path, "Checkpoint")->required();
  ex->add_option("data", extract_data, "Dataset")->required();

  auto* cfg = app.add_subcommand("config", "Write the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    ordered_json summary;
    if (*prep) {
      require_out(g, "prep");
      const auto result = data::prepare_annotation_file(prep_input, prep_options);
      data::save_dataset(g.out, result.scenes);
      summary = {{"scenes", result.scenes.size()},
                 {"persons_kept", result.persons_kept},
                 {"persons_dropped", result.persons_dropped}};
    } else if (*gen) {
      require_out(g, "gen");
      Rng rng(g.seed.value_or(1));
      const auto set = data::generate_synthetic_dataset(rng, synth, scene_count, prefix);
      data::save_dataset(g.out, set.scenes);
      data::save_images(g.out, set.images);
      std::size_t persons = 0;
      for (const auto& s : set.scenes) persons += s.persons.size();
      summary = {{"scenes", set.scenes.size()}, {"persons", persons}, {"dataset", g.out}};
    } else if (*tr) {
      require_out(g, "train");
      auto config = resolve_config(g);
      if (epochs) config.epochs = *epochs;
      if (lr) config.learning_rate = *lr;
      if (batch) config.batch_size = *batch;
      config.validate();
      const auto scenes = data::load_dataset(train_data);
      const auto images = data::load_images(train_data);
      std::optional<text::EmbeddingFile> pretrained;
      if (!embeddings.empty()) pretrained = text::load_embedding_file(embeddings);
      train::TrainOptions options;
      options.pretrained = pretrained ? &*pretrained : nullptr;
      options.on_epoch = [](const train::EpochLog& e) {
        std::cerr << "epoch " << e.epoch << " loss " << e.mean_loss << " (" << e.seconds << " s)\n";
      };
      const auto result = train::train(config, scenes, images, options);
      ad::save_checkpoint(g.out, train::training_checkpoint(result));
      ordered_json losses = ordered_json::array();
      for (const auto& e : result.epochs) losses.push_back(e.mean_loss);
      summary = {{"checkpoint", g.out},
                 {"positives", result.positives},
                 {"negatives", result.negatives},
                 {"fallbacks", result.fallbacks},
                 {"epoch_loss", losses}};
      write_json(g.out + ".log.json", summary);
    } else if (*ev) {
      const auto model = train::load_model(model_path);
      const auto scenes = data::load_dataset(eval_data);
      train::EvalReport report;
      if (!features_path.empty()) {
        const train::PrecomputedVisuals visuals(model.config, scenes,
                                                visual::load_precomputed_features(features_path));
        report = train::evaluate(model, scenes, visuals, per_person || model.config.per_person);
      } else {
        const auto images = data::load_images(eval_data);
        const train::BackboneVisuals visuals(model, scenes, images);
        report = train::evaluate(model, scenes, visuals, per_person || model.config.per_person);
      }
      const auto l = train::default_edges(train::BucketAxis::DescriptionLength);
      const auto s = train::default_edges(train::BucketAxis::ProposalSize);
      const std::vector<train::BucketTable> tables{
          train::bucket_report(report, train::BucketAxis::DescriptionLength, l),
          train::bucket_report(report, train::BucketAxis::ProposalSize, s)};
      const auto full = train::report_json(report, tables);
      write_json(g.out, full);
      summary = {{"rec_at_1", report.rec_at_1}, {"rec_at_2", report.rec_at_2},
                 {"total", report.total},       {"flagged", report.flagged}};
    } else if (*qu) {
      const auto model = train::load_model(model_path);
      const auto scenes = data::load_dataset(query_data);
      const auto images = data::load_images(query_data);
      const auto& scene = scenes[find_scene(scenes, scene_key)];
      const auto out = train::query(model, scene, images.at(scene.image_ref), text, attrs);
      if (out.all_unknown_tokens) std::cerr << "warning: no query token is in the vocabulary\n";
      summary = train::query_json(scene, out);
      write_json(g.out, summary);
    } else if (*ad_cmd) {
      const auto config = resolve_config(g);
      const auto scenes = data::load_dataset(dump_data);
      const auto& scene = scenes[find_scene(scenes, scene_key)];
      const auto boxes = train::attention_boxes(scene, config);
      if (boxes.empty()) throw ContractError("scene has no boxes to attend to");
      const auto map = visual::attention_map(boxes, config.grid_rows, config.grid_cols, scene.width, scene.height);
      ordered_json grid = ordered_json::array();
      for (Eigen::Index i = 0; i < map.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < map.cols(); ++j) row.push_back(map(i, j));
        grid.push_back(std::move(row));
      }
      ordered_json props = ordered_json::array();
      for (const auto& b : boxes) {
        props.push_back({{"x_min", b.x_min()}, {"y_min", b.y_min()}, {"x_max", b.x_max()}, {"y_max", b.y_max()}});
      }
      const ordered_json overlay{{"image_ref", scene.image_ref}, {"width", scene.width}, {"height", scene.height},
                                 {"proposals", props},           {"attention_map", grid}};
      write_json(g.out, overlay);
      if (!ppm_path.empty()) visual::write_attention_ppm(ppm_path, map, cell_px);
      summary = {{"image_ref", scene.image_ref}, {"rows", map.rows()}, {"cols", map.cols()},
                 {"peak", map.maxCoeff()}};
    } else if (*ex) {
      require_out(g, "extract");
      const auto model = train::load_model(model_path);
      const auto scenes = data::load_dataset(extract_data);
      const auto records = train::extract_features(model, scenes, data::load_images(extract_data));
      visual::save_precomputed_features(g.out, records);
      summary = {{"records", records.size()}, {"features", g.out}};
    } else if (*cfg) {
      const auto config = resolve_config(g);
      write_json(g.out, config.to_json());
      summary = config.to_json();
    }
    std::cout << summary.dump(2) << '\n';
  } catch (const train::TrainingError& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
