#include "nlpr/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "nlpr/autodiff/ops.hpp"
#include "nlpr/error.hpp"
#include "nlpr/train/optimizer.hpp"
#include "nlpr/train/visual_source.hpp"

namespace nlpr::train {

using ad::Matrix;
using ad::Tensor;

text::TextQuery description_query(const Model& model, const std::vector<data::Scene>& scenes,
                                  const data::TextRef& ref) {
  const auto attributes = data::resolve_attributes(data::attribute_votes(scenes, ref));
  return text::make_text_query(data::expression(scenes, ref), attributes, model.vocab, model.config.max_tokens);
}

namespace {

struct Prepared {
  std::vector<data::TrainingTuple> tuples;
  std::vector<text::TextQuery> texts;
  std::vector<int> text_of;    // per tuple
  Matrix<double> visuals;      // one row per distinct box
  std::vector<int> visual_of;  // per tuple
};

struct Batch {
  Tensor loss;
  std::size_t size = 0;
};

Batch forward_batch(const Model& model, const Prepared& data, std::span<const std::size_t> members) {
  std::map<int, int> slot;  // text index -> row of the encoded block
  std::vector<text::TextQuery> queries;
  std::vector<int> rows;
  std::vector<int> labels;
  Matrix<double> visual(static_cast<Eigen::Index>(members.size()), data.visuals.cols());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const int t = data.text_of[members[i]];
    auto [it, inserted] = slot.emplace(t, static_cast<int>(queries.size()));
    if (inserted) queries.push_back(data.texts[static_cast<std::size_t>(t)]);
    rows.push_back(it->second);
    labels.push_back(data.tuples[members[i]].label);
    visual.row(static_cast<Eigen::Index>(i)) = data.visuals.row(data.visual_of[members[i]]);
  }
  const auto encoded = text::encode_text(model.text, queries);
  const Tensor text_rows = ad::gather_rows(encoded.features, rows);
  const auto scored = fusion::score(Tensor::constant(std::move(visual)), text_rows, model.scorer);
  return {fusion::training_loss(scored.logits, labels), members.size()};
}

std::string first_non_finite(const std::vector<Tensor>& params, bool grads) {
  for (const auto& p : params) {
    if (!(grads ? p.grad().allFinite() : p.value().allFinite())) return p.name();
  }
  return {};
}

double full_loss(const Model& model, const Prepared& data, std::size_t batch) {
  std::vector<std::size_t> all(data.tuples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t b = 0; b < all.size(); b += batch) {
    const std::size_t n = std::min(batch, all.size() - b);
    total += forward_batch(model, data, std::span<const std::size_t>(all).subspan(b, n)).loss.item() *
             static_cast<double>(n);
  }
  return all.empty() ? 0.0 : total / static_cast<double>(all.size());
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<data::Scene>& scenes,
                  const data::ImageStore& images, const TrainOptions& options) {
  config.validate();
  Rng root(config.seed);
  Rng init_rng = root.fork();
  Rng data_rng = root.fork();
  Rng order_rng = root.fork();

  TrainResult result{init_model(config, build_vocabulary(scenes), init_rng, options.pretrained), {}, 0, 0, 0, 0.0,
                     0.0};
  const Model& model = result.model;

  auto set = data::build_training_set(scenes, data_rng, {config.augment_k, config.iou_min, {}});
  result.positives = set.positives;
  result.negatives = set.negatives;
  result.fallbacks = set.fallbacks;

  Prepared data;
  data.tuples = std::move(set.tuples);
  {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> text_index;
    for (const auto& t : data.tuples) {
      auto key = std::make_tuple(t.text.scene, t.text.person, t.text.description);
      auto [it, inserted] = text_index.emplace(key, static_cast<int>(data.texts.size()));
      if (inserted) data.texts.push_back(description_query(model, scenes, t.text));
      data.text_of.push_back(it->second);
    }

    // Tuples sharing a box are adjacent, so distinct boxes are runs of equal proposals.
    BackboneVisuals visuals(model, scenes, images);
    std::vector<std::pair<std::size_t, geometry::Box>> boxes;
    for (const auto& t : data.tuples) {
      if (boxes.empty() || boxes.back().first != t.scene || !(boxes.back().second == t.proposal)) {
        boxes.emplace_back(t.scene, t.proposal);
      }
      data.visual_of.push_back(static_cast<int>(boxes.size()) - 1);
    }
    data.visuals.resize(static_cast<Eigen::Index>(boxes.size()), visuals.dim());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::array<geometry::Box, 1> one{boxes[i].second};
      data.visuals.row(static_cast<Eigen::Index>(i)) = visuals.box_vectors(boxes[i].first, one);
    }
  }

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  if (options.measure_full_loss) result.initial_loss = full_loss(model, data, batch);

  auto optimizer = make_optimizer(config.optimizer, model.parameters(), config.learning_rate);
  optimizer->zero_grad();

  // Batches are built from whole descriptions so each text is encoded once per epoch:
  // texts are taken in shuffled order until their tuples fill batch_size.
  std::vector<std::vector<std::size_t>> by_text(data.texts.size());
  for (std::size_t i = 0; i < data.tuples.size(); ++i) by_text[static_cast<std::size_t>(data.text_of[i])].push_back(i);
  std::vector<std::size_t> text_order(by_text.size());
  std::iota(text_order.begin(), text_order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(std::span<std::size_t>(text_order));
    double total = 0.0;
    std::size_t b = 0;
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < text_order.size(); ++k) {
      const auto& group = by_text[text_order[k]];
      members.insert(members.end(), group.begin(), group.end());
      if (members.size() < batch && k + 1 < text_order.size()) continue;

      auto step = forward_batch(model, data, members);
      const double value = step.loss.item();
      if (!std::isfinite(value)) {
        std::string culprit = first_non_finite(optimizer->params(), false);
        if (culprit.empty()) culprit = "loss";
        throw TrainingError(epoch, b, culprit,
                            "non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                                " (tensor: " + culprit + ")");
      }
      ad::backward(step.loss);
      if (auto culprit = first_non_finite(optimizer->params(), true); !culprit.empty()) {
        throw TrainingError(epoch, b, culprit,
                            "non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b) + " (tensor: " + culprit + ")");
      }
      optimizer->step();
      total += value * static_cast<double>(members.size());
      members.clear();
      ++b;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double count = static_cast<double>(data.tuples.size());
    EpochLog log{epoch, data.tuples.empty() ? 0.0 : total / count, seconds};
    result.epochs.push_back(log);
    if (options.on_epoch) options.on_epoch(log);
  }

  if (options.measure_full_loss) result.final_loss = full_loss(model, data, batch);
  return result;
}

ad::Checkpoint training_checkpoint(const TrainResult& result) {
  nlohmann::ordered_json extra;
  extra["positives"] = result.positives;
  extra["negatives"] = result.negatives;
  extra["fallbacks"] = result.fallbacks;
  // Timings are left out so that equal runs give equal files.
  extra["epoch_loss"] = nlohmann::ordered_json::array();
  for (const auto& e : result.epochs) extra["epoch_loss"].push_back(e.mean_loss);
  return to_checkpoint(result.model, extra);
}

}  // namespace nlpr::train
