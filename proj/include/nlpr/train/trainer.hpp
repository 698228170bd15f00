#ifndef NLPR_TRAIN_TRAINER_HPP
#define NLPR_TRAIN_TRAINER_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpr/data/dataset.hpp"
#include "nlpr/data/training_set.hpp"
#include "nlpr/train/model.hpp"

namespace nlpr::train {

/// Training hit a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(int epoch, std::size_t batch, std::string tensor, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), batch_(batch), tensor_(std::move(tensor)) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  const std::string& tensor() const { return tensor_; }

 private:
  int epoch_;
  std::size_t batch_;
  std::string tensor_;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;  // mean over the epoch's batches, weighted by batch size
  double seconds = 0.0;
};

struct TrainOptions {
  std::function<void(const EpochLog&)> on_epoch;
  const text::EmbeddingFile* pretrained = nullptr;
  bool measure_full_loss = false;  // evaluate the whole set before and after training
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> epochs;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t fallbacks = 0;
  double initial_loss = 0.0;  // set when measure_full_loss
  double final_loss = 0.0;
};

/// Mini-batch training over the tuples of build_training_set. Everything random (model
/// init, augmentation, negatives, batch order) flows from config.seed, so equal inputs
/// give bitwise equal models. Throws TrainingError on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::vector<data::Scene>& scenes,
                  const data::ImageStore& images, const TrainOptions& options = {});

/// Text query for a stored description, with attributes resolved from its person's votes.
text::TextQuery description_query(const Model& model, const std::vector<data::Scene>& scenes,
                                  const data::TextRef& ref);

/// The checkpoint a training run saves, with the epoch log in its metadata.
ad::Checkpoint training_checkpoint(const TrainResult& result);

}  // namespace nlpr::train

#endif  // NLPR_TRAIN_TRAINER_HPP
