#ifndef NLPR_DATA_TRAINING_SET_HPP
#define NLPR_DATA_TRAINING_SET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "nlpr/data/dataset.hpp"
#include "nlpr/random.hpp"

namespace nlpr::data {

/// Where a tuple's expression and attributes come from.
struct TextRef {
  std::size_t scene = 0;
  std::size_t person = 0;
  std::size_t description = 0;

  friend bool operator==(const TextRef&, const TextRef&) = default;
};

struct TrainingTuple {
  std::size_t scene = 0;   // image the proposal lives in
  std::size_t person = 0;  // person whose ground truth the proposal was shifted from
  Box proposal;
  geometry::SpatialFeature<double> spatial;
  TextRef text;
  int label = 0;

  friend bool operator==(const TrainingTuple&, const TrainingTuple&) = default;
};

struct TrainingSetOptions {
  int augment_k = 3;
  double iou_min = 0.5;
  geometry::ShiftSampling sampling{};
};

struct TrainingSet {
  std::vector<TrainingTuple> tuples;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t fallbacks = 0;  // boxes that fell back to the ground truth
};

/// For every person: augment_k shifted copies of the ground truth, each paired with every
/// description (label 1) and, one for one, with a description and attributes drawn
/// uniformly from a different person of the set (label 0). Throws ContractError when
/// the set has fewer than two persons.
TrainingSet build_training_set(const std::vector<Scene>& scenes, Rng& rng,
                               const TrainingSetOptions& options = {});

const std::vector<std::string>& expression(const std::vector<Scene>& scenes, const TextRef& ref);
const AttributeVotes& attribute_votes(const std::vector<Scene>& scenes, const TextRef& ref);

}  // namespace nlpr::data

#endif  // NLPR_DATA_TRAINING_SET_HPP
