#include "nlpr/data/training_set.hpp"

#include "nlpr/error.hpp"

namespace nlpr::data {

TrainingSet build_training_set(const std::vector<Scene>& scenes, Rng& rng,
                               const TrainingSetOptions& options) {
  std::vector<TextRef> owners;  // one entry per person, description index unused
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (std::size_t p = 0; p < scenes[s].persons.size(); ++p) {
      if (scenes[s].persons[p].descriptions.empty()) {
        throw ContractError("build_training_set: person without descriptions in " + scenes[s].image_ref);
      }
      owners.push_back({s, p, 0});
    }
  }
  if (owners.size() < 2) {
    throw ContractError("build_training_set: at least two persons are needed to draw negatives");
  }

  TrainingSet out;
  for (std::size_t o = 0; o < owners.size(); ++o) {
    const auto& scene = scenes[owners[o].scene];
    const auto& person = scene.persons[owners[o].person];
    const Box bounds(0.0, 0.0, scene.width, scene.height);
    const auto shifted = geometry::augment_shift(person.gt_box, options.augment_k, options.iou_min,
                                                 bounds, rng, options.sampling);
    for (const auto& b : shifted.boxes) {
      if (b == person.gt_box.with_confidence(std::nullopt)) ++out.fallbacks;
    }
    for (const auto& box : shifted.boxes) {
      const auto spatial = geometry::spatial_features(box, scene.width, scene.height);
      for (std::size_t d = 0; d < person.descriptions.size(); ++d) {
        out.tuples.push_back({owners[o].scene, owners[o].person, box, spatial,
                              {owners[o].scene, owners[o].person, d}, 1});
        ++out.positives;

        std::size_t other = rng.below(owners.size() - 1);
        if (other >= o) ++other;
        const auto& donor = scenes[owners[other].scene].persons[owners[other].person];
        const std::size_t desc = rng.below(donor.descriptions.size());
        out.tuples.push_back({owners[o].scene, owners[o].person, box, spatial,
                              {owners[other].scene, owners[other].person, desc}, 0});
        ++out.negatives;
      }
    }
  }
  return out;
}

const std::vector<std::string>& expression(const std::vector<Scene>& scenes, const TextRef& ref) {
  return scenes.at(ref.scene).persons.at(ref.person).descriptions.at(ref.description);
}

const AttributeVotes& attribute_votes(const std::vector<Scene>& scenes, const TextRef& ref) {
  return scenes.at(ref.scene).persons.at(ref.person).votes;
}

}  // namespace nlpr::data
