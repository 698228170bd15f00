#ifndef NLPR_DATA_SYNTHETIC_HPP
#define NLPR_DATA_SYNTHETIC_HPP

#include <array>
#include <string>
#include <vector>

#include "nlpr/data/dataset.hpp"
#include "nlpr/random.hpp"

namespace nlpr::data {

struct SyntheticConfig {
  double width = 480.0;
  double height = 240.0;
  int cell_px = 8;
  int channels = 12;
  int persons = 4;
  int descriptions = 3;
  int voters = 3;
  double vote_noise = 0.0;    // chance that a voter picks a random other value
  double pixel_noise = 0.05;  // std-dev of the per-cell background noise
  double pattern_amplitude = 1.0;
  // Chance that a category is not visible / not stated, canonical category order.
  std::array<double, text::kCategoryCount> unknown_rate{0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0};
  double min_person_width = 56.0, max_person_width = 90.0;
  double min_person_height = 110.0, max_person_height = 180.0;
  int good_proposals = 1;        // tight, confident boxes per person
  int loose_proposals = 1;       // badly placed, low-confidence boxes per person
  int background_proposals = 2;  // low-confidence boxes anywhere
  double min_proposal_area = 5000.0;
  int placement_budget = 1000;
  int min_attribute_difference = 2;  // visual categories in which any two persons differ
};

struct SyntheticDataset {
  std::vector<Scene> scenes;
  ImageStore images;
  std::vector<std::vector<text::Attributes>> truth;  // per scene, per person
};

struct SyntheticScene {
  Scene scene;
  visual::ChannelGrid image;
  std::vector<text::Attributes> truth;
};

/// Persons are placed without overlap; each carries its attribute patterns inside its box,
/// its location follows the box centre's horizontal third, and its descriptions are
/// template sentences naming every known attribute. Throws GenerationError when the
/// persons cannot be placed within the budget.
SyntheticScene generate_synthetic_scene(Rng& rng, const SyntheticConfig& config, std::string image_ref);

SyntheticDataset generate_synthetic_dataset(Rng& rng, const SyntheticConfig& config, int scenes,
                                            const std::string& prefix);

/// Location value of a box centre's horizontal third.
std::string location_of(const Box& box, double image_width);

/// Deterministic channel signature of one catalogue value.
Eigen::RowVectorXd attribute_pattern(text::Category category, std::string_view value, int channels);

/// Adds the patterns of `attributes` for a person occupying `box`.
void paint_person(visual::ChannelGrid& image, const Box& box, const text::Attributes& attributes,
                  double amplitude);

/// Words a description uses for a catalogue value ("single_shoulder_bag" -> "shoulder bag").
std::vector<std::string> value_phrase(std::string_view value);

/// Template sentence `variant` (taken modulo the template count) naming every known value.
std::string describe(const text::Attributes& attributes, int variant);

}  // namespace nlpr::data

#endif  // NLPR_DATA_SYNTHETIC_HPP
