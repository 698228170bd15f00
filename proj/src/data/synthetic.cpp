#include "nlpr/data/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "nlpr/error.hpp"
#include "nlpr/text/vocabulary.hpp"

namespace nlpr::data {

using text::Category;

namespace {

struct Region {
  double x0, x1, y0, y1, weight;
};

// Box-relative region each category is painted into; location has no appearance.
std::optional<Region> region_of(Category c) {
  switch (c) {
    case Category::Gender: return Region{0.0, 1.0, 0.0, 1.0, 0.5};
    case Category::Age: return Region{0.0, 1.0, 0.0, 1.0, 0.5};
    case Category::Hair: return Region{0.15, 0.85, 0.0, 0.15, 1.0};
    case Category::Accessories: return Region{0.2, 0.8, 0.03, 0.2, 1.0};
    case Category::UpperBody: return Region{0.0, 1.0, 0.2, 0.55, 1.0};
    case Category::LowerBody: return Region{0.0, 1.0, 0.55, 1.0, 1.0};
    case Category::Carrying: return Region{0.0, 0.35, 0.3, 0.7, 1.0};
    case Category::Location: return std::nullopt;
  }
  return std::nullopt;
}

const std::map<std::string, std::string, std::less<>>& phrases() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"male", "man"},
      {"female", "woman"},
      {"long_hair", "long hair"},
      {"short_hair", "short hair"},
      {"bald", "bald head"},
      {"shirt", "shirt"},
      {"t_shirt", "t-shirt"},
      {"suit", "suit"},
      {"jeans", "jeans"},
      {"short", "shorts"},
      {"skirt", "skirt"},
      {"pant", "pants"},
      {"backpack", "backpack"},
      {"single_shoulder_bag", "shoulder bag"},
      {"handbag", "handbag"},
      {"baby", "baby"},
      {"teenage", "teenage"},
      {"adult", "adult"},
      {"elderly", "elderly"},
      {"sunglasses", "sunglasses"},
      {"head_phones", "headphones"},
      {"hat", "hat"},
      {"on_left_side", "on the left side"},
      {"in_the_center", "in the center"},
      {"on_right_side", "on the right side"},
  };
  return table;
}

std::string phrase(const text::Attributes& a, Category c) {
  const auto& v = a[static_cast<std::size_t>(c)];
  if (!v) return {};
  return phrases().at(*v);
}

std::string article(const std::string& noun_phrase) {
  static const std::array<std::string, 7> bare{"jeans",      "shorts",    "pants",    "sunglasses",
                                               "headphones", "long hair", "short hair"};
  for (const auto& b : bare) {
    if (noun_phrase == b) return noun_phrase;
  }
  const bool vowel = std::string_view("aeiou").find(noun_phrase.front()) != std::string_view::npos;
  return (vowel ? "an " : "a ") + noun_phrase;
}

void append(std::string& out, const std::string& piece) {
  if (piece.empty()) return;
  if (!out.empty()) out.push_back(' ');
  out += piece;
}

int visual_difference(const text::Attributes& a, const text::Attributes& b) {
  int diff = 0;
  for (int c = 0; c < text::kCategoryCount; ++c) {
    if (static_cast<Category>(c) == Category::Location) continue;
    if (a[static_cast<std::size_t>(c)] != b[static_cast<std::size_t>(c)]) ++diff;
  }
  return diff;
}

text::Attributes sample_attributes(Rng& rng, const SyntheticConfig& config) {
  text::Attributes a;
  for (int c = 0; c < text::kCategoryCount; ++c) {
    const auto cat = static_cast<Category>(c);
    if (cat == Category::Location) continue;
    if (rng.bernoulli(config.unknown_rate[static_cast<std::size_t>(c)])) continue;
    const auto values = text::catalogue_values(cat);
    a[static_cast<std::size_t>(c)] = std::string(values[rng.below(values.size())]);
  }
  return a;
}

Box jitter(const Box& gt, double offset, double min_scale, double max_scale, Rng& rng, double w, double h) {
  const double cx = gt.center_x() + rng.uniform(-offset, offset) * gt.width();
  const double cy = gt.center_y() + rng.uniform(-offset, offset) * gt.height();
  const double bw = gt.width() * rng.uniform(min_scale, max_scale);
  const double bh = gt.height() * rng.uniform(min_scale, max_scale);
  const double x0 = std::max(0.0, cx - bw / 2), x1 = std::min(w, cx + bw / 2);
  const double y0 = std::max(0.0, cy - bh / 2), y1 = std::min(h, cy + bh / 2);
  if (!(x0 + 1.0 < x1) || !(y0 + 1.0 < y1)) return gt;
  return Box(x0, y0, x1, y1);
}

AttributeVotes cast_votes(const text::Attributes& truth, const SyntheticConfig& config, Rng& rng) {
  AttributeVotes votes;
  for (int c = 0; c < text::kCategoryCount; ++c) {
    const auto& t = truth[static_cast<std::size_t>(c)];
    const auto values = text::catalogue_values(static_cast<Category>(c));
    for (int v = 0; v < config.voters; ++v) {
      std::string vote = t ? *t : std::string(text::kUnknownValue);
      if (t && rng.bernoulli(config.vote_noise)) {
        // A distracted voter: some other value or "unknown".
        const std::size_t pick = rng.below(values.size());
        vote = values[pick] == *t ? std::string(text::kUnknownValue) : std::string(values[pick]);
      }
      votes[static_cast<std::size_t>(c)].push_back(std::move(vote));
    }
  }
  return votes;
}

}  // namespace

std::string location_of(const Box& box, double image_width) {
  const double third = image_width / 3.0;
  if (box.center_x() < third) return "on_left_side";
  if (box.center_x() < 2.0 * third) return "in_the_center";
  return "on_right_side";
}

Eigen::RowVectorXd attribute_pattern(Category category, std::string_view value, int channels) {
  const auto values = text::catalogue_values(category);
  std::uint64_t index = values.size();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == value) index = k;
  }
  if (index == values.size()) throw ContractError("attribute_pattern: unknown value " + std::string(value));
  Rng rng(0x5EED0000ULL + 131ULL * static_cast<std::uint64_t>(category) + index);
  Eigen::RowVectorXd p(channels);
  for (int i = 0; i < channels; ++i) p(i) = rng.normal();
  return p;
}

void paint_person(visual::ChannelGrid& image, const Box& box, const text::Attributes& attributes,
                  double amplitude) {
  for (int c = 0; c < text::kCategoryCount; ++c) {
    const auto cat = static_cast<Category>(c);
    const auto& value = attributes[static_cast<std::size_t>(c)];
    const auto region = region_of(cat);
    if (!value || !region) continue;
    const Eigen::RowVectorXd pattern = attribute_pattern(cat, *value, image.channels) * (amplitude * region->weight);
    const double x0 = box.x_min() + region->x0 * box.width(), x1 = box.x_min() + region->x1 * box.width();
    const double y0 = box.y_min() + region->y0 * box.height(), y1 = box.y_min() + region->y1 * box.height();
    for (int i = 0; i < image.rows; ++i) {
      for (int j = 0; j < image.cols; ++j) {
        const auto [px, py] = image.cell_center(i, j);
        if (px >= x0 && px < x1 && py >= y0 && py < y1) image.cell(i, j) += pattern;
      }
    }
  }
}

std::vector<std::string> value_phrase(std::string_view value) {
  auto it = phrases().find(value);
  if (it == phrases().end()) throw ContractError("value_phrase: unknown value " + std::string(value));
  return text::tokenize(it->second);
}

std::string describe(const text::Attributes& a, int variant) {
  std::string subject;
  append(subject, phrase(a, Category::Age));
  const std::string noun = phrase(a, Category::Gender);
  append(subject, noun.empty() ? "person" : noun);

  std::string clothes;
  const std::string upper = phrase(a, Category::UpperBody), lower = phrase(a, Category::LowerBody);
  if (!upper.empty()) clothes = article(upper);
  if (!lower.empty()) append(clothes, clothes.empty() ? article(lower) : "and " + article(lower));

  const std::string hair = phrase(a, Category::Hair).empty() ? "" : "with " + article(phrase(a, Category::Hair));
  const std::string acc =
      phrase(a, Category::Accessories).empty() ? "" : "with " + article(phrase(a, Category::Accessories));
  const std::string carry =
      phrase(a, Category::Carrying).empty() ? "" : "carrying " + article(phrase(a, Category::Carrying));
  const std::string loc = phrase(a, Category::Location);

  std::string out;
  switch (((variant % 3) + 3) % 3) {
    case 0:
      append(out, article(subject));
      append(out, hair);
      if (!clothes.empty()) append(out, "wearing " + clothes);
      append(out, carry);
      append(out, acc);
      append(out, loc);
      break;
    case 1:
      append(out, loc);
      append(out, article(subject));
      if (!clothes.empty()) append(out, "in " + clothes);
      append(out, hair);
      append(out, acc);
      append(out, carry);
      break;
    default:
      append(out, "the " + subject);
      append(out, carry);
      append(out, loc);
      if (!clothes.empty()) append(out, "wearing " + clothes);
      append(out, hair);
      append(out, acc);
      break;
  }
  return out;
}

SyntheticScene generate_synthetic_scene(Rng& rng, const SyntheticConfig& config, std::string image_ref) {
  if (config.persons < 1 || config.descriptions < 1 || config.voters < 1 || config.cell_px < 1) {
    throw ContractError("generate_synthetic_scene: persons, descriptions, voters and cell size must be positive");
  }
  const int rows = static_cast<int>(std::lround(config.height / config.cell_px));
  const int cols = static_cast<int>(std::lround(config.width / config.cell_px));

  // Ground-truth placement, restarting the whole layout when a person does not fit.
  std::vector<Box> boxes;
  for (int attempt = 0; attempt < config.placement_budget && static_cast<int>(boxes.size()) < config.persons;
       ++attempt) {
    const double w = rng.uniform(config.min_person_width, config.max_person_width);
    const double h = rng.uniform(config.min_person_height, config.max_person_height);
    if (w >= config.width || h >= config.height) {
      throw GenerationError("generate_synthetic_scene: person size exceeds the image");
    }
    const double x0 = std::floor(rng.uniform(0.0, config.width - w));
    const double y0 = std::floor(rng.uniform(0.0, config.height - h));
    const Box candidate(x0, y0, std::min(config.width, x0 + std::round(w)), std::min(config.height, y0 + std::round(h)));
    bool clear = true;
    for (const auto& b : boxes) clear = clear && geometry::intersection_area(b, candidate) == 0.0;
    if (clear) boxes.push_back(candidate);
    if (!clear && attempt % 50 == 49) boxes.clear();
  }
  if (static_cast<int>(boxes.size()) < config.persons) {
    throw GenerationError("generate_synthetic_scene: could not place " + std::to_string(config.persons) +
                          " persons without overlap");
  }

  std::vector<text::Attributes> truth;
  for (const auto& box : boxes) {
    text::Attributes a;
    bool distinct = false;
    for (int attempt = 0; attempt < config.placement_budget && !distinct; ++attempt) {
      a = sample_attributes(rng, config);
      distinct = true;
      for (const auto& other : truth) {
        distinct = distinct && visual_difference(a, other) >= config.min_attribute_difference;
      }
    }
    if (!distinct) throw GenerationError("generate_synthetic_scene: persons are not distinguishable");
    a[static_cast<std::size_t>(Category::Location)] = location_of(box, config.width);
    truth.push_back(a);
  }

  SyntheticScene out{Scene{std::move(image_ref), config.width, config.height, {}, {}},
                     visual::ChannelGrid(rows, cols, config.channels, config.width, config.height), truth};
  for (Eigen::Index i = 0; i < out.image.values.size(); ++i) {
    out.image.values.data()[i] = config.pixel_noise * rng.normal();
  }

  for (std::size_t p = 0; p < boxes.size(); ++p) {
    paint_person(out.image, boxes[p], truth[p], config.pattern_amplitude);
    Person person{boxes[p], {}, cast_votes(truth[p], config, rng)};
    const int first_variant = static_cast<int>(rng.below(3));
    for (int d = 0; d < config.descriptions; ++d) {
      person.descriptions.push_back(text::tokenize(describe(truth[p], first_variant + d)));
    }
    out.scene.persons.push_back(std::move(person));
  }

  std::vector<Box> proposals;
  for (const auto& gt : boxes) {
    for (int g = 0; g < config.good_proposals; ++g) {
      Box b = gt;
      for (int attempt = 0; attempt < config.placement_budget; ++attempt) {
        b = jitter(gt, 0.06, 0.95, 1.05, rng, config.width, config.height);
        if (geometry::iou(b, gt) >= 0.6 && b.area() >= config.min_proposal_area) break;
        b = gt;
      }
      proposals.push_back(b.with_confidence(rng.uniform(0.6, 0.99)));
    }
    for (int l = 0; l < config.loose_proposals; ++l) {
      proposals.push_back(jitter(gt, 0.5, 0.6, 1.4, rng, config.width, config.height)
                              .with_confidence(rng.uniform(0.05, 0.45)));
    }
  }
  for (int b = 0; b < config.background_proposals; ++b) {
    const double w = rng.uniform(40.0, 100.0), h = rng.uniform(80.0, std::min(180.0, config.height));
    const double x0 = rng.uniform(0.0, config.width - w), y0 = rng.uniform(0.0, config.height - h);
    proposals.push_back(Box(x0, y0, x0 + w, y0 + h, rng.uniform(0.0, 0.45)));
  }
  rng.shuffle(std::span<Box>(proposals));
  out.scene.proposals = std::move(proposals);
  return out;
}

SyntheticDataset generate_synthetic_dataset(Rng& rng, const SyntheticConfig& config, int scenes,
                                            const std::string& prefix) {
  SyntheticDataset out;
  for (int s = 0; s < scenes; ++s) {
    char ref[32];
    std::snprintf(ref, sizeof ref, "%06d", s);
    auto scene = generate_synthetic_scene(rng, config, prefix + ref);
    out.images.emplace(scene.scene.image_ref, std::move(scene.image));
    out.truth.push_back(std::move(scene.truth));
    out.scenes.push_back(std::move(scene.scene));
  }
  return out;
}

}  // namespace nlpr::data
