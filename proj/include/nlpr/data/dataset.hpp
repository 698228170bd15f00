#ifndef NLPR_DATA_DATASET_HPP
#define NLPR_DATA_DATASET_HPP

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nlpr/geometry/box.hpp"
#include "nlpr/text/attributes.hpp"
#include "nlpr/visual/grid.hpp"

namespace nlpr::data {

using geometry::Box;

/// Annotator selections per category (canonical category order); "unknown" is a valid vote.
using AttributeVotes = std::array<std::vector<std::string>, text::kCategoryCount>;

struct Person {
  Box gt_box;
  std::vector<std::vector<std::string>> descriptions;  // token lists
  AttributeVotes votes;

  friend bool operator==(const Person&, const Person&) = default;
};

struct Scene {
  std::string image_ref;
  double width = 0.0;
  double height = 0.0;
  std::vector<Box> proposals;
  std::vector<Person> persons;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Per category: any "unknown" vote wins; otherwise the plurality value; a tie for the
/// top count resolves to unknown. Throws ContractError on an empty vote list or a value
/// outside the category's catalogue.
text::Attributes resolve_attributes(const AttributeVotes& votes);

AttributeVotes unanimous_votes(const text::Attributes& attributes, int voters);

// Line-delimited JSON, one scene per line:
// {"image_ref", "width", "height", "proposals": [box...],
//  "persons": [{"gt_box": box, "descriptions": [string...], "attribute_votes": {category: [vote...]}}]}
// box = {"x_min", "y_min", "x_max", "y_max", "confidence"?}. Descriptions are stored as
// space-joined tokens.
std::string scene_to_json_line(const Scene& scene);
Scene scene_from_json_line(const std::string& line, std::size_t line_no);

std::vector<Scene> parse_dataset(const std::string& text);
std::vector<Scene> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const std::vector<Scene>& scenes);

using ImageStore = std::map<std::string, visual::ChannelGrid>;

/// Raw image payloads next to a dataset: "<dataset>.images.bin" (little-endian f64 cell
/// values) and "<dataset>.images.json" (per image: rows, cols, channels, extent, offset).
std::filesystem::path images_path(const std::filesystem::path& dataset);
void save_images(const std::filesystem::path& dataset, const ImageStore& images);
ImageStore load_images(const std::filesystem::path& dataset);
bool has_images(const std::filesystem::path& dataset);

}  // namespace nlpr::data

#endif  // NLPR_DATA_DATASET_HPP
