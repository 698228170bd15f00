#include "nlpr/data/prep.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlpr/error.hpp"

namespace nlpr::data {

using nlohmann::json;

PrepResult prepare_annotations(const std::string& text, const PrepOptions& options) {
  PrepResult out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("persons") || !j["persons"].is_array()) {
      throw ParseError("missing required field 'scene.persons'", line_no);
    }
    // Replace masks with boxes, then reuse the dataset reader for everything else.
    json kept = json::array();
    for (std::size_t i = 0; i < j["persons"].size(); ++i) {
      json person = j["persons"][i];
      if (!person.contains("gt_box")) {
        if (!person.contains("mask") || !person["mask"].is_array()) {
          throw ParseError("missing required field 'persons[" + std::to_string(i) + "].mask'", line_no);
        }
        std::vector<geometry::Pixel> pixels;
        for (const auto& p : person["mask"]) {
          if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
            throw ParseError("mask pixels must be [x, y] integer pairs", line_no);
          }
          pixels.push_back({p[0].get<int>(), p[1].get<int>()});
        }
        if (pixels.empty()) throw ParseError("empty mask in persons[" + std::to_string(i) + "]", line_no);
        const Box box = geometry::box_from_mask(std::span<const geometry::Pixel>(pixels));
        person["gt_box"] = {{"x_min", box.x_min()}, {"y_min", box.y_min()},
                            {"x_max", box.x_max()}, {"y_max", box.y_max()}};
        person.erase("mask");
      }
      kept.push_back(std::move(person));
    }
    j["persons"] = std::move(kept);
    Scene scene = scene_from_json_line(j.dump(), line_no);
    std::vector<Person> persons;
    for (auto& p : scene.persons) {
      if (p.gt_box.area() >= options.min_area) {
        persons.push_back(std::move(p));
        ++out.persons_kept;
      } else {
        ++out.persons_dropped;
      }
    }
    scene.persons = std::move(persons);
    out.scenes.push_back(std::move(scene));
  }
  return out;
}

PrepResult prepare_annotation_file(const std::filesystem::path& path, const PrepOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read annotations " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return prepare_annotations(buffer.str(), options);
}

}  // namespace nlpr::data
