#include "nlpr/data/dataset.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlpr/error.hpp"
#include "nlpr/text/vocabulary.hpp"

namespace nlpr::data {

using nlohmann::json;
using nlohmann::ordered_json;
using text::Category;

text::Attributes resolve_attributes(const AttributeVotes& votes) {
  text::Attributes out;
  for (int c = 0; c < text::kCategoryCount; ++c) {
    const auto cat = static_cast<Category>(c);
    const auto& list = votes[static_cast<std::size_t>(c)];
    if (list.empty()) {
      throw ContractError("resolve_attributes: no votes for " + std::string(text::category_name(cat)));
    }
    const auto values = text::catalogue_values(cat);
    std::vector<int> counts(values.size(), 0);
    bool any_unknown = false;
    for (const auto& raw : list) {
      const std::string v = text::normalize_value(raw);
      if (v == text::kUnknownValue) {
        any_unknown = true;
        continue;
      }
      bool found = false;
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] == v) {
          ++counts[k];
          found = true;
        }
      }
      if (!found) {
        throw ContractError("resolve_attributes: '" + raw + "' is not a " +
                            std::string(text::category_name(cat)) + " value");
      }
    }
    if (any_unknown) continue;
    int best = -1, best_count = 0;
    bool tie = false;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] > best_count) {
        best = static_cast<int>(k);
        best_count = counts[k];
        tie = false;
      } else if (counts[k] == best_count && best_count > 0) {
        tie = true;
      }
    }
    if (!tie && best >= 0) out[static_cast<std::size_t>(c)] = std::string(values[static_cast<std::size_t>(best)]);
  }
  return out;
}

AttributeVotes unanimous_votes(const text::Attributes& attributes, int voters) {
  AttributeVotes votes;
  for (int c = 0; c < text::kCategoryCount; ++c) {
    const auto& a = attributes[static_cast<std::size_t>(c)];
    votes[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(voters),
                                              a ? *a : std::string(text::kUnknownValue));
  }
  return votes;
}

namespace {

ordered_json box_json(const Box& b) {
  ordered_json j{{"x_min", b.x_min()}, {"y_min", b.y_min()}, {"x_max", b.x_max()}, {"y_max", b.y_max()}};
  if (b.confidence()) j["confidence"] = *b.confidence();
  return j;
}

const json& field(const json& obj, const char* name, const std::string& where, std::size_t line) {
  if (!obj.is_object()) throw ParseError(where + " is not an object", line);
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError("missing required field '" + where + "." + name + "'", line);
  return *it;
}

double number(const json& obj, const char* name, const std::string& where, std::size_t line) {
  const json& v = field(obj, name, where, line);
  if (!v.is_number()) throw ParseError("field '" + where + "." + name + "' must be a number", line);
  return v.get<double>();
}

Box parse_box(const json& j, const std::string& where, std::size_t line) {
  std::optional<double> conf;
  if (j.is_object() && j.contains("confidence")) conf = number(j, "confidence", where, line);
  try {
    return Box(number(j, "x_min", where, line), number(j, "y_min", where, line),
               number(j, "x_max", where, line), number(j, "y_max", where, line), conf);
  } catch (const DomainError& e) {
    throw ParseError(where + ": " + e.what(), line);
  }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

std::string scene_to_json_line(const Scene& scene) {
  ordered_json j;
  j["image_ref"] = scene.image_ref;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["proposals"] = ordered_json::array();
  for (const auto& p : scene.proposals) j["proposals"].push_back(box_json(p));
  j["persons"] = ordered_json::array();
  for (const auto& person : scene.persons) {
    ordered_json pj;
    pj["gt_box"] = box_json(person.gt_box);
    pj["descriptions"] = ordered_json::array();
    for (const auto& d : person.descriptions) pj["descriptions"].push_back(join_tokens(d));
    ordered_json votes;
    for (int c = 0; c < text::kCategoryCount; ++c) {
      votes[std::string(text::category_name(static_cast<Category>(c)))] = person.votes[static_cast<std::size_t>(c)];
    }
    pj["attribute_votes"] = std::move(votes);
    j["persons"].push_back(std::move(pj));
  }
  return j.dump();
}

Scene scene_from_json_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  Scene s;
  const json& ref = field(j, "image_ref", "scene", line_no);
  if (!ref.is_string()) throw ParseError("field 'scene.image_ref' must be a string", line_no);
  s.image_ref = ref.get<std::string>();
  s.width = number(j, "width", "scene", line_no);
  s.height = number(j, "height", "scene", line_no);
  if (!(s.width > 0) || !(s.height > 0)) throw ParseError("scene size must be positive", line_no);
  const json& props = field(j, "proposals", "scene", line_no);
  if (!props.is_array()) throw ParseError("field 'scene.proposals' must be an array", line_no);
  for (std::size_t i = 0; i < props.size(); ++i) {
    s.proposals.push_back(parse_box(props[i], "proposals[" + std::to_string(i) + "]", line_no));
  }
  const json& persons = field(j, "persons", "scene", line_no);
  if (!persons.is_array()) throw ParseError("field 'scene.persons' must be an array", line_no);
  for (std::size_t i = 0; i < persons.size(); ++i) {
    const std::string where = "persons[" + std::to_string(i) + "]";
    const json& pj = persons[i];
    Person person{parse_box(field(pj, "gt_box", where, line_no), where + ".gt_box", line_no), {}, {}};
    const json& descs = field(pj, "descriptions", where, line_no);
    if (!descs.is_array() || descs.empty()) {
      throw ParseError("field '" + where + ".descriptions' must be a non-empty array", line_no);
    }
    for (const auto& d : descs) {
      if (!d.is_string()) throw ParseError("descriptions must be strings", line_no);
      person.descriptions.push_back(text::tokenize(d.get<std::string>()));
    }
    const json& votes = field(pj, "attribute_votes", where, line_no);
    for (int c = 0; c < text::kCategoryCount; ++c) {
      const std::string name(text::category_name(static_cast<Category>(c)));
      const json& list = field(votes, name.c_str(), where + ".attribute_votes", line_no);
      if (!list.is_array()) throw ParseError("attribute votes for " + name + " must be an array", line_no);
      for (const auto& v : list) {
        if (!v.is_string()) throw ParseError("attribute votes must be strings", line_no);
        person.votes[static_cast<std::size_t>(c)].push_back(v.get<std::string>());
      }
    }
    s.persons.push_back(std::move(person));
  }
  return s;
}

std::vector<Scene> parse_dataset(const std::string& text) {
  std::vector<Scene> scenes;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    scenes.push_back(scene_from_json_line(line, line_no));
  }
  return scenes;
}

std::vector<Scene> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

void save_dataset(const std::filesystem::path& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  for (const auto& s : scenes) out << scene_to_json_line(s) << '\n';
}

std::filesystem::path images_path(const std::filesystem::path& dataset) {
  return dataset.string() + ".images.bin";
}

bool has_images(const std::filesystem::path& dataset) {
  return std::filesystem::exists(images_path(dataset)) &&
         std::filesystem::exists(dataset.string() + ".images.json");
}

void save_images(const std::filesystem::path& dataset, const ImageStore& images) {
  std::string blob;
  ordered_json side = ordered_json::array();
  for (const auto& [ref, grid] : images) {
    side.push_back({{"image_ref", ref},
                    {"rows", grid.rows},
                    {"cols", grid.cols},
                    {"channels", grid.channels},
                    {"width", grid.width_px},
                    {"height", grid.height_px},
                    {"offset", blob.size()}});
    for (Eigen::Index i = 0; i < grid.values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(grid.values.data()[i]);
      for (int b = 0; b < 8; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  std::ofstream bin(images_path(dataset), std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("cannot write " + images_path(dataset).string());
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream meta(dataset.string() + ".images.json", std::ios::trunc);
  meta << side.dump(1) << '\n';
}

ImageStore load_images(const std::filesystem::path& dataset) {
  std::ifstream meta(dataset.string() + ".images.json");
  if (!meta) throw std::runtime_error("cannot read " + dataset.string() + ".images.json");
  std::ifstream bin(images_path(dataset), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + images_path(dataset).string());
  std::ostringstream buffer;
  buffer << bin.rdbuf();
  const std::string blob = buffer.str();
  ImageStore out;
  try {
    json side;
    meta >> side;
    for (const auto& e : side) {
      visual::ChannelGrid g(e.at("rows").get<int>(), e.at("cols").get<int>(), e.at("channels").get<int>(),
                            e.at("width").get<double>(), e.at("height").get<double>());
      std::size_t pos = e.at("offset").get<std::size_t>();
      if (pos + 8 * static_cast<std::size_t>(g.values.size()) > blob.size()) {
        throw ParseError("image payload truncated", 0);
      }
      for (Eigen::Index i = 0; i < g.values.size(); ++i, pos += 8) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(blob[pos + b])) << (8 * b);
        g.values.data()[i] = std::bit_cast<double>(bits);
      }
      out.emplace(e.at("image_ref").get<std::string>(), std::move(g));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("image sidecar: ") + e.what(), 0);
  }
  return out;
}

}  // namespace nlpr::data
