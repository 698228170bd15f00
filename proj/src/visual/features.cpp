#include "nlpr/visual/features.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlpr/error.hpp"

namespace nlpr::visual {

using nlohmann::json;

SceneVisuals scene_visuals(ChannelGrid global_grid, const std::vector<Box>& proposals) {
  SceneVisuals out;
  out.map = attention_map(proposals, global_grid.rows, global_grid.cols, global_grid.width_px,
                          global_grid.height_px);
  out.weighted_global = weighted_global_feature(global_grid, out.map);
  out.global_grid = std::move(global_grid);
  return out;
}

namespace {

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::string& in, std::size_t pos) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_precomputed_features(const std::filesystem::path& path, std::span<const PrecomputedRecord> records) {
  std::string blob;
  json sidecar;
  json entries = json::array();
  for (const auto& r : records) {
    if (!records.empty()) {
      const auto& first = records.front();
      if (r.grid.rows != first.grid.rows || r.grid.cols != first.grid.cols ||
          r.grid.channels != first.grid.channels || r.locals.cols() != first.locals.cols()) {
        throw ShapeError("precomputed features: records disagree on dimensions");
      }
    }
    entries.push_back({{"image_ref", r.image_ref},
                       {"offset", blob.size()},
                       {"proposals", r.locals.rows()},
                       {"width", r.grid.width_px},
                       {"height", r.grid.height_px}});
    for (Eigen::Index i = 0; i < r.grid.values.size(); ++i) put_f64(blob, r.grid.values.data()[i]);
    for (Eigen::Index i = 0; i < r.locals.size(); ++i) put_f64(blob, r.locals.data()[i]);
  }
  const PrecomputedRecord* first = records.empty() ? nullptr : &records.front();
  sidecar["grid_rows"] = first ? first->grid.rows : 0;
  sidecar["grid_cols"] = first ? first->grid.cols : 0;
  sidecar["channels"] = first ? first->grid.channels : 0;
  sidecar["local_dim"] = first ? first->locals.cols() : 0;
  sidecar["records"] = std::move(entries);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  side << sidecar.dump(2) << '\n';
}

std::vector<PrecomputedRecord> load_precomputed_features(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot read " + path.string() + ".json");
  json sidecar;
  try {
    side >> sidecar;
  } catch (const json::exception& e) {
    throw ParseError(std::string("feature sidecar: ") + e.what(), 0);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string blob = buffer.str();

  std::vector<PrecomputedRecord> records;
  try {
    const int rows = sidecar.at("grid_rows"), cols = sidecar.at("grid_cols");
    const int channels = sidecar.at("channels");
    const int local_dim = sidecar.at("local_dim");
    for (const auto& e : sidecar.at("records")) {
      PrecomputedRecord r;
      r.image_ref = e.at("image_ref").get<std::string>();
      r.grid = ChannelGrid(rows, cols, channels, e.at("width").get<double>(), e.at("height").get<double>());
      const auto n = e.at("proposals").get<Eigen::Index>();
      r.locals.resize(n, local_dim);
      std::size_t pos = e.at("offset").get<std::size_t>();
      const std::size_t need = 8 * static_cast<std::size_t>(r.grid.values.size() + r.locals.size());
      if (pos + need > blob.size()) throw ParseError("feature file truncated for " + r.image_ref, 0);
      for (Eigen::Index i = 0; i < r.grid.values.size(); ++i, pos += 8) r.grid.values.data()[i] = get_f64(blob, pos);
      for (Eigen::Index i = 0; i < r.locals.size(); ++i, pos += 8) r.locals.data()[i] = get_f64(blob, pos);
      records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("feature sidecar: ") + e.what(), 0);
  }
  return records;
}

}  // namespace nlpr::visual
