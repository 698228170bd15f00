#include "nlpr/visual/ppm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nlpr/error.hpp"

namespace nlpr::visual {

std::string attention_ppm(const AttentionMap& map, int cell_px) {
  if (cell_px < 1) throw ContractError("attention_ppm: cell size must be positive");
  if (map.size() == 0) throw DomainError("attention_ppm: empty map");
  const double peak = map.maxCoeff();
  const auto w = map.cols() * cell_px, h = map.rows() * cell_px;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const double v = peak > 0.0 ? map(y / cell_px, x / cell_px) / peak : 0.0;
      const auto level = static_cast<char>(std::clamp(static_cast<int>(std::lround(255.0 * v)), 0, 255));
      out.append(3, level);
    }
  }
  return out;
}

void write_attention_ppm(const std::filesystem::path& path, const AttentionMap& map, int cell_px) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = attention_ppm(map, cell_px);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace nlpr::visual
