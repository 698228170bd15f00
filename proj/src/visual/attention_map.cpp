#include "nlpr/visual/attention_map.hpp"

namespace nlpr::visual {

AttentionMap attention_map(const std::vector<Box>& proposals, int rows, int cols, double width_px,
                           double height_px) {
  if (proposals.empty()) throw DomainError("attention_map: no proposals");
  if (rows < 1 || cols < 1) throw ShapeError("attention_map: grid must be non-empty");
  AttentionMap map = AttentionMap::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double y = (i + 0.5) * height_px / rows;
    for (int j = 0; j < cols; ++j) {
      const double x = (j + 0.5) * width_px / cols;
      double total = 0.0;
      for (const auto& p : proposals) total += gaussian_density(x, y, p);
      map(i, j) = total / static_cast<double>(proposals.size());
    }
  }
  return map;
}

Eigen::RowVectorXd weighted_global_feature(const ChannelGrid& grid, const AttentionMap& map) {
  if (map.rows() != grid.rows || map.cols() != grid.cols) {
    throw ShapeError("weighted_global_feature: map " + std::to_string(map.rows()) + "x" +
                     std::to_string(map.cols()) + " vs grid " + std::to_string(grid.rows) + "x" +
                     std::to_string(grid.cols));
  }
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(grid.channels);
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) out += map(i, j) * grid.cell(i, j);
  }
  return out / static_cast<double>(grid.rows * grid.cols);
}

}  // namespace nlpr::visual
