#ifndef NLPR_VISUAL_GRID_HPP
#define NLPR_VISUAL_GRID_HPP

#include <utility>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/geometry/box.hpp"

namespace nlpr::visual {

using ad::Matrix;
using geometry::Box;

/// rows x cols grid of C-channel cells covering a width_px x height_px image with
/// uniform cells. Used both for raw (synthetic) images and for feature maps.
struct ChannelGrid {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  double width_px = 0.0;
  double height_px = 0.0;
  Matrix<double> values;  // (rows * cols) x channels, cells in row-major order

  ChannelGrid() = default;
  ChannelGrid(int rows, int cols, int channels, double width_px, double height_px);

  double cell_width() const { return width_px / cols; }
  double cell_height() const { return height_px / rows; }
  /// Pixel coordinates of the centre of cell (i, j): ((j + 0.5) W / cols, (i + 0.5) H / rows).
  std::pair<double, double> cell_center(int i, int j) const {
    return {(j + 0.5) * width_px / cols, (i + 0.5) * height_px / rows};
  }
  auto cell(int i, int j) { return values.row(static_cast<Eigen::Index>(i) * cols + j); }
  auto cell(int i, int j) const { return values.row(static_cast<Eigen::Index>(i) * cols + j); }

  friend bool operator==(const ChannelGrid& a, const ChannelGrid& b) {
    return a.rows == b.rows && a.cols == b.cols && a.channels == b.channels &&
           a.width_px == b.width_px && a.height_px == b.height_px && a.values == b.values;
  }
};

/// Samples the region under `box` onto an out_rows x out_cols grid by bilinear
/// interpolation between cell centres (edge cells clamp). A box aligned to an exact
/// out_rows x out_cols block of cells reproduces that block.
ChannelGrid crop_resize(const ChannelGrid& image, const Box& box, int out_rows, int out_cols);

/// Whole-grid bilinear resize; identity when the size is unchanged.
ChannelGrid resize_bilinear(const ChannelGrid& grid, int out_rows, int out_cols);

/// Area-weighted average pooling into out_rows x out_cols bins (bins may overlap when the
/// input does not divide evenly).
ChannelGrid adaptive_average_pool(const ChannelGrid& grid, int out_rows, int out_cols);

}  // namespace nlpr::visual

#endif  // NLPR_VISUAL_GRID_HPP
