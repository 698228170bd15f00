#include "nlpr/visual/grid.hpp"

#include <algorithm>
#include <cmath>

#include "nlpr/error.hpp"

namespace nlpr::visual {

ChannelGrid::ChannelGrid(int rows_, int cols_, int channels_, double width, double height)
    : rows(rows_), cols(cols_), channels(channels_), width_px(width), height_px(height) {
  if (rows < 1 || cols < 1 || channels < 1) throw ShapeError("grid dimensions must be positive");
  if (!(width > 0.0) || !(height > 0.0)) throw DomainError("grid extent must be positive");
  values = Matrix<double>::Zero(static_cast<Eigen::Index>(rows) * cols, channels);
}

ChannelGrid crop_resize(const ChannelGrid& image, const Box& box, int out_rows, int out_cols) {
  if (out_rows < 1 || out_cols < 1) throw ShapeError("crop_resize: output size must be positive");
  const Box frame(0.0, 0.0, image.width_px, image.height_px);
  if (geometry::intersection_area(frame, box) <= 0.0) {
    throw DomainError("crop_resize: " + box.to_string() + " does not overlap the image");
  }
  ChannelGrid out(out_rows, out_cols, image.channels, box.width(), box.height());
  const double cw = image.cell_width(), ch = image.cell_height();

  // Exact block of out_rows x out_cols cells: copy without resampling.
  const double c0 = box.x_min() / cw, r0 = box.y_min() / ch;
  const auto on_lattice = [](double v) { return std::abs(v - std::round(v)) < 1e-9; };
  if (on_lattice(c0) && on_lattice(r0) && std::abs(box.width() / cw - out_cols) < 1e-9 &&
      std::abs(box.height() / ch - out_rows) < 1e-9) {
    const int col0 = static_cast<int>(std::round(c0)), row0 = static_cast<int>(std::round(r0));
    if (col0 >= 0 && row0 >= 0 && col0 + out_cols <= image.cols && row0 + out_rows <= image.rows) {
      for (int u = 0; u < out_rows; ++u) {
        for (int v = 0; v < out_cols; ++v) out.cell(u, v) = image.cell(row0 + u, col0 + v);
      }
      return out;
    }
  }
  for (int u = 0; u < out_rows; ++u) {
    const double py = box.y_min() + (u + 0.5) * box.height() / out_rows;
    const double gy = std::clamp(py / ch - 0.5, 0.0, double(image.rows - 1));
    const int y0 = static_cast<int>(std::floor(gy));
    const int y1 = std::min(y0 + 1, image.rows - 1);
    const double wy = gy - y0;
    for (int v = 0; v < out_cols; ++v) {
      const double px = box.x_min() + (v + 0.5) * box.width() / out_cols;
      const double gx = std::clamp(px / cw - 0.5, 0.0, double(image.cols - 1));
      const int x0 = static_cast<int>(std::floor(gx));
      const int x1 = std::min(x0 + 1, image.cols - 1);
      const double wx = gx - x0;
      auto dst = out.cell(u, v);
      dst = (1 - wy) * (1 - wx) * image.cell(y0, x0);
      if (wx > 0) dst += (1 - wy) * wx * image.cell(y0, x1);
      if (wy > 0) dst += wy * (1 - wx) * image.cell(y1, x0);
      if (wx > 0 && wy > 0) dst += wy * wx * image.cell(y1, x1);
    }
  }
  return out;
}

ChannelGrid resize_bilinear(const ChannelGrid& grid, int out_rows, int out_cols) {
  ChannelGrid out = crop_resize(grid, Box(0.0, 0.0, grid.width_px, grid.height_px), out_rows, out_cols);
  out.width_px = grid.width_px;
  out.height_px = grid.height_px;
  return out;
}

ChannelGrid adaptive_average_pool(const ChannelGrid& grid, int out_rows, int out_cols) {
  if (out_rows < 1 || out_cols < 1) throw ShapeError("adaptive_average_pool: output size must be positive");
  ChannelGrid out(out_rows, out_cols, grid.channels, grid.width_px, grid.height_px);
  for (int i = 0; i < out_rows; ++i) {
    const int r0 = (i * grid.rows) / out_rows;
    const int r1 = std::max(r0 + 1, ((i + 1) * grid.rows + out_rows - 1) / out_rows);
    for (int j = 0; j < out_cols; ++j) {
      const int c0 = (j * grid.cols) / out_cols;
      const int c1 = std::max(c0 + 1, ((j + 1) * grid.cols + out_cols - 1) / out_cols);
      auto dst = out.cell(i, j);
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) dst += grid.cell(r, c);
      }
      dst /= double((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

}  // namespace nlpr::visual
