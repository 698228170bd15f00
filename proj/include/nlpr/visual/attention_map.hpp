#ifndef NLPR_VISUAL_ATTENTION_MAP_HPP
#define NLPR_VISUAL_ATTENTION_MAP_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include "nlpr/error.hpp"
#include "nlpr/geometry/box.hpp"
#include "nlpr/visual/grid.hpp"

namespace nlpr::visual {

/// rows x cols non-negative weights sampled at grid-cell centres.
using AttentionMap = Eigen::MatrixXd;

/// Axis-aligned bivariate normal centred on the proposal with sigma = half width / height.
template <typename Scalar>
Scalar gaussian_density(Scalar x, Scalar y, const geometry::BasicBox<Scalar>& proposal) {
  const Scalar sx = proposal.width() / Scalar(2);
  const Scalar sy = proposal.height() / Scalar(2);
  if (!(sx > Scalar(0)) || !(sy > Scalar(0))) throw DomainError("gaussian_density: zero-area proposal");
  const Scalar dx = (x - proposal.center_x()) / sx;
  const Scalar dy = (y - proposal.center_y()) / sy;
  const Scalar z = dx * dx + dy * dy;
  return std::exp(-z / Scalar(2)) / (Scalar(2) * std::numbers::pi_v<Scalar> * sx * sy);
}

/// Mean of the proposals' densities at each cell centre; not renormalized over the grid.
AttentionMap attention_map(const std::vector<Box>& proposals, int rows, int cols, double width_px,
                           double height_px);

/// Each cell's feature scaled by its map weight, then averaged over all cells. 1 x C.
Eigen::RowVectorXd weighted_global_feature(const ChannelGrid& grid, const AttentionMap& map);

}  // namespace nlpr::visual

#endif  // NLPR_VISUAL_ATTENTION_MAP_HPP
