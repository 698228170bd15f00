#ifndef NLPR_GEOMETRY_BOX_HPP
#define NLPR_GEOMETRY_BOX_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "nlpr/error.hpp"
#include "nlpr/random.hpp"

namespace nlpr::geometry {

/// Axis-aligned rectangle in pixel coordinates (origin top-left, y down). Edges are
/// continuous; x_max and y_max are exclusive for pixel-derived boxes.
template <typename Scalar>
class BasicBox {
 public:
  BasicBox(Scalar x_min, Scalar y_min, Scalar x_max, Scalar y_max,
           std::optional<Scalar> confidence = std::nullopt)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max), confidence_(confidence) {
    if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_max)) {
      throw DomainError("box coordinates must be finite: " + to_string());
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
      throw DomainError("box must have positive area: " + to_string());
    }
    if (confidence && !(*confidence >= Scalar(0) && *confidence <= Scalar(1))) {
      throw DomainError("box confidence must lie in [0, 1]: " + to_string());
    }
  }

  Scalar x_min() const { return x_min_; }
  Scalar y_min() const { return y_min_; }
  Scalar x_max() const { return x_max_; }
  Scalar y_max() const { return y_max_; }
  const std::optional<Scalar>& confidence() const { return confidence_; }

  Scalar width() const { return x_max_ - x_min_; }
  Scalar height() const { return y_max_ - y_min_; }
  Scalar area() const { return width() * height(); }
  Scalar center_x() const { return (x_min_ + x_max_) / Scalar(2); }
  Scalar center_y() const { return (y_min_ + y_max_) / Scalar(2); }

  BasicBox with_confidence(std::optional<Scalar> c) const {
    return BasicBox(x_min_, y_min_, x_max_, y_max_, c);
  }

  bool contains(const BasicBox& inner) const {
    return inner.x_min_ >= x_min_ && inner.y_min_ >= y_min_ && inner.x_max_ <= x_max_ &&
           inner.y_max_ <= y_max_;
  }

  friend bool operator==(const BasicBox& a, const BasicBox& b) = default;

  std::string to_string() const {
    std::ostringstream os;
    os << "Box(" << x_min_ << ", " << y_min_ << ", " << x_max_ << ", " << y_max_;
    if (confidence_) os << "; conf " << *confidence_;
    os << ")";
    return os.str();
  }

 private:
  Scalar x_min_, y_min_, x_max_, y_max_;
  std::optional<Scalar> confidence_;
};

using Box = BasicBox<double>;

struct Pixel {
  int x;
  int y;
};

/// Tight box around a pixel set; pixel (x, y) covers [x, x+1) x [y, y+1).
template <typename Scalar = double>
BasicBox<Scalar> box_from_mask(std::span<const Pixel> mask) {
  if (mask.empty()) throw DomainError("box_from_mask: empty mask");
  int x0 = mask[0].x, x1 = mask[0].x, y0 = mask[0].y, y1 = mask[0].y;
  for (const auto& p : mask) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return BasicBox<Scalar>(Scalar(x0), Scalar(y0), Scalar(x1 + 1), Scalar(y1 + 1));
}

template <typename Scalar>
Scalar intersection_area(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const Scalar h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= Scalar(0) || h <= Scalar(0)) return Scalar(0);
  return w * h;
}

template <typename Scalar>
Scalar iou(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

/// Keeps boxes with confidence >= conf_thresh and area >= min_area, in input order.
template <typename Scalar>
std::vector<BasicBox<Scalar>> filter_proposals(const std::vector<BasicBox<Scalar>>& proposals,
                                               std::type_identity_t<Scalar> conf_thresh,
                                               std::type_identity_t<Scalar> min_area) {
  if (conf_thresh < Scalar(0) || min_area < Scalar(0)) {
    throw ContractError("filter_proposals: thresholds must be non-negative");
  }
  std::vector<BasicBox<Scalar>> kept;
  for (const auto& box : proposals) {
    if (conf_thresh > Scalar(0) && !box.confidence()) {
      throw ContractError("filter_proposals: proposal without confidence " + box.to_string());
    }
    const Scalar conf = box.confidence().value_or(Scalar(1));
    if (conf >= conf_thresh && box.area() >= min_area) kept.push_back(box);
  }
  return kept;
}

/// Indices (into the input) of the proposals filter_proposals would keep.
template <typename Scalar>
std::vector<std::size_t> filter_proposal_indices(const std::vector<BasicBox<Scalar>>& proposals,
                                                 std::type_identity_t<Scalar> conf_thresh,
                                                 std::type_identity_t<Scalar> min_area) {
  if (conf_thresh < Scalar(0) || min_area < Scalar(0)) {
    throw ContractError("filter_proposals: thresholds must be non-negative");
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& box = proposals[i];
    if (conf_thresh > Scalar(0) && !box.confidence()) {
      throw ContractError("filter_proposals: proposal without confidence " + box.to_string());
    }
    if (box.confidence().value_or(Scalar(1)) >= conf_thresh && box.area() >= min_area) {
      kept.push_back(i);
    }
  }
  return kept;
}

template <typename Scalar>
struct ShiftedBoxes {
  std::vector<BasicBox<Scalar>> boxes;
  bool fell_back = false;  // at least one slot is the ground truth itself
};

struct ShiftSampling {
  double max_offset = 0.3;  // translation bound as a fraction of width / height
  double min_scale = 0.85;
  double max_scale = 1.15;
  int budget = 1000;        // rejection-sampling tries per returned box
};

/// Draws k random translations/rescalings of gt, clipped to bounds, each with
/// iou(box, gt) > iou_min. A slot whose budget runs out is filled with gt.
template <typename Scalar>
ShiftedBoxes<Scalar> augment_shift(const BasicBox<Scalar>& gt, int k,
                                   std::type_identity_t<Scalar> iou_min,
                                   const BasicBox<Scalar>& bounds, Rng& rng,
                                   const ShiftSampling& sampling = {}) {
  if (k < 1) throw ContractError("augment_shift: k must be >= 1");
  if (!(iou_min > Scalar(0) && iou_min < Scalar(1))) {
    throw ContractError("augment_shift: iou_min must lie in (0, 1)");
  }
  if (!bounds.contains(gt)) throw ContractError("augment_shift: gt outside image bounds");

  ShiftedBoxes<Scalar> out;
  const Scalar w = gt.width(), h = gt.height();
  for (int slot = 0; slot < k; ++slot) {
    bool accepted = false;
    for (int attempt = 0; attempt < sampling.budget && !accepted; ++attempt) {
      const Scalar dx = Scalar(rng.uniform(-sampling.max_offset, sampling.max_offset)) * w;
      const Scalar dy = Scalar(rng.uniform(-sampling.max_offset, sampling.max_offset)) * h;
      const Scalar sx = Scalar(rng.uniform(sampling.min_scale, sampling.max_scale));
      const Scalar sy = Scalar(rng.uniform(sampling.min_scale, sampling.max_scale));
      const Scalar cx = gt.center_x() + dx, cy = gt.center_y() + dy;
      const Scalar x0 = std::max(bounds.x_min(), cx - sx * w / 2);
      const Scalar x1 = std::min(bounds.x_max(), cx + sx * w / 2);
      const Scalar y0 = std::max(bounds.y_min(), cy - sy * h / 2);
      const Scalar y1 = std::min(bounds.y_max(), cy + sy * h / 2);
      if (!(x0 < x1) || !(y0 < y1)) continue;
      BasicBox<Scalar> candidate(x0, y0, x1, y1);
      if (iou(candidate, gt) > iou_min) {
        out.boxes.push_back(candidate);
        accepted = true;
      }
    }
    if (!accepted) {
      out.boxes.push_back(gt.with_confidence(std::nullopt));
      out.fell_back = true;
    }
  }
  return out;
}

template <typename Scalar>
using SpatialFeature = Eigen::Matrix<Scalar, 8, 1>;

/// [x_min, y_min, x_max, y_max, x_center, y_center, width, height] with the image mapped
/// onto [-1, 1]^2; width and height are in the same units, so the full image is 2 x 2.
template <typename Scalar>
SpatialFeature<Scalar> spatial_features(const BasicBox<Scalar>& box, std::type_identity_t<Scalar> image_w,
                                        std::type_identity_t<Scalar> image_h) {
  if (!(image_w > Scalar(0)) || !(image_h > Scalar(0))) {
    throw DomainError("spatial_features: image size must be positive");
  }
  const Scalar x0 = Scalar(2) * box.x_min() / image_w - Scalar(1);
  const Scalar y0 = Scalar(2) * box.y_min() / image_h - Scalar(1);
  const Scalar x1 = Scalar(2) * box.x_max() / image_w - Scalar(1);
  const Scalar y1 = Scalar(2) * box.y_max() / image_h - Scalar(1);
  SpatialFeature<Scalar> f;
  f << x0, y0, x1, y1, (x0 + x1) / Scalar(2), (y0 + y1) / Scalar(2), x1 - x0, y1 - y0;
  return f;
}

/// Inverse of spatial_features on the corner components.
template <typename Scalar>
BasicBox<Scalar> box_from_spatial(const SpatialFeature<Scalar>& f, std::type_identity_t<Scalar> image_w,
                                  std::type_identity_t<Scalar> image_h) {
  return BasicBox<Scalar>((f(0) + Scalar(1)) * image_w / Scalar(2),
                          (f(1) + Scalar(1)) * image_h / Scalar(2),
                          (f(2) + Scalar(1)) * image_w / Scalar(2),
                          (f(3) + Scalar(1)) * image_h / Scalar(2));
}

}  // namespace nlpr::geometry

#endif  // NLPR_GEOMETRY_BOX_HPP
