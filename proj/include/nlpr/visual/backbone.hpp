#ifndef NLPR_VISUAL_BACKBONE_HPP
#define NLPR_VISUAL_BACKBONE_HPP

#include <string>
#include <vector>

#include "nlpr/autodiff/checkpoint.hpp"
#include "nlpr/random.hpp"
#include "nlpr/visual/grid.hpp"

namespace nlpr::visual {

/// Source of visual descriptors. Crops arrive already resized to crop_size() x crop_size().
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual int crop_size() const = 0;
  virtual int local_dim() const = 0;
  virtual int global_dim() const = 0;
  virtual Eigen::RowVectorXd describe_crop(const ChannelGrid& crop) const = 0;
  /// Feature map of the whole image pooled onto a rows x cols grid.
  virtual ChannelGrid global_map(const ChannelGrid& image, int rows, int cols) const = 0;
};

struct BackboneConfig {
  int input_channels = 12;
  int conv1_channels = 16;  // also the global feature width
  int conv2_channels = 16;
  int pool_rows = 4;        // local descriptor keeps a coarse pool_rows x pool_cols layout
  int pool_cols = 2;
  int crop_size = 32;
};

/// Two 3x3 conv + ReLU blocks with a 2x2 average pool between them. Weights are drawn
/// once (He-scaled normal) and stay frozen; the first block also produces the global map.
class TinyBackbone final : public FeatureProvider {
 public:
  TinyBackbone(const BackboneConfig& config, Rng& rng);
  TinyBackbone(const BackboneConfig& config, Matrix<double> conv1_weight, Matrix<double> conv1_bias,
               Matrix<double> conv2_weight, Matrix<double> conv2_bias);

  int crop_size() const override { return config_.crop_size; }
  int local_dim() const override {
    return config_.conv2_channels * config_.pool_rows * config_.pool_cols;
  }
  int global_dim() const override { return config_.conv1_channels; }
  Eigen::RowVectorXd describe_crop(const ChannelGrid& crop) const override;
  ChannelGrid global_map(const ChannelGrid& image, int rows, int cols) const override;

  const BackboneConfig& config() const { return config_; }
  std::vector<ad::NamedMatrix> named_weights() const;
  static TinyBackbone from_checkpoint(const BackboneConfig& config, const ad::Checkpoint& ckpt);

 private:
  BackboneConfig config_;
  Matrix<double> conv1_weight_;  // conv1_channels x (9 * input_channels)
  Matrix<double> conv1_bias_;    // 1 x conv1_channels
  Matrix<double> conv2_weight_;
  Matrix<double> conv2_bias_;
};

/// 3x3, stride 1, zero padding, followed by ReLU. weight is Cout x (9 * Cin), patch order
/// (dy, dx, channel).
ChannelGrid conv3x3_relu(const ChannelGrid& input, const Matrix<double>& weight, const Matrix<double>& bias);

ChannelGrid average_pool2(const ChannelGrid& input);

struct LocalFeature {
  Eigen::RowVectorXd values;  // unit norm unless degenerate
  bool degenerate = false;    // descriptor was all zeros and is returned as zeros
};

/// Crop, bilinear resize to the provider's crop size, describe, then L2-normalize.
LocalFeature local_feature(const ChannelGrid& image, const Box& proposal, const FeatureProvider& provider);

}  // namespace nlpr::visual

#endif  // NLPR_VISUAL_BACKBONE_HPP
