#include "nlpr/visual/backbone.hpp"

#include <cmath>

#include "nlpr/error.hpp"

namespace nlpr::visual {

namespace {

Matrix<double> he_normal(int rows, int cols, Rng& rng) {
  Matrix<double> w(rows, cols);
  const double s = std::sqrt(2.0 / cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = s * rng.normal();
  return w;
}

}  // namespace

ChannelGrid conv3x3_relu(const ChannelGrid& input, const Matrix<double>& weight, const Matrix<double>& bias) {
  const int cin = input.channels;
  if (weight.cols() != 9 * cin) {
    throw ShapeError("conv3x3: weight has " + std::to_string(weight.cols()) + " columns for " +
                     std::to_string(cin) + " input channels");
  }
  const auto cout = static_cast<int>(weight.rows());
  // im2col, then one matrix product for the whole grid.
  Matrix<double> patches = Matrix<double>::Zero(static_cast<Eigen::Index>(input.rows) * input.cols, 9 * cin);
  for (int i = 0; i < input.rows; ++i) {
    for (int j = 0; j < input.cols; ++j) {
      auto row = patches.row(static_cast<Eigen::Index>(i) * input.cols + j);
      for (int dy = -1; dy <= 1; ++dy) {
        const int y = i + dy;
        if (y < 0 || y >= input.rows) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = j + dx;
          if (x < 0 || x >= input.cols) continue;
          row.segment(((dy + 1) * 3 + (dx + 1)) * cin, cin) = input.cell(y, x);
        }
      }
    }
  }
  ChannelGrid out;
  out.rows = input.rows;
  out.cols = input.cols;
  out.channels = cout;
  out.width_px = input.width_px;
  out.height_px = input.height_px;
  out.values = patches * weight.transpose();
  out.values.rowwise() += bias.row(0);
  out.values = out.values.cwiseMax(0.0);
  return out;
}

ChannelGrid average_pool2(const ChannelGrid& input) {
  const int rows = std::max(1, input.rows / 2), cols = std::max(1, input.cols / 2);
  return adaptive_average_pool(input, rows, cols);
}

TinyBackbone::TinyBackbone(const BackboneConfig& config, Rng& rng) : config_(config) {
  conv1_weight_ = he_normal(config.conv1_channels, 9 * config.input_channels, rng);
  conv1_bias_ = Matrix<double>::Zero(1, config.conv1_channels);
  conv2_weight_ = he_normal(config.conv2_channels, 9 * config.conv1_channels, rng);
  conv2_bias_ = Matrix<double>::Zero(1, config.conv2_channels);
}

TinyBackbone::TinyBackbone(const BackboneConfig& config, Matrix<double> w1, Matrix<double> b1,
                           Matrix<double> w2, Matrix<double> b2)
    : config_(config),
      conv1_weight_(std::move(w1)),
      conv1_bias_(std::move(b1)),
      conv2_weight_(std::move(w2)),
      conv2_bias_(std::move(b2)) {
  if (conv1_weight_.rows() != config.conv1_channels || conv1_weight_.cols() != 9 * config.input_channels ||
      conv2_weight_.rows() != config.conv2_channels || conv2_weight_.cols() != 9 * config.conv1_channels ||
      conv1_bias_.cols() != config.conv1_channels || conv2_bias_.cols() != config.conv2_channels) {
    throw ShapeError("backbone weights do not match the backbone configuration");
  }
}

Eigen::RowVectorXd TinyBackbone::describe_crop(const ChannelGrid& crop) const {
  if (crop.channels != config_.input_channels) {
    throw ShapeError("backbone: crop has " + std::to_string(crop.channels) + " channels, expected " +
                     std::to_string(config_.input_channels));
  }
  const ChannelGrid h1 = average_pool2(conv3x3_relu(crop, conv1_weight_, conv1_bias_));
  const ChannelGrid h2 = conv3x3_relu(h1, conv2_weight_, conv2_bias_);
  const ChannelGrid pooled = adaptive_average_pool(h2, config_.pool_rows, config_.pool_cols);
  return Eigen::Map<const Eigen::RowVectorXd>(pooled.values.data(), pooled.values.size());
}

ChannelGrid TinyBackbone::global_map(const ChannelGrid& image, int rows, int cols) const {
  if (image.channels != config_.input_channels) {
    throw ShapeError("backbone: image has " + std::to_string(image.channels) + " channels, expected " +
                     std::to_string(config_.input_channels));
  }
  return adaptive_average_pool(conv3x3_relu(image, conv1_weight_, conv1_bias_), rows, cols);
}

std::vector<ad::NamedMatrix> TinyBackbone::named_weights() const {
  return {{"backbone.conv1.weight", conv1_weight_},
          {"backbone.conv1.bias", conv1_bias_},
          {"backbone.conv2.weight", conv2_weight_},
          {"backbone.conv2.bias", conv2_bias_}};
}

TinyBackbone TinyBackbone::from_checkpoint(const BackboneConfig& config, const ad::Checkpoint& ckpt) {
  return TinyBackbone(config, ckpt.at("backbone.conv1.weight"), ckpt.at("backbone.conv1.bias"),
                      ckpt.at("backbone.conv2.weight"), ckpt.at("backbone.conv2.bias"));
}

LocalFeature local_feature(const ChannelGrid& image, const Box& proposal, const FeatureProvider& provider) {
  const int s = provider.crop_size();
  const ChannelGrid crop = crop_resize(image, proposal, s, s);
  LocalFeature out;
  out.values = provider.describe_crop(crop);
  const double norm = out.values.norm();
  if (norm == 0.0) {
    out.degenerate = true;
  } else {
    out.values /= norm;
  }
  return out;
}

}  // namespace nlpr::visual
