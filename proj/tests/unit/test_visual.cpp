#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlpr/visual/attention_map.hpp"
#include "nlpr/visual/backbone.hpp"
#include "nlpr/visual/features.hpp"
#include "nlpr/visual/grid.hpp"
#include "nlpr/visual/ppm.hpp"
#include "support.hpp"

using namespace nlpr;
using namespace nlpr::visual;
using nlpr::testing::random_matrix;

namespace {

ChannelGrid random_grid(Rng& rng, int rows, int cols, int channels, double w, double h) {
  ChannelGrid g(rows, cols, channels, w, h);
  g.values = random_matrix(rng, rows * cols, channels);
  return g;
}

Box random_box(Rng& rng, double w, double h) {
  const double x0 = rng.uniform(0, w - 20), y0 = rng.uniform(0, h - 20);
  return Box(x0, y0, rng.uniform(x0 + 10, w), rng.uniform(y0 + 10, h));
}

}  // namespace

TEST_CASE("gaussian density examples") {
  const Box unit(-1, -1, 1, 1);  // sigma 1 in both axes, centred at the origin
  CHECK(gaussian_density(0.0, 0.0, unit) == doctest::Approx(0.159155).epsilon(1e-6));
  CHECK(gaussian_density(0.0, 0.0, unit) == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(gaussian_density(1.0, 0.0, unit) == doctest::Approx(0.096532).epsilon(1e-5));
  const Box b(10, 20, 50, 100);
  for (double d : {0.5, 3.0, 17.0}) {
    CHECK(gaussian_density(30.0 + d, 60.0, b) == gaussian_density(30.0 - d, 60.0, b));
    CHECK(gaussian_density(30.0, 60.0 + d, b) == gaussian_density(30.0, 60.0 - d, b));
  }
}

TEST_CASE("gaussian density integrates to one") {
  const Box b(100, 50, 160, 150);
  const double sx = 30, sy = 50, mx = 130, my = 100;
  const int n = 600;
  const double dx = 12 * sx / n, dy = 12 * sy / n;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      total += gaussian_density(mx - 6 * sx + (j + 0.5) * dx, my - 6 * sy + (i + 0.5) * dy, b);
    }
  }
  total *= dx * dy;
  CHECK(total >= 0.99);
  CHECK(total <= 1.01);
}

TEST_CASE("attention map examples") {
  const Box a(0, 0, 64, 64);
  const auto single = attention_map({a}, 16, 16, 640, 480);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const double x = (j + 0.5) * 640 / 16, y = (i + 0.5) * 480 / 16;
      CHECK(single(i, j) == gaussian_density(x, y, a));
    }
  }
  const auto twice = attention_map({a, a}, 16, 16, 640, 480);
  CHECK((twice - single).cwiseAbs().maxCoeff() < 1e-18);
  CHECK_THROWS_AS(attention_map({}, 16, 16, 640, 480), DomainError);
}

TEST_CASE("distant proposals halve each peak") {
  // Cells of 1 px; centres at half-integers line up with the box centres.
  const Box left(0, 0, 2, 2), right(398, 398, 400, 400);
  const auto map = attention_map({left, right}, 400, 400, 400, 400);
  const double peak = gaussian_density(1.0, 1.0, left);
  CHECK(map(0, 0) == doctest::Approx(gaussian_density(0.5, 0.5, left) / 2).epsilon(1e-6));
  const double cross = gaussian_density(0.5, 0.5, right);
  CHECK(cross < 1e-6);
  CHECK(std::abs(map(0, 0) - gaussian_density(0.5, 0.5, left) / 2) < 1e-6);
  CHECK(std::abs(map(399, 399) - gaussian_density(399.5, 399.5, right) / 2) < 1e-6);
  CHECK(peak > 0.0);
}

TEST_CASE("attention map is nonnegative and invariant to order and doubling") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Box> boxes;
    const int n = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) boxes.push_back(random_box(rng, 480, 240));
    const auto map = attention_map(boxes, 12, 16, 480, 240);
    CHECK(map.allFinite());
    CHECK(map.minCoeff() >= 0.0);
    auto shuffled = boxes;
    rng.shuffle(std::span<Box>(shuffled));
    CHECK((attention_map(shuffled, 12, 16, 480, 240) - map).cwiseAbs().maxCoeff() <= 1e-15 * map.maxCoeff());
    auto doubled = boxes;
    doubled.insert(doubled.end(), boxes.begin(), boxes.end());
    CHECK((attention_map(doubled, 12, 16, 480, 240) - map).cwiseAbs().maxCoeff() <= 1e-15 * map.maxCoeff());
  }
}

TEST_CASE("weighted global feature examples") {
  Rng rng(4);
  const ChannelGrid grid = random_grid(rng, 4, 5, 3, 100, 80);
  const AttentionMap ones = AttentionMap::Ones(4, 5);
  CHECK((weighted_global_feature(grid, ones) - grid.values.colwise().mean()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(weighted_global_feature(grid, AttentionMap::Zero(4, 5)).cwiseAbs().maxCoeff() == 0.0);
  AttentionMap hot = AttentionMap::Zero(4, 5);
  hot(2, 3) = 1.0;
  CHECK((weighted_global_feature(grid, hot) - grid.cell(2, 3) / 20.0).cwiseAbs().maxCoeff() < 1e-16);
  CHECK_THROWS_AS(weighted_global_feature(grid, AttentionMap::Ones(5, 4)), ShapeError);
}

TEST_CASE("weighted global feature is linear in the map") {
  Rng rng(5);
  const ChannelGrid grid = random_grid(rng, 6, 6, 4, 60, 60);
  for (int trial = 0; trial < 20; ++trial) {
    const AttentionMap map = random_matrix(rng, 6, 6, 0, 2).cast<double>();
    const double a = rng.uniform(-3, 3);
    const Eigen::RowVectorXd lhs = weighted_global_feature(grid, AttentionMap(a * map));
    const Eigen::RowVectorXd rhs = a * weighted_global_feature(grid, map);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("crop of an exact-size block is the identity") {
  Rng rng(6);
  const ChannelGrid image = random_grid(rng, 30, 60, 3, 480, 240);
  const ChannelGrid same = resize_bilinear(image, 30, 60);
  CHECK(same.values == image.values);
  // 8 px cells: a 32 x 32 cell block starting at cell (row 2, col 5).
  const ChannelGrid big = random_grid(rng, 40, 40, 2, 320, 320);
  const ChannelGrid crop = crop_resize(big, Box(40, 16, 40 + 256, 16 + 256), 32, 32);
  for (int u = 0; u < 32; ++u) {
    for (int v = 0; v < 32; ++v) CHECK(crop.cell(u, v) == big.cell(2 + u, 5 + v));
  }
}

TEST_CASE("bilinear resampling reproduces linear images") {
  // Interpolation between cell centres is exact for an affine function of position.
  ChannelGrid image(20, 20, 1, 200, 200);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const auto [x, y] = image.cell_center(i, j);
      image.cell(i, j)(0) = 0.3 * x - 0.7 * y + 2;
    }
  }
  const Box box(33, 41, 151, 170);
  const ChannelGrid crop = crop_resize(image, box, 9, 7);
  for (int u = 0; u < 9; ++u) {
    for (int v = 0; v < 7; ++v) {
      const double px = box.x_min() + (v + 0.5) * box.width() / 7;
      const double py = box.y_min() + (u + 0.5) * box.height() / 9;
      CHECK(crop.cell(u, v)(0) == doctest::Approx(0.3 * px - 0.7 * py + 2).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(crop_resize(image, Box(300, 300, 400, 400), 4, 4), DomainError);
}

TEST_CASE("adaptive pooling averages blocks") {
  ChannelGrid g(4, 4, 1, 4, 4);
  for (int k = 0; k < 16; ++k) g.values(k, 0) = k;
  const ChannelGrid p = adaptive_average_pool(g, 2, 2);
  CHECK(p.cell(0, 0)(0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(p.cell(1, 1)(0) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
}

TEST_CASE("local features are unit norm and deterministic") {
  BackboneConfig cfg;
  cfg.input_channels = 3;
  Rng rng(7);
  const TinyBackbone backbone(cfg, rng);
  CHECK(backbone.local_dim() == 16 * 8);
  const ChannelGrid image = random_grid(rng, 30, 60, 3, 480, 240);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = local_feature(image, random_box(rng, 480, 240), backbone);
    REQUIRE_FALSE(f.degenerate);
    CHECK(std::abs(f.values.norm() - 1.0) < 1e-9);
  }
  ChannelGrid flat(30, 60, 3, 480, 240);
  flat.values.setConstant(0.4);
  const Box box(100, 40, 200, 200);
  Rng rng2(7);
  const TinyBackbone again(cfg, rng2);
  CHECK(local_feature(flat, box, backbone).values == local_feature(flat, box, again).values);
}

TEST_CASE("an all-zero descriptor is flagged rather than normalized") {
  BackboneConfig cfg;
  cfg.input_channels = 2;
  const TinyBackbone dead(cfg, Matrix<double>::Zero(16, 18), Matrix<double>::Zero(1, 16),
                          Matrix<double>::Zero(16, 144), Matrix<double>::Zero(1, 16));
  ChannelGrid image(10, 10, 2, 100, 100);
  image.values.setOnes();
  const auto f = local_feature(image, Box(0, 0, 50, 50), dead);
  CHECK(f.degenerate);
  CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.values.allFinite());
}

TEST_CASE("conv3x3 with a centre tap is a channel mix plus relu") {
  Rng rng(8);
  const ChannelGrid in = random_grid(rng, 5, 6, 2, 6, 5);
  Matrix<double> w = Matrix<double>::Zero(1, 18);
  w(0, 4 * 2 + 0) = 1.0;   // (dy=1, dx=1, channel 0)
  w(0, 4 * 2 + 1) = -2.0;  // (dy=1, dx=1, channel 1)
  const Matrix<double> bias = Matrix<double>::Constant(1, 1, 0.1);
  const ChannelGrid out = conv3x3_relu(in, w, bias);
  for (int k = 0; k < 30; ++k) {
    CHECK(out.values(k, 0) == doctest::Approx(std::max(0.0, in.values(k, 0) - 2 * in.values(k, 1) + 0.1)));
  }
}

TEST_CASE("precomputed features round trip") {
  nlpr::testing::TempDir dir("feat");
  Rng rng(9);
  std::vector<PrecomputedRecord> records;
  for (int r = 0; r < 3; ++r) {
    records.push_back({"img" + std::to_string(r), random_grid(rng, 4, 4, 5, 320, 240),
                       random_matrix(rng, 2 + r, 7)});
  }
  save_precomputed_features(dir / "f.bin", records);
  const auto back = load_precomputed_features(dir / "f.bin");
  REQUIRE(back.size() == 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(back[static_cast<std::size_t>(r)].image_ref == records[static_cast<std::size_t>(r)].image_ref);
    CHECK(back[static_cast<std::size_t>(r)].grid == records[static_cast<std::size_t>(r)].grid);
    CHECK(back[static_cast<std::size_t>(r)].locals == records[static_cast<std::size_t>(r)].locals);
  }
}

TEST_CASE("scene visuals combine map and grid") {
  Rng rng(10);
  const ChannelGrid grid = random_grid(rng, 8, 8, 4, 480, 240);
  const std::vector<Box> boxes{Box(10, 10, 100, 200), Box(300, 20, 400, 230)};
  const auto sv = scene_visuals(grid, boxes);
  CHECK((sv.map - attention_map(boxes, 8, 8, 480, 240)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sv.weighted_global - weighted_global_feature(grid, sv.map)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attention ppm has a valid header and size") {
  AttentionMap map = AttentionMap::Zero(3, 4);
  map(1, 2) = 2.0;
  const std::string ppm = attention_ppm(map, 2);
  const std::string header = "P6\n8 6\n255\n";
  REQUIRE(ppm.substr(0, header.size()) == header);
  CHECK(ppm.size() == header.size() + 8 * 6 * 3);
  // Brightest cell is white, everything else black.
  const auto pixel = [&](int x, int y) { return static_cast<unsigned char>(ppm[header.size() + 3 * (y * 8 + x)]); };
  CHECK(pixel(4, 2) == 255);
  CHECK(pixel(0, 0) == 0);
}
