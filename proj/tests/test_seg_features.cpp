#include "soundscape/seg_features.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

const std::map<int, std::string> kLegend{{0, "Road"}, {1, "Vegetation"}, {2, "Building"}};

TEST(ClassDistribution, TwoByTwoExample) {
  const LabelRaster r{2, 2, kLegend, {0, 0, 1, 2}};
  const auto p = class_distribution(r);
  EXPECT_EQ(p.total_pixels, 4u);
  EXPECT_DOUBLE_EQ(p["Road"], 0.5);
  EXPECT_DOUBLE_EQ(p["Vegetation"], 0.25);
  EXPECT_DOUBLE_EQ(p["Building"], 0.25);
}

TEST(ClassDistribution, SingleClassIsOneHot) {
  const LabelRaster r{3, 3, kLegend, std::vector<int>(9, 1)};
  const auto p = class_distribution(r);
  EXPECT_DOUBLE_EQ(p["Vegetation"], 1.0);
  EXPECT_DOUBLE_EQ(p["Road"], 0.0);
  EXPECT_DOUBLE_EQ(p["Building"], 0.0);
  EXPECT_EQ(p.proportions.size(), 3u);
}

TEST(ClassDistribution, Errors) {
  EXPECT_THROW(class_distribution(LabelRaster{0, 0, kLegend, {}}), ArgumentError);
  EXPECT_THROW(class_distribution(LabelRaster{2, 1, kLegend, {0, 9}}), FormatError);
}

TEST(ClassDistribution, IdsSharingANameAreMerged) {
  const LabelRaster r{4, 1, {{0, "Car"}, {1, "Car"}, {2, "Road"}}, {0, 1, 2, 2}};
  const auto p = class_distribution(r);
  EXPECT_DOUBLE_EQ(p["Car"], 0.5);
  EXPECT_DOUBLE_EQ(p["Road"], 0.5);
}

LabelRaster random_raster(std::mt19937_64& rng) {
  LabelRaster r;
  r.width = 1 + rng() % 20;
  r.height = 1 + rng() % 20;
  const int classes = 1 + static_cast<int>(rng() % 6);
  for (int c = 0; c < classes; ++c) r.legend[c * 3] = "class" + std::to_string(c);
  for (std::size_t i = 0; i < r.width * r.height; ++i) {
    r.cells.push_back(3 * static_cast<int>(rng() % classes));
  }
  return r;
}

TEST(ClassDistribution, Properties) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_raster(rng);
    const auto p = class_distribution(r);

    double sum = 0.0;
    for (const auto& [name, v] : p.proportions) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);

    // Pixel order does not matter.
    auto shuffled = r;
    std::shuffle(shuffled.cells.begin(), shuffled.cells.end(), rng);
    EXPECT_EQ(class_distribution(shuffled), p);

    // Replicating every pixel k x k leaves proportions unchanged.
    const std::size_t k = 1 + rng() % 3;
    LabelRaster big{r.width * k, r.height * k, r.legend, {}};
    for (std::size_t y = 0; y < big.height; ++y) {
      for (std::size_t x = 0; x < big.width; ++x) big.cells.push_back(r.at(y / k, x / k));
    }
    const auto q = class_distribution(big);
    for (const auto& [name, v] : p.proportions) EXPECT_NEAR(q[name], v, 1e-15);
  }
}

}  // namespace
}  // namespace soundscape
