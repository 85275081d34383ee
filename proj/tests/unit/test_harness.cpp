#include <cmath>

#include <gtest/gtest.h>

#include "footcast/config.hpp"
#include "footcast/errors.hpp"
#include "footcast/harness.hpp"

namespace footcast::harness {
namespace {

TEST(Stats, QuantileInterpolates) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.3), 7.0);
}

TEST(Stats, LeastSquaresRecoversLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.1 * i);
    y.push_back(3.0 * x.back() - 0.5);
  }
  const auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-12);
  EXPECT_NEAR(f.intercept, -0.5, 1e-12);
}

TEST(Layout, TerrainNamesIncludeFlatSanity) {
  const ExperimentConfig c;
  const auto names = test_terrain_names(c);
  EXPECT_EQ(names, (std::vector<std::string>{"wavy", "stepped", "spiked", "flat"}));
}

TEST(Layout, TestFieldsShareExtent) {
  const ExperimentConfig c;
  const auto a = test_field(c, "wavy");
  const auto b = test_field(c, "flat");
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  for (double z : b.elevations()) EXPECT_EQ(z, 0.0);
  EXPECT_THROW(test_field(c, "lava"), ConfigError);
}

TEST(Collect, IdDataIsFlatAndFixedCommand) {
  ExperimentConfig c;
  c.collect.id_rollouts = 2;
  c.collect.id_steps = 20;
  const auto d = collect_id(c, 1);
  ASSERT_EQ(d.samples.size(), 40u);
  for (const auto& s : d.samples) {
    EXPECT_DOUBLE_EQ(s.u.values(0), c.collect.id_vx);
    EXPECT_TRUE(s.u.values.tail<kPooledSize>().isZero(0.0));
  }
}

}  // namespace
}  // namespace footcast::harness
