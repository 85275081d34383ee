#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "footcast/costmap.hpp"
#include "footcast/errors.hpp"
#include "footcast/planner.hpp"
#include "helpers.hpp"

namespace footcast {
namespace {

using testing::field_from;

GridSpec grid4() { return {41, 41, 0.1, 0.0, 0.0}; }

FootPrediction one_foot(double x, double y, double var) {
  FootPrediction p;
  p.feet.frame = Frame::world;
  for (auto& f : p.feet.feet) f = {-50.0, -50.0, 0.0};
  p.feet.feet[0] = {x, y, 0.0};
  p.leg_variance = {var, 0.0, 0.0, 0.0};
  return p;
}

TEST(UncertaintyMap, PeakClampsToLethal) {
  CostmapConfig cfg;
  const std::vector<FootPrediction> preds{one_foot(2.0, 2.0, 250.0 / cfg.alpha)};
  const auto m = uncertainty_costmap(preds, cfg, grid4());
  EXPECT_DOUBLE_EQ(m.at(20, 20), 100.0);
}

TEST(UncertaintyMap, OneSigmaAway) {
  CostmapConfig cfg;  // sigma_b = 0.1 m = one cell
  const double var = 0.02;
  const std::vector<FootPrediction> preds{one_foot(2.0, 2.0, var)};
  const auto m = uncertainty_costmap(preds, cfg, grid4());
  const double c = cfg.alpha * var;
  EXPECT_NEAR(m.at(20, 20), c, 1e-12);
  EXPECT_NEAR(m.at(20, 21), c * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(m.at(19, 20), c * std::exp(-0.5), 1e-12);
}

TEST(UncertaintyMap, OverlappingBlobsTakeMax) {
  CostmapConfig cfg;
  std::vector<FootPrediction> preds;
  FootPrediction p;
  p.feet.frame = Frame::world;
  p.feet.feet = {Eigen::Vector3d(1.93, 2.04, 0), Eigen::Vector3d(2.11, 1.98, 0), Eigen::Vector3d(1.5, 2.5, 0),
                 Eigen::Vector3d(2.6, 1.4, 0)};
  p.leg_variance = {0.02, 0.035, 0.01, 0.08};
  preds.push_back(p);
  p.feet.feet[0] = {2.02, 2.01, 0};
  p.leg_variance = {0.03, 0.0, 0.0, 0.0};
  preds.push_back(p);
  const auto g = grid4();
  const auto m = uncertainty_costmap(preds, cfg, g);
  const double s = cfg.blob_radius / 2.0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      double best = 0.0;
      for (const auto& q : preds)
        for (int i = 0; i < 4; ++i) {
          const double dx = g.x(c) - q.feet.feet[i].x(), dy = g.y(r) - q.feet.feet[i].y();
          best = std::max(best, std::min(100.0, cfg.alpha * q.leg_variance[i]) * std::exp(-(dx * dx + dy * dy) / (2 * s * s)));
        }
      ASSERT_NEAR(m.at(r, c), best, 1e-10) << r << "," << c;
    }
  }
}

TEST(UncertaintyMap, CostsStayInRange) {
  rng::Stream s(4);
  std::vector<FootPrediction> preds;
  for (int k = 0; k < 30; ++k) {
    FootPrediction p;
    p.feet.frame = Frame::world;
    for (auto& f : p.feet.feet) f = {s.uniform(0, 4), s.uniform(0, 4), 0};
    for (auto& v : p.leg_variance) v = s.uniform(0, 0.2);
    preds.push_back(p);
  }
  const auto m = uncertainty_costmap(preds, CostmapConfig{}, grid4());
  for (double c : m.costs()) {
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 100.0);
  }
}

TEST(ObstacleMap, FlatIsFree) {
  const HeightField f(81, 81, 0.05);
  const auto m = obstacle_costmap(f, CostmapConfig{}, grid4());
  for (double c : m.costs()) EXPECT_EQ(c, 0.0);
}

TEST(ObstacleMap, SpikeCellsAreLethal) {
  const auto f = field_from(81, 81, 0.05, 0.0, 0.0, [](double x, double y) {
    return (std::abs(x - 2.0) <= 0.1 + 1e-9 && std::abs(y - 2.0) <= 0.1 + 1e-9) ? 0.3 : 0.0;
  });
  const auto g = grid4();
  const auto m = obstacle_costmap(f, CostmapConfig{}, g);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const bool spike = f.elevation(g.x(c), g.y(r)) > 0.15;
      EXPECT_EQ(m.at(r, c), spike ? 100.0 : 0.0) << r << "," << c;
    }
}

TEST(ObstacleMap, GentleRampIsFree) {
  const auto f = field_from(81, 81, 0.05, 0.0, 0.0, [](double x, double) { return 0.1 * x; });
  const auto m = obstacle_costmap(f, CostmapConfig{}, grid4());
  for (double c : m.costs()) EXPECT_EQ(c, 0.0);
}

TEST(RoughnessMap, FlatIsFree) {
  const HeightField f(81, 81, 0.05);
  const auto m = roughness_costmap(f, CostmapConfig{}, grid4());
  for (double c : m.costs()) EXPECT_EQ(c, 0.0);
}

TEST(RoughnessMap, RampIsUniformInside) {
  const auto f = field_from(81, 81, 0.05, 0.0, 0.0, [](double x, double) { return 0.1 * x; });
  CostmapConfig cfg;
  const auto g = grid4();
  const auto m = roughness_costmap(f, cfg, g);
  // 9 x 9 window nodes; x offsets spaced 0.05 over 9 columns
  const double var_x = 0.05 * 0.05 * (81.0 - 1.0) / 12.0;
  const double expected = cfg.roughness_scale * 0.01 * var_x;
  for (int r = 3; r < g.rows - 3; ++r)
    for (int c = 3; c < g.cols - 3; ++c) EXPECT_NEAR(m.at(r, c), expected, 1e-9);
}

TEST(RoughnessMap, StepEdgeMatchesWindowOracle) {
  const auto f = field_from(81, 81, 0.05, 0.0, 0.0, [](double x, double) { return x >= 2.0 - 1e-9 ? 0.1 : 0.0; });
  CostmapConfig cfg;
  const auto g = grid4();
  const auto m = roughness_costmap(f, cfg, g);
  const double h = cfg.blob_radius;
  double peak = -1;
  int peak_col = -1;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      std::vector<double> z;
      for (int fr = 0; fr < f.rows(); ++fr)
        for (int fc = 0; fc < f.cols(); ++fc) {
          const double x = fc * 0.05, y = fr * 0.05;
          if (std::abs(x - g.x(c)) <= h + 1e-9 && std::abs(y - g.y(r)) <= h + 1e-9) z.push_back(f.at(fr, fc));
        }
      double mean = 0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(z.size());
      double var = 0;
      for (double v : z) var += (v - mean) * (v - mean);
      var /= static_cast<double>(z.size());
      ASSERT_NEAR(m.at(r, c), std::min(100.0, cfg.roughness_scale * var), 1e-9) << r << "," << c;
      if (r == 20 && m.at(r, c) > peak) peak = m.at(r, c), peak_col = c;
    }
  }
  EXPECT_NEAR(g.x(peak_col), 2.0, 0.1 + 1e-9);
}

TEST(Costmap, BilinearSampleAndOffMapLethal) {
  Costmap m(GridSpec{2, 2, 1.0, 0.0, 0.0});
  m.at(0, 0) = 0;
  m.at(0, 1) = 10;
  m.at(1, 0) = 20;
  m.at(1, 1) = 30;
  EXPECT_DOUBLE_EQ(m.sample(0.5, 0.5), 15.0);
  EXPECT_DOUBLE_EQ(m.sample(1.0, 0.0), 10.0);
  EXPECT_EQ(m.sample(-0.01, 0.5), 100.0);
  EXPECT_EQ(m.sample(0.5, 1.01), 100.0);
}

TEST(CostField, InterpolatesBetweenSpeedLayers) {
  const GridSpec g{3, 3, 1.0, 0.0, 0.0};
  Costmap slow(g), fast(g);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) slow.at(r, c) = 10, fast.at(r, c) = 30;
  const CostField field({0.2, 1.0}, {slow, fast});
  EXPECT_DOUBLE_EQ(field.sample(1, 1, 0.6), 20.0);
  EXPECT_DOUBLE_EQ(field.sample(1, 1, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(field.sample(1, 1, 2.0), 30.0);
  EXPECT_DOUBLE_EQ(CostField(slow).sample(1, 1, 0.9), 10.0);
  EXPECT_THROW(CostField({1.0, 0.2}, {slow, fast}), StructuralError);
  EXPECT_THROW(CostField({0.2}, {slow, fast}), StructuralError);
}

TEST(Costmap, SvgHasOneRectPerCell) {
  Costmap m(GridSpec{3, 4, 0.1, 0.0, 0.0});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m.at(r, c) = 10.0 * (r * 4 + c + 1);
  const auto svg = costmap_svg(m);
  std::size_t n = 0;
  for (std::size_t p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) ++n;
  EXPECT_EQ(n, 13u);  // background + one per cell
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace footcast
