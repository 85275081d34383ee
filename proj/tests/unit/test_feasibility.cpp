#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "footcast/errors.hpp"
#include "footcast/feasibility.hpp"
#include "footcast/rng.hpp"

namespace footcast {
namespace {

FootholdSet stance(std::array<Eigen::Vector2d, 4> xy) {
  FootholdSet f;
  f.frame = Frame::world;
  for (int i = 0; i < 4; ++i) f.feet[static_cast<std::size_t>(i)] = {xy[static_cast<std::size_t>(i)].x(), xy[static_cast<std::size_t>(i)].y(), 0.0};
  return f;
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

bool in_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

// Signed distance by brute force: the hull of four points is the union of the
// triangles over all triples; its boundary is the set of pair segments that
// leave every other point on one side. Distances come from dense sampling.
double margin_oracle(const std::array<Eigen::Vector2d, 4>& p, const Eigen::Vector2d& com) {
  bool inside = false;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) inside = inside || in_triangle(com, p[i], p[j], p[k]);
  double best = 1e300;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      int left = 0, right = 0;
      for (int k = 0; k < 4; ++k) {
        if (k == i || k == j) continue;
        const double s = cross(p[i], p[j], p[k]);
        left += s > 0;
        right += s < 0;
      }
      if (left && right) continue;  // diagonal, not an edge
      const int n = 200000;
      for (int t = 0; t <= n; ++t) {
        const Eigen::Vector2d q = p[i] + (p[j] - p[i]) * (static_cast<double>(t) / n);
        best = std::min(best, (q - com).norm());
      }
    }
  }
  return inside ? best : -best;
}

TEST(Margin, SquareStanceCentre) {
  const auto f = stance({Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.2, -0.2), Eigen::Vector2d(-0.2, 0.2),
                         Eigen::Vector2d(-0.2, -0.2)});
  EXPECT_EQ(stability_margin(f, {0.0, 0.0}), 0.2);
}

TEST(Margin, OutsideIsNegativeDistance) {
  const auto f = stance({Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.2, -0.2), Eigen::Vector2d(-0.2, 0.2),
                         Eigen::Vector2d(-0.2, -0.2)});
  EXPECT_NEAR(stability_margin(f, {0.7, 0.0}), -0.5, 1e-15);
}

TEST(Margin, RandomStancesMatchBruteForce) {
  rng::Stream s(31);
  for (int n = 0; n < 100; ++n) {
    std::array<Eigen::Vector2d, 4> p{Eigen::Vector2d(0.19, 0.12), Eigen::Vector2d(0.19, -0.12),
                                     Eigen::Vector2d(-0.19, 0.12), Eigen::Vector2d(-0.19, -0.12)};
    for (auto& q : p) q += Eigen::Vector2d(s.uniform(-0.1, 0.1), s.uniform(-0.1, 0.1));
    const Eigen::Vector2d com(s.uniform(-0.3, 0.3), s.uniform(-0.25, 0.25));
    ASSERT_NEAR(stability_margin(stance(p), com), margin_oracle(p, com), 1e-6) << n;
  }
}

TEST(Margin, RigidTransformInvariance) {
  rng::Stream s(32);
  for (int n = 0; n < 50; ++n) {
    std::array<Eigen::Vector2d, 4> p;
    for (auto& q : p) q = {s.uniform(-0.3, 0.3), s.uniform(-0.3, 0.3)};
    const Eigen::Vector2d com(s.uniform(-0.3, 0.3), s.uniform(-0.3, 0.3));
    const double th = s.uniform(-std::numbers::pi, std::numbers::pi);
    const Eigen::Vector2d t(s.uniform(-5, 5), s.uniform(-5, 5));
    const Eigen::Matrix2d R = Eigen::Rotation2Dd(th).toRotationMatrix();
    auto q = p;
    for (auto& v : q) v = R * v + t;
    EXPECT_NEAR(stability_margin(stance(p), com), stability_margin(stance(q), R * com + t), 1e-9);
  }
}

TEST(Margin, CoincidentFeetGiveMinusDistance) {
  const auto f = stance({Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)});
  EXPECT_NEAR(stability_margin(f, {1.3, 1.4}), -0.5, 1e-15);
  EXPECT_EQ(stability_margin(f, {1, 1}), 0.0);
}

TEST(Margin, CollinearFeetGiveMinusSegmentDistance) {
  const auto f = stance({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0.5, 0)});
  EXPECT_NEAR(stability_margin(f, {1.0, 0.3}), -0.3, 1e-15);
  EXPECT_NEAR(stability_margin(f, {3.0, 0.0}), -1.0, 1e-15);
}

TEST(Margin, NeedsWorldFrame) {
  FootholdSet f;
  f.frame = Frame::base;
  const FeasibilityConfig cfg;
  EXPECT_THROW(feasibility_record(0.0, f, f, {0, 0}, cfg), StructuralError);
}

TEST(Hull, CounterClockwiseWithoutCollinear) {
  const auto h = convex_hull({{0, 0}, {1, 0}, {0.5, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  ASSERT_EQ(h.size(), 4u);
  double area = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  EXPECT_NEAR(area / 2.0, 1.0, 1e-15);
}

TEST(MarginCost, Branches) {
  const FeasibilityConfig cfg;
  EXPECT_DOUBLE_EQ(margin_to_cost(0.99, cfg), 1.0);
  EXPECT_DOUBLE_EQ(margin_to_cost(-0.5, cfg), 1.5);
  EXPECT_DOUBLE_EQ(margin_to_cost(0.0, cfg), 1.0);
  EXPECT_NEAR(margin_to_cost(1e-12, cfg), 100.0, 1e-6);
}

TEST(FeasibilityError, IdenticalFootholdsGiveZero) {
  const auto f = stance({Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.2, -0.2), Eigen::Vector2d(-0.2, 0.2),
                         Eigen::Vector2d(-0.2, -0.2)});
  std::vector<FeasibilityRecord> recs;
  for (int t = 0; t < 5; ++t) recs.push_back(feasibility_record(0.1 * t, f, f, {0.01 * t, 0.0}, FeasibilityConfig{}));
  const auto e = feasibility_error(recs);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std, 0.0);
}

TEST(FeasibilityError, TwoPointStatistics) {
  std::vector<FeasibilityRecord> recs(2);
  recs[0].e = 1.0;
  recs[1].e = 3.0;
  const auto e = feasibility_error(recs);
  EXPECT_DOUBLE_EQ(e.mean, 2.0);
  EXPECT_DOUBLE_EQ(e.std, 1.0);
}

TEST(FeasibilityError, RandomMatchesOracle) {
  rng::Stream s(33);
  std::vector<FeasibilityRecord> recs(57);
  double sum = 0;
  for (auto& r : recs) sum += (r.e = s.uniform(0, 20));
  const double mean = sum / 57.0;
  double ss = 0;
  for (const auto& r : recs) ss += (r.e - mean) * (r.e - mean);
  const auto e = feasibility_error(recs);
  EXPECT_NEAR(e.mean, mean, 1e-12);
  EXPECT_NEAR(e.std, std::sqrt(ss / 57.0), 1e-12);
}

TEST(FeasibilityError, RecordUsesBothMargins) {
  const auto pred = stance({Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.2, -0.2), Eigen::Vector2d(-0.2, 0.2),
                            Eigen::Vector2d(-0.2, -0.2)});
  const auto actual = stance({Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.1, -0.1), Eigen::Vector2d(-0.1, 0.1),
                              Eigen::Vector2d(-0.1, -0.1)});
  const FeasibilityConfig cfg;
  const auto r = feasibility_record(0.5, pred, actual, {0, 0}, cfg);
  EXPECT_DOUBLE_EQ(r.m_pred, 0.2);
  EXPECT_DOUBLE_EQ(r.m_actual, 0.1);
  EXPECT_NEAR(r.e, std::abs(1.0 / 0.21 - 1.0 / 0.11), 1e-12);
  EXPECT_EQ(feasibility_to_csv({&r, 1}).substr(0, 38), "t,m_pred,m_actual,c_pred,c_actual,e_t\n");
}

}  // namespace
}  // namespace footcast
