#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "footcast/errors.hpp"
#include "footcast/ood.hpp"
#include "footcast/rng.hpp"

namespace footcast {
namespace {

SignalTrace trace_of(std::vector<double> v) {
  SignalTrace t;
  for (std::size_t i = 0; i < v.size(); ++i) t.times.push_back(0.1 * static_cast<double>(i));
  t.values = std::move(v);
  return t;
}

std::vector<int> ood_indices(const OodSegmentation& s) {
  std::vector<int> out;
  const auto labels = s.labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == RegionLabel::ood) out.push_back(static_cast<int>(i));
  return out;
}

TEST(PerLeg, ConstantVariance) {
  EpistemicPrediction p;
  p.variance.setConstant(0.006);
  for (double v : per_leg_uncertainty(p)) EXPECT_DOUBLE_EQ(v, 0.006);
}

TEST(PerLeg, MeanOfThreeCoordinates) {
  EpistemicPrediction p;
  p.variance.setZero();
  p.variance(0) = 0.3;
  const auto u = per_leg_uncertainty(p);
  EXPECT_DOUBLE_EQ(u[0], 0.1);
  EXPECT_EQ(u[1], 0.0);
  EXPECT_EQ(u[2], 0.0);
  EXPECT_EQ(u[3], 0.0);
}

TEST(PerLeg, RandomMatchesOracle) {
  rng::Stream s(3);
  EpistemicPrediction p;
  for (int i = 0; i < 12; ++i) p.variance(i) = s.uniform(0, 0.01);
  const auto u = per_leg_uncertainty(p);
  for (int leg = 0; leg < 4; ++leg)
    EXPECT_NEAR(u[static_cast<std::size_t>(leg)],
                (p.variance(3 * leg) + p.variance(3 * leg + 1) + p.variance(3 * leg + 2)) / 3.0, 1e-12);
}

TEST(Threshold, ConstantTrace) { EXPECT_DOUBLE_EQ(id_threshold({trace_of({0.002, 0.002, 0.002})}), 0.002); }

TEST(Threshold, MeanOverAllValues) { EXPECT_DOUBLE_EQ(id_threshold({trace_of({1, 2, 3}), trace_of({5})}), 2.75); }

TEST(Threshold, LengthWeightedMeanOfTraceMeans) {
  rng::Stream s(8);
  std::vector<SignalTrace> traces;
  double weighted = 0.0;
  int n = 0;
  for (int k = 0; k < 4; ++k) {
    std::vector<double> v(static_cast<std::size_t>(10 + 7 * k));
    for (auto& x : v) x = s.uniform(0.001, 0.005);
    weighted += std::accumulate(v.begin(), v.end(), 0.0);
    n += static_cast<int>(v.size());
    traces.push_back(trace_of(v));
  }
  EXPECT_NEAR(id_threshold(traces), weighted / n, 1e-12);
}

TEST(Threshold, NoIdDataThrows) { EXPECT_THROW(id_threshold({}), InsufficientSamplesError); }

TEST(Segment, AllBelowThresholdIsOneIdSegment) {
  const auto s = segment_ood(trace_of({0.1, 0.2, 0.3}), 1.0, 2);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0].start, 0);
  EXPECT_EQ(s.segments[0].end, 2);
  EXPECT_EQ(s.segments[0].label, RegionLabel::id);
  EXPECT_EQ(s.ood_count(), 0);
}

TEST(Segment, TopRunByMeanWins) {
  const auto s = segment_ood(trace_of({0, 0, 5, 5, 0, 9, 9, 0}), 1.0, 1);
  EXPECT_EQ(ood_indices(s), (std::vector<int>{5, 6}));
}

TEST(Segment, LargeKTakesEveryRun) {
  const auto s = segment_ood(trace_of({0, 0, 5, 5, 0, 9, 9, 0}), 1.0, 5);
  EXPECT_EQ(ood_indices(s), (std::vector<int>{2, 3, 5, 6}));
}

TEST(Segment, EqualToThresholdIsNotExceeding) {
  const auto s = segment_ood(trace_of({1, 1, 1, 1}), 1.0, 3);
  EXPECT_EQ(s.ood_count(), 0);
}

TEST(Segment, TiesGoToEarlierRun) {
  const auto s = segment_ood(trace_of({4, 0, 2, 6, 0, 4, 4, 0}), 1.0, 1);
  EXPECT_EQ(ood_indices(s), (std::vector<int>{0}));
  const auto t = segment_ood(trace_of({0, 3, 5, 0, 4, 0}), 1.0, 1);
  EXPECT_EQ(ood_indices(t), (std::vector<int>{1, 2}));
}

TEST(Segment, ScaleEquivariant) {
  rng::Stream r(5);
  std::vector<double> v(60);
  for (auto& x : v) x = r.uniform(0, 1);
  const auto a = segment_ood(trace_of(v), 0.6, 3);
  for (auto& x : v) x *= 37.5;
  const auto b = segment_ood(trace_of(v), 0.6 * 37.5, 3);
  EXPECT_EQ(a.labels(), b.labels());
}

TEST(Segment, OodRunsAreMaximalAndBounded) {
  rng::Stream r(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v(80);
    for (auto& x : v) x = r.uniform(0, 1);
    const double thr = 0.55;
    const int k = trial % 5;
    const auto s = segment_ood(trace_of(v), thr, k);
    int ood_runs = 0;
    for (const auto& seg : s.segments) {
      if (seg.label != RegionLabel::ood) continue;
      ++ood_runs;
      for (int i = seg.start; i <= seg.end; ++i) EXPECT_GT(v[static_cast<std::size_t>(i)], thr);
      if (seg.start > 0) EXPECT_LE(v[static_cast<std::size_t>(seg.start - 1)], thr);
      if (seg.end + 1 < 80) EXPECT_LE(v[static_cast<std::size_t>(seg.end + 1)], thr);
    }
    EXPECT_LE(ood_runs, k);
    // segments tile the trace
    int next = 0;
    for (const auto& seg : s.segments) {
      EXPECT_EQ(seg.start, next);
      next = seg.end + 1;
    }
    EXPECT_EQ(next, 80);
  }
}

TEST(Segment, InvalidTraceIsStructural) {
  auto t = trace_of({1, 2, 3});
  t.times[2] = t.times[1];
  EXPECT_THROW(segment_ood(t, 0.5, 1), StructuralError);
  auto u = trace_of({1, std::nan(""), 3});
  EXPECT_THROW(segment_ood(u, 0.5, 1), StructuralError);
}

TEST(RegionError, ConstantErrors) {
  const auto s = segment_ood(trace_of({0, 5, 5, 0}), 1.0, 1);
  const auto e = region_error({0.3, 0.3, 0.3, 0.3}, s);
  EXPECT_DOUBLE_EQ(e.id_mean, 0.3);
  EXPECT_DOUBLE_EQ(e.ood_mean, 0.3);
}

TEST(RegionError, PerLabelMeans) {
  const auto s = segment_ood(trace_of({0, 5, 5, 0, 0}), 1.0, 1);
  const auto e = region_error({1, 2, 2, 1, 1}, s);
  EXPECT_DOUBLE_EQ(e.id_mean, 1.0);
  EXPECT_DOUBLE_EQ(e.ood_mean, 2.0);
  EXPECT_EQ(e.id_steps, 3);
  EXPECT_EQ(e.ood_steps, 2);
}

TEST(RegionError, RandomMatchesBruteForce) {
  rng::Stream r(12);
  std::vector<double> v(100), err(100);
  for (auto& x : v) x = r.uniform(0, 1);
  for (auto& x : err) x = r.uniform(0, 0.2);
  const auto s = segment_ood(trace_of(v), 0.5, 4);
  const auto labels = s.labels();
  double si = 0, so = 0;
  int ni = 0, no = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    if (labels[i] == RegionLabel::ood) {
      so += err[i];
      ++no;
    } else {
      si += err[i];
      ++ni;
    }
  }
  const auto e = region_error(err, s);
  EXPECT_NEAR(e.id_mean, si / ni, 1e-12);
  EXPECT_NEAR(e.ood_mean, so / no, 1e-12);
}

TEST(RegionError, EmptyLabelIsNan) {
  const auto s = segment_ood(trace_of({0, 0}), 1.0, 1);
  EXPECT_TRUE(std::isnan(region_error({1, 2}, s).ood_mean));
}

TEST(Export, CsvRows) {
  const auto t = trace_of({0, 2, 0});
  const auto s = segment_ood(t, 1.0, 1);
  EXPECT_EQ(segmentation_to_csv(t, s), "t,signal,label\n0,0,ID\n0.1,2,OOD\n0.2,0,ID\n");
}

}  // namespace
}  // namespace footcast
