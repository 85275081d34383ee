#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "footcast/predictor.hpp"
#include "footcast/rng.hpp"
#include "footcast/terrain.hpp"
#include "footcast/training.hpp"

namespace footcast::testing {

inline MainInput random_main_input(rng::Stream& s) {
  MainInput x;
  for (int i = 0; i < kMainInputSize; ++i) x.values(i) = s.uniform(-0.2, 0.2);
  return x;
}

inline UncertaintyInput random_uncertainty_input(rng::Stream& s) {
  UncertaintyInput u;
  for (int i = 0; i < kUncertaintyInputSize; ++i) u.values(i) = s.uniform(-0.5, 0.5);
  return u;
}

inline std::vector<TrainingSample> random_batch(int n, std::uint64_t seed) {
  rng::Stream s(seed);
  std::vector<TrainingSample> out(static_cast<std::size_t>(n));
  for (auto& t : out) {
    t.x = random_main_input(s);
    t.u = random_uncertainty_input(s);
    for (int i = 0; i < kOutputSize; ++i) t.y(i) = s.uniform(-0.3, 0.3);
  }
  return out;
}

inline HeightScan random_scan(std::uint64_t seed) {
  rng::Stream s(seed);
  HeightScan scan;
  for (auto& v : scan.values) v = s.uniform(-0.2, 0.2);
  return scan;
}

/// Field built from an analytic elevation function sampled at the nodes.
template <typename F>
HeightField field_from(int rows, int cols, double res, double ox, double oy, F&& f) {
  std::vector<double> z(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) z[static_cast<std::size_t>(r * cols + c)] = f(ox + c * res, oy + r * res);
  return HeightField(rows, cols, res, ox, oy, std::move(z));
}

}  // namespace footcast::testing
