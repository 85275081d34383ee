#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "footcast/gait.hpp"

namespace footcast {

enum class MarginMethod { support_polygon };

struct FeasibilityConfig {
  double eps = 0.01;
  MarginMethod margin_method = MarginMethod::support_polygon;

  void validate() const;
};

/// Counter-clockwise convex hull (monotone chain); collinear points dropped.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

/// Signed distance from `com` to the boundary of the support polygon of the
/// feet's xy projections: positive inside, negative outside. Degenerate hulls
/// (segment or point) give minus the distance to them.
double stability_margin(const FootholdSet& feet_world, const Eigen::Vector2d& com);

/// m > 0: 1 / (m + eps); m <= 0: |m| + 1.
double margin_to_cost(double m, const FeasibilityConfig& cfg);

struct FeasibilityRecord {
  double t = 0.0;
  double m_pred = 0.0;
  double m_actual = 0.0;
  double c_pred = 0.0;
  double c_actual = 0.0;
  double e = 0.0;
};

FeasibilityRecord feasibility_record(double t, const FootholdSet& predicted_world, const FootholdSet& actual_world,
                                     const Eigen::Vector2d& com, const FeasibilityConfig& cfg);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd feasibility_error(std::span<const FeasibilityRecord> records);

std::string feasibility_to_csv(std::span<const FeasibilityRecord> records);

}  // namespace footcast
