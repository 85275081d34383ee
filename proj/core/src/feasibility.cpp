#include "footcast/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"

namespace footcast {

void FeasibilityConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("feasibility eps must be > 0");
}

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

}  // namespace

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double stability_margin(const FootholdSet& feet_world, const Eigen::Vector2d& com) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& f : feet_world.feet) {
    if (!f.allFinite()) throw StructuralError("stability_margin got a non-finite foothold");
    pts.emplace_back(f.x(), f.y());
  }
  const auto hull = convex_hull(pts);
  if (hull.size() == 1) return -(com - hull[0]).norm();
  if (hull.size() == 2) return -segment_distance(com, hull[0], hull[1]);
  double dist = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    dist = std::min(dist, segment_distance(com, a, b));
    if (cross(a, b, com) < 0.0) inside = false;
  }
  return inside ? dist : -dist;
}

double margin_to_cost(double m, const FeasibilityConfig& cfg) {
  return m > 0.0 ? 1.0 / (m + cfg.eps) : std::abs(m) + 1.0;
}

FeasibilityRecord feasibility_record(double t, const FootholdSet& predicted_world, const FootholdSet& actual_world,
                                     const Eigen::Vector2d& com, const FeasibilityConfig& cfg) {
  if (predicted_world.frame != Frame::world || actual_world.frame != Frame::world)
    throw StructuralError("feasibility margins need world-frame footholds");
  FeasibilityRecord r;
  r.t = t;
  r.m_pred = stability_margin(predicted_world, com);
  r.m_actual = stability_margin(actual_world, com);
  r.c_pred = margin_to_cost(r.m_pred, cfg);
  r.c_actual = margin_to_cost(r.m_actual, cfg);
  r.e = std::abs(r.c_pred - r.c_actual);
  return r;
}

MeanStd feasibility_error(std::span<const FeasibilityRecord> records) {
  if (records.empty()) throw InsufficientSamplesError("feasibility_error needs at least one record");
  MeanStd out;
  for (const auto& r : records) out.mean += r.e;
  out.mean /= static_cast<double>(records.size());
  double sq = 0.0;
  for (const auto& r : records) sq += (r.e - out.mean) * (r.e - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(records.size()));
  return out;
}

std::string feasibility_to_csv(std::span<const FeasibilityRecord> records) {
  std::string out = "t,m_pred,m_actual,c_pred,c_actual,e_t\n";
  for (const auto& r : records) {
    out += io::format_double(r.t) + "," + io::format_double(r.m_pred) + "," + io::format_double(r.m_actual) + "," +
           io::format_double(r.c_pred) + "," + io::format_double(r.c_actual) + "," + io::format_double(r.e) + "\n";
  }
  return out;
}

}  // namespace footcast
