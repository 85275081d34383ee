#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "footcast/gait.hpp"
#include "footcast/terrain.hpp"

namespace footcast {

inline constexpr double kLethalCost = 100.0;

/// Node grid, same convention as HeightField: node (row, col) sits at
/// (origin_x + col * resolution, origin_y + row * resolution).
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double resolution = 0.1;
  double origin_x = 0.0;
  double origin_y = 0.0;

  double x(int col) const noexcept { return origin_x + col * resolution; }
  double y(int row) const noexcept { return origin_y + row * resolution; }
  void validate() const;
};

/// Grid spanning the extent of `field` at the given resolution.
GridSpec grid_covering(const HeightField& field, double resolution = 0.1);

class Costmap {
 public:
  explicit Costmap(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  double at(int row, int col) const { return costs_[index(row, col)]; }
  double& at(int row, int col) { return costs_[index(row, col)]; }
  std::span<const double> costs() const noexcept { return costs_; }

  /// Bilinear sample; points outside the grid extent cost kLethalCost.
  double sample(double x, double y) const noexcept;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(grid_.cols) + static_cast<std::size_t>(col);
  }
  GridSpec grid_;
  std::vector<double> costs_;
};

struct CostmapConfig {
  double alpha = 2000.0;                     // cost per m^2 of leg variance
  double blob_radius = 0.2;                  // m; blob sigma = blob_radius / 2
  double obstacle_height_threshold = 0.15;   // m above the local median
  double obstacle_neighborhood = 0.5;        // m, side of the median window
  double roughness_scale = 2.0e4;            // cost per m^2 of elevation variance

  void validate() const;
};

struct FootPrediction {
  FootholdSet feet;                 // world frame
  std::array<double, 4> leg_variance{};
};

Costmap uncertainty_costmap(std::span<const FootPrediction> predictions, const CostmapConfig& cfg,
                            const GridSpec& grid);
Costmap obstacle_costmap(const HeightField& field, const CostmapConfig& cfg, const GridSpec& grid);
Costmap roughness_costmap(const HeightField& field, const CostmapConfig& cfg, const GridSpec& grid);

void save_costmap(const Costmap& map, const std::filesystem::path& path);

struct SvgPath {
  std::vector<Eigen::Vector2d> points;
  std::string color = "#1f77b4";
};

/// Heatmap of the costs (white = 0, dark red = 100) with optional path overlays.
std::string costmap_svg(const Costmap& map, std::span<const SvgPath> paths = {}, const std::string& title = "");

}  // namespace footcast
