#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace footcast {

/// World terrain: elevation samples on a regular grid of nodes.
///
/// Node (row, col) sits at (origin_x + col * resolution, origin_y + row * resolution);
/// rows run along +y, columns along +x, storage is row-major. Off-node queries are
/// bilinear, and the covered extent is the closed rectangle spanned by the nodes.
class HeightField {
 public:
  HeightField(int rows, int cols, double resolution, double origin_x, double origin_y,
              std::vector<double> elevations);
  HeightField(int rows, int cols, double resolution, double origin_x = 0.0, double origin_y = 0.0);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double resolution() const noexcept { return resolution_; }
  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }
  double max_x() const noexcept { return origin_x_ + (cols_ - 1) * resolution_; }
  double max_y() const noexcept { return origin_y_ + (rows_ - 1) * resolution_; }

  double at(int row, int col) const { return elevations_[index(row, col)]; }
  double& at(int row, int col) { return elevations_[index(row, col)]; }
  std::span<const double> elevations() const noexcept { return elevations_; }

  bool contains(double x, double y) const noexcept;

  /// Bilinear elevation; throws OutOfBoundsError outside the node extent.
  double elevation(double x, double y) const;

  /// Bilinear elevation with the query clamped into the extent.
  double elevation_clamped(double x, double y) const noexcept;

  /// Gradient magnitude by central differences with the given spacing (clamped queries).
  double slope(double x, double y, double spacing = 0.05) const noexcept;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(col);
  }
  double bilinear(double x, double y) const noexcept;

  int rows_;
  int cols_;
  double resolution_;
  double origin_x_;
  double origin_y_;
  std::vector<double> elevations_;
};

enum class TerrainKind { flat, wavy, stepped, spiked, ramp, mixed };

std::string_view to_string(TerrainKind kind);
TerrainKind parse_terrain_kind(std::string_view name);

struct TerrainSpec {
  TerrainKind kind = TerrainKind::flat;
  std::uint64_t seed = 0;
  double amplitude = 0.1;      // m
  double feature_scale = 0.5;  // m
  double extent_x = 10.0;      // m
  double extent_y = 10.0;      // m
  double resolution = 0.05;    // m/node
  double origin_x = 0.0;
  double origin_y = 0.0;
  // Mixed terrain only: tile side and an optional explicit row-major layout of
  // tile kinds (rows separated by ';', columns by ','). Empty layout draws kinds
  // from the seed.
  double tile_size = 2.0;
  std::string tile_layout;

  void validate() const;
};

HeightField generate_terrain(const TerrainSpec& spec);

/// Plain-text grid: "rows cols resolution origin_x origin_y" then one line per row.
std::string grid_to_text(int rows, int cols, double resolution, double origin_x, double origin_y,
                         std::span<const double> values);
void save_height_field(const HeightField& field, const std::filesystem::path& path);
HeightField load_height_field(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Frontal height scan

inline constexpr int kScanRows = 6;
inline constexpr int kScanCols = 17;
inline constexpr int kScanSize = kScanRows * kScanCols;
inline constexpr double kScanSpacing = 0.1;
inline constexpr double kScanForwardOffset = 0.1;
inline constexpr int kPooledSize = 12;

/// 6x17 elevations relative to the ground under the base, row-major. Row r lies
/// kScanForwardOffset + r * 0.1 m ahead of the base; column c at y = -0.8 + c * 0.1 m.
struct HeightScan {
  std::array<double, kScanSize> values{};

  double at(int row, int col) const { return values[static_cast<std::size_t>(row * kScanCols + col)]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row * kScanCols + col)]; }
};

struct PooledDescriptor {
  std::array<double, kPooledSize> values{};
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Base-frame location of scan sample (row, col).
Eigen::Vector2d scan_point_base(int row, int col);

HeightScan extract_height_scan(const HeightField& field, const Pose2& base);

/// Row pairs x column groups {5,4,4,4}; output index = row_group * 4 + col_group.
PooledDescriptor pool_grid(const HeightScan& scan);

struct ScanWindow {
  double length_x = 0.6;  // S_x
  double width_y = 1.6;   // S_y
};

/// Bins base-frame points into the 6x17 window x in [0, S_x], y in [-S_y/2, S_y/2];
/// cells average their points' z, empty cells copy the nearest non-empty cell.
HeightScan pointcloud_to_heightscan(std::span<const Eigen::Vector3d> points,
                                    const ScanWindow& window = {});

/// Population variance of the 102 scan values.
double heightscan_variance(const HeightScan& scan);

}  // namespace footcast
