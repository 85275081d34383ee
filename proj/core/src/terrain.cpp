#include "footcast/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"
#include "footcast/rng.hpp"

namespace footcast {

HeightField::HeightField(int rows, int cols, double resolution, double origin_x, double origin_y,
                         std::vector<double> elevations)
    : rows_(rows),
      cols_(cols),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_y_(origin_y),
      elevations_(std::move(elevations)) {
  if (rows < 1 || cols < 1) throw ConfigError("height field needs at least 1x1 nodes");
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw ConfigError("height field resolution must be positive");
  if (elevations_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw ConfigError("height field has " + std::to_string(elevations_.size()) +
                      " values, expected rows*cols");
  for (double z : elevations_)
    if (!std::isfinite(z)) throw ConfigError("height field elevations must be finite");
}

HeightField::HeightField(int rows, int cols, double resolution, double origin_x, double origin_y)
    : HeightField(rows, cols, resolution, origin_x, origin_y,
                  std::vector<double>(static_cast<std::size_t>(std::max(rows, 0)) *
                                          static_cast<std::size_t>(std::max(cols, 0)),
                                      0.0)) {}

bool HeightField::contains(double x, double y) const noexcept {
  constexpr double tol = 1e-9;
  return x >= origin_x_ - tol && x <= max_x() + tol && y >= origin_y_ - tol && y <= max_y() + tol;
}

double HeightField::bilinear(double x, double y) const noexcept {
  const double fx = std::clamp((x - origin_x_) / resolution_, 0.0, static_cast<double>(cols_ - 1));
  const double fy = std::clamp((y - origin_y_) / resolution_, 0.0, static_cast<double>(rows_ - 1));
  const int c0 = std::min(static_cast<int>(fx), std::max(cols_ - 2, 0));
  const int r0 = std::min(static_cast<int>(fy), std::max(rows_ - 2, 0));
  const int c1 = std::min(c0 + 1, cols_ - 1);
  const int r1 = std::min(r0 + 1, rows_ - 1);
  const double tx = fx - c0;
  const double ty = fy - r0;
  const double z00 = at(r0, c0), z01 = at(r0, c1), z10 = at(r1, c0), z11 = at(r1, c1);
  return (1.0 - ty) * ((1.0 - tx) * z00 + tx * z01) + ty * ((1.0 - tx) * z10 + tx * z11);
}

double HeightField::elevation(double x, double y) const {
  if (!contains(x, y)) {
    std::ostringstream msg;
    msg << "query (" << x << ", " << y << ") outside field [" << origin_x_ << ", " << max_x()
        << "] x [" << origin_y_ << ", " << max_y() << "]";
    throw OutOfBoundsError(msg.str());
  }
  return bilinear(x, y);
}

double HeightField::elevation_clamped(double x, double y) const noexcept { return bilinear(x, y); }

double HeightField::slope(double x, double y, double spacing) const noexcept {
  const double dzdx = (bilinear(x + spacing, y) - bilinear(x - spacing, y)) / (2.0 * spacing);
  const double dzdy = (bilinear(x, y + spacing) - bilinear(x, y - spacing)) / (2.0 * spacing);
  return std::hypot(dzdx, dzdy);
}

// ---------------------------------------------------------------------------

std::string_view to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::flat: return "flat";
    case TerrainKind::wavy: return "wavy";
    case TerrainKind::stepped: return "stepped";
    case TerrainKind::spiked: return "spiked";
    case TerrainKind::ramp: return "ramp";
    case TerrainKind::mixed: return "mixed";
  }
  return "flat";
}

TerrainKind parse_terrain_kind(std::string_view name) {
  for (auto kind : {TerrainKind::flat, TerrainKind::wavy, TerrainKind::stepped, TerrainKind::spiked,
                    TerrainKind::ramp, TerrainKind::mixed})
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown terrain kind '" + std::string(name) + "'");
}

void TerrainSpec::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("terrain amplitude must be >= 0");
  if (!(feature_scale > 0.0)) throw ConfigError("terrain feature_scale must be > 0");
  if (!(resolution > 0.0)) throw ConfigError("terrain resolution must be > 0");
  if (!(extent_x >= 0.0) || !(extent_y >= 0.0)) throw ConfigError("terrain extent must be >= 0");
  if (kind == TerrainKind::mixed && !(tile_size > 0.0)) throw ConfigError("terrain tile_size must be > 0");
}

namespace {

using ElevationFn = std::function<double(double, double)>;

struct Region {
  double x0, y0, x1, y1;
};

ElevationFn wavy_fn(const TerrainSpec& spec) {
  struct Wave {
    double kx, ky, phase, weight;
  };
  rng::Stream s(rng::key(spec.seed, 0x7761));
  std::array<Wave, 3> waves{};
  double total = 0.0;
  for (auto& w : waves) {
    const double dir = s.uniform(0.0, std::numbers::pi);
    const double wavelength = spec.feature_scale * s.uniform(0.75, 1.25);
    const double k = 2.0 * std::numbers::pi / wavelength;
    w = {k * std::cos(dir), k * std::sin(dir), s.uniform(0.0, 2.0 * std::numbers::pi), s.uniform(0.5, 1.0)};
    total += w.weight;
  }
  const double amp = spec.amplitude;
  return [waves, total, amp](double x, double y) {
    double z = 0.0;
    for (const auto& w : waves) z += w.weight * std::sin(w.kx * x + w.ky * y + w.phase);
    return amp * z / total;
  };
}

ElevationFn stepped_fn(const TerrainSpec& spec) {
  const double side = spec.feature_scale;
  const double amp = spec.amplitude;
  const auto seed = spec.seed;
  const double ox = spec.origin_x, oy = spec.origin_y;
  return [=](double x, double y) {
    const auto ix = static_cast<std::int64_t>(std::floor((x - ox) / side));
    const auto iy = static_cast<std::int64_t>(std::floor((y - oy) / side));
    return amp * rng::uniform01(rng::key(seed, 0x5374, static_cast<std::uint64_t>(ix),
                                         static_cast<std::uint64_t>(iy)));
  };
}

ElevationFn spiked_fn(const TerrainSpec& spec, const Region& region) {
  struct Bump {
    double x, y, height;
  };
  const double area = (region.x1 - region.x0) * (region.y1 - region.y0);
  const int count = std::max(1, static_cast<int>(std::lround(area / (spec.feature_scale * spec.feature_scale))));
  rng::Stream s(rng::key(spec.seed, 0x5370));
  std::vector<Bump> bumps(static_cast<std::size_t>(count));
  for (auto& b : bumps)
    b = {s.uniform(region.x0, region.x1), s.uniform(region.y0, region.y1), spec.amplitude * s.uniform(0.5, 1.0)};
  const double sigma = spec.feature_scale / 5.0;
  const double cutoff2 = 25.0 * sigma * sigma;
  return [bumps = std::move(bumps), sigma, cutoff2](double x, double y) {
    double z = 0.0;
    for (const auto& b : bumps) {
      const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
      if (d2 < cutoff2) z = std::max(z, b.height * std::exp(-d2 / (2.0 * sigma * sigma)));
    }
    return z;
  };
}

ElevationFn ramp_fn(const TerrainSpec& spec, const Region& region) {
  const double length = region.x1 - region.x0;
  const double amp = spec.amplitude;
  const double x0 = region.x0;
  return [=](double x, double) {
    if (length <= 0.0) return 0.0;
    return amp * std::clamp((x - x0) / length, 0.0, 1.0);
  };
}

ElevationFn kind_fn(const TerrainSpec& spec, const Region& region) {
  switch (spec.kind) {
    case TerrainKind::flat: return [](double, double) { return 0.0; };
    case TerrainKind::wavy: return wavy_fn(spec);
    case TerrainKind::stepped: return stepped_fn(spec);
    case TerrainKind::spiked: return spiked_fn(spec, region);
    case TerrainKind::ramp: return ramp_fn(spec, region);
    case TerrainKind::mixed: break;
  }
  throw ConfigError("mixed terrain cannot be nested");
}

std::vector<std::vector<TerrainKind>> parse_layout(std::string_view layout) {
  std::vector<std::vector<TerrainKind>> rows;
  for (auto row : io::split(layout, ';')) {
    std::vector<TerrainKind> kinds;
    for (auto cell : io::split(row, ',')) {
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      const auto kind = parse_terrain_kind(cell);
      if (kind == TerrainKind::mixed) throw ConfigError("mixed terrain cannot be nested");
      kinds.push_back(kind);
    }
    rows.push_back(std::move(kinds));
  }
  return rows;
}

}  // namespace

HeightField generate_terrain(const TerrainSpec& spec) {
  spec.validate();
  const int cols = static_cast<int>(std::lround(spec.extent_x / spec.resolution)) + 1;
  const int rows = static_cast<int>(std::lround(spec.extent_y / spec.resolution)) + 1;
  HeightField field(rows, cols, spec.resolution, spec.origin_x, spec.origin_y);
  const Region full{spec.origin_x, spec.origin_y, field.max_x(), field.max_y()};

  if (spec.kind != TerrainKind::mixed) {
    const auto fn = kind_fn(spec, full);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        field.at(r, c) = fn(spec.origin_x + c * spec.resolution, spec.origin_y + r * spec.resolution);
    return field;
  }

  const int tiles_x = std::max(1, static_cast<int>(std::ceil(spec.extent_x / spec.tile_size - 1e-9)));
  const int tiles_y = std::max(1, static_cast<int>(std::ceil(spec.extent_y / spec.tile_size - 1e-9)));
  std::vector<std::vector<TerrainKind>> layout;
  if (!spec.tile_layout.empty()) {
    layout = parse_layout(spec.tile_layout);
    if (static_cast<int>(layout.size()) != tiles_y)
      throw ConfigError("tile_layout has " + std::to_string(layout.size()) + " rows, extent needs " +
                        std::to_string(tiles_y));
    for (const auto& row : layout)
      if (static_cast<int>(row.size()) != tiles_x)
        throw ConfigError("tile_layout row has " + std::to_string(row.size()) + " tiles, extent needs " +
                          std::to_string(tiles_x));
  } else {
    constexpr std::array<TerrainKind, 5> pool{TerrainKind::flat, TerrainKind::wavy, TerrainKind::stepped,
                                              TerrainKind::spiked, TerrainKind::ramp};
    layout.assign(static_cast<std::size_t>(tiles_y), std::vector<TerrainKind>(static_cast<std::size_t>(tiles_x)));
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx)
        layout[ty][tx] = pool[rng::splitmix64(rng::key(spec.seed, 0x4d69, tx, ty)) % pool.size()];
  }

  std::vector<ElevationFn> fns;
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      TerrainSpec sub = spec;
      sub.kind = layout[ty][tx];
      sub.seed = rng::key(spec.seed, 0x54696c65, tx, ty);
      sub.origin_x = spec.origin_x + tx * spec.tile_size;
      sub.origin_y = spec.origin_y + ty * spec.tile_size;
      const Region region{sub.origin_x, sub.origin_y, std::min(sub.origin_x + spec.tile_size, full.x1),
                          std::min(sub.origin_y + spec.tile_size, full.y1)};
      fns.push_back(kind_fn(sub, region));
    }
  }
  for (int r = 0; r < rows; ++r) {
    const double y = spec.origin_y + r * spec.resolution;
    const int ty = std::clamp(static_cast<int>(std::floor((y - spec.origin_y) / spec.tile_size)), 0, tiles_y - 1);
    for (int c = 0; c < cols; ++c) {
      const double x = spec.origin_x + c * spec.resolution;
      const int tx = std::clamp(static_cast<int>(std::floor((x - spec.origin_x) / spec.tile_size)), 0, tiles_x - 1);
      field.at(r, c) = fns[static_cast<std::size_t>(ty * tiles_x + tx)](x, y);
    }
  }
  return field;
}

std::string grid_to_text(int rows, int cols, double resolution, double origin_x, double origin_y,
                         std::span<const double> values) {
  std::string out = std::to_string(rows) + " " + std::to_string(cols) + " " + io::format_double(resolution) +
                    " " + io::format_double(origin_x) + " " + io::format_double(origin_y) + "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out.push_back(' ');
      out += io::format_double(values[static_cast<std::size_t>(r * cols + c)]);
    }
    out.push_back('\n');
  }
  return out;
}

void save_height_field(const HeightField& field, const std::filesystem::path& path) {
  io::write_file(path, grid_to_text(field.rows(), field.cols(), field.resolution(), field.origin_x(),
                                    field.origin_y(), field.elevations()));
}

HeightField load_height_field(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  int rows = 0, cols = 0;
  std::string res, ox, oy;
  if (!(in >> rows >> cols >> res >> ox >> oy)) throw LoadError("height field header malformed");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  std::string token;
  while (in >> token) values.push_back(io::parse_double(token, "elevation"));
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw LoadError("height field truncated: expected " + std::to_string(rows * cols) + " elevations");
  return HeightField(rows, cols, io::parse_double(res, "resolution"), io::parse_double(ox, "origin_x"),
                     io::parse_double(oy, "origin_y"), std::move(values));
}

// ---------------------------------------------------------------------------

Eigen::Vector2d scan_point_base(int row, int col) {
  return {kScanForwardOffset + row * kScanSpacing, -0.8 + col * kScanSpacing};
}

HeightScan extract_height_scan(const HeightField& field, const Pose2& base) {
  const double c = std::cos(base.yaw), s = std::sin(base.yaw);
  auto to_world = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(base.x + c * p.x() - s * p.y(), base.y + s * p.x() + c * p.y());
  };
  for (auto [r, col] : {std::pair{0, 0}, {0, kScanCols - 1}, {kScanRows - 1, 0}, {kScanRows - 1, kScanCols - 1}}) {
    const Eigen::Vector2d w = to_world(scan_point_base(r, col));
    if (!field.contains(w.x(), w.y())) {
      std::ostringstream msg;
      msg << "scan window corner (" << w.x() << ", " << w.y() << ") outside field";
      throw OutOfBoundsError(msg.str());
    }
  }
  const double ground = field.elevation(base.x, base.y);
  HeightScan scan;
  for (int r = 0; r < kScanRows; ++r) {
    for (int col = 0; col < kScanCols; ++col) {
      const Eigen::Vector2d w = to_world(scan_point_base(r, col));
      scan.at(r, col) = field.elevation(w.x(), w.y()) - ground;
    }
  }
  return scan;
}

PooledDescriptor pool_grid(const HeightScan& scan) {
  constexpr std::array<int, 5> col_edges{0, 5, 9, 13, 17};
  PooledDescriptor out;
  for (int rg = 0; rg < 3; ++rg) {
    for (int cg = 0; cg < 4; ++cg) {
      double sum = 0.0;
      int n = 0;
      for (int r = 2 * rg; r < 2 * rg + 2; ++r)
        for (int c = col_edges[cg]; c < col_edges[cg + 1]; ++c, ++n) sum += scan.at(r, c);
      out.values[static_cast<std::size_t>(rg * 4 + cg)] = sum / n;
    }
  }
  return out;
}

HeightScan pointcloud_to_heightscan(std::span<const Eigen::Vector3d> points, const ScanWindow& window) {
  if (points.empty()) throw EmptyScanError("point cloud is empty");
  const double cell_x = window.length_x / kScanRows;
  const double cell_y = window.width_y / kScanCols;
  std::array<double, kScanSize> sum{};
  std::array<int, kScanSize> count{};
  for (const auto& p : points) {
    const double u = p.x() / cell_x;
    const double v = (p.y() + 0.5 * window.width_y) / cell_y;
    if (u < 0.0 || v < 0.0 || p.x() > window.length_x || p.y() > 0.5 * window.width_y) continue;
    const int r = std::min(static_cast<int>(u), kScanRows - 1);
    const int c = std::min(static_cast<int>(v), kScanCols - 1);
    sum[static_cast<std::size_t>(r * kScanCols + c)] += p.z();
    ++count[static_cast<std::size_t>(r * kScanCols + c)];
  }
  if (std::all_of(count.begin(), count.end(), [](int n) { return n == 0; }))
    throw EmptyScanError("no points inside the scan window");

  HeightScan scan;
  for (int i = 0; i < kScanSize; ++i)
    if (count[i]) scan.values[i] = sum[i] / count[i];
  for (int i = 0; i < kScanSize; ++i) {
    if (count[i]) continue;
    const int r = i / kScanCols, c = i % kScanCols;
    int best = -1, best_d2 = 0;
    for (int j = 0; j < kScanSize; ++j) {
      if (!count[j]) continue;
      const int dr = j / kScanCols - r, dc = j % kScanCols - c;
      const int d2 = dr * dr + dc * dc;
      if (best < 0 || d2 < best_d2) best = j, best_d2 = d2;
    }
    scan.values[i] = scan.values[best];
  }
  return scan;
}

double heightscan_variance(const HeightScan& scan) {
  double mean = 0.0;
  for (double v : scan.values) mean += v;
  mean /= kScanSize;
  double acc = 0.0;
  for (double v : scan.values) acc += (v - mean) * (v - mean);
  return acc / kScanSize;
}

}  // namespace footcast
