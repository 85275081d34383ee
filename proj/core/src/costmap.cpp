#include "footcast/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"

namespace footcast {

void GridSpec::validate() const {
  if (rows < 2 || cols < 2) throw ConfigError("costmap grid needs at least 2x2 nodes");
  if (!(resolution > 0.0)) throw ConfigError("costmap resolution must be > 0");
}

GridSpec grid_covering(const HeightField& field, double resolution) {
  GridSpec g;
  g.resolution = resolution;
  g.origin_x = field.origin_x();
  g.origin_y = field.origin_y();
  g.cols = static_cast<int>(std::floor((field.max_x() - field.origin_x()) / resolution + 1e-9)) + 1;
  g.rows = static_cast<int>(std::floor((field.max_y() - field.origin_y()) / resolution + 1e-9)) + 1;
  g.validate();
  return g;
}

Costmap::Costmap(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  costs_.assign(static_cast<std::size_t>(grid_.rows) * static_cast<std::size_t>(grid_.cols), 0.0);
}

double Costmap::sample(double x, double y) const noexcept {
  const double fx = (x - grid_.origin_x) / grid_.resolution;
  const double fy = (y - grid_.origin_y) / grid_.resolution;
  if (!(fx >= -1e-9 && fy >= -1e-9 && fx <= grid_.cols - 1 + 1e-9 && fy <= grid_.rows - 1 + 1e-9))
    return kLethalCost;
  const int c0 = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_.cols - 2);
  const int r0 = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_.rows - 2);
  const double tx = std::clamp(fx - c0, 0.0, 1.0), ty = std::clamp(fy - r0, 0.0, 1.0);
  const double a = at(r0, c0), b = at(r0, c0 + 1), c = at(r0 + 1, c0), d = at(r0 + 1, c0 + 1);
  return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
}

void CostmapConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("costmap alpha must be > 0");
  if (!(blob_radius > 0.0)) throw ConfigError("costmap blob_radius must be > 0");
  if (!(obstacle_height_threshold >= 0.0)) throw ConfigError("obstacle_height_threshold must be >= 0");
  if (!(obstacle_neighborhood > 0.0)) throw ConfigError("obstacle_neighborhood must be > 0");
  if (!(roughness_scale >= 0.0)) throw ConfigError("roughness_scale must be >= 0");
}

Costmap uncertainty_costmap(std::span<const FootPrediction> predictions, const CostmapConfig& cfg,
                            const GridSpec& grid) {
  cfg.validate();
  Costmap map(grid);
  const double sigma = cfg.blob_radius / 2.0;
  const double reach = 8.0 * sigma;  // exp(-32) is below any reported precision
  for (const auto& p : predictions) {
    for (std::size_t i = 0; i < 4; ++i) {
      const double peak = std::min(kLethalCost, cfg.alpha * p.leg_variance[i]);
      if (!(peak > 0.0)) continue;
      const double fx = p.feet.feet[i].x(), fy = p.feet.feet[i].y();
      const int c_lo = std::max(0, static_cast<int>(std::ceil((fx - reach - grid.origin_x) / grid.resolution)));
      const int c_hi = std::min(grid.cols - 1, static_cast<int>(std::floor((fx + reach - grid.origin_x) / grid.resolution)));
      const int r_lo = std::max(0, static_cast<int>(std::ceil((fy - reach - grid.origin_y) / grid.resolution)));
      const int r_hi = std::min(grid.rows - 1, static_cast<int>(std::floor((fy + reach - grid.origin_y) / grid.resolution)));
      for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
          const double dx = grid.x(c) - fx, dy = grid.y(r) - fy;
          const double v = peak * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
          double& cell = map.at(r, c);
          if (v > cell) cell = v;
        }
      }
    }
  }
  return map;
}

namespace {

// Field nodes inside the axis-aligned square of side `side` centred on (x, y).
template <typename F>
void for_nodes_in_window(const HeightField& field, double x, double y, double side, F&& f) {
  const double h = side / 2.0, res = field.resolution();
  const int c_lo = std::max(0, static_cast<int>(std::ceil((x - h - field.origin_x()) / res - 1e-9)));
  const int c_hi = std::min(field.cols() - 1, static_cast<int>(std::floor((x + h - field.origin_x()) / res + 1e-9)));
  const int r_lo = std::max(0, static_cast<int>(std::ceil((y - h - field.origin_y()) / res - 1e-9)));
  const int r_hi = std::min(field.rows() - 1, static_cast<int>(std::floor((y + h - field.origin_y()) / res + 1e-9)));
  for (int r = r_lo; r <= r_hi; ++r)
    for (int c = c_lo; c <= c_hi; ++c) f(field.at(r, c));
}

}  // namespace

Costmap obstacle_costmap(const HeightField& field, const CostmapConfig& cfg, const GridSpec& grid) {
  cfg.validate();
  Costmap map(grid);
  std::vector<double> window;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double x = grid.x(c), y = grid.y(r);
      window.clear();
      for_nodes_in_window(field, x, y, cfg.obstacle_neighborhood, [&](double z) { window.push_back(z); });
      if (window.empty()) continue;
      const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
      std::nth_element(window.begin(), mid, window.end());
      double median = *mid;
      if (window.size() % 2 == 0) median = 0.5 * (median + *std::max_element(window.begin(), mid));
      if (field.elevation_clamped(x, y) - median > cfg.obstacle_height_threshold) map.at(r, c) = kLethalCost;
    }
  }
  return map;
}

Costmap roughness_costmap(const HeightField& field, const CostmapConfig& cfg, const GridSpec& grid) {
  cfg.validate();
  Costmap map(grid);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double sum = 0.0, sq = 0.0;
      int n = 0;
      // shifted by the centre value to keep the one-pass variance well conditioned
      const double ref = field.elevation_clamped(grid.x(c), grid.y(r));
      for_nodes_in_window(field, grid.x(c), grid.y(r), 2.0 * cfg.blob_radius, [&](double z) {
        sum += z - ref;
        sq += (z - ref) * (z - ref);
        ++n;
      });
      if (n == 0) continue;
      const double mean = sum / n;
      const double var = std::max(0.0, sq / n - mean * mean);
      map.at(r, c) = std::min(kLethalCost, cfg.roughness_scale * var);
    }
  }
  return map;
}

void save_costmap(const Costmap& map, const std::filesystem::path& path) {
  const auto& g = map.grid();
  io::write_file(path, grid_to_text(g.rows, g.cols, g.resolution, g.origin_x, g.origin_y, map.costs()));
}

std::string costmap_svg(const Costmap& map, std::span<const SvgPath> paths, const std::string& title) {
  const auto& g = map.grid();
  const double px = 6.0;  // pixels per cell
  const double w = g.cols * px, h = g.rows * px;
  const int top = title.empty() ? 0 : 20;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                w, h + top, w, h + top);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) out += "<text x=\"4\" y=\"15\" font-family=\"sans-serif\" font-size=\"13\">" + title + "</text>\n";
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const double v = std::clamp(map.at(r, c) / kLethalCost, 0.0, 1.0);
      if (v <= 0.0) continue;
      const int red = static_cast<int>(255 - 105 * v), gb = static_cast<int>(255 * (1.0 - v));
      // y axis points up in the world, down in SVG
      std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"rgb(%d,%d,%d)\"/>\n",
                    c * px, top + h - (r + 1) * px, px, px, red, gb, gb);
      out += buf;
    }
  }
  for (const auto& p : paths) {
    if (p.points.empty()) continue;
    out += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + p.color + "\" points=\"";
    for (const auto& q : p.points) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", ((q.x() - g.origin_x) / g.resolution + 0.5) * px,
                    top + h - ((q.y() - g.origin_y) / g.resolution + 0.5) * px);
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace footcast
