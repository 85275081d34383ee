#include "footcast/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace footcast::plot {

const std::vector<std::string> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

namespace {

constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string header(const Axes& axes) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\" "
                  "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + axes.title + "</text>\n";
  s += "<text x=\"" + fmt("%.0f", kLeft + (kW - kLeft - kRight) / 2) + "\" y=\"390\" text-anchor=\"middle\">" +
       axes.x_label + "</text>\n";
  s += "<text x=\"15\" y=\"" + fmt("%.0f", kTop + (kH - kTop - kBottom) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " + fmt("%.0f", kTop + (kH - kTop - kBottom) / 2) +
       ")\">" + axes.y_label + "</text>\n";
  return s;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string line_chart(const std::vector<Series>& series, const Axes& axes) {
  auto ty = [&](double v) { return axes.log_y ? std::log10(std::max(v, 1e-300)) : v; };
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(ty(v));
  }
  rx.finish();
  ry.finish();
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string s = header(axes);
  s += "<rect x=\"70\" y=\"40\" width=\"" + fmt("%.0f", pw) + "\" height=\"" + fmt("%.0f", ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = rx.lo + (rx.hi - rx.lo) * i / 4, yv = ry.lo + (ry.hi - ry.lo) * i / 4;
    s += "<text x=\"" + fmt("%.1f", px(xv)) + "\" y=\"" + fmt("%.0f", kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         fmt("%.3g", xv) + "</text>\n";
    const double ypix = kTop + ph - (yv - ry.lo) / (ry.hi - ry.lo) * ph;
    s += "<text x=\"64\" y=\"" + fmt("%.1f", ypix + 4) + "\" text-anchor=\"end\">" +
         fmt("%.3g", axes.log_y ? std::pow(10.0, yv) : yv) + "</text>\n";
  }
  int legend = 0;
  for (const auto& ser : series) {
    if (ser.points) {
      for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
        if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
        s += "<circle cx=\"" + fmt("%.1f", px(ser.x[i])) + "\" cy=\"" + fmt("%.1f", py(ser.y[i])) +
             "\" r=\"2\" fill=\"" + ser.color + "\" fill-opacity=\"0.6\"/>\n";
      }
    } else {
      s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + ser.color + "\" points=\"";
      for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
        if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
        s += fmt("%.1f", px(ser.x[i])) + "," + fmt("%.1f", py(ser.y[i])) + " ";
      }
      s += "\"/>\n";
    }
    const double ly = kTop + 10 + 18 * legend++;
    s += "<rect x=\"" + fmt("%.0f", kW - kRight + 10) + "\" y=\"" + fmt("%.0f", ly - 8) +
         "\" width=\"10\" height=\"10\" fill=\"" + ser.color + "\"/>\n";
    s += "<text x=\"" + fmt("%.0f", kW - kRight + 25) + "\" y=\"" + fmt("%.0f", ly + 1) + "\">" + ser.label +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string bar_chart(const std::vector<std::string>& categories, const std::vector<Bars>& groups, const Axes& axes) {
  Range ry;
  ry.add(0.0);
  for (const auto& g : groups)
    for (double v : g.values) ry.add(v);
  ry.finish();
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto py = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };
  std::string s = header(axes);
  s += "<rect x=\"70\" y=\"40\" width=\"" + fmt("%.0f", pw) + "\" height=\"" + fmt("%.0f", ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ry.lo + (ry.hi - ry.lo) * i / 4;
    s += "<text x=\"64\" y=\"" + fmt("%.1f", py(yv) + 4) + "\" text-anchor=\"end\">" + fmt("%.3g", yv) + "</text>\n";
  }
  const double slot = pw / std::max<std::size_t>(1, categories.size());
  const double bar = slot * 0.8 / std::max<std::size_t>(1, groups.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x0 = kLeft + slot * c + slot * 0.1;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (c >= groups[g].values.size() || !std::isfinite(groups[g].values[c])) continue;
      const double v = groups[g].values[c];
      const double top = std::min(py(v), py(0.0)), h = std::abs(py(v) - py(0.0));
      s += "<rect x=\"" + fmt("%.1f", x0 + bar * g) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" +
           fmt("%.1f", bar) + "\" height=\"" + fmt("%.1f", h) + "\" fill=\"" + groups[g].color + "\"/>\n";
    }
    if (categories.size() <= 20 || c % (categories.size() / 10) == 0)
      s += "<text x=\"" + fmt("%.1f", x0 + slot * 0.4) + "\" y=\"" + fmt("%.0f", kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + categories[c] + "</text>\n";
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double ly = kTop + 10 + 18 * g;
    s += "<rect x=\"" + fmt("%.0f", kW - kRight + 10) + "\" y=\"" + fmt("%.0f", ly - 8) +
         "\" width=\"10\" height=\"10\" fill=\"" + groups[g].color + "\"/>\n";
    s += "<text x=\"" + fmt("%.0f", kW - kRight + 25) + "\" y=\"" + fmt("%.0f", ly + 1) + "\">" + groups[g].label +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace footcast::plot
