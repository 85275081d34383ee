#include "footcast/ood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"

namespace footcast {

void SignalTrace::validate() const {
  if (times.size() != values.size()) throw StructuralError("signal trace times and values differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(times[i]))
      throw StructuralError("signal trace has a non-finite entry at index " + std::to_string(i));
    if (i > 0 && !(times[i] > times[i - 1]))
      throw StructuralError("signal trace times not strictly increasing at index " + std::to_string(i));
  }
}

std::vector<RegionLabel> OodSegmentation::labels() const {
  std::vector<RegionLabel> out;
  for (const auto& s : segments)
    for (int i = s.start; i <= s.end; ++i) out.push_back(s.label);
  return out;
}

int OodSegmentation::ood_count() const {
  return static_cast<int>(
      std::count_if(segments.begin(), segments.end(), [](const Segment& s) { return s.label == RegionLabel::ood; }));
}

std::array<double, 4> per_leg_uncertainty(const EpistemicPrediction& pred) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i)
    out[static_cast<std::size_t>(i)] = (pred.variance[3 * i] + pred.variance[3 * i + 1] + pred.variance[3 * i + 2]) / 3.0;
  return out;
}

double id_threshold(const std::vector<SignalTrace>& id_traces) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : id_traces) {
    for (double v : t.values) sum += v;
    n += t.values.size();
  }
  if (n == 0) throw InsufficientSamplesError("id_threshold needs at least one ID value");
  return sum / static_cast<double>(n);
}

OodSegmentation segment_ood(const SignalTrace& trace, double threshold, int k_transitions) {
  if (k_transitions < 0) throw ConfigError("K_transitions must be >= 0");
  trace.validate();
  const auto& v = trace.values;
  const int n = static_cast<int>(v.size());

  struct Run {
    int start, end;
    double mean;
  };
  std::vector<Run> runs;
  for (int i = 0; i < n;) {
    if (!(v[static_cast<std::size_t>(i)] > threshold)) {
      ++i;
      continue;
    }
    int j = i;
    double sum = 0.0;
    while (j < n && v[static_cast<std::size_t>(j)] > threshold) sum += v[static_cast<std::size_t>(j++)];
    runs.push_back({i, j - 1, sum / (j - i)});
    i = j;
  }
  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return runs[a].mean > runs[b].mean; });
  std::vector<bool> is_ood(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < order.size() && r < static_cast<std::size_t>(k_transitions); ++r)
    for (int i = runs[order[r]].start; i <= runs[order[r]].end; ++i) is_ood[static_cast<std::size_t>(i)] = true;

  OodSegmentation seg;
  seg.threshold = threshold;
  for (int i = 0; i < n;) {
    int j = i;
    double sum = 0.0;
    while (j < n && is_ood[static_cast<std::size_t>(j)] == is_ood[static_cast<std::size_t>(i)])
      sum += v[static_cast<std::size_t>(j++)];
    seg.segments.push_back({i, j - 1, sum / (j - i), is_ood[static_cast<std::size_t>(i)] ? RegionLabel::ood : RegionLabel::id});
    i = j;
  }
  return seg;
}

RegionErrors region_error(const std::vector<double>& errors, const OodSegmentation& seg) {
  const auto labels = seg.labels();
  if (labels.size() != errors.size()) throw StructuralError("error trace not aligned with segmentation");
  double id_sum = 0.0, ood_sum = 0.0;
  RegionErrors out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (labels[i] == RegionLabel::ood) {
      ood_sum += errors[i];
      ++out.ood_steps;
    } else {
      id_sum += errors[i];
      ++out.id_steps;
    }
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  out.id_mean = out.id_steps > 0 ? id_sum / out.id_steps : nan;
  out.ood_mean = out.ood_steps > 0 ? ood_sum / out.ood_steps : nan;
  return out;
}

std::string segmentation_to_csv(const SignalTrace& trace, const OodSegmentation& seg) {
  const auto labels = seg.labels();
  std::string out = "t,signal,label\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    out += io::format_double(trace.times[i]) + "," + io::format_double(trace.values[i]) + "," +
           (labels[i] == RegionLabel::ood ? "OOD" : "ID") + "\n";
  }
  return out;
}

}  // namespace footcast
