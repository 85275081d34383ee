#pragma once

#include <array>
#include <string>
#include <vector>

#include "footcast/predictor.hpp"

namespace footcast {

enum class SignalKind { proposed, terrain_variance };

struct SignalTrace {
  std::vector<double> times;
  std::vector<double> values;
  SignalKind kind = SignalKind::proposed;

  /// Throws StructuralError on non-increasing times, size mismatch or non-finite values.
  void validate() const;
};

enum class RegionLabel { id, ood };

struct Segment {
  int start = 0;  // inclusive
  int end = 0;    // inclusive
  double mean_signal = 0.0;
  RegionLabel label = RegionLabel::id;
};

struct OodSegmentation {
  double threshold = 0.0;
  std::vector<Segment> segments;

  /// Per-step label, expanded from the segments.
  std::vector<RegionLabel> labels() const;
  int ood_count() const;
};

/// Mean of leg i's three coordinate variances.
std::array<double, 4> per_leg_uncertainty(const EpistemicPrediction& pred);

/// Mean over every value of every ID trace.
double id_threshold(const std::vector<SignalTrace>& id_traces);

/// Runs strictly above the threshold are candidates; the top `k_transitions`
/// by mean (earlier start wins ties) become OOD and everything else is ID.
OodSegmentation segment_ood(const SignalTrace& trace, double threshold, int k_transitions);

struct RegionErrors {
  double id_mean = 0.0;
  double ood_mean = 0.0;
  int id_steps = 0;
  int ood_steps = 0;
};

/// Per-label mean error; a label with no steps reports NaN.
RegionErrors region_error(const std::vector<double>& errors, const OodSegmentation& seg);

/// "t,signal,label" rows.
std::string segmentation_to_csv(const SignalTrace& trace, const OodSegmentation& seg);

}  // namespace footcast
