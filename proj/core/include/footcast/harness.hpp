#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "footcast/config.hpp"
#include "footcast/feasibility.hpp"
#include "footcast/ood.hpp"
#include "footcast/planner.hpp"
#include "footcast/predictor.hpp"
#include "footcast/training.hpp"

namespace footcast::harness {

/// File locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path seed_dir(const std::string& stage, std::uint64_t seed) const;
  std::filesystem::path id_dataset(std::uint64_t seed) const;
  std::filesystem::path ood_dataset(std::uint64_t seed, const std::string& terrain, int run) const;
  std::filesystem::path model(std::uint64_t seed, const std::string& variant) const;
  std::filesystem::path loss_curve(std::uint64_t seed, const std::string& variant) const;
};

inline constexpr const char* kFullModel = "full";
inline constexpr const char* kTerrainOnlyModel = "terrain_only";

/// Test terrain names evaluated by eval-ood: the configured kinds plus a flat
/// sanity terrain driven at the ID command.
std::vector<std::string> test_terrain_names(const ExperimentConfig& cfg);
HeightField test_field(const ExperimentConfig& cfg, const std::string& name);
HeightField plan_field(const ExperimentConfig& cfg);

Dataset collect_id(const ExperimentConfig& cfg, std::uint64_t seed);
Dataset collect_ood(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& terrain, int run);

void cmd_collect(const ExperimentConfig& cfg, std::uint64_t seed);
void cmd_train(const ExperimentConfig& cfg, std::uint64_t seed);

/// Per-step signals of one evaluated rollout.
struct EvaluatedRun {
  std::vector<double> times;
  std::vector<double> s_bar;
  std::vector<double> terrain_variance;
  std::vector<double> error;
};

EvaluatedRun evaluate_run(const Ensemble& ensemble, const Dataset& data, int samples_per_member, double dt,
                          std::uint64_t seed);

struct OodRow {
  std::string terrain;
  int run = 0;
  std::string method;  // proposed | baseline
  double threshold = 0.0;
  int k = 0;
  int ood_segments = 0;
  RegionErrors errors;
  double gap = 0.0;  // OOD error - ID error; NaN when a label is empty
};

std::vector<OodRow> cmd_eval_ood(const ExperimentConfig& cfg, std::uint64_t seed);

struct CorrRow {
  std::string model;
  int n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double rho = 0.0;
};

std::vector<CorrRow> cmd_eval_correlation(const ExperimentConfig& cfg, std::uint64_t seed);

struct PlanRun {
  Formulation formulation = Formulation::uncertainty;
  int run = 0;
  MeanStd feasibility;
  double progress = 0.0;
  bool reached_goal = false;
  int steps = 0;
  std::string termination;
};

struct PlanSummaryRow {
  Formulation formulation = Formulation::uncertainty;
  double grand_mean_feasibility = 0.0;  // over the first runs_table runs
  double median_progress = 0.0;         // over the first runs_progress runs
  double q1_progress = 0.0;
  double q3_progress = 0.0;
};

struct PlanOutcome {
  std::vector<PlanRun> runs;
  std::vector<PlanSummaryRow> summary;
};

PlanOutcome cmd_plan(const ExperimentConfig& cfg, std::uint64_t seed, std::optional<Formulation> only = std::nullopt);

/// Renders SVG figures and a markdown index from previous command outputs.
void cmd_report(const std::filesystem::path& out_dir);

/// Linear-interpolated quantile (q in [0, 1]) of unsorted data.
double quantile(std::vector<double> values, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace footcast::harness
