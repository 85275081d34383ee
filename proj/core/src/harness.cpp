#include "footcast/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "footcast/costmap.hpp"
#include "footcast/errors.hpp"
#include "footcast/io.hpp"
#include "footcast/parallel.hpp"
#include "footcast/plot.hpp"
#include "footcast/rng.hpp"

namespace footcast::harness {

namespace fs = std::filesystem;
using io::format_double;

namespace {

constexpr std::uint64_t kIdTag = 0x4944;
constexpr std::uint64_t kOodTag = 0x4f4f44;
constexpr std::uint64_t kPhaseTag = 0x5068;
constexpr std::uint64_t kEvalTag = 0x4576616c;
constexpr std::uint64_t kThresholdTag = 0x546872;
constexpr std::uint64_t kPlanTag = 0x506c616e;
constexpr std::uint64_t kJitterTag = 0x4a6974;

std::string seed_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::uint64_t terrain_index(const std::string& name) {
  return name == "flat" ? 0 : static_cast<std::uint64_t>(parse_terrain_kind(name)) + 1;
}

}  // namespace

fs::path Layout::seed_dir(const std::string& stage, std::uint64_t seed) const {
  return root / stage / seed_name(seed);
}
fs::path Layout::id_dataset(std::uint64_t seed) const { return seed_dir("data", seed) / "id.csv"; }
fs::path Layout::ood_dataset(std::uint64_t seed, const std::string& terrain, int run) const {
  return seed_dir("data", seed) / ("ood_" + terrain + "_run" + std::to_string(run) + ".csv");
}
fs::path Layout::model(std::uint64_t seed, const std::string& variant) const {
  return seed_dir("models", seed) / (variant + ".net");
}
fs::path Layout::loss_curve(std::uint64_t seed, const std::string& variant) const {
  return seed_dir("models", seed) / ("loss_" + variant + ".csv");
}

std::vector<std::string> test_terrain_names(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  for (auto k : cfg.test_terrain.kinds) names.emplace_back(to_string(k));
  names.emplace_back("flat");
  return names;
}

HeightField test_field(const ExperimentConfig& cfg, const std::string& name) {
  return generate_terrain(cfg.test_terrain.spec(parse_terrain_kind(name)));
}

HeightField plan_field(const ExperimentConfig& cfg) { return generate_terrain(cfg.plan_terrain); }

Dataset collect_id(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto field = generate_terrain(cfg.id_terrain);
  const auto& c = cfg.collect;
  CommandDistribution commands;
  commands.fixed = {c.id_vx, 0.0, 0.0};
  Dataset out;
  for (int r = 0; r < c.id_rollouts; ++r) {
    RolloutOptions opt;
    opt.dt = c.dt;
    const double span = cfg.id_terrain.extent_y - 2.0;
    opt.start.x = cfg.id_terrain.origin_x + 1.0;
    opt.start.y = cfg.id_terrain.origin_y + 1.0 + (c.id_rollouts > 1 ? span * r / (c.id_rollouts - 1) : span / 2);
    opt.start.gait_phase = rng::uniform01(rng::key(seed, kPhaseTag, kIdTag, r));
    const auto d = collect_dataset(field, cfg.gait, commands, c.id_steps, rng::key(seed, kIdTag, r), opt);
    out.samples.insert(out.samples.end(), d.samples.begin(), d.samples.end());
    out.truncated_steps += d.truncated_steps;
  }
  return out;
}

Dataset collect_ood(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& terrain, int run) {
  const auto field = test_field(cfg, terrain);
  const auto& c = cfg.collect;
  CommandDistribution commands = c.ood_commands;
  if (terrain == "flat") {
    commands.randomize = false;
    commands.fixed = {c.id_vx, 0.0, 0.0};
  }
  RolloutOptions opt;
  opt.dt = c.dt;
  opt.start.x = field.origin_x() + 1.0;
  opt.start.y = field.origin_y() + 0.5 * (field.max_y() - field.origin_y()) + (run - (c.ood_runs - 1) / 2.0);
  opt.start.gait_phase = rng::uniform01(rng::key(seed, kPhaseTag, kOodTag, terrain_index(terrain), run));
  return collect_dataset(field, cfg.gait, commands, c.ood_steps, rng::key(seed, kOodTag, terrain_index(terrain), run),
                         opt);
}

void cmd_collect(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Layout out{cfg.out_dir};
  save_dataset(collect_id(cfg, seed), out.id_dataset(seed));
  const auto names = test_terrain_names(cfg);
  std::vector<std::pair<std::string, int>> jobs;
  for (const auto& name : names)
    for (int r = 0; r < (name == "flat" ? 1 : cfg.collect.ood_runs); ++r) jobs.emplace_back(name, r);
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const auto& [name, run] = jobs[i];
    save_dataset(collect_ood(cfg, seed, name, run), out.ood_dataset(seed, name, run));
  });
  for (const auto& name : names) save_height_field(test_field(cfg, name), out.root / "terrains" / (name + ".txt"));
  save_height_field(plan_field(cfg), out.root / "terrains" / "plan.txt");
}

void cmd_train(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Layout out{cfg.out_dir};
  const Dataset data = load_dataset(out.id_dataset(seed));
  const std::array<std::string, 2> variants{kFullModel, kTerrainOnlyModel};
  parallel_for(variants.size(), cfg.threads, [&](std::size_t i) {
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    const auto result = train(i == 0 ? data : without_command_in_u(data), tc, cfg.loss);
    save_weights(result.ensemble, out.model(seed, variants[i]));
    io::write_file(out.loss_curve(seed, variants[i]), report_to_csv(result.report));
  });
}

EvaluatedRun evaluate_run(const Ensemble& ensemble, const Dataset& data, int samples_per_member, double dt,
                          std::uint64_t seed) {
  EvaluatedRun run;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const auto pred = predict(ensemble, s.x, s.u, samples_per_member, rng::key(seed, kEvalTag, i));
    HeightScan scan;
    std::copy_n(s.x.values.data(), kScanSize, scan.values.begin());
    double err = 0.0;
    for (int leg = 0; leg < 4; ++leg) err += (pred.mean.segment<3>(3 * leg) - s.y.segment<3>(3 * leg)).norm();
    run.times.push_back(static_cast<double>(i) * dt);
    run.s_bar.push_back(pred.scalar_summary);
    run.terrain_variance.push_back(heightscan_variance(scan));
    run.error.push_back(err / 4.0);
  }
  return run;
}

namespace {

std::string trace_csv(const EvaluatedRun& run, const std::vector<double>& signal, const OodSegmentation& seg) {
  const auto labels = seg.labels();
  std::string out = "t,signal,label,foothold_error\n";
  for (std::size_t i = 0; i < signal.size(); ++i)
    out += format_double(run.times[i]) + "," + format_double(signal[i]) + "," +
           (labels[i] == RegionLabel::ood ? "OOD" : "ID") + "," + format_double(run.error[i]) + "\n";
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<OodRow> cmd_eval_ood(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Layout out{cfg.out_dir};
  const auto ensemble = load_weights(out.model(seed, kFullModel));
  const auto id = evaluate_run(ensemble, load_dataset(out.id_dataset(seed)), cfg.eval_samples, cfg.collect.dt,
                               rng::key(seed, kThresholdTag));
  const double thr_proposed = mean_of(id.s_bar);
  const double thr_baseline = mean_of(id.terrain_variance);

  struct Job {
    std::string terrain;
    int run;
  };
  std::vector<Job> jobs;
  for (const auto& name : test_terrain_names(cfg))
    for (int r = 0; r < (name == "flat" ? 1 : cfg.collect.ood_runs); ++r) jobs.push_back({name, r});
  std::vector<std::array<OodRow, 2>> rows(jobs.size());
  const fs::path dir = out.seed_dir("ood", seed);

  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto data = load_dataset(out.ood_dataset(seed, job.terrain, job.run));
    const auto ev = evaluate_run(ensemble, data, cfg.eval_samples, cfg.collect.dt,
                                 rng::key(seed, kOodTag, terrain_index(job.terrain), job.run));
    const int k = job.terrain == "flat" ? 0
                  : cfg.k_transitions >= 0 ? cfg.k_transitions
                                           : cfg.test_terrain.transitions();
    const std::array<std::pair<const char*, const std::vector<double>*>, 2> methods{
        std::pair{"proposed", &ev.s_bar}, std::pair{"baseline", &ev.terrain_variance}};
    for (std::size_t m = 0; m < 2; ++m) {
      SignalTrace trace{ev.times, *methods[m].second,
                        m == 0 ? SignalKind::proposed : SignalKind::terrain_variance};
      const double thr = m == 0 ? thr_proposed : thr_baseline;
      const auto seg = segment_ood(trace, thr, k);
      OodRow row;
      row.terrain = job.terrain;
      row.run = job.run;
      row.method = methods[m].first;
      row.threshold = thr;
      row.k = k;
      row.ood_segments = seg.ood_count();
      row.errors = region_error(ev.error, seg);
      row.gap = row.errors.ood_mean - row.errors.id_mean;
      rows[j][m] = row;
      io::write_file(dir / (job.terrain + "_run" + std::to_string(job.run) + "_" + row.method + ".csv"),
                     trace_csv(ev, *methods[m].second, seg));
    }
  });

  std::vector<OodRow> flat_rows;
  std::string csv = "terrain,run,method,threshold,k,ood_segments,id_steps,ood_steps,id_error,ood_error,gap\n";
  for (const auto& pair : rows) {
    for (const auto& r : pair) {
      csv += r.terrain + "," + std::to_string(r.run) + "," + r.method + "," + format_double(r.threshold) + "," +
             std::to_string(r.k) + "," + std::to_string(r.ood_segments) + "," + std::to_string(r.errors.id_steps) +
             "," + std::to_string(r.errors.ood_steps) + "," + format_double(r.errors.id_mean) + "," +
             format_double(r.errors.ood_mean) + "," + format_double(r.gap) + "\n";
      flat_rows.push_back(r);
    }
  }
  io::write_file(dir / "table1.csv", csv);
  io::write_file(dir / "thresholds.csv", "method,threshold\nproposed," + format_double(thr_proposed) +
                                             "\nbaseline," + format_double(thr_baseline) + "\n");
  return flat_rows;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientSamplesError("least squares needs two or more points");
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

std::vector<CorrRow> cmd_eval_correlation(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Layout out{cfg.out_dir};
  const std::array<std::string, 2> variants{kFullModel, kTerrainOnlyModel};
  const std::array<Ensemble, 2> models{load_weights(out.model(seed, kFullModel)),
                                       load_weights(out.model(seed, kTerrainOnlyModel))};
  struct Job {
    std::string terrain;
    int run;
  };
  std::vector<Job> jobs;
  for (auto k : cfg.test_terrain.kinds)
    for (int r = 0; r < cfg.collect.ood_runs; ++r) jobs.push_back({std::string(to_string(k)), r});
  std::vector<std::array<EvaluatedRun, 2>> evals(jobs.size());
  parallel_for(jobs.size() * 2, cfg.threads, [&](std::size_t i) {
    const auto& job = jobs[i / 2];
    const std::size_t m = i % 2;
    auto data = load_dataset(out.ood_dataset(seed, job.terrain, job.run));
    if (m == 1) data = without_command_in_u(std::move(data));
    evals[i / 2][m] = evaluate_run(models[m], data, cfg.eval_samples, cfg.collect.dt,
                                   rng::key(seed, kOodTag, terrain_index(job.terrain), job.run));
  });

  std::string scatter = "terrain,run,t,s_bar_full,error_full,s_bar_terrain_only,error_terrain_only\n";
  std::array<std::vector<double>, 2> s, e;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& f = evals[j][0];
    const auto& a = evals[j][1];
    for (std::size_t t = 0; t < f.s_bar.size(); ++t) {
      scatter += jobs[j].terrain + "," + std::to_string(jobs[j].run) + "," + format_double(f.times[t]) + "," +
                 format_double(f.s_bar[t]) + "," + format_double(f.error[t]) + "," + format_double(a.s_bar[t]) + "," +
                 format_double(a.error[t]) + "\n";
    }
    for (std::size_t m = 0; m < 2; ++m) {
      s[m].insert(s[m].end(), evals[j][m].s_bar.begin(), evals[j][m].s_bar.end());
      e[m].insert(e[m].end(), evals[j][m].error.begin(), evals[j][m].error.end());
    }
  }
  std::vector<CorrRow> rows;
  std::string summary = "model,n,slope,intercept,rho\n";
  for (std::size_t m = 0; m < 2; ++m) {
    CorrRow row;
    row.model = variants[m];
    row.n = static_cast<int>(s[m].size());
    const auto fit = least_squares(s[m], e[m]);
    row.slope = fit.slope;
    row.intercept = fit.intercept;
    row.rho = pearson(Eigen::Map<const Eigen::VectorXd>(s[m].data(), static_cast<Eigen::Index>(s[m].size())),
                      Eigen::Map<const Eigen::VectorXd>(e[m].data(), static_cast<Eigen::Index>(e[m].size())));
    summary += row.model + "," + std::to_string(row.n) + "," + format_double(row.slope) + "," +
               format_double(row.intercept) + "," + format_double(row.rho) + "\n";
    rows.push_back(row);
  }
  const fs::path dir = out.seed_dir("corr", seed);
  io::write_file(dir / "scatter.csv", scatter);
  io::write_file(dir / "summary.csv", summary);
  return rows;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientSamplesError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

MppiConfig with_formulation(const MppiConfig& base, Formulation f, double weight) {
  MppiConfig m = base;
  m.lambda_obs = f == Formulation::obstacle ? weight : 0.0;
  m.lambda_rough = f == Formulation::roughness ? weight : 0.0;
  m.lambda_unc = f == Formulation::uncertainty ? weight : 0.0;
  return m;
}

std::string path_csv(const EpisodeLog& log) {
  std::string out = "x,y\n";
  for (const auto& s : log.steps) out += format_double(s.state.x) + "," + format_double(s.state.y) + "\n";
  out += format_double(log.final_state.x) + "," + format_double(log.final_state.y) + "\n";
  return out;
}

}  // namespace

PlanOutcome cmd_plan(const ExperimentConfig& cfg, std::uint64_t seed, std::optional<Formulation> only) {
  const Layout out{cfg.out_dir};
  const auto ensemble = load_weights(out.model(seed, kFullModel));
  const auto field = plan_field(cfg);
  const auto grid = grid_covering(field, cfg.costmap_resolution);
  const auto static_maps = build_static_costmaps(field, cfg.costmap, grid);
  const double weight = cfg.mppi.active_weight();
  const Eigen::Vector2d goal(cfg.plan.goal_x, cfg.plan.goal_y);

  std::vector<Formulation> formulations{Formulation::obstacle, Formulation::roughness, Formulation::uncertainty};
  if (only) formulations = {*only};
  const int runs = std::max(cfg.plan.runs_table, cfg.plan.runs_progress);

  struct Job {
    Formulation f;
    int run;
    double weight;
    int sweep;  // -1 for the comparison runs
  };
  std::vector<Job> jobs;
  for (auto f : formulations)
    for (int r = 0; r < runs; ++r) jobs.push_back({f, r, weight, -1});
  if (!only || *only == Formulation::uncertainty)
    for (std::size_t i = 0; i < cfg.plan.lambda_sweep.size(); ++i)
      jobs.push_back({Formulation::uncertainty, 0, cfg.plan.lambda_sweep[i], static_cast<int>(i)});

  const fs::path dir = out.seed_dir("plan", seed);
  std::vector<PlanRun> results(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    EpisodeConfig ec = cfg.plan.episode;
    ec.mppi = with_formulation(cfg.mppi, job.f, job.weight);
    ec.costmap = cfg.costmap;
    ec.feasibility = cfg.feasibility;
    ec.gait = cfg.gait;
    ec.samples_per_member = cfg.eval_samples;
    ec.seed = rng::key(seed, kPlanTag, job.run);
    RobotState start = cfg.plan.start;
    start.y += rng::uniform(rng::key(seed, kJitterTag, job.run), -cfg.plan.start_jitter, cfg.plan.start_jitter);
    const auto log = run_episode(start, goal, field, ensemble, static_maps, ec);

    std::vector<FeasibilityRecord> records;
    for (const auto& s : log.steps) records.push_back(s.feasibility);
    PlanRun pr;
    pr.formulation = job.f;
    pr.run = job.run;
    pr.feasibility = records.empty() ? MeanStd{} : feasibility_error(records);
    pr.progress = log.progress;
    pr.reached_goal = log.reached_goal;
    pr.steps = static_cast<int>(log.steps.size());
    pr.termination = log.termination;
    results[j] = pr;

    const std::string name = job.sweep >= 0 ? "sweep/lambda_" + std::to_string(job.sweep)
                                            : std::string(to_string(job.f)) + "_run" + std::to_string(job.run);
    io::write_file(dir / "episodes" / (name + ".csv"), episode_to_csv(log));
    io::write_file(dir / "paths" / (name + ".csv"), path_csv(log));
    io::write_file(dir / "feasibility" / (name + ".csv"), feasibility_to_csv(records));
    if (job.run == 0) save_costmap(log.last_costmap, dir / "costmaps" / (name + ".txt"));
  });

  PlanOutcome outcome;
  std::string table = "formulation,run,feas_mean,feas_std,progress,reached_goal,steps,termination\n";
  std::string sweep = "lambda_unc,feas_mean,feas_std,progress,reached_goal,steps\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = results[j];
    if (jobs[j].sweep >= 0) {
      sweep += format_double(jobs[j].weight) + "," + format_double(r.feasibility.mean) + "," +
               format_double(r.feasibility.std) + "," + format_double(r.progress) + "," +
               (r.reached_goal ? "1" : "0") + "," + std::to_string(r.steps) + "\n";
      continue;
    }
    table += std::string(to_string(r.formulation)) + "," + std::to_string(r.run) + "," +
             format_double(r.feasibility.mean) + "," + format_double(r.feasibility.std) + "," +
             format_double(r.progress) + "," + (r.reached_goal ? "1" : "0") + "," + std::to_string(r.steps) + "," +
             r.termination + "\n";
    outcome.runs.push_back(r);
  }

  std::string summary = "formulation,runs_table,grand_mean_feasibility,runs_progress,median_progress,q1_progress,"
                        "q3_progress,iqr_progress\n";
  std::string hist = "formulation,bin_lo,bin_hi,count\n";
  for (auto f : formulations) {
    std::vector<double> feas, prog;
    for (const auto& r : outcome.runs) {
      if (r.formulation != f) continue;
      if (r.run < cfg.plan.runs_table) feas.push_back(r.feasibility.mean);
      if (r.run < cfg.plan.runs_progress) prog.push_back(r.progress);
    }
    PlanSummaryRow row;
    row.formulation = f;
    row.grand_mean_feasibility = mean_of(feas);
    row.median_progress = quantile(prog, 0.5);
    row.q1_progress = quantile(prog, 0.25);
    row.q3_progress = quantile(prog, 0.75);
    outcome.summary.push_back(row);
    summary += std::string(to_string(f)) + "," + std::to_string(feas.size()) + "," +
               format_double(row.grand_mean_feasibility) + "," + std::to_string(prog.size()) + "," +
               format_double(row.median_progress) + "," + format_double(row.q1_progress) + "," +
               format_double(row.q3_progress) + "," + format_double(row.q3_progress - row.q1_progress) + "\n";
    for (int b = 0; b < 10; ++b) {
      const double lo = b / 10.0, hi = (b + 1) / 10.0;
      const auto count = std::count_if(prog.begin(), prog.end(),
                                       [&](double p) { return p >= lo && (p < hi || (b == 9 && p <= hi)); });
      hist += std::string(to_string(f)) + "," + format_double(lo) + "," + format_double(hi) + "," +
              std::to_string(count) + "\n";
    }
  }
  io::write_file(dir / "table2.csv", table);
  io::write_file(dir / "summary.csv", summary);
  io::write_file(dir / "progress_histogram.csv", hist);
  if (!only || *only == Formulation::uncertainty) io::write_file(dir / "sweep.csv", sweep);
  return outcome;
}

// ---------------------------------------------------------------------------
// Report

namespace {

using TextTable = std::vector<std::vector<std::string>>;

TextTable read_table(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  TextTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    for (auto cell : io::split(line, ',')) row.emplace_back(cell);
    t.push_back(std::move(row));
  }
  return t;
}

std::vector<double> column(const TextTable& t, const std::string& name) {
  if (t.empty()) return {};
  const auto it = std::find(t[0].begin(), t[0].end(), name);
  if (it == t[0].end()) throw LoadError("column '" + name + "' missing");
  const auto c = static_cast<std::size_t>(it - t[0].begin());
  std::vector<double> out;
  for (std::size_t r = 1; r < t.size(); ++r) out.push_back(io::parse_double(t[r].at(c), name));
  return out;
}

std::string markdown(const TextTable& t) {
  if (t.empty()) return "";
  std::string s;
  for (std::size_t r = 0; r < t.size(); ++r) {
    s += "|";
    for (const auto& c : t[r]) s += " " + c + " |";
    s += "\n";
    if (r == 0) {
      s += "|";
      for (std::size_t i = 0; i < t[0].size(); ++i) s += "---|";
      s += "\n";
    }
  }
  return s;
}

Costmap load_costmap(const fs::path& path) {
  const auto f = load_height_field(path);
  Costmap map(GridSpec{f.rows(), f.cols(), f.resolution(), f.origin_x(), f.origin_y()});
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) map.at(r, c) = f.at(r, c);
  return map;
}

SvgPath load_path(const fs::path& path, const std::string& color) {
  const auto t = read_table(path);
  const auto xs = column(t, "x"), ys = column(t, "y");
  SvgPath p;
  p.color = color;
  for (std::size_t i = 0; i < xs.size(); ++i) p.points.emplace_back(xs[i], ys[i]);
  return p;
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void cmd_report(const fs::path& out_dir) {
  if (!fs::exists(out_dir)) throw IoError("output directory " + out_dir.string() + " does not exist");
  const fs::path rep = out_dir / "report";
  std::string index = "# Experiment report\n\n";

  for (const auto& seed_dir : sorted_entries(out_dir / "models")) {
    std::vector<plot::Series> series;
    std::size_t color = 0;
    for (const char* variant : {kFullModel, kTerrainOnlyModel}) {
      const auto file = seed_dir / ("loss_" + std::string(variant) + ".csv");
      if (!fs::exists(file)) continue;
      const auto t = read_table(file);
      series.push_back({std::string(variant), column(t, "epoch"), column(t, "total"), plot::kPalette[color++], false});
    }
    if (series.empty()) continue;
    const auto name = "loss_" + seed_dir.filename().string() + ".svg";
    io::write_file(rep / name, plot::line_chart(series, {"Training loss (" + seed_dir.filename().string() + ")",
                                                         "epoch", "total loss", true}));
    index += "- [" + name + "](" + name + ")\n";
  }

  for (const auto& seed_dir : sorted_entries(out_dir / "ood")) {
    const auto table = seed_dir / "table1.csv";
    if (fs::exists(table)) index += "\n## ID/OOD foothold error, " + seed_dir.filename().string() + "\n\n" +
                                    markdown(read_table(table));
    for (const auto& file : sorted_entries(seed_dir)) {
      const auto stem = file.stem().string();
      if (stem == "table1" || stem == "thresholds" || file.extension() != ".csv") continue;
      const auto t = read_table(file);
      const auto times = column(t, "t");
      std::vector<double> ood(times.size());
      const auto sig = column(t, "signal");
      const double hi = sig.empty() ? 1.0 : *std::max_element(sig.begin(), sig.end());
      for (std::size_t i = 0; i < times.size(); ++i) ood[i] = t[i + 1][2] == "OOD" ? hi : 0.0;
      const auto name = "trace_" + seed_dir.filename().string() + "_" + stem + ".svg";
      io::write_file(rep / name, plot::line_chart({{"signal", times, sig, plot::kPalette[0], false},
                                                   {"OOD label", times, ood, plot::kPalette[1], false}},
                                                  {stem, "t [s]", "signal", false}));
    }
  }

  for (const auto& seed_dir : sorted_entries(out_dir / "corr")) {
    const auto summary = seed_dir / "summary.csv";
    if (fs::exists(summary)) index += "\n## Uncertainty vs error, " + seed_dir.filename().string() + "\n\n" +
                                      markdown(read_table(summary));
    const auto scatter = seed_dir / "scatter.csv";
    if (!fs::exists(scatter)) continue;
    const auto t = read_table(scatter);
    const auto name = "scatter_" + seed_dir.filename().string() + ".svg";
    io::write_file(rep / name,
                   plot::line_chart({{"terrain+cmd", column(t, "s_bar_full"), column(t, "error_full"), plot::kPalette[0], true},
                                     {"terrain only", column(t, "s_bar_terrain_only"), column(t, "error_terrain_only"),
                                      plot::kPalette[1], true}},
                                    {"Uncertainty vs foothold error", "scalar uncertainty", "foothold error [m]", false}));
    index += "\n- [" + name + "](" + name + ")\n";
  }

  for (const auto& seed_dir : sorted_entries(out_dir / "plan")) {
    const auto tag = seed_dir.filename().string();
    for (const char* file : {"summary.csv", "table2.csv", "sweep.csv"}) {
      if (fs::exists(seed_dir / file))
        index += "\n## Planning " + std::string(file) + ", " + tag + "\n\n" + markdown(read_table(seed_dir / file));
    }
    for (const auto& map_file : sorted_entries(seed_dir / "costmaps")) {
      const auto stem = map_file.stem().string();
      const auto path_file = seed_dir / "paths" / (stem + ".csv");
      std::vector<SvgPath> paths;
      if (fs::exists(path_file)) paths.push_back(load_path(path_file, "#1f77b4"));
      const auto name = "costmap_" + tag + "_" + stem + ".svg";
      io::write_file(rep / name, costmap_svg(load_costmap(map_file), paths, stem));
      index += "- [" + name + "](" + name + ")\n";
    }
    for (const auto& map_file : sorted_entries(seed_dir / "costmaps" / "sweep")) {
      const auto stem = map_file.stem().string();
      std::vector<SvgPath> paths;
      const auto path_file = seed_dir / "paths" / "sweep" / (stem + ".csv");
      if (fs::exists(path_file)) paths.push_back(load_path(path_file, "#1f77b4"));
      const auto name = "sweep_" + tag + "_" + stem + ".svg";
      io::write_file(rep / name, costmap_svg(load_costmap(map_file), paths, "uncertainty weight sweep " + stem));
      index += "- [" + name + "](" + name + ")\n";
    }
    const auto hist_file = seed_dir / "progress_histogram.csv";
    if (fs::exists(hist_file)) {
      const auto t = read_table(hist_file);
      std::map<std::string, std::vector<double>> counts;
      std::vector<std::string> order, bins;
      for (std::size_t r = 1; r < t.size(); ++r) {
        if (!counts.count(t[r][0])) order.push_back(t[r][0]);
        counts[t[r][0]].push_back(io::parse_double(t[r][3], "count"));
        if (order.size() == 1) bins.push_back(t[r][1]);
      }
      std::vector<plot::Bars> groups;
      for (std::size_t i = 0; i < order.size(); ++i)
        groups.push_back({order[i], counts[order[i]], plot::kPalette[i % plot::kPalette.size()]});
      const auto name = "progress_" + tag + ".svg";
      io::write_file(rep / name, plot::bar_chart(bins, groups, {"Goal progress", "progress bin", "runs", false}));
      index += "- [" + name + "](" + name + ")\n";
    }
  }
  io::write_file(rep / "index.md", index);
}

}  // namespace footcast::harness
