#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "footcast/errors.hpp"
#include "footcast/training.hpp"
#include "helpers.hpp"

namespace footcast {
namespace {

using testing::random_batch;

// Batch whose per-sample foothold error is e[b] (every leg off by e[b] in x)
// and whose uncertainty summary is s[b].
struct Constructed {
  BatchMatrix mean, var, labels;
};

Constructed with_errors(const std::vector<double>& e, const std::vector<double>& s) {
  const auto B = static_cast<Eigen::Index>(e.size());
  Constructed c{BatchMatrix::Zero(kOutputSize, B), BatchMatrix::Zero(kOutputSize, B), BatchMatrix::Zero(kOutputSize, B)};
  for (Eigen::Index b = 0; b < B; ++b) {
    for (int leg = 0; leg < kNumLegs; ++leg) c.mean(3 * leg, b) = e[static_cast<std::size_t>(b)];
    c.var.col(b).setConstant(s[static_cast<std::size_t>(b)]);
  }
  return c;
}

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / n, mb = sb / n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(Loss, PerfectPredictionHasNoPoseOrHinge) {
  const auto c = with_errors({0, 0, 0}, {1e-8, 1e-8, 1e-8});
  const auto l = compute_loss(c.mean, c.var, c.labels, LossWeights{});
  EXPECT_EQ(l.pose, 0.0);
  EXPECT_EQ(l.epi, 0.0);
}

TEST(Loss, SingleCoordinateHinge) {
  BatchMatrix mean = BatchMatrix::Zero(kOutputSize, 2), labels = mean;
  BatchMatrix var = BatchMatrix::Constant(kOutputSize, 2, 1e-8);
  mean(4, 1) = 0.2;
  var(4, 1) = 0.01;
  const auto l = compute_loss(mean, var, labels, LossWeights{});
  // loss terms are averaged over 12 coordinates and 2 samples
  EXPECT_NEAR(l.epi * 24.0, 0.03, 1e-15);
  EXPECT_NEAR(l.pose * 24.0, 0.04, 1e-15);
}

TEST(Loss, AffineUncertaintyGivesFullCorrelation) {
  const std::vector<double> e{0.01, 0.05, 0.02, 0.09};
  std::vector<double> s;
  for (double v : e) s.push_back(2e-3 + 0.05 * v);
  const auto c = with_errors(e, s);
  const auto l = compute_loss(c.mean, c.var, c.labels, LossWeights{});
  EXPECT_NEAR(l.rho, 1.0, 1e-12);
}

TEST(Loss, ReversedRankingCostsTwoLambda) {
  const std::vector<double> e{1, 2, 3, 4};
  const std::vector<double> s{4e-3, 3e-3, 2e-3, 1e-3};
  LossWeights w;
  const auto c = with_errors(e, s);
  const auto l = compute_loss(c.mean, c.var, c.labels, w);
  EXPECT_NEAR(l.rho, -1.0, 1e-12);
  // band alignment computed independently
  double align = 0.0;
  for (std::size_t b = 0; b < 4; ++b) {
    const double target = w.s_min + (w.s_max - w.s_min) * (e[b] - 1.0) / (3.0 + w.eps_band);
    align += std::abs(s[b] - target) / 4.0;
  }
  EXPECT_NEAR(l.cal - align, 2.0 * w.lambda, 1e-12);
}

TEST(Loss, BandEndpointsAndMonotoneTargets) {
  const std::vector<double> e{0.03, 0.01, 0.07, 0.04, 0.05};
  const double lo = 0.01, hi = 0.07;
  LossWeights w;
  std::vector<double> s;
  for (double v : e) s.push_back(w.s_min + (w.s_max - w.s_min) * (v - lo) / (hi - lo));
  const auto c = with_errors(e, s);
  const auto l = compute_loss(c.mean, c.var, c.labels, w);
  // only the eps_band offset keeps the alignment term from vanishing
  EXPECT_LT(l.cal, 1e-8);
  EXPECT_NEAR(l.rho, 1.0, 1e-12);
}

TEST(Loss, DegenerateSpreadTreatsRhoAsZero) {
  const auto c = with_errors({0.02, 0.02, 0.02}, {1e-3, 2e-3, 3e-3});
  const auto l = compute_loss(c.mean, c.var, c.labels, LossWeights{});
  EXPECT_EQ(l.rho, 0.0);
}

TEST(Loss, PearsonMatchesOracleOnRandomBatches) {
  rng::Stream s(40);
  for (int trial = 0; trial < 20; ++trial) {
    const int B = 8 + trial;
    BatchMatrix mean(kOutputSize, B), var(kOutputSize, B), labels(kOutputSize, B);
    for (int b = 0; b < B; ++b)
      for (int j = 0; j < kOutputSize; ++j) {
        mean(j, b) = s.uniform(-0.3, 0.3);
        labels(j, b) = s.uniform(-0.3, 0.3);
        var(j, b) = s.uniform(1e-6, 1e-2);
      }
    std::vector<double> e, sb;
    for (int b = 0; b < B; ++b) {
      double acc = 0.0;
      for (int leg = 0; leg < 4; ++leg) {
        double sq = 0.0;
        for (int d = 0; d < 3; ++d) sq += std::pow(mean(3 * leg + d, b) - labels(3 * leg + d, b), 2);
        acc += std::sqrt(sq);
      }
      e.push_back(acc / 4.0);
      double vs = 0.0;
      for (int j = 0; j < kOutputSize; ++j) vs += var(j, b);
      sb.push_back(vs / kOutputSize);
    }
    const auto l = compute_loss(mean, var, labels, LossWeights{});
    EXPECT_NEAR(l.rho, pearson_oracle(e, sb), 1e-10);
    EXPECT_GE(l.pose, 0.0);
    EXPECT_GE(l.epi, 0.0);
    EXPECT_GE(l.cal, 0.0);
    EXPECT_LE(1.0 - l.rho, 2.0);
  }
}

TEST(Loss, PoseOnlyGradientIsMse) {
  rng::Stream s(41);
  BatchMatrix mean(kOutputSize, 5), var(kOutputSize, 5), labels(kOutputSize, 5);
  for (int b = 0; b < 5; ++b)
    for (int j = 0; j < kOutputSize; ++j) {
      mean(j, b) = s.uniform(-1, 1);
      labels(j, b) = s.uniform(-1, 1);
      var(j, b) = s.uniform(1e-6, 1e-2);
    }
  LossWeights w;
  w.w_epi = 0.0;
  w.w_cal = 0.0;
  const auto g = loss_gradient(mean, var, labels, w);
  const BatchMatrix mse = 2.0 * (mean - labels) / (kOutputSize * 5.0);
  EXPECT_LT((g.d_mean - mse).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(g.d_variance.isZero(0.0));
}

TEST(Loss, InactiveHingeHasZeroGradient) {
  rng::Stream s(42);
  BatchMatrix mean(kOutputSize, 4), labels(kOutputSize, 4);
  for (int b = 0; b < 4; ++b)
    for (int j = 0; j < kOutputSize; ++j) {
      mean(j, b) = s.uniform(-0.1, 0.1);
      labels(j, b) = s.uniform(-0.1, 0.1);
    }
  const BatchMatrix var = BatchMatrix::Constant(kOutputSize, 4, 1.0);
  LossWeights w;
  w.w_pose = 0.0;
  w.w_cal = 0.0;
  const auto g = loss_gradient(mean, var, labels, w);
  EXPECT_EQ(g.loss.epi, 0.0);
  EXPECT_TRUE(g.d_mean.isZero(0.0));
  EXPECT_TRUE(g.d_variance.isZero(0.0));
}

TEST(Loss, TooSmallBatchThrows) {
  const auto c = with_errors({0.1}, {1e-3});
  EXPECT_THROW(compute_loss(c.mean, c.var, c.labels, LossWeights{}), InsufficientSamplesError);
}

// Analytic ensemble gradient against central differences of batch_loss.
double gradient_check(const LossWeights& w, std::uint64_t seed) {
  const auto batch = random_batch(12, seed);
  Ensemble ens = init_ensemble(Architecture{}, 3, seed + 1);
  const int M = 5;
  const std::uint64_t mask_seed = seed + 2;
  const auto analytic = backward(batch, ens, w, M, mask_seed);
  rng::Stream pick(seed + 3);
  const double h = 1e-5;
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const auto k = static_cast<std::size_t>(pick.next_u64() % ens.size());
    const auto i = static_cast<std::size_t>(pick.next_u64() % ens[k].layers.size());
    auto& layer = ens[k].layers[i];
    const bool bias = pick.uniform01() < 0.2;
    const auto r = static_cast<Eigen::Index>(pick.next_u64() % static_cast<std::uint64_t>(layer.outputs()));
    const auto c = static_cast<Eigen::Index>(pick.next_u64() % static_cast<std::uint64_t>(layer.inputs()));
    double& p = bias ? layer.bias(r) : layer.weights(r, c);
    const double a = bias ? analytic.gradients[k].layers[i].bias(r) : analytic.gradients[k].layers[i].weights(r, c);
    const double saved = p;
    p = saved + h;
    const double up = batch_loss(batch, ens, w, M, mask_seed).total;
    p = saved - h;
    const double down = batch_loss(batch, ens, w, M, mask_seed).total;
    p = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

TEST(Backward, GradientCheckPoseOnly) {
  LossWeights w;
  w.w_epi = 0.0;
  w.w_cal = 0.0;
  EXPECT_LT(gradient_check(w, 100), 1e-4);
}

TEST(Backward, GradientCheckWithHinge) {
  LossWeights w;
  w.w_cal = 0.0;
  EXPECT_LT(gradient_check(w, 200), 1e-4);
}

TEST(Backward, GradientCheckFullLoss) {
  EXPECT_LT(gradient_check(LossWeights{}, 300), 1e-4);
}

TEST(Backward, LossMatchesBatchLoss) {
  const auto batch = random_batch(10, 7);
  const auto ens = init_ensemble(Architecture{}, 3, 8);
  const auto a = backward(batch, ens, LossWeights{}, 5, 9).loss;
  const auto b = batch_loss(batch, ens, LossWeights{}, 5, 9);
  EXPECT_EQ(a.total, b.total);
}

Dataset linear_dataset(int n, std::uint64_t seed) {
  rng::Stream s(seed);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    TrainingSample t;
    t.x = testing::random_main_input(s);
    t.u = testing::random_uncertainty_input(s);
    for (int j = 0; j < kOutputSize; ++j) t.y(j) = 0.5 * t.x.values(j) - 0.3 * t.x.values(j + 20) + 0.05;
    d.samples.push_back(t);
  }
  return d;
}

TEST(Train, PoseOnlyFitsLinearData) {
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 3e-3;
  LossWeights w;
  w.w_epi = 0.0;
  w.w_cal = 0.0;
  const auto res = train(linear_dataset(256, 3), cfg, w);
  EXPECT_LT(res.report.epochs.back().pose, 1e-3);
}

TEST(Train, DeterministicPerSeed) {
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto data = linear_dataset(64, 4);
  const auto a = train(data, cfg, LossWeights{});
  const auto b = train(data, cfg, LossWeights{});
  EXPECT_EQ(serialize_weights(a.ensemble), serialize_weights(b.ensemble));
  EXPECT_EQ(report_to_csv(a.report), report_to_csv(b.report));
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  TrainConfig cfg;
  cfg.epochs = 1;
  auto data = linear_dataset(64, 5);
  data.samples[10].y(0) = std::nan("");
  try {
    train(data, cfg, LossWeights{});
    ADD_FAILURE() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Train, DatasetSmallerThanBatchIsConfigError) {
  EXPECT_THROW(train(linear_dataset(8, 1), TrainConfig{}, LossWeights{}), ConfigError);
}

TEST(Collect, FlatFixedCommandHasZeroPooledScan) {
  TerrainSpec spec;
  spec.extent_x = 45.0;
  spec.extent_y = 3.0;
  const auto field = generate_terrain(spec);
  RolloutOptions opt;
  opt.start = {1.0, 1.5, 0.0, 0.0};
  const auto d = collect_dataset(field, GaitConfig{}, CommandDistribution{}, 1000, 3, opt);
  ASSERT_EQ(d.samples.size(), 1000u);
  EXPECT_EQ(d.truncated_steps, 0);
  for (const auto& s : d.samples) {
    EXPECT_TRUE(s.u.values.tail<kPooledSize>().isZero(0.0));
    EXPECT_EQ(s.u.values.head<3>(), d.samples.front().u.values.head<3>());
  }
}

TEST(Collect, SameSeedSameDataset) {
  TerrainSpec spec;
  spec.kind = TerrainKind::wavy;
  spec.extent_x = 8.0;
  spec.extent_y = 4.0;
  const auto field = generate_terrain(spec);
  RolloutOptions opt;
  opt.start = {1.0, 2.0, 0.0, 0.0};
  CommandDistribution cmds;
  cmds.randomize = true;
  const auto a = collect_dataset(field, GaitConfig{}, cmds, 50, 8, opt);
  const auto b = collect_dataset(field, GaitConfig{}, cmds, 50, 8, opt);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].x.values, b.samples[i].x.values);
    EXPECT_EQ(a.samples[i].y, b.samples[i].y);
  }
}

TEST(Collect, LabelHeightsMatchTerrain) {
  TerrainSpec spec;
  spec.kind = TerrainKind::wavy;
  spec.extent_x = 8.0;
  spec.extent_y = 4.0;
  const auto field = generate_terrain(spec);
  RolloutOptions opt;
  opt.start = {1.0, 2.0, 0.0, 0.0};
  const auto r = collect_rollout(field, GaitConfig{}, CommandDistribution{}, 60, 2, opt);
  ASSERT_FALSE(r.steps.empty());
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto world = to_world(FootholdSet::from_stacked(r.dataset.samples[i].y, Frame::base), r.steps[i].state, field);
    for (const auto& p : world.feet) EXPECT_NEAR(p.z(), field.elevation(p.x(), p.y()), 1e-9);
  }
}

TEST(Collect, LeavingTerrainTruncates) {
  TerrainSpec spec;
  spec.extent_x = 4.0;
  spec.extent_y = 3.0;
  RolloutOptions opt;
  opt.start = {1.0, 1.5, 0.0, 0.0};
  const auto d = collect_dataset(generate_terrain(spec), GaitConfig{}, CommandDistribution{}, 200, 1, opt);
  EXPECT_GT(d.truncated_steps, 0);
  EXPECT_EQ(static_cast<int>(d.samples.size()) + d.truncated_steps, 200);
}

TEST(Collect, TerrainOnlyZeroesCommand) {
  Dataset d;
  d.samples = random_batch(5, 1);
  const auto t = without_command_in_u(d);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_TRUE(t.samples[i].u.values.head<3>().isZero(0.0));
    EXPECT_EQ(t.samples[i].u.values.tail<kPooledSize>(), d.samples[i].u.values.tail<kPooledSize>());
  }
}

TEST(Collect, DatasetFileRoundTrip) {
  Dataset d;
  d.samples = random_batch(7, 2);
  d.truncated_steps = 3;
  const auto path = std::filesystem::temp_directory_path() / "footcast_dataset_test.csv";
  save_dataset(d, path);
  const auto back = load_dataset(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.samples.size(), 7u);
  EXPECT_EQ(back.truncated_steps, 3);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(back.samples[i].x.values, d.samples[i].x.values);
    EXPECT_EQ(back.samples[i].u.values, d.samples[i].u.values);
    EXPECT_EQ(back.samples[i].y, d.samples[i].y);
  }
}

}  // namespace
}  // namespace footcast
