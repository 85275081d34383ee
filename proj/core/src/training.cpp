#include "footcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"
#include "footcast/rng.hpp"

namespace footcast {

Rollout collect_rollout(const HeightField& field, const GaitConfig& gait, const CommandDistribution& commands,
                        int n_steps, std::uint64_t seed, const RolloutOptions& options) {
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (!(options.dt > 0.0)) throw ConfigError("rollout dt must be > 0");
  gait.validate();
  const std::uint64_t noise_seed = rng::key(seed, gait.seed);
  Rollout out;
  RobotState state = options.start;
  for (int step = 0; step < n_steps; ++step) {
    const double t = step * options.dt;
    Command cmd = commands.fixed;
    if (commands.randomize) {
      const auto segment = static_cast<std::uint64_t>(std::floor(t / commands.hold_time + 1e-9));
      const auto k = rng::key(seed, 0x436d64, segment);
      cmd = {rng::uniform(rng::key(k, 0), commands.vx_min, commands.vx_max), 0.0,
             rng::uniform(rng::key(k, 1), commands.yaw_rate_min, commands.yaw_rate_max)};
    }
    HeightScan scan;
    FootholdSet nominal;
    try {
      scan = extract_height_scan(field, state.pose());
      nominal = nominal_footholds(state, cmd, field, gait);
    } catch (const OutOfBoundsError&) {
      out.dataset.truncated_steps = n_steps - step;
      break;
    }
    const FootholdSet actual =
        actual_footholds(to_world(nominal, state, field), field, gait, foothold_stream(noise_seed, step));
    TrainingSample sample;
    sample.x = make_main_input(scan, cmd, state.gait_phase);
    sample.u = make_uncertainty_input(cmd, pool_grid(scan), options.include_command_in_u);
    sample.y = to_base(actual, state, field).stacked();
    out.dataset.samples.push_back(sample);
    out.steps.push_back({t, state, cmd, scan, actual});
    state = advance_state(state, cmd, options.dt, gait.cycle_period);
  }
  return out;
}

Dataset collect_dataset(const HeightField& field, const GaitConfig& gait, const CommandDistribution& commands,
                        int n_steps, std::uint64_t seed, const RolloutOptions& options) {
  return collect_rollout(field, gait, commands, n_steps, seed, options).dataset;
}

Dataset without_command_in_u(Dataset data) {
  for (auto& s : data.samples) s.u.values.head<3>().setZero();
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::string out = std::to_string(data.samples.size()) + "," + std::to_string(kMainInputSize) + "," +
                    std::to_string(kUncertaintyInputSize) + "," + std::to_string(kOutputSize) + "," +
                    std::to_string(data.truncated_steps) + "\n";
  for (const auto& s : data.samples) {
    out += io::join(std::span<const double>(s.x.values.data(), kMainInputSize));
    out.push_back(',');
    out += io::join(std::span<const double>(s.u.values.data(), kUncertaintyInputSize));
    out.push_back(',');
    out += io::join(std::span<const double>(s.y.data(), kOutputSize));
    out.push_back('\n');
  }
  io::write_file(path, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw LoadError("dataset header missing");
  const auto head = io::split(line, ',');
  if (head.size() != 5) throw LoadError("dataset header must have 5 counts");
  const auto n = static_cast<std::size_t>(io::parse_double(head[0], "sample count"));
  if (io::parse_double(head[1], "x size") != kMainInputSize ||
      io::parse_double(head[2], "u size") != kUncertaintyInputSize ||
      io::parse_double(head[3], "y size") != kOutputSize)
    throw LoadError("dataset layout does not match 106/15/12");
  Dataset data;
  data.truncated_steps = static_cast<int>(io::parse_double(head[4], "truncated steps"));
  data.samples.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = io::split(line, ',');
    if (cells.size() != kMainInputSize + kUncertaintyInputSize + kOutputSize)
      throw LoadError("dataset row " + std::to_string(data.samples.size() + 1) + " has wrong width");
    TrainingSample s;
    std::size_t i = 0;
    for (int j = 0; j < kMainInputSize; ++j) s.x.values[j] = io::parse_double(cells[i++], "x");
    for (int j = 0; j < kUncertaintyInputSize; ++j) s.u.values[j] = io::parse_double(cells[i++], "u");
    for (int j = 0; j < kOutputSize; ++j) s.y[j] = io::parse_double(cells[i++], "y");
    data.samples.push_back(s);
  }
  if (data.samples.size() != n)
    throw LoadError("dataset truncated: header says " + std::to_string(n) + " samples, found " +
                    std::to_string(data.samples.size()));
  return data;
}

// ---------------------------------------------------------------------------
// Loss

void LossWeights::validate() const {
  if (w_pose < 0 || w_epi < 0 || w_cal < 0 || lambda < 0) throw ConfigError("loss weights must be >= 0");
  if (!(s_max > s_min && s_min >= 0.0)) throw ConfigError("loss band needs s_max > s_min >= 0");
  if (!(eps_band > 0.0)) throw ConfigError("loss eps_band must be > 0");
}

Eigen::VectorXd foothold_errors(const BatchMatrix& mean, const BatchMatrix& labels) {
  Eigen::VectorXd e(mean.cols());
  for (Eigen::Index b = 0; b < mean.cols(); ++b) {
    double acc = 0.0;
    for (int i = 0; i < kNumLegs; ++i) acc += (mean.col(b).segment<3>(3 * i) - labels.col(b).segment<3>(3 * i)).norm();
    e[b] = acc / kNumLegs;
  }
  return e;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = (da * da).sum(), sbb = (db * db).sum();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return (da * db).sum() / std::sqrt(saa * sbb);
}

LossGradient loss_gradient(const BatchMatrix& mean, const BatchMatrix& variance, const BatchMatrix& labels,
                           const LossWeights& w) {
  const Eigen::Index B = mean.cols();
  if (B < 2) throw InsufficientSamplesError("loss needs a batch of at least 2 samples");
  if (variance.cols() != B || labels.cols() != B) throw StructuralError("loss inputs have mismatched batch sizes");
  const double nb = static_cast<double>(B);
  const double per = 1.0 / (kOutputSize * nb);

  LossGradient g;
  g.d_mean = BatchMatrix::Zero(kOutputSize, B);
  g.d_variance = BatchMatrix::Zero(kOutputSize, B);
  auto& L = g.loss;

  const BatchMatrix diff = mean - labels;
  const BatchMatrix sq = diff.cwiseAbs2();
  L.pose = sq.sum() * per;
  g.d_mean += w.w_pose * 2.0 * per * diff;

  const BatchMatrix hinge = sq - variance;
  for (Eigen::Index b = 0; b < B; ++b) {
    for (int j = 0; j < kOutputSize; ++j) {
      if (hinge(j, b) > 0.0) {
        L.epi += hinge(j, b) * per;
        g.d_mean(j, b) += w.w_epi * 2.0 * per * diff(j, b);
        g.d_variance(j, b) -= w.w_epi * per;
      }
    }
  }

  // calibration: band alignment + rank correlation
  const Eigen::VectorXd e = foothold_errors(mean, labels);
  const Eigen::VectorXd s = variance.colwise().mean().transpose();
  Eigen::Index imin = 0, imax = 0;
  for (Eigen::Index b = 1; b < B; ++b) {
    if (e[b] < e[imin]) imin = b;
    if (e[b] > e[imax]) imax = b;
  }
  const double e_min = e[imin], e_max = e[imax];
  const double D = (e_max - e_min) + w.eps_band;
  const double r = w.s_max - w.s_min;
  Eigen::VectorXd target(B);
  for (Eigen::Index b = 0; b < B; ++b) target[b] = w.s_min + r * (e[b] - e_min) / D;

  Eigen::VectorXd g_e = Eigen::VectorXd::Zero(B);
  Eigen::VectorXd g_s = Eigen::VectorXd::Zero(B);
  double align = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const double dev = s[b] - target[b];
    align += std::abs(dev) / nb;
    const double a = w.w_cal * (dev > 0.0 ? 1.0 : (dev < 0.0 ? -1.0 : 0.0)) / nb;
    if (a == 0.0) continue;
    g_s[b] += a;
    g_e[b] -= a * r / D;
    g_e[imin] -= a * r * (-1.0 / D + (e[b] - e_min) / (D * D));
    g_e[imax] -= a * r * (-(e[b] - e_min) / (D * D));
  }

  const Eigen::ArrayXd de = e.array() - e.mean();
  const Eigen::ArrayXd ds = s.array() - s.mean();
  const double see = (de * de).sum(), sss = (ds * ds).sum();
  if (see > 0.0 && sss > 0.0) {
    const double norm = std::sqrt(see * sss);
    L.rho = (de * ds).sum() / norm;
    const Eigen::ArrayXd drho_de = ds / norm - L.rho * de / see;
    const Eigen::ArrayXd drho_ds = de / norm - L.rho * ds / sss;
    g_e.array() -= w.w_cal * w.lambda * drho_de;
    g_s.array() -= w.w_cal * w.lambda * drho_ds;
  } else {
    L.rho = 0.0;
  }
  L.cal = align + w.lambda * (1.0 - L.rho);

  for (Eigen::Index b = 0; b < B; ++b) {
    g.d_variance.col(b).array() += g_s[b] / kOutputSize;
    if (g_e[b] == 0.0) continue;
    for (int i = 0; i < kNumLegs; ++i) {
      const auto leg = diff.col(b).segment<3>(3 * i);
      const double n = leg.norm();
      if (n > 0.0) g.d_mean.col(b).segment<3>(3 * i) += g_e[b] * leg / (kNumLegs * n);
    }
  }

  L.total = w.w_pose * L.pose + w.w_epi * L.epi + w.w_cal * L.cal;
  return g;
}

LossBreakdown compute_loss(const BatchMatrix& mean, const BatchMatrix& variance, const BatchMatrix& labels,
                           const LossWeights& weights) {
  return loss_gradient(mean, variance, labels, weights).loss;
}

// ---------------------------------------------------------------------------
// Ensemble forward / backward over a batch

namespace {

struct PassCache {
  detail::MaskMatrices masks;
  detail::ChainCache u_cache;
  detail::ChainCache head_cache;
  Eigen::MatrixXd output;  // 12 x B
};

struct MemberCache {
  detail::ChainCache x_cache;
  Eigen::MatrixXd hx;
  std::vector<PassCache> passes;
};

struct BatchForward {
  std::vector<MemberCache> members;
  BatchMatrix mean;
  BatchMatrix raw_variance;
  BatchMatrix variance;
  BatchMatrix labels;
  int passes = 0;
};

BatchForward batch_forward(std::span<const TrainingSample> batch, const Ensemble& ensemble, int samples_per_member,
                           std::uint64_t seed, bool keep_caches) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int P = static_cast<int>(ensemble.size()) * samples_per_member;
  if (ensemble.empty() || samples_per_member < 1 || P < 2)
    throw InsufficientSamplesError("training needs K*M >= 2 stochastic passes");
  Eigen::MatrixXd X(kMainInputSize, B), U(kUncertaintyInputSize, B);
  BatchForward f;
  f.labels.resize(kOutputSize, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    X.col(b) = batch[static_cast<std::size_t>(b)].x.values;
    U.col(b) = batch[static_cast<std::size_t>(b)].u.values;
    f.labels.col(b) = batch[static_cast<std::size_t>(b)].y;
  }
  f.passes = P;
  f.members.resize(ensemble.size());
  BatchMatrix sum = BatchMatrix::Zero(kOutputSize, B);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto& net = ensemble[k];
    auto& mc = f.members[k];
    mc.hx = detail::run_chain(net, Branch::x, X, nullptr, &mc.x_cache);
    mc.passes.resize(static_cast<std::size_t>(samples_per_member));
    for (int m = 0; m < samples_per_member; ++m) {
      auto& pc = mc.passes[static_cast<std::size_t>(m)];
      pc.masks = detail::to_mask_matrices(sample_mask(net, seed, static_cast<int>(k), m));
      const Eigen::MatrixXd hu = detail::run_chain(net, Branch::u, U, &pc.masks, &pc.u_cache);
      Eigen::MatrixXd h(mc.hx.rows() + hu.rows(), B);
      h.topRows(mc.hx.rows()) = mc.hx;
      h.bottomRows(hu.rows()) = hu;
      pc.output = detail::run_chain(net, Branch::head, h, &pc.masks, &pc.head_cache);
      sum += pc.output;
    }
  }
  f.mean = sum / static_cast<double>(P);
  BatchMatrix sq = BatchMatrix::Zero(kOutputSize, B);
  for (const auto& mc : f.members)
    for (const auto& pc : mc.passes) sq += (pc.output - f.mean).cwiseAbs2();
  f.raw_variance = sq / static_cast<double>(P - 1);
  f.variance = f.raw_variance.cwiseMax(kVarianceFloor).cwiseMin(kVarianceCeiling);
  if (!keep_caches) f.members.clear();
  return f;
}

}  // namespace

LossBreakdown batch_loss(std::span<const TrainingSample> batch, const Ensemble& ensemble,
                         const LossWeights& weights, int samples_per_member, std::uint64_t seed) {
  const auto f = batch_forward(batch, ensemble, samples_per_member, seed, false);
  return compute_loss(f.mean, f.variance, f.labels, weights);
}

BackwardResult backward(std::span<const TrainingSample> batch, const Ensemble& ensemble,
                        const LossWeights& weights, int samples_per_member, std::uint64_t seed) {
  const auto f = batch_forward(batch, ensemble, samples_per_member, seed, true);
  const auto lg = loss_gradient(f.mean, f.variance, f.labels, weights);
  BatchMatrix d_raw = lg.d_variance;
  for (Eigen::Index b = 0; b < d_raw.cols(); ++b)
    for (int j = 0; j < kOutputSize; ++j) {
      const double v = f.raw_variance(j, b);
      if (!(v > kVarianceFloor && v < kVarianceCeiling)) d_raw(j, b) = 0.0;
    }
  const double P = f.passes;
  BackwardResult out;
  out.loss = lg.loss;
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto& net = ensemble[k];
    const auto& mc = f.members[k];
    auto grad = detail::NetworkGradient::zeros_like(net);
    Eigen::MatrixXd g_hx = Eigen::MatrixXd::Zero(mc.hx.rows(), mc.hx.cols());
    for (const auto& pc : mc.passes) {
      const Eigen::MatrixXd g_out =
          lg.d_mean / P + (2.0 / (P - 1.0)) * d_raw.cwiseProduct(pc.output - f.mean);
      const Eigen::MatrixXd g_h = detail::backprop_chain(net, Branch::head, pc.head_cache, &pc.masks, g_out, grad);
      g_hx += g_h.topRows(mc.hx.rows());
      detail::backprop_chain(net, Branch::u, pc.u_cache, &pc.masks, g_h.bottomRows(g_h.rows() - mc.hx.rows()),
                             grad);
    }
    detail::backprop_chain(net, Branch::x, mc.x_cache, nullptr, g_hx, grad);
    out.gradients.push_back(std::move(grad));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimization

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train epochs must be >= 1");
  if (batch_size < 4) throw ConfigError("train batch_size must be >= 4");
  if (!(learning_rate > 0.0)) throw ConfigError("train learning_rate must be > 0");
  if (samples_per_member < 1) throw ConfigError("train samples_per_member must be >= 1");
  if (members < 1) throw ConfigError("train members must be >= 1");
  if (members * samples_per_member < 2) throw ConfigError("train needs members * samples_per_member >= 2");
}

namespace {

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, const Ensemble& ensemble) : kind_(kind), lr_(lr) {
    for (const auto& net : ensemble) {
      m_.push_back(detail::NetworkGradient::zeros_like(net));
      v_.push_back(detail::NetworkGradient::zeros_like(net));
    }
  }

  void step(Ensemble& ensemble, const std::vector<detail::NetworkGradient>& grads) {
    ++t_;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, momentum = 0.9;
    const double c1 = 1.0 - std::pow(beta1, t_), c2 = 1.0 - std::pow(beta2, t_);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      for (std::size_t i = 0; i < ensemble[k].layers.size(); ++i) {
        auto& layer = ensemble[k].layers[i];
        const auto& g = grads[k].layers[i];
        auto& m = m_[k].layers[i];
        auto& v = v_[k].layers[i];
        if (kind_ == OptimizerKind::adam) {
          m.weights = beta1 * m.weights + (1.0 - beta1) * g.weights;
          v.weights = beta2 * v.weights + (1.0 - beta2) * g.weights.cwiseAbs2();
          m.bias = beta1 * m.bias + (1.0 - beta1) * g.bias;
          v.bias = beta2 * v.bias + (1.0 - beta2) * g.bias.cwiseAbs2();
          layer.weights.array() -= lr_ * (m.weights.array() / c1) / ((v.weights.array() / c2).sqrt() + eps);
          layer.bias.array() -= lr_ * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + eps);
        } else {
          m.weights = momentum * m.weights + g.weights;
          m.bias = momentum * m.bias + g.bias;
          layer.weights -= lr_ * m.weights;
          layer.bias -= lr_ * m.bias;
        }
      }
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  int t_ = 0;
  std::vector<detail::NetworkGradient> m_, v_;
};

bool all_finite(const std::vector<detail::NetworkGradient>& grads) {
  for (const auto& g : grads)
    for (const auto& l : g.layers)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& config, const LossWeights& weights) {
  config.validate();
  weights.validate();
  const auto n = data.samples.size();
  if (n < static_cast<std::size_t>(config.batch_size))
    throw ConfigError("dataset has " + std::to_string(n) + " samples, fewer than batch_size");

  TrainResult result;
  result.ensemble = init_ensemble(config.architecture, config.members, config.seed);
  Optimizer opt(config.optimizer, config.learning_rate, result.ensemble);
  std::vector<std::size_t> order(n);
  std::vector<TrainingSample> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::Stream shuffle(rng::key(config.seed, 0x53687566, epoch));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle.next_u64() % (i + 1)]);

    EpochLoss acc;
    acc.epoch = epoch;
    int batches = 0;
    for (std::size_t start = 0; start + 4 <= n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data.samples[order[i]]);
      const auto step_seed = rng::key(config.seed, 0x53746570, epoch, batches);
      auto res = backward(batch, result.ensemble, weights, config.samples_per_member, step_seed);
      if (!std::isfinite(res.loss.total) || !all_finite(res.gradients))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches));
      opt.step(result.ensemble, res.gradients);
      acc.pose += res.loss.pose;
      acc.epi += res.loss.epi;
      acc.cal += res.loss.cal;
      acc.total += res.loss.total;
      ++batches;
    }
    if (batches > 0) {
      acc.pose /= batches;
      acc.epi /= batches;
      acc.cal /= batches;
      acc.total /= batches;
    }
    result.report.epochs.push_back(acc);
  }
  return result;
}

std::string report_to_csv(const TrainingReport& report) {
  std::string out = "epoch,L_pose,L_epi,L_cal,total\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + "," + io::format_double(e.pose) + "," + io::format_double(e.epi) + "," +
           io::format_double(e.cal) + "," + io::format_double(e.total) + "\n";
  }
  return out;
}

}  // namespace footcast
