#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "footcast/gait.hpp"
#include "footcast/terrain.hpp"

namespace footcast {

inline constexpr int kMainInputSize = kScanSize + 3 + 1;           // scan, command, gait phase
inline constexpr int kUncertaintyInputSize = 3 + kPooledSize;      // command, pooled scan
inline constexpr int kOutputSize = 3 * kNumLegs;

using Output12 = Eigen::Matrix<double, kOutputSize, 1>;

struct MainInput {
  Eigen::Matrix<double, kMainInputSize, 1> values = Eigen::Matrix<double, kMainInputSize, 1>::Zero();
};

struct UncertaintyInput {
  Eigen::Matrix<double, kUncertaintyInputSize, 1> values =
      Eigen::Matrix<double, kUncertaintyInputSize, 1>::Zero();
};

MainInput make_main_input(const HeightScan& scan, const Command& cmd, double gait_phase);

/// `include_command = false` zeroes the command entries (terrain-only ablation).
UncertaintyInput make_uncertainty_input(const Command& cmd, const PooledDescriptor& pooled,
                                        bool include_command = true);

enum class Branch { x, u, head };
enum class Activation { tanh, linear };

std::string_view to_string(Branch b);
std::string_view to_string(Activation a);

struct Layer {
  Branch branch = Branch::head;
  Activation activation = Activation::tanh;
  double dropout = 0.0;     // applied to this layer's output
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out

  int inputs() const noexcept { return static_cast<int>(weights.cols()); }
  int outputs() const noexcept { return static_cast<int>(weights.rows()); }
};

/// Two-branch MLP. The x-branch reads MainInput, the u-branch reads
/// UncertaintyInput; their outputs are concatenated (x first) into the head.
/// Layers are stored grouped by branch in evaluation order.
struct Network {
  std::vector<Layer> layers;

  /// Indices of the layers tagged `b`, in evaluation order.
  std::vector<int> chain(Branch b) const;

  /// Throws StructuralError when sizes do not chain or dropout is out of [0, 1).
  void validate() const;
};

using Ensemble = std::vector<Network>;

struct Architecture {
  std::vector<int> x_sizes{kMainInputSize, 64, 32};
  std::vector<int> u_sizes{kUncertaintyInputSize, 32, 32};
  std::vector<int> head_hidden{64};
  double u_dropout = 0.1;
};

/// Glorot-uniform weights, zero biases.
Network init_network(const Architecture& arch, std::uint64_t seed);
Ensemble init_ensemble(const Architecture& arch, int members, std::uint64_t seed);

/// One stochastic pass: per layer either empty (no dropout) or a vector of
/// 0 / (1 - p)^-1 entries multiplying that layer's output.
struct DropoutMask {
  std::vector<Eigen::VectorXd> layers;
};

DropoutMask sample_mask(const Network& net, std::uint64_t seed, int member, int sample);

/// Deterministic pass without dropout.
Output12 forward(const Network& net, const MainInput& x, const UncertaintyInput& u);
/// Deterministic pass with a fixed dropout mask.
Output12 forward(const Network& net, const MainInput& x, const UncertaintyInput& u,
                 const DropoutMask& mask);

inline constexpr double kVarianceFloor = 1e-8;
inline constexpr double kVarianceCeiling = 1.0;

struct EpistemicPrediction {
  Output12 mean = Output12::Zero();
  Output12 variance = Output12::Zero();      // clamped to [kVarianceFloor, kVarianceCeiling]
  Output12 raw_variance = Output12::Zero();  // unbiased sample variance before clamping
  double scalar_summary = 0.0;               // mean of the clamped variances
};

/// Reduces stochastic pass outputs (one column per pass) to mean and unbiased
/// variance. Needs at least two passes.
EpistemicPrediction summarize_passes(const Eigen::Matrix<double, kOutputSize, Eigen::Dynamic>& passes);

/// All K x M stochastic passes, ordered member-major; mask for pass (k, m) is
/// drawn from (seed, k, m).
Eigen::Matrix<double, kOutputSize, Eigen::Dynamic> stochastic_passes(const Ensemble& ensemble,
                                                                     const MainInput& x,
                                                                     const UncertaintyInput& u,
                                                                     int samples_per_member,
                                                                     std::uint64_t seed);

EpistemicPrediction predict(const Ensemble& ensemble, const MainInput& x, const UncertaintyInput& u,
                            int samples_per_member, std::uint64_t seed);

std::string serialize_weights(const Ensemble& ensemble);
Ensemble deserialize_weights(std::string_view text);
void save_weights(const Ensemble& ensemble, const std::filesystem::path& path);
Ensemble load_weights(const std::filesystem::path& path);

namespace detail {

// Batched evaluation shared by inference and training. Inputs are one column
// per sample; mask matrices hold one column per sample or a single broadcast
// column. Products are evaluated column by column so that a batch of one
// reproduces forward() bit for bit.

struct ChainCache {
  std::vector<Eigen::MatrixXd> inputs;     // per layer
  std::vector<Eigen::MatrixXd> activated;  // per layer, before masking
};

using MaskMatrices = std::vector<Eigen::MatrixXd>;  // indexed like Network::layers

Eigen::MatrixXd run_chain(const Network& net, Branch branch, const Eigen::MatrixXd& input,
                          const MaskMatrices* masks, ChainCache* cache);

struct LayerGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct NetworkGradient {
  std::vector<LayerGradient> layers;

  static NetworkGradient zeros_like(const Network& net);
};

/// Accumulates parameter gradients for `branch` into `grad` and returns the
/// gradient with respect to the chain input.
Eigen::MatrixXd backprop_chain(const Network& net, Branch branch, const ChainCache& cache,
                               const MaskMatrices* masks, const Eigen::MatrixXd& grad_output,
                               NetworkGradient& grad);

MaskMatrices to_mask_matrices(const DropoutMask& mask);

}  // namespace detail

}  // namespace footcast
