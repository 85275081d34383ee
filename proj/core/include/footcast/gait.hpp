#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "footcast/terrain.hpp"

namespace footcast {

// Synthetic trot-gait oracle. Stands in for a trained locomotion policy: it
// produces touchdown targets (training labels) and noisy "actual" touchdowns.

enum class Leg { LF = 0, RF = 1, LH = 2, RH = 3 };
inline constexpr int kNumLegs = 4;

struct GaitConfig {
  double cycle_period = 0.6;  // s
  double duty_factor = 0.5;
  std::array<Eigen::Vector2d, kNumLegs> hip_offsets{
      Eigen::Vector2d(0.19, 0.12), Eigen::Vector2d(0.19, -0.12), Eigen::Vector2d(-0.19, 0.12),
      Eigen::Vector2d(-0.19, -0.12)};
  double step_noise_flat = 0.01;        // m, std of xy slip on level ground
  double step_noise_slope_gain = 0.05;  // m per unit slope
  std::uint64_t seed = 0;

  double stance_duration() const noexcept { return cycle_period * duty_factor; }
  void validate() const;
};

enum class Frame { base, world };

/// Four feet in LF, RF, LH, RH order. In the base frame, z is measured from the
/// ground elevation under the base, matching the height-scan convention.
struct FootholdSet {
  std::array<Eigen::Vector3d, kNumLegs> feet{};
  Frame frame = Frame::base;

  Eigen::Matrix<double, 12, 1> stacked() const;
  static FootholdSet from_stacked(const Eigen::Matrix<double, 12, 1>& v, Frame frame);
};

struct Command {
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double gait_phase = 0.0;

  Pose2 pose() const noexcept { return {x, y, yaw}; }
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a) noexcept;

FootholdSet to_world(const FootholdSet& feet, const RobotState& state, const HeightField& field);
FootholdSet to_base(const FootholdSet& feet, const RobotState& state, const HeightField& field);

/// Raibert-style touchdown targets: hip + half the stance-phase travel of the hip
/// under `cmd`, z from terrain. Returned in the base frame of `state`.
FootholdSet nominal_footholds(const RobotState& state, const Command& cmd, const HeightField& field,
                              const GaitConfig& cfg);

/// Perturbs world-frame touchdowns in xy with zero-mean Gaussian slip whose std grows
/// with local slope; z is re-queried from the terrain. Deterministic per stream id.
FootholdSet actual_footholds(const FootholdSet& nominal_world, const HeightField& field,
                             const GaitConfig& cfg, std::uint64_t stream);

/// Stream id for one touchdown event.
std::uint64_t foothold_stream(std::uint64_t seed, std::uint64_t step) noexcept;

/// Unicycle step; vy is ignored (it only shapes labels), phase advances by dt/period.
RobotState advance_state(const RobotState& state, const Command& cmd, double dt,
                         double cycle_period = 0.6);

}  // namespace footcast
