#include "footcast/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "footcast/errors.hpp"
#include "footcast/rng.hpp"

namespace footcast {

void GaitConfig::validate() const {
  if (!(cycle_period > 0.0)) throw ConfigError("gait cycle_period must be > 0");
  if (!(duty_factor > 0.0 && duty_factor < 1.0)) throw ConfigError("gait duty_factor must be in (0, 1)");
  if (!(step_noise_flat >= 0.0) || !(step_noise_slope_gain >= 0.0))
    throw ConfigError("gait noise parameters must be >= 0");
}

Eigen::Matrix<double, 12, 1> FootholdSet::stacked() const {
  Eigen::Matrix<double, 12, 1> v;
  for (int i = 0; i < kNumLegs; ++i) v.segment<3>(3 * i) = feet[static_cast<std::size_t>(i)];
  return v;
}

FootholdSet FootholdSet::from_stacked(const Eigen::Matrix<double, 12, 1>& v, Frame frame) {
  FootholdSet out;
  out.frame = frame;
  for (int i = 0; i < kNumLegs; ++i) out.feet[static_cast<std::size_t>(i)] = v.segment<3>(3 * i);
  return out;
}

double wrap_angle(double a) noexcept {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

FootholdSet to_world(const FootholdSet& feet, const RobotState& state, const HeightField& field) {
  if (feet.frame == Frame::world) return feet;
  const double c = std::cos(state.yaw), s = std::sin(state.yaw);
  const double ground = field.elevation_clamped(state.x, state.y);
  FootholdSet out;
  out.frame = Frame::world;
  for (std::size_t i = 0; i < out.feet.size(); ++i) {
    const auto& p = feet.feet[i];
    out.feet[i] = {state.x + c * p.x() - s * p.y(), state.y + s * p.x() + c * p.y(), p.z() + ground};
  }
  return out;
}

FootholdSet to_base(const FootholdSet& feet, const RobotState& state, const HeightField& field) {
  if (feet.frame == Frame::base) return feet;
  const double c = std::cos(state.yaw), s = std::sin(state.yaw);
  const double ground = field.elevation_clamped(state.x, state.y);
  FootholdSet out;
  out.frame = Frame::base;
  for (std::size_t i = 0; i < out.feet.size(); ++i) {
    const double dx = feet.feet[i].x() - state.x, dy = feet.feet[i].y() - state.y;
    out.feet[i] = {c * dx + s * dy, -s * dx + c * dy, feet.feet[i].z() - ground};
  }
  return out;
}

FootholdSet nominal_footholds(const RobotState& state, const Command& cmd, const HeightField& field,
                              const GaitConfig& cfg) {
  const double half_stance = 0.5 * cfg.stance_duration();
  const double c = std::cos(state.yaw), s = std::sin(state.yaw);
  const double ground = field.elevation(state.x, state.y);
  FootholdSet out;
  out.frame = Frame::base;
  for (std::size_t i = 0; i < out.feet.size(); ++i) {
    const Eigen::Vector2d& hip = cfg.hip_offsets[i];
    // hip velocity in the base frame under body twist (vx, vy, yaw_rate)
    const Eigen::Vector2d hip_vel(cmd.vx - cmd.yaw_rate * hip.y(), cmd.vy + cmd.yaw_rate * hip.x());
    const Eigen::Vector2d xy = hip + half_stance * hip_vel;
    const double wx = state.x + c * xy.x() - s * xy.y();
    const double wy = state.y + s * xy.x() + c * xy.y();
    out.feet[i] = {xy.x(), xy.y(), field.elevation(wx, wy) - ground};
  }
  return out;
}

std::uint64_t foothold_stream(std::uint64_t seed, std::uint64_t step) noexcept {
  return rng::key(seed, 0x466f6f74, step);
}

FootholdSet actual_footholds(const FootholdSet& nominal_world, const HeightField& field,
                             const GaitConfig& cfg, std::uint64_t stream) {
  if (nominal_world.frame != Frame::world)
    throw StructuralError("actual_footholds expects world-frame footholds");
  FootholdSet out;
  out.frame = Frame::world;
  for (std::size_t i = 0; i < out.feet.size(); ++i) {
    const auto& p = nominal_world.feet[i];
    const double std_dev = cfg.step_noise_flat + cfg.step_noise_slope_gain * field.slope(p.x(), p.y());
    if (std_dev == 0.0) {
      out.feet[i] = p;
      continue;
    }
    double x = p.x() + std_dev * rng::normal(rng::key(stream, i, 0));
    double y = p.y() + std_dev * rng::normal(rng::key(stream, i, 1));
    x = std::clamp(x, field.origin_x(), field.max_x());
    y = std::clamp(y, field.origin_y(), field.max_y());
    out.feet[i] = {x, y, field.elevation_clamped(x, y)};
  }
  return out;
}

RobotState advance_state(const RobotState& state, const Command& cmd, double dt, double cycle_period) {
  RobotState next;
  next.x = state.x + cmd.vx * std::cos(state.yaw) * dt;
  next.y = state.y + cmd.vx * std::sin(state.yaw) * dt;
  next.yaw = wrap_angle(state.yaw + cmd.yaw_rate * dt);
  next.gait_phase = std::fmod(state.gait_phase + dt / cycle_period, 1.0);
  if (next.gait_phase < 0.0) next.gait_phase += 1.0;
  return next;
}

}  // namespace footcast
