#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"

namespace racelab::sim {

struct VehicleParams {
  double wheelbase = 0.33;       // m
  double max_steer = 0.4;        // rad
  double max_speed = 7.0;        // m/s
  double max_steer_rate = 3.2;   // rad/s
  double max_accel = 7.0;        // m/s^2
  double k_v = 10.0;             // 1/s
  double k_delta = 10.0;         // 1/s

  void validate() const {
    if (!(wheelbase > 0 && max_steer > 0 && max_speed > 0 && max_steer_rate > 0 && max_accel > 0 && k_v > 0 &&
          k_delta > 0)) {
      throw ParameterError("vehicle parameters must all be > 0");
    }
    if (!(max_steer < std::numbers::pi / 2)) throw ParameterError("max_steer must be < pi/2");
  }
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;    // heading, (-pi, pi]
  double v = 0.0;      // speed
  double delta = 0.0;  // steering angle
  double t = 0.0;      // elapsed time

  Vec2 position() const { return {x, y}; }
  bool operator==(const VehicleState&) const = default;
};

/// Speed and steering references handed to the low-level controller.
struct ActionCommand {
  double v_ref = 0.0;
  double delta_ref = 0.0;

  bool operator==(const ActionCommand&) const = default;
};

inline ActionCommand clamp_command(ActionCommand cmd, const VehicleParams& p) {
  return {std::clamp(cmd.v_ref, 0.0, p.max_speed), std::clamp(cmd.delta_ref, -p.max_steer, p.max_steer)};
}

/// One step of the proportional actuators followed by the kinematic bicycle
/// update (explicit Euler, position from the heading at the start of the step).
inline VehicleState step_dynamics(const VehicleState& s, ActionCommand cmd, const VehicleParams& p, double dt) {
  cmd = clamp_command(cmd, p);
  VehicleState n = s;
  const double accel = std::clamp(p.k_v * (cmd.v_ref - s.v), -p.max_accel, p.max_accel);
  n.v = std::clamp(s.v + accel * dt, 0.0, p.max_speed);
  const double rate = std::clamp(p.k_delta * (cmd.delta_ref - s.delta), -p.max_steer_rate, p.max_steer_rate);
  n.delta = std::clamp(s.delta + rate * dt, -p.max_steer, p.max_steer);

  n.x = s.x + n.v * std::cos(s.psi) * dt;
  n.y = s.y + n.v * std::sin(s.psi) * dt;
  n.psi = n.delta == 0.0 ? s.psi : wrap_angle(s.psi + n.v * std::tan(n.delta) / p.wheelbase * dt);
  n.t = s.t + dt;
  return n;
}

}  // namespace racelab::sim
