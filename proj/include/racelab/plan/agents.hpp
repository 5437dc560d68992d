#pragma once

#include <functional>
#include <utility>

#include "racelab/plan/planners.hpp"
#include "racelab/sim/episode.hpp"

namespace racelab::plan {

class PurePursuitPlanner : public sim::Planner {
 public:
  PurePursuitPlanner(const track::RaceLine& line, double lookahead, VehicleParams p)
      : line_(line), lookahead_(lookahead), p_(p) {}

  sim::Decision decide(const VehicleState& s, const std::vector<double>&) override {
    return {pure_pursuit(s, line_, lookahead_, p_), std::nullopt, {}};
  }

 private:
  const track::RaceLine& line_;
  double lookahead_;
  VehicleParams p_;
};

class FgmPlanner : public sim::Planner {
 public:
  FgmPlanner(VehicleParams p, FgmConfig cfg) : p_(p), cfg_(cfg) {}

  sim::Decision decide(const VehicleState&, const std::vector<double>& scan) override {
    return {follow_the_gap(scan, p_, cfg_), std::nullopt, {}};
  }

 private:
  VehicleParams p_;
  FgmConfig cfg_;
};

/// Maps an observation to a steering correction in [-1, 1].
using Policy = std::function<double(const Observation&)>;

/// Pure pursuit on the reference line plus a learned steering correction.
class ModificationPlanner : public sim::Planner {
 public:
  ModificationPlanner(const track::RaceLine& line, double lookahead, VehicleParams p, double max_range, Policy policy)
      : line_(line), lookahead_(lookahead), p_(p), max_range_(max_range), policy_(std::move(policy)) {}

  sim::Decision decide(const VehicleState& s, const std::vector<double>& scan) override {
    const ActionCommand pf = pure_pursuit(s, line_, lookahead_, p_);
    const Observation obs = build_observation(s, pf, scan, p_, max_range_);
    const PolicyAction a{std::clamp(policy_(obs), -1.0, 1.0)};
    return {modification_plan(pf, a, p_), obs, a};
  }

  std::optional<Observation> observe(const VehicleState& s, const std::vector<double>& scan) const override {
    return build_observation(s, pure_pursuit(s, line_, lookahead_, p_), scan, p_, max_range_);
  }

 private:
  const track::RaceLine& line_;
  double lookahead_;
  VehicleParams p_;
  double max_range_;
  Policy policy_;
};

}  // namespace racelab::plan
