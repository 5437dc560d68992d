#pragma once

#include "racelab/plan/planners.hpp"

namespace racelab::learn {

struct Transition {
  plan::Observation obs{};
  plan::PolicyAction action;
  double reward = 0.0;
  plan::Observation next_obs{};
  bool done = false;
};

}  // namespace racelab::learn
