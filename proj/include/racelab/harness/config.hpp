#pragma once

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/learn/train.hpp"
#include "racelab/plan/planners.hpp"
#include "racelab/track/track.hpp"
#include "racelab/util/numfmt.hpp"
#include "racelab/util/seed.hpp"

namespace racelab::harness {

enum class AgentKind { PurePursuit, Fgm, Modification };

inline AgentKind parse_agent(std::string_view s) {
  if (s == "pure_pursuit") return AgentKind::PurePursuit;
  if (s == "fgm") return AgentKind::Fgm;
  if (s == "modification") return AgentKind::Modification;
  throw FormatError("unknown planner '" + std::string(s) + "' (pure_pursuit | fgm | modification)");
}

inline std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::PurePursuit: return "pure_pursuit";
    case AgentKind::Fgm: return "fgm";
    case AgentKind::Modification: return "modification";
  }
  return "?";
}

struct ExperimentConfig {
  std::string track_path = "oval.grid";  // relative paths resolve against the config file
  track::TrackOptions track;
  sim::EnvConfig env;          // env.obstacles applies to training
  reward::RewardConfig reward;
  learn::Td3Config td3;
  double lookahead = 1.2;
  plan::FgmConfig fgm;
  std::vector<AgentKind> agents{AgentKind::PurePursuit};
  std::vector<std::uint64_t> seeds{1};  // training seeds; one modification agent each
  std::uint64_t eval_seed = 7;
  int laps_benchmark1 = 100;
  int laps_benchmark2 = 1000;

  std::filesystem::path base_dir;  // where the config file lives; not part of the digest

  std::filesystem::path resolved_track() const {
    const std::filesystem::path p(track_path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  learn::TrainOptions train_options() const {
    learn::TrainOptions o;
    o.td3 = td3;
    o.env = env;
    o.reward = reward;
    o.lookahead = lookahead;
    return o;
  }

  void validate() const {
    env.validate();
    reward.validate();
    td3.validate();
    if (!(lookahead > 0.0)) throw ParameterError("lookahead must be > 0");
    if (seeds.empty()) throw ParameterError("eval.seeds must not be empty");
    if (laps_benchmark1 < 1 || laps_benchmark2 < 1) throw ParameterError("lap counts must be >= 1");
  }
};

namespace detail {

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
std::vector<T> split_list(std::string_view text, const std::function<T(std::string_view)>& conv) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = util::trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    if (!item.empty()) out.push_back(conv(item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw FormatError("bad boolean '" + std::string(s) + "'");
}

#define RACELAB_REAL(sec, name, member)                                                             \
  Field {                                                                                           \
    sec, name, [](ExperimentConfig& c, std::string_view v) { c.member = util::parse_double(v, name); }, \
        [](const ExperimentConfig& c) { return util::shortest(c.member); }                        \
  }
#define RACELAB_INT(sec, name, member, type)                                                            \
  Field {                                                                                               \
    sec, name, [](ExperimentConfig& c, std::string_view v) { c.member = static_cast<type>(util::parse_int(v, name)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                            \
  }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      {"track", "path", [](ExperimentConfig& c, std::string_view v) { c.track_path = std::string(v); },
       [](const ExperimentConfig& c) { return c.track_path; }},
      RACELAB_REAL("track", "margin", track.margin),
      RACELAB_REAL("track", "spacing", track.centerline.spacing),
      RACELAB_REAL("track", "a_lat_max", track.limits.a_lat_max),
      RACELAB_REAL("track", "a_long_max", track.limits.a_long_max),
      RACELAB_REAL("vehicle", "wheelbase", env.vehicle.wheelbase),
      RACELAB_REAL("vehicle", "max_steer", env.vehicle.max_steer),
      RACELAB_REAL("vehicle", "max_speed", env.vehicle.max_speed),
      RACELAB_REAL("vehicle", "max_steer_rate", env.vehicle.max_steer_rate),
      RACELAB_REAL("vehicle", "max_accel", env.vehicle.max_accel),
      RACELAB_REAL("vehicle", "k_v", env.vehicle.k_v),
      RACELAB_REAL("vehicle", "k_delta", env.vehicle.k_delta),
      RACELAB_REAL("env", "dt", env.dt),
      RACELAB_INT("env", "planner_period", env.planner_period, int),
      RACELAB_REAL("env", "timeout", env.timeout),
      RACELAB_REAL("env", "footprint", env.footprint),
      RACELAB_REAL("env", "lidar_fov", env.lidar.fov),
      RACELAB_REAL("env", "lidar_range", env.lidar.max_range),
      {"env", "obstacles", [](ExperimentConfig& c, std::string_view v) { c.env.obstacles = parse_bool(v); },
       [](const ExperimentConfig& c) { return std::string(c.env.obstacles ? "true" : "false"); }},
      {"reward", "variant", [](ExperimentConfig& c, std::string_view v) { c.reward.variant = reward::parse_variant(v); },
       [](const ExperimentConfig& c) { return std::string(reward::to_string(c.reward.variant)); }},
      {"reward", "reference",
       [](ExperimentConfig& c, std::string_view v) { c.reward.reference = reward::parse_reference(v); },
       [](const ExperimentConfig& c) { return std::string(reward::to_string(c.reward.reference)); }},
      RACELAB_REAL("reward", "beta_distance", reward.beta_distance),
      RACELAB_REAL("reward", "beta_heading", reward.beta_heading),
      RACELAB_REAL("reward", "beta_cross_track", reward.beta_cross_track),
      RACELAB_REAL("reward", "beta_steering", reward.beta_steering),
      RACELAB_REAL("td3", "gamma", td3.gamma),
      RACELAB_REAL("td3", "tau", td3.tau),
      RACELAB_REAL("td3", "policy_noise", td3.policy_noise),
      RACELAB_REAL("td3", "noise_clip", td3.noise_clip),
      RACELAB_INT("td3", "policy_delay", td3.policy_delay, int),
      RACELAB_REAL("td3", "exploration_noise", td3.exploration_noise),
      RACELAB_INT("td3", "batch", td3.batch, std::size_t),
      RACELAB_INT("td3", "total_steps", td3.total_steps, long long),
      RACELAB_INT("td3", "warmup", td3.warmup, long long),
      RACELAB_REAL("td3", "actor_lr", td3.actor_lr),
      RACELAB_REAL("td3", "critic_lr", td3.critic_lr),
      RACELAB_INT("td3", "hidden", td3.hidden, int),
      RACELAB_INT("td3", "replay_capacity", td3.replay_capacity, std::size_t),
      RACELAB_REAL("planner", "lookahead", lookahead),
      RACELAB_REAL("planner", "fgm_bubble_radius", fgm.bubble_radius),
      RACELAB_REAL("planner", "fgm_max_speed", fgm.max_speed),
      RACELAB_REAL("planner", "fgm_min_speed", fgm.min_speed),
      RACELAB_REAL("planner", "fgm_free_threshold", fgm.free_threshold),
      RACELAB_REAL("planner", "fgm_steer_gain", fgm.steer_gain),
      RACELAB_REAL("planner", "fgm_clearance_gain", fgm.clearance_gain),
      {"eval", "agents",
       [](ExperimentConfig& c, std::string_view v) {
         c.agents = split_list<AgentKind>(v, [](std::string_view s) { return parse_agent(s); });
       },
       [](const ExperimentConfig& c) {
         std::string s;
         for (auto a : c.agents) s += (s.empty() ? "" : ", ") + std::string(to_string(a));
         return s;
       }},
      {"eval", "seeds",
       [](ExperimentConfig& c, std::string_view v) {
         c.seeds = split_list<std::uint64_t>(
             v, [](std::string_view s) { return static_cast<std::uint64_t>(util::parse_int(s, "seed")); });
       },
       [](const ExperimentConfig& c) {
         std::string s;
         for (auto x : c.seeds) s += (s.empty() ? "" : ", ") + std::to_string(x);
         return s;
       }},
      RACELAB_INT("eval", "seed", eval_seed, std::uint64_t),
      RACELAB_INT("eval", "laps_benchmark1", laps_benchmark1, int),
      RACELAB_INT("eval", "laps_benchmark2", laps_benchmark2, int),
  };
  return f;
}

#undef RACELAB_REAL
#undef RACELAB_INT

}  // namespace detail

/// Reads `key = value` sections. Unknown sections or keys are errors so a
/// typo cannot silently fall back to a default.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError("config: " + std::string(e.what()));
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  const auto& table = detail::fields();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw FormatError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const detail::Field& f) { return section == f.section && key == f.key; });
      if (it == table.end()) throw FormatError("config: unknown key [" + section + "] " + key);
      try {
        it->set(c, util::trim(value.data()));
      } catch (const FormatError& e) {
        throw FormatError("config: [" + section + "] " + key + ": " + e.what());
      }
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

/// Every setting, defaults included, in a fixed order. Parsing this text gives
/// back the same configuration.
inline std::string canonical(const ExperimentConfig& c) {
  std::string out, section;
  for (const auto& f : detail::fields()) {
    if (section != f.section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(c) + '\n';
  }
  return out;
}

/// Hash of the canonical config and the bytes of the track file.
inline std::uint64_t config_digest(const ExperimentConfig& c) {
  std::ifstream in(c.resolved_track(), std::ios::binary);
  if (!in) throw IoError("cannot open track " + c.resolved_track().string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return util::fnv1a(bytes.str(), util::fnv1a(canonical(c)));
}

}  // namespace racelab::harness
