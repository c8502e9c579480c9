#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dqsim/learners.hpp"
#include "dqsim/mdp.hpp"
#include "dqsim/theory.hpp"
#include "json.hpp"

namespace dqsim {

struct GeneratorSpec {
  std::string kind;  // "random" | "chain" | "fanout"
  int n_states = 0;
  int n_actions = 0;
  int arms = 0;
  double gamma = 0.5;
  double r_max = 1.0;
  double noise_halfwidth = 0.0;
  std::uint64_t seed = 0;
};

// Either a JSON file on disk or a generator spec; exactly one.
struct MdpSource {
  std::string path;
  std::optional<GeneratorSpec> generator;
};

// Block schedule inputs. The run length of a scheduled trial is the last
// boundary minus one, so the final checked block is complete. `c` may be
// given directly or as a multiple of the composed lower bound at tau_1.
struct ScheduleSpec {
  long tau_1 = 0;
  double kappa = 0.8;
  double delta_slack = 0.1;
  std::optional<double> c;
  std::optional<double> c_from_min_factor;
  int n_blocks = 1;
  std::optional<int> covering_l;  // defaults: 1 for sync, |S||A| for round-robin async
};

struct ExperimentConfig {
  int schema_version = 1;
  MdpSource mdp;
  Algorithm algorithm = Algorithm::kSyncDouble;
  double omega = 0.8;
  std::optional<long> horizon_t;        // exactly one of horizon_t / schedule
  std::optional<ScheduleSpec> schedule;
  double epsilon = 0.5;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds;
  ExplorationPolicy::Kind exploration = ExplorationPolicy::Kind::kUniformRandom;
  double epsilon_greedy = 0.1;
  bool trackers = false;
  bool drift_check = false;
  bool collect_visits = false;
  long stride = 1;
  bool write_trace_csv = false;
  std::string out_dir;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

Mdp build_mdp(const MdpSource& src);

struct ResolvedSchedule {
  double c = 0.0;
  int covering_l = 1;
  theory::BlockSchedule blocks;
};

// Expands the schedule spec against the MDP: resolves c, the covering number
// and the boundary list. Empty when the config is horizon-driven.
std::optional<ResolvedSchedule> resolve_schedule(const ExperimentConfig& cfg, const Mdp& mdp);

// Parse with line/column diagnostics on failure.
nlohmann::json parse_json_file(const std::string& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

}  // namespace dqsim
