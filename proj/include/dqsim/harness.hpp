#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dqsim/config.hpp"
#include "dqsim/learners.hpp"
#include "dqsim/mdp.hpp"
#include "dqsim/theory.hpp"
#include "dqsim/trackers.hpp"
#include "json.hpp"

namespace dqsim {

// One row of a trial trace: the table state entering iteration t plus what
// iteration t then did. The closing row (t = T+1) carries norms only.
struct TraceRecord {
  long t = 0;
  double u_norm = 0.0;   // ||Q^B - Q^A||  (0 for vanilla)
  double ra_norm = 0.0;  // ||Q^A - Q*||
  double rb_norm = 0.0;  // ||Q^B - Q*||
  bool chose_a = false;
  int s = -1;
  int a = -1;
};

struct BlockStats {
  long begin = 0, end = 0;  // iteration range [begin, end)
  double max_u_norm = 0.0;
  double max_ra_norm = 0.0;
  long a_updates = 0;
};

struct VisitEvent {
  bool chose_a = false;
  int s = 0;
  int a = 0;
};

struct TrialTrace {
  std::vector<TraceRecord> records;
  std::vector<BlockStats> blocks;  // one per schedule epoch, when scheduled
  long total_iterations = 0;
  long total_a_updates = 0;
  // Running maxima over every iteration, recorded or not.
  double max_qa_norm = 0.0, max_qb_norm = 0.0;
  double max_ra_norm = 0.0, max_rb_norm = 0.0;
  double final_u_norm = 0.0, final_ra_norm = 0.0, final_rb_norm = 0.0;
  // max over iterations of max|drift| - gamma' * ||u||, when drift_check is on
  double max_drift_margin = -std::numeric_limits<double>::infinity();
  std::optional<TrackerSummary> trackers;
  std::vector<VisitEvent> visits;  // async pair stream, when collected
};

// Read-only inputs shared by every trial of an ensemble.
struct TrialContext {
  const Mdp* mdp = nullptr;
  const QTable* q_star = nullptr;
  std::optional<ResolvedSchedule> schedule;
  theory::DerivedConstants consts{};
};

TrialContext make_context(const ExperimentConfig& cfg, const Mdp& mdp,
                          const QTable& q_star);

// Deterministic for fixed (config, seed): one learner run with trace,
// per-block statistics, running norm maxima and optional trackers.
TrialTrace run_trial(const ExperimentConfig& cfg, const TrialContext& ctx,
                     std::uint64_t seed);

void write_trace_csv(const TrialTrace& trace, std::ostream& os);

enum class EnvelopeMode { kGapVsG, kGapVsSigmaD, kResidualVsD };

// Per-block booleans: block q passes when every iteration of
// [boundary_q, boundary_{q+1}) stayed at or below the block's envelope
// (G_{q+1}, sigma*D_{q+1} or D_{q+1}), with 1e-9 accumulation slack.
std::vector<bool> check_envelopes(const TrialTrace& trace,
                                  const theory::BlockSchedule& schedule,
                                  const theory::DerivedConstants& consts,
                                  EnvelopeMode mode);

struct UpdateCounts {
  std::vector<long> counts;        // A-updates per epoch k = 1..n
  std::vector<double> thresholds;  // c L tau_k^omega
  std::vector<bool> pass;
  long total_a_updates = 0;
};

UpdateCounts update_counts(const TrialTrace& trace,
                           const theory::BlockSchedule& schedule, double c,
                           int covering_l);

// Smallest window length such that every window of that many same-table
// updates visits all pairs; empty optional when some pair is never visited.
struct CoveringResult {
  std::optional<long> l_a, l_b, l;
};

CoveringResult measure_covering(const std::vector<VisitEvent>& visits, int n_states,
                                int n_actions);

// Visits of (s,a) by either table within the iteration window [t1, t2]
// (1-based indices into the visit stream).
long count_pair_visits(const std::vector<VisitEvent>& visits, int s, int a,
                       long t1, long t2);

// Spot-check the window visit-count floor |T(s,a,t,t+2kL-1)| >= k on random
// (s,a,t,k) tuples. Returns the number of failures.
long sa2l_spot_check(const std::vector<VisitEvent>& visits, int n_states,
                     int n_actions, long covering_l, int samples, Rng& rng);

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double final_ra_norm = 0.0;
  double final_u_norm = 0.0;
  bool final_ok = false;
  bool uniform_bound_ok = false;
  std::optional<bool> g_env_all, sigma_d_env_all, d_env_all;
  std::vector<bool> g_env, sigma_d_env, d_env, event_f;
  std::optional<long> xz_violations, yw_violations;
  std::optional<long> covering_l;  // -1 marks a never-covered stream
};

struct EnsembleReport {
  ExperimentConfig config;
  int n_states = 0, n_actions = 0;
  theory::DerivedConstants consts{};
  std::optional<ResolvedSchedule> schedule;
  std::vector<SeedResult> seeds;
  std::vector<CheckOutcome> checks;
  std::vector<std::string> notes;
  bool all_pass = false;
};

// Runs every seed (optionally across threads; the aggregate is
// order-independent and bitwise identical for any parallelism level) and
// evaluates the configured checks.
EnsembleReport run_ensemble(const ExperimentConfig& cfg, int parallelism);

nlohmann::json ensemble_report_to_json(const EnsembleReport& report);
nlohmann::json trial_report_to_json(const ExperimentConfig& cfg,
                                    const TrialContext& ctx, std::uint64_t seed,
                                    const TrialTrace& trace);

// Final-table overestimation at the root of a fan-out MDP:
// max_a Q_T(s0,a) - max_a Q*(s0,a), averaged over seeds, for vanilla and
// double Q-learning on identical seeds.
struct BiasStats {
  long n_seeds = 0;
  double vanilla_mean = 0.0, vanilla_se = 0.0;
  double double_mean = 0.0, double_se = 0.0;
  double diff_mean = 0.0, diff_se = 0.0;  // paired vanilla - double
};

BiasStats overestimation_probe(const Mdp& mdp, long horizon, double omega,
                               const std::vector<std::uint64_t>& seeds,
                               int parallelism);

nlohmann::json bias_stats_to_json(const BiasStats& stats);

// Runs fn(i) for i in [0,n) on up to `parallelism` threads. Results must be
// written to i-indexed slots so the outcome is order-independent.
void parallel_for(long n, int parallelism, const std::function<void(long)>& fn);

}  // namespace dqsim
