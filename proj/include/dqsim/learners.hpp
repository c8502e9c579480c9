#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dqsim/mdp.hpp"
#include "dqsim/rng.hpp"

namespace dqsim {

enum class Algorithm { kVanilla, kSyncDouble, kAsyncDouble };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// Polynomial learning rate 1/t^omega, t >= 1, omega in (0,1).
double poly_lr(long t, double omega);

struct LearnerState {
  Algorithm algorithm = Algorithm::kVanilla;
  double omega = 0.8;
  QTable q_a;
  QTable q_b;  // unused for vanilla
  long t = 1;

  static LearnerState make(Algorithm alg, double omega, const Mdp& mdp);
};

struct PairSample {
  int next_state = -1;
  double reward = 0.0;
};

// Per-iteration record of what a step actually did, enough to reconstruct
// the update targets afterwards. Synchronous steps fill one sample per
// (s,a); asynchronous steps fill samples[0] and the visited pair.
struct StepInfo {
  bool chose_a = true;
  int visited_state = -1;
  int visited_action = -1;
  std::vector<PairSample> samples;
};

// Synchronous vanilla Q-learning: every (s,a) updated from an independent
// draw, targets read the pre-step table.
void vanilla_q_step(LearnerState& st, const Mdp& mdp, Rng& rng,
                    StepInfo* info = nullptr);

// Synchronous double Q-learning: one fair coin picks the table, every (s,a)
// of that table is updated from an independent draw; the chosen table picks
// the greedy action at s', the other table evaluates it.
void sync_double_q_step(LearnerState& st, const Mdp& mdp, Rng& rng,
                        StepInfo* info = nullptr);
// Same update with the coin forced, for tests and controlled runs.
void sync_double_q_step_forced(LearnerState& st, const Mdp& mdp, bool update_a,
                               Rng& rng, StepInfo* info = nullptr);

// Chooses the state-action pair each asynchronous iteration updates.
//  - round-robin: one cursor per Q-table cycling all pairs in index order,
//    which makes the covering number exactly n_states*n_actions per table;
//  - uniform-random: fresh uniform pair every step (generative restart);
//  - epsilon-greedy: acts at the current trajectory state on Q^A + Q^B.
class ExplorationPolicy {
 public:
  enum class Kind { kRoundRobin, kUniformRandom, kEpsilonGreedy };

  explicit ExplorationPolicy(Kind kind, double epsilon = 0.1)
      : kind_(kind), eps_(epsilon) {}

  Kind kind() const { return kind_; }

  std::pair<int, int> next_pair(bool chose_a, int current_state,
                                const LearnerState& st, const Mdp& mdp,
                                Rng& rng);

 private:
  Kind kind_;
  double eps_;
  long cursor_a_ = 0;
  long cursor_b_ = 0;
};

ExplorationPolicy::Kind exploration_from_name(const std::string& name);
std::string exploration_name(ExplorationPolicy::Kind k);

// Asynchronous double Q-learning: the coin picks the table, the policy picks
// the single pair to update, everything else is untouched. Returns the
// sampled next state (the new trajectory state).
int async_double_q_step(LearnerState& st, const Mdp& mdp,
                        ExplorationPolicy& policy, int current_state, Rng& rng,
                        StepInfo* info = nullptr);

// Exact conditional mean of the inter-estimator drive at (s,a): the coin and
// the transition are averaged out using the kernel, no sampling. Equals
//   0.5*(Q^B-Q^A)(s,a) + (gamma/2) * E_{s'}[Q^A(s',b*) - Q^B(s',a*)]
// with a* greedy for Q^A at s' and b* greedy for Q^B at s'.
double exact_drift_mean(const LearnerState& st, const Mdp& mdp, int s, int a);
QTable exact_drift_mean_table(const LearnerState& st, const Mdp& mdp);

}  // namespace dqsim
