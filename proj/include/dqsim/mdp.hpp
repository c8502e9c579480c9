#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqsim/rng.hpp"
#include "json.hpp"

namespace dqsim {

struct TransitionSample {
  int next_state = 0;
  double reward = 0.0;
};

// Dense |S| x |A| action-value table.
class QTable {
 public:
  QTable() = default;
  QTable(int n_states, int n_actions, double fill = 0.0)
      : ns_(n_states), na_(n_actions),
        v_(static_cast<std::size_t>(n_states) * n_actions, fill) {}

  int n_states() const { return ns_; }
  int n_actions() const { return na_; }

  double& operator()(int s, int a) { return v_[static_cast<std::size_t>(s) * na_ + a]; }
  double operator()(int s, int a) const { return v_[static_cast<std::size_t>(s) * na_ + a]; }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  bool same_shape(const QTable& o) const { return ns_ == o.ns_ && na_ == o.na_; }

 private:
  int ns_ = 0, na_ = 0;
  std::vector<double> v_;
};

double sup_norm(const QTable& q);
double sup_norm_diff(const QTable& q, const QTable& q2);

// Lowest index wins ties, so greedy choices are reproducible.
int argmax_action(const QTable& q, int s);

// Finite MDP with a stochastic bounded reward: the sampled reward for
// (s,a,s') is reward_mean(s,a,s') plus uniform noise on [-eta, +eta].
// Construction validates that kernel rows are probability vectors and that
// |reward_mean| + eta <= r_max, so every sampled reward lies in
// [-r_max, r_max] by construction.
class Mdp {
 public:
  Mdp(int n_states, int n_actions, double gamma, double r_max,
      double noise_halfwidth, std::vector<double> kernel,
      std::vector<double> reward_mean);

  int n_states() const { return ns_; }
  int n_actions() const { return na_; }
  double gamma() const { return gamma_; }
  double r_max() const { return r_max_; }
  double noise_halfwidth() const { return eta_; }

  double kernel(int s, int a, int s2) const { return kernel_[idx(s, a, s2)]; }
  double reward_mean(int s, int a, int s2) const { return rmean_[idx(s, a, s2)]; }
  // E_{s'}[R(s,a,s')], precomputed at construction.
  double expected_reward(int s, int a) const {
    return exp_reward_[static_cast<std::size_t>(s) * na_ + a];
  }

  // One environment draw: s' by inverse-CDF walk of the kernel row, then the
  // reward. Consumes one uniform for the next state and, only when eta > 0,
  // one more for the noise.
  TransitionSample sample_transition(int s, int a, Rng& rng) const;

 private:
  std::size_t idx(int s, int a, int s2) const {
    return (static_cast<std::size_t>(s) * na_ + a) * ns_ + s2;
  }

  int ns_, na_;
  double gamma_, r_max_, eta_;
  std::vector<double> kernel_;      // [s][a][s']
  std::vector<double> rmean_;       // [s][a][s']
  std::vector<double> exp_reward_;  // [s][a]
};

// Exact Bellman operator: (T q)(s,a) = E_{s'}[R + gamma * max_a' q(s',a')].
QTable bellman_apply(const Mdp& mdp, const QTable& q);

// Value iteration from zero until the sup-norm step is <= tol*(1-gamma)/gamma,
// which bounds both ||Q - Q*|| and ||T Q - Q|| by tol.
QTable optimal_q(const Mdp& mdp, double tol);

nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& j);
Mdp load_mdp(const std::string& path);

nlohmann::json qtable_to_json(const QTable& q);
QTable qtable_from_json(const nlohmann::json& j);

// Generators used by experiment configs.
Mdp make_random_mdp(int n_states, int n_actions, double gamma, double r_max,
                    double noise_halfwidth, std::uint64_t seed);
// Deterministic cycle s -> s+1 mod n, reward 1 on entering state 0, else 0.
Mdp make_chain_mdp(int n_states, double gamma);
// One root state fanning out to `arms` absorbing states; every reward has
// mean zero with halfwidth eta, so Q* == 0 and any positive max-Q at the
// root is pure overestimation.
Mdp make_fanout_mdp(int arms, double gamma, double noise_halfwidth);

}  // namespace dqsim
