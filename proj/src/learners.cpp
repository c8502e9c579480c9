#include "dqsim/learners.hpp"

#include <cmath>
#include <stdexcept>

namespace dqsim {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kVanilla: return "vanilla";
    case Algorithm::kSyncDouble: return "sync-double";
    case Algorithm::kAsyncDouble: return "async-double";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "vanilla") return Algorithm::kVanilla;
  if (name == "sync-double") return Algorithm::kSyncDouble;
  if (name == "async-double") return Algorithm::kAsyncDouble;
  throw std::invalid_argument("unknown algorithm: " + name);
}

double poly_lr(long t, double omega) {
  if (t < 1) throw std::invalid_argument("poly_lr: t must be >= 1");
  if (!(omega > 0.0 && omega < 1.0))
    throw std::invalid_argument("poly_lr: omega must lie in (0,1)");
  return std::pow(static_cast<double>(t), -omega);
}

LearnerState LearnerState::make(Algorithm alg, double omega, const Mdp& mdp) {
  LearnerState st;
  st.algorithm = alg;
  st.omega = omega;
  st.q_a = QTable(mdp.n_states(), mdp.n_actions());
  if (alg != Algorithm::kVanilla) st.q_b = QTable(mdp.n_states(), mdp.n_actions());
  st.t = 1;
  return st;
}

void vanilla_q_step(LearnerState& st, const Mdp& mdp, Rng& rng, StepInfo* info) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  const double alpha = poly_lr(st.t, st.omega);
  const double gamma = mdp.gamma();
  const QTable old = st.q_a;
  if (info) {
    info->chose_a = true;
    info->visited_state = info->visited_action = -1;
    info->samples.assign(static_cast<std::size_t>(ns) * na, {});
  }
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      const TransitionSample tr = mdp.sample_transition(s, a, rng);
      const double target = tr.reward + gamma * old(tr.next_state, argmax_action(old, tr.next_state));
      st.q_a(s, a) = (1.0 - alpha) * old(s, a) + alpha * target;
      if (info) info->samples[static_cast<std::size_t>(s) * na + a] = {tr.next_state, tr.reward};
    }
  }
  ++st.t;
}

void sync_double_q_step_forced(LearnerState& st, const Mdp& mdp, bool update_a,
                               Rng& rng, StepInfo* info) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  const double alpha = poly_lr(st.t, st.omega);
  const double gamma = mdp.gamma();
  QTable& chosen = update_a ? st.q_a : st.q_b;
  const QTable& other = update_a ? st.q_b : st.q_a;
  const QTable old = chosen;
  if (info) {
    info->chose_a = update_a;
    info->visited_state = info->visited_action = -1;
    info->samples.assign(static_cast<std::size_t>(ns) * na, {});
  }
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      const TransitionSample tr = mdp.sample_transition(s, a, rng);
      const int greedy = argmax_action(old, tr.next_state);
      const double target = tr.reward + gamma * other(tr.next_state, greedy);
      chosen(s, a) = (1.0 - alpha) * old(s, a) + alpha * target;
      if (info) info->samples[static_cast<std::size_t>(s) * na + a] = {tr.next_state, tr.reward};
    }
  }
  ++st.t;
}

void sync_double_q_step(LearnerState& st, const Mdp& mdp, Rng& rng, StepInfo* info) {
  const bool update_a = rng.coin();
  sync_double_q_step_forced(st, mdp, update_a, rng, info);
}

std::pair<int, int> ExplorationPolicy::next_pair(bool chose_a, int current_state,
                                                 const LearnerState& st,
                                                 const Mdp& mdp, Rng& rng) {
  const int na = mdp.n_actions();
  switch (kind_) {
    case Kind::kRoundRobin: {
      long& cur = chose_a ? cursor_a_ : cursor_b_;
      const long p = cur;
      cur = (cur + 1) % (static_cast<long>(mdp.n_states()) * na);
      return {static_cast<int>(p / na), static_cast<int>(p % na)};
    }
    case Kind::kUniformRandom: {
      const int p = rng.below(mdp.n_states() * na);
      return {p / na, p % na};
    }
    case Kind::kEpsilonGreedy: {
      const double u = rng.uniform01();
      if (u < eps_) return {current_state, rng.below(na)};
      int best = 0;
      double bv = st.q_a(current_state, 0) + st.q_b(current_state, 0);
      for (int a = 1; a < na; ++a) {
        const double v = st.q_a(current_state, a) + st.q_b(current_state, a);
        if (v > bv) {
          bv = v;
          best = a;
        }
      }
      return {current_state, best};
    }
  }
  throw std::logic_error("unreachable");
}

ExplorationPolicy::Kind exploration_from_name(const std::string& name) {
  if (name == "round-robin") return ExplorationPolicy::Kind::kRoundRobin;
  if (name == "uniform-random") return ExplorationPolicy::Kind::kUniformRandom;
  if (name == "epsilon-greedy") return ExplorationPolicy::Kind::kEpsilonGreedy;
  throw std::invalid_argument("unknown exploration policy: " + name);
}

std::string exploration_name(ExplorationPolicy::Kind k) {
  switch (k) {
    case ExplorationPolicy::Kind::kRoundRobin: return "round-robin";
    case ExplorationPolicy::Kind::kUniformRandom: return "uniform-random";
    case ExplorationPolicy::Kind::kEpsilonGreedy: return "epsilon-greedy";
  }
  return "?";
}

int async_double_q_step(LearnerState& st, const Mdp& mdp,
                        ExplorationPolicy& policy, int current_state, Rng& rng,
                        StepInfo* info) {
  // The coin is drawn before the pair so a per-table policy cursor knows
  // which table it is feeding; the draws are independent either way.
  const bool update_a = rng.coin();
  const auto [s, a] = policy.next_pair(update_a, current_state, st, mdp, rng);
  const double alpha = poly_lr(st.t, st.omega);
  const TransitionSample tr = mdp.sample_transition(s, a, rng);
  QTable& chosen = update_a ? st.q_a : st.q_b;
  const QTable& other = update_a ? st.q_b : st.q_a;
  const int greedy = argmax_action(chosen, tr.next_state);
  const double target = tr.reward + mdp.gamma() * other(tr.next_state, greedy);
  chosen(s, a) = (1.0 - alpha) * chosen(s, a) + alpha * target;
  if (info) {
    info->chose_a = update_a;
    info->visited_state = s;
    info->visited_action = a;
    info->samples.assign(1, PairSample{tr.next_state, tr.reward});
  }
  ++st.t;
  return tr.next_state;
}

QTable exact_drift_mean_table(const LearnerState& st, const Mdp& mdp) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  std::vector<double> cross(ns);
  for (int s2 = 0; s2 < ns; ++s2) {
    const int a_star = argmax_action(st.q_a, s2);
    const int b_star = argmax_action(st.q_b, s2);
    cross[s2] = st.q_a(s2, b_star) - st.q_b(s2, a_star);
  }
  QTable out(ns, na);
  const double half_gamma = 0.5 * mdp.gamma();
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      double e = 0.0;
      for (int s2 = 0; s2 < ns; ++s2) e += mdp.kernel(s, a, s2) * cross[s2];
      out(s, a) = 0.5 * (st.q_b(s, a) - st.q_a(s, a)) + half_gamma * e;
    }
  }
  return out;
}

double exact_drift_mean(const LearnerState& st, const Mdp& mdp, int s, int a) {
  const int ns = mdp.n_states();
  double e = 0.0;
  for (int s2 = 0; s2 < ns; ++s2) {
    const int a_star = argmax_action(st.q_a, s2);
    const int b_star = argmax_action(st.q_b, s2);
    e += mdp.kernel(s, a, s2) * (st.q_a(s2, b_star) - st.q_b(s2, a_star));
  }
  return 0.5 * (st.q_b(s, a) - st.q_a(s, a)) + 0.5 * mdp.gamma() * e;
}

}  // namespace dqsim
