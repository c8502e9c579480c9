#include "dqsim/mdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqsim {

namespace {

constexpr double kRowSumTol = 1e-12;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double sup_norm(const QTable& q) {
  double m = 0.0;
  for (double x : q.data()) m = std::max(m, std::abs(x));
  return m;
}

double sup_norm_diff(const QTable& q, const QTable& q2) {
  if (!q.same_shape(q2)) throw std::invalid_argument("sup_norm_diff: dimension mismatch");
  double m = 0.0;
  const auto& a = q.data();
  const auto& b = q2.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

int argmax_action(const QTable& q, int s) {
  int best = 0;
  double bv = q(s, 0);
  for (int a = 1; a < q.n_actions(); ++a) {
    if (q(s, a) > bv) {
      bv = q(s, a);
      best = a;
    }
  }
  return best;
}

Mdp::Mdp(int n_states, int n_actions, double gamma, double r_max,
         double noise_halfwidth, std::vector<double> kernel,
         std::vector<double> reward_mean)
    : ns_(n_states), na_(n_actions), gamma_(gamma), r_max_(r_max),
      eta_(noise_halfwidth), kernel_(std::move(kernel)),
      rmean_(std::move(reward_mean)) {
  require(ns_ > 0 && na_ > 0, "Mdp: n_states and n_actions must be positive");
  require(gamma_ > 0.0 && gamma_ < 1.0, "Mdp: gamma must lie in (0,1)");
  require(r_max_ > 0.0, "Mdp: r_max must be positive");
  require(eta_ >= 0.0, "Mdp: noise_halfwidth must be nonnegative");
  const std::size_t want = static_cast<std::size_t>(ns_) * na_ * ns_;
  require(kernel_.size() == want, "Mdp: kernel has wrong size");
  require(rmean_.size() == want, "Mdp: reward_mean has wrong size");

  exp_reward_.assign(static_cast<std::size_t>(ns_) * na_, 0.0);
  for (int s = 0; s < ns_; ++s) {
    for (int a = 0; a < na_; ++a) {
      double row_sum = 0.0;
      double er = 0.0;
      for (int s2 = 0; s2 < ns_; ++s2) {
        const double p = kernel_[idx(s, a, s2)];
        const double r = rmean_[idx(s, a, s2)];
        require(p >= 0.0, "Mdp: kernel entries must be nonnegative");
        require(std::abs(r) + eta_ <= r_max_ + kRowSumTol,
                "Mdp: |reward_mean| + noise_halfwidth must not exceed r_max");
        row_sum += p;
        er += p * r;
      }
      std::ostringstream os;
      os << "Mdp: kernel row (" << s << "," << a << ") sums to " << row_sum;
      require(std::abs(row_sum - 1.0) <= kRowSumTol, os.str());
      exp_reward_[static_cast<std::size_t>(s) * na_ + a] = er;
    }
  }
}

TransitionSample Mdp::sample_transition(int s, int a, Rng& rng) const {
  if (s < 0 || s >= ns_ || a < 0 || a >= na_)
    throw std::invalid_argument("sample_transition: state or action index out of range");
  const double u = rng.uniform01();
  int s2 = ns_ - 1;
  double acc = 0.0;
  for (int j = 0; j < ns_; ++j) {
    acc += kernel_[idx(s, a, j)];
    if (u < acc) {
      s2 = j;
      break;
    }
  }
  double r = rmean_[idx(s, a, s2)];
  if (eta_ > 0.0) r += rng.uniform(-eta_, eta_);
  return {s2, r};
}

QTable bellman_apply(const Mdp& mdp, const QTable& q) {
  if (q.n_states() != mdp.n_states() || q.n_actions() != mdp.n_actions())
    throw std::invalid_argument("bellman_apply: dimension mismatch");
  const int ns = mdp.n_states(), na = mdp.n_actions();
  std::vector<double> vmax(ns);
  for (int s2 = 0; s2 < ns; ++s2) vmax[s2] = q(s2, argmax_action(q, s2));
  QTable out(ns, na);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      double cont = 0.0;
      for (int s2 = 0; s2 < ns; ++s2) cont += mdp.kernel(s, a, s2) * vmax[s2];
      out(s, a) = mdp.expected_reward(s, a) + mdp.gamma() * cont;
    }
  }
  return out;
}

QTable optimal_q(const Mdp& mdp, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("optimal_q: tol must be positive");
  const double stop = tol * (1.0 - mdp.gamma()) / mdp.gamma();
  QTable q(mdp.n_states(), mdp.n_actions());
  for (;;) {
    QTable next = bellman_apply(mdp, q);
    const double step = sup_norm_diff(next, q);
    q = std::move(next);
    if (step <= stop) return q;
  }
}

nlohmann::json mdp_to_json(const Mdp& mdp) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  nlohmann::json kernel = nlohmann::json::array();
  nlohmann::json rmean = nlohmann::json::array();
  for (int s = 0; s < ns; ++s) {
    nlohmann::json ks = nlohmann::json::array(), rs = nlohmann::json::array();
    for (int a = 0; a < na; ++a) {
      nlohmann::json ka = nlohmann::json::array(), ra = nlohmann::json::array();
      for (int s2 = 0; s2 < ns; ++s2) {
        ka.push_back(mdp.kernel(s, a, s2));
        ra.push_back(mdp.reward_mean(s, a, s2));
      }
      ks.push_back(std::move(ka));
      rs.push_back(std::move(ra));
    }
    kernel.push_back(std::move(ks));
    rmean.push_back(std::move(rs));
  }
  return nlohmann::json{{"n_states", ns},
                        {"n_actions", na},
                        {"gamma", mdp.gamma()},
                        {"r_max", mdp.r_max()},
                        {"noise_halfwidth", mdp.noise_halfwidth()},
                        {"kernel", std::move(kernel)},
                        {"reward_mean", std::move(rmean)}};
}

Mdp mdp_from_json(const nlohmann::json& j) {
  const int ns = j.at("n_states").get<int>();
  const int na = j.at("n_actions").get<int>();
  require(ns > 0 && na > 0, "mdp json: n_states and n_actions must be positive");
  const auto& jk = j.at("kernel");
  const auto& jr = j.at("reward_mean");
  require(jk.size() == static_cast<std::size_t>(ns) && jr.size() == static_cast<std::size_t>(ns),
          "mdp json: kernel/reward_mean outer dimension must equal n_states");
  std::vector<double> kernel, rmean;
  kernel.reserve(static_cast<std::size_t>(ns) * na * ns);
  rmean.reserve(kernel.capacity());
  for (int s = 0; s < ns; ++s) {
    require(jk[s].size() == static_cast<std::size_t>(na) && jr[s].size() == static_cast<std::size_t>(na),
            "mdp json: kernel/reward_mean middle dimension must equal n_actions");
    for (int a = 0; a < na; ++a) {
      require(jk[s][a].size() == static_cast<std::size_t>(ns) && jr[s][a].size() == static_cast<std::size_t>(ns),
              "mdp json: kernel/reward_mean inner dimension must equal n_states");
      for (int s2 = 0; s2 < ns; ++s2) {
        kernel.push_back(jk[s][a][s2].get<double>());
        rmean.push_back(jr[s][a][s2].get<double>());
      }
    }
  }
  return Mdp(ns, na, j.at("gamma").get<double>(), j.at("r_max").get<double>(),
             j.at("noise_halfwidth").get<double>(), std::move(kernel), std::move(rmean));
}

Mdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MDP file: " + path);
  nlohmann::json j;
  in >> j;
  return mdp_from_json(j);
}

nlohmann::json qtable_to_json(const QTable& q) {
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < q.n_states(); ++s) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < q.n_actions(); ++a) row.push_back(q(s, a));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"n_states", q.n_states()}, {"n_actions", q.n_actions()},
                        {"values", std::move(rows)}};
}

QTable qtable_from_json(const nlohmann::json& j) {
  const int ns = j.at("n_states").get<int>();
  const int na = j.at("n_actions").get<int>();
  QTable q(ns, na);
  const auto& rows = j.at("values");
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) q(s, a) = rows[s][a].get<double>();
  return q;
}

Mdp make_random_mdp(int n_states, int n_actions, double gamma, double r_max,
                    double noise_halfwidth, std::uint64_t seed) {
  require(noise_halfwidth <= r_max, "make_random_mdp: noise_halfwidth must not exceed r_max");
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(n_states) * n_actions * n_states;
  std::vector<double> kernel(n), rmean(n);
  const double mean_cap = r_max - noise_halfwidth;
  std::size_t i = 0;
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row_sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        kernel[i + s2] = 0.05 + rng.uniform01();  // keep rows bounded away from degenerate
        row_sum += kernel[i + s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) {
        kernel[i + s2] /= row_sum;
        rmean[i + s2] = rng.uniform(-mean_cap, mean_cap);
      }
      i += n_states;
    }
  }
  // Renormalize exactly so the row-sum invariant holds bit-tight.
  i = 0;
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row_sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) row_sum += kernel[i + s2];
      kernel[i + n_states - 1] += 1.0 - row_sum;
      i += n_states;
    }
  }
  return Mdp(n_states, n_actions, gamma, r_max, noise_halfwidth,
             std::move(kernel), std::move(rmean));
}

Mdp make_chain_mdp(int n_states, double gamma) {
  require(n_states >= 1, "make_chain_mdp: need at least one state");
  const int na = 1;
  const std::size_t n = static_cast<std::size_t>(n_states) * na * n_states;
  std::vector<double> kernel(n, 0.0), rmean(n, 0.0);
  for (int s = 0; s < n_states; ++s) {
    const int s2 = (s + 1) % n_states;
    const std::size_t base = static_cast<std::size_t>(s) * n_states;
    kernel[base + s2] = 1.0;
    rmean[base + s2] = (s2 == 0) ? 1.0 : 0.0;
  }
  return Mdp(n_states, na, gamma, 1.0, 0.0, std::move(kernel), std::move(rmean));
}

Mdp make_fanout_mdp(int arms, double gamma, double noise_halfwidth) {
  require(arms >= 1, "make_fanout_mdp: need at least one arm");
  const int ns = arms + 1;  // state 0 is the root
  const int na = arms;
  const std::size_t n = static_cast<std::size_t>(ns) * na * ns;
  std::vector<double> kernel(n, 0.0);
  std::vector<double> rmean(n, 0.0);
  auto at = [&](int s, int a, int s2) {
    return (static_cast<std::size_t>(s) * na + a) * ns + s2;
  };
  for (int a = 0; a < na; ++a) kernel[at(0, a, a + 1)] = 1.0;
  for (int arm = 1; arm < ns; ++arm)
    for (int a = 0; a < na; ++a) kernel[at(arm, a, arm)] = 1.0;
  const double r_max = noise_halfwidth > 0.0 ? noise_halfwidth : 1.0;
  return Mdp(ns, na, gamma, r_max, noise_halfwidth, std::move(kernel), std::move(rmean));
}

}  // namespace dqsim
