#include "dqsim/trackers.hpp"

#include <cmath>
#include <stdexcept>

namespace dqsim {

SandwichTrackers::SandwichTrackers(const theory::BlockSchedule& schedule,
                                   const theory::DerivedConstants& consts,
                                   double omega, int n_states, int n_actions,
                                   double tol)
    : schedule_(schedule), consts_(consts), omega_(omega), tol_(tol),
      ns_(n_states), na_(n_actions),
      x_(n_states, n_actions), z_(n_states, n_actions),
      y_(n_states, n_actions), w_(n_states, n_actions) {}

void SandwichTrackers::restart(long block_index, const QTable& u, const QTable& r) {
  g_cur_ = theory::g_seq(block_index, consts_);
  d_cur_ = theory::d_seq(block_index, consts_);
  x_ = QTable(ns_, na_, g_cur_);
  z_ = QTable(ns_, na_, 0.0);
  y_ = QTable(ns_, na_, d_cur_);
  w_ = QTable(ns_, na_, 0.0);
  const bool u_ok = sup_norm(u) <= g_cur_ + tol_;
  const bool r_ok = sup_norm(r) <= d_cur_ + tol_;
  xz_enabled_ = u_ok;
  yw_enabled_ = u_ok && r_ok;  // the residual sandwich also assumes the gap envelope
  ++summary_.restarts;
  if (!u_ok) ++summary_.skipped_restarts_u;
  if (!r_ok) ++summary_.skipped_restarts_r;
}

void SandwichTrackers::begin_iteration(long t, const QTable& u, const QTable& r) {
  if (!started_) {
    started_ = true;
    restart(0, u, r);
  }
  while (next_boundary_ < schedule_.boundaries.size() &&
         t == schedule_.boundaries[next_boundary_]) {
    restart(static_cast<long>(next_boundary_) + 1, u, r);
    ++next_boundary_;
  }
}

void SandwichTrackers::advance_raw(long t, const std::vector<std::uint8_t>& visit_mask,
                                   const std::vector<double>& z,
                                   const std::vector<std::uint8_t>& a_mask,
                                   const std::vector<double>& w) {
  const double alpha = poly_lr(t, omega_);
  const std::size_t n = static_cast<std::size_t>(ns_) * na_;
  if (visit_mask.size() != n || z.size() != n || a_mask.size() != n || w.size() != n)
    throw std::invalid_argument("advance_raw: mask/input size mismatch");
  auto& xd = x_.data();
  auto& zd = z_.data();
  auto& yd = y_.data();
  auto& wd = w_.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (visit_mask[i]) {
      xd[i] = (1.0 - alpha) * xd[i] + alpha * consts_.gamma_prime * g_cur_;
      zd[i] = (1.0 - alpha) * zd[i] + alpha * z[i];
    }
    if (a_mask[i]) {
      yd[i] = (1.0 - alpha) * yd[i] + alpha * consts_.gamma_dprime * d_cur_;
      wd[i] = (1.0 - alpha) * wd[i] + alpha * w[i];
    }
  }
}

void SandwichTrackers::advance(long t, const LearnerState& pre, const Mdp& mdp,
                               const StepInfo& info) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  const std::size_t n = static_cast<std::size_t>(ns) * na;
  const double gamma = mdp.gamma();
  const QTable drift = exact_drift_mean_table(pre, mdp);

  double max_abs_drift = 0.0, sup_u = 0.0;
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) {
      max_abs_drift = std::max(max_abs_drift, std::abs(drift(s, a)));
      sup_u = std::max(sup_u, std::abs(pre.q_b(s, a) - pre.q_a(s, a)));
    }
  summary_.max_drift_margin =
      std::max(summary_.max_drift_margin, max_abs_drift - consts_.gamma_prime * sup_u);

  std::vector<double> max_qa(ns);  // max_a' Q^A(s', a'), for the exact Bellman row
  for (int s2 = 0; s2 < ns; ++s2) max_qa[s2] = pre.q_a(s2, argmax_action(pre.q_a, s2));

  std::vector<std::uint8_t> visit_mask(n, 0), a_mask(n, 0);
  std::vector<double> z(n, 0.0), w(n, 0.0);

  auto fill_pair = [&](int s, int a, const PairSample& smp) {
    const std::size_t i = static_cast<std::size_t>(s) * na + a;
    visit_mask[i] = 1;
    const int s2 = smp.next_state;
    double f;
    if (info.chose_a) {
      const int a_star = argmax_action(pre.q_a, s2);
      f = pre.q_b(s, a) - smp.reward - gamma * pre.q_b(s2, a_star);
    } else {
      const int b_star = argmax_action(pre.q_b, s2);
      f = smp.reward + gamma * pre.q_a(s2, b_star) - pre.q_a(s, a);
    }
    z[i] = f - drift(s, a);
    if (info.chose_a) {
      a_mask[i] = 1;
      const int a_star = argmax_action(pre.q_a, s2);
      const double empirical = smp.reward + gamma * pre.q_a(s2, a_star);
      double exact = mdp.expected_reward(s, a);
      for (int j = 0; j < ns; ++j) exact += gamma * mdp.kernel(s, a, j) * max_qa[j];
      w[i] = empirical - exact;
    }
  };

  if (info.visited_state >= 0) {
    fill_pair(info.visited_state, info.visited_action, info.samples.at(0));
  } else {
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a)
        fill_pair(s, a, info.samples.at(static_cast<std::size_t>(s) * na + a));
  }
  advance_raw(t, visit_mask, z, a_mask, w);
}

void SandwichTrackers::check(const QTable& u, const QTable& r) {
  ++summary_.checked_steps;
  for (int s = 0; s < ns_; ++s) {
    for (int a = 0; a < na_; ++a) {
      if (xz_enabled_) {
        const double lo = -x_(s, a) + z_(s, a), hi = x_(s, a) + z_(s, a);
        const double margin = std::min(hi - u(s, a), u(s, a) - lo);
        summary_.min_xz_margin = std::min(summary_.min_xz_margin, margin);
        if (margin < -tol_) ++summary_.xz_violations;
      }
      if (yw_enabled_) {
        const double lo = -y_(s, a) + w_(s, a), hi = y_(s, a) + w_(s, a);
        const double margin = std::min(hi - r(s, a), r(s, a) - lo);
        summary_.min_yw_margin = std::min(summary_.min_yw_margin, margin);
        if (margin < -tol_) ++summary_.yw_violations;
      }
    }
  }
}

ClosedFormCheck x_closed_form_check(const theory::BlockSchedule& schedule,
                                    const theory::DerivedConstants& consts,
                                    const theory::TheoryParams& params, int q,
                                    bool d_sequence) {
  ClosedFormCheck out;
  if (q < 0 || static_cast<std::size_t>(q) + 1 >= schedule.boundaries.size()) {
    out.skip_reason = "block q+1 is not covered by the schedule";
    return out;
  }
  // The ceiling needs the block-growth conditions behind the schedule.
  try {
    const auto kind = d_sequence ? theory::BoundKind::kSyncD : theory::BoundKind::kSyncG;
    const double need_c = theory::c_min(kind, params.kappa, params.delta_slack,
                                        static_cast<double>(schedule.tau_1),
                                        params.omega, 1);
    if (params.c < need_c) {
      out.skip_reason = "c below the lower bound for this condition";
      return out;
    }
  } catch (const std::domain_error& e) {
    out.skip_reason = e.what();
    return out;
  }
  out.applicable = true;

  const double rate = d_sequence ? consts.gamma_dprime : consts.gamma_prime;
  const double decay = d_sequence ? consts.beta : consts.xi;
  const double level = d_sequence ? theory::d_seq(q, consts) : theory::g_seq(q, consts);
  const long start = q == 0 ? 1 : schedule.boundaries[q - 1];
  const long block_begin = schedule.boundaries[q];
  const long block_end = schedule.boundaries[q + 1];
  const double ceiling = (rate + 2.0 * decay / (2.0 + params.delta_slack)) * level;

  double x = level;
  double rho = (1.0 - rate) * level;
  out.recursion_matches = true;
  out.bound_holds = true;
  for (long t = start; t < block_end; ++t) {
    if (t >= block_begin) {
      out.max_ratio = std::max(out.max_ratio, x / level);
      if (x > ceiling + 1e-12) out.bound_holds = false;
    }
    const double alpha = poly_lr(t, params.omega);
    x = (1.0 - alpha) * x + alpha * rate * level;
    rho *= (1.0 - alpha);
    const double gap = std::abs(x - (rate * level + rho));
    out.max_recursion_gap = std::max(out.max_recursion_gap, gap);
    if (gap > 1e-12 * level) out.recursion_matches = false;
  }
  return out;
}

}  // namespace dqsim
