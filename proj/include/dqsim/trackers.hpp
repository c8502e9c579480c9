#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dqsim/learners.hpp"
#include "dqsim/mdp.hpp"
#include "dqsim/theory.hpp"

namespace dqsim {

struct TrackerSummary {
  long xz_violations = 0;
  long yw_violations = 0;
  long restarts = 0;
  long skipped_restarts_u = 0;  // gap table exceeded its envelope at a restart
  long skipped_restarts_r = 0;
  long checked_steps = 0;
  double min_xz_margin = std::numeric_limits<double>::infinity();
  double min_yw_margin = std::numeric_limits<double>::infinity();
  // max over iterations of max_{s,a}|drift(s,a)| - gamma' * ||u||; the drive
  // is a gamma'-contraction, so this stays <= 0 up to rounding.
  double max_drift_margin = -std::numeric_limits<double>::infinity();
};

// Runs the four restartable comparison sequences alongside a double
// Q-learning trial. X and Z restart at every block boundary tau_q with
// X = G_q, Z = 0 and advance on every iteration that touches (s,a); Y and W
// restart with Y = D_k, W = 0 and advance only on iterations that update
// Q^A at (s,a). Between restarts the tracked tables must sandwich the actual
// gap and residual:
//   -X + Z <= Q^B - Q^A <= X + Z      and      -Y + W <= Q^A - Q* <= Y + W.
// A restart whose precondition fails (the gap or residual already above its
// envelope) suspends the corresponding checks until the next restart.
class SandwichTrackers {
 public:
  SandwichTrackers(const theory::BlockSchedule& schedule,
                   const theory::DerivedConstants& consts, double omega,
                   int n_states, int n_actions, double tol = 1e-9);

  // Call with the pre-update gap/residual of iteration t; performs the
  // scheduled restart when t is a boundary.
  void begin_iteration(long t, const QTable& u, const QTable& r);

  // Advance the recursions using what iteration t actually did. `pre` is the
  // learner state before the update was applied.
  void advance(long t, const LearnerState& pre, const Mdp& mdp, const StepInfo& info);

  // Raw seam: explicit update masks and noise inputs per pair.
  void advance_raw(long t, const std::vector<std::uint8_t>& visit_mask,
                   const std::vector<double>& z,
                   const std::vector<std::uint8_t>& a_mask,
                   const std::vector<double>& w);

  // Check the sandwich against the post-update gap/residual.
  void check(const QTable& u, const QTable& r);

  const TrackerSummary& summary() const { return summary_; }
  const QTable& x() const { return x_; }
  const QTable& z() const { return z_; }
  const QTable& y() const { return y_; }
  const QTable& w() const { return w_; }

 private:
  void restart(long block_index, const QTable& u, const QTable& r);

  theory::BlockSchedule schedule_;
  theory::DerivedConstants consts_;
  double omega_;
  double tol_;
  int ns_, na_;
  QTable x_, z_, y_, w_;
  double g_cur_ = 0.0, d_cur_ = 0.0;
  std::size_t next_boundary_ = 0;
  bool started_ = false;
  bool xz_enabled_ = false, yw_enabled_ = false;
  TrackerSummary summary_;
};

// Deterministic part of the sandwich on its own: replays the X (or Y)
// recursion from the restart at block q, confirms it matches the product
// closed form gamma'*G_q + (1-gamma')*G_q*prod(1-alpha_i) to 1e-12, and
// checks the block-(q+1) ceiling (gamma' + 2 xi/(2+Delta)) G_q when the
// schedule constants satisfy the conditions that ceiling needs.
struct ClosedFormCheck {
  bool applicable = false;
  std::string skip_reason;
  double max_recursion_gap = 0.0;
  bool recursion_matches = false;
  bool bound_holds = false;
  double max_ratio = 0.0;  // max X_t / G_q over block q+1
};

ClosedFormCheck x_closed_form_check(const theory::BlockSchedule& schedule,
                                    const theory::DerivedConstants& consts,
                                    const theory::TheoryParams& params, int q,
                                    bool d_sequence = false);

}  // namespace dqsim
