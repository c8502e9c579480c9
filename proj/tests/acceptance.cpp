// Acceptance suite: one pass/fail line per criterion, exit code counts the
// failures. Large Monte-Carlo runs fan out over hardware threads; every
// result is deterministic for the fixed seed lists below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dqsim/harness.hpp"

using namespace dqsim;

namespace {

int hw_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 4 : static_cast<int>(std::min(n, 16u));
}

Mdp single_state_mdp() { return Mdp(1, 1, 0.5, 1.0, 0.0, {1.0}, {1.0}); }

ExperimentConfig desk_config(int n_blocks, double epsilon) {
  ExperimentConfig cfg;
  GeneratorSpec gen;
  gen.kind = "random";
  gen.n_states = 4;
  gen.n_actions = 2;
  gen.gamma = 0.5;
  gen.r_max = 1.0;
  gen.noise_halfwidth = 0.3;
  gen.seed = 7;
  cfg.mdp.generator = gen;
  cfg.algorithm = Algorithm::kSyncDouble;
  cfg.omega = 0.8;
  ScheduleSpec sched;
  sched.tau_1 = 200;
  sched.kappa = 0.8;
  sched.delta_slack = 0.1;
  sched.c_from_min_factor = 1.05;
  sched.n_blocks = n_blocks;
  cfg.schedule = sched;
  cfg.epsilon = epsilon;
  cfg.delta = 0.05;
  cfg.stride = 1u << 20;  // block maxima are exact; per-step rows not needed
  return cfg;
}

// ---- 1. oracle exactness --------------------------------------------------

bool criterion_oracle(std::string& detail) {
  const Mdp one = single_state_mdp();
  const QTable q1 = optimal_q(one, 1e-10);
  const double err1 = std::abs(q1(0, 0) - 2.0);

  const Mdp m = make_random_mdp(6, 3, 0.8, 1.0, 0.2, 2024);
  const QTable q = optimal_q(m, 1e-9);
  // horizon-truncated dynamic program, written independently of the library
  std::vector<std::vector<double>> v(6, std::vector<double>(3, 0.0));
  for (int h = 0; h < 400; ++h) {
    std::vector<std::vector<double>> next(6, std::vector<double>(3, 0.0));
    for (int s = 0; s < 6; ++s)
      for (int a = 0; a < 3; ++a) {
        double acc = 0.0;
        for (int s2 = 0; s2 < 6; ++s2) {
          double best = v[s2][0];
          for (int b = 1; b < 3; ++b) best = std::max(best, v[s2][b]);
          acc += m.kernel(s, a, s2) * (m.reward_mean(s, a, s2) + m.gamma() * best);
        }
        next[s][a] = acc;
      }
    v = next;
  }
  double err2 = 0.0;
  for (int s = 0; s < 6; ++s)
    for (int a = 0; a < 3; ++a) err2 = std::max(err2, std::abs(q(s, a) - v[s][a]));

  detail = "single-state err " + std::to_string(err1) + ", 6x3 vs brute force " +
           std::to_string(err2);
  return err1 <= 1e-10 && err2 <= 1e-6;
}

// ---- 2. contraction -------------------------------------------------------

bool criterion_contraction(std::string& detail) {
  Rng rng(555);
  double worst = -1.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Mdp m = make_random_mdp(4, 2, 0.4 + 0.11 * trial, 1.0, 0.2, 300 + trial);
    for (int rep = 0; rep < 100; ++rep) {
      QTable q(4, 2), q2(4, 2);
      for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 2; ++a) {
          q(s, a) = rng.uniform(-4.0, 4.0);
          q2(s, a) = rng.uniform(-4.0, 4.0);
        }
      const double lhs = sup_norm_diff(bellman_apply(m, q), bellman_apply(m, q2));
      worst = std::max(worst, lhs - m.gamma() * sup_norm_diff(q, q2));
    }
  }
  detail = "max (||TQ-TQ'|| - gamma||Q-Q'||) = " + std::to_string(worst);
  return worst <= 1e-12;
}

// ---- 3. uniform boundedness ----------------------------------------------

bool criterion_boundedness(std::string& detail) {
  ExperimentConfig cfg = desk_config(1, 0.5);
  cfg.schedule.reset();
  cfg.horizon_t = 100000;
  const Mdp mdp = build_mdp(cfg.mdp);
  const QTable q_star = optimal_q(mdp, 1e-10);
  const double q_bound = 2.0 + 1e-12;
  const double r_bound = 4.0 + 1e-12;

  const std::vector<Algorithm> algs = {Algorithm::kVanilla, Algorithm::kSyncDouble,
                                       Algorithm::kAsyncDouble};
  std::vector<int> ok(algs.size() * 50, 0);
  for (std::size_t ai = 0; ai < algs.size(); ++ai) {
    ExperimentConfig c = cfg;
    c.algorithm = algs[ai];
    const TrialContext ctx = make_context(c, mdp, q_star);
    parallel_for(50, hw_threads(), [&, ai](long i) {
      const TrialTrace tr = run_trial(c, ctx, 1 + static_cast<std::uint64_t>(i));
      ok[ai * 50 + i] = tr.max_qa_norm <= q_bound && tr.max_qb_norm <= q_bound &&
                        tr.max_ra_norm <= r_bound && tr.max_rb_norm <= r_bound;
    });
  }
  long pass = 0;
  for (int v : ok) pass += v;
  detail = std::to_string(pass) + "/150 runs stayed within R_max/(1-gamma) and V_max";
  return pass == 150;
}

// ---- 4. drift contraction -------------------------------------------------

bool criterion_drift(std::string& detail) {
  ExperimentConfig cfg = desk_config(1, 0.5);
  cfg.schedule.reset();
  cfg.horizon_t = 10000;
  cfg.drift_check = true;
  const Mdp mdp = build_mdp(cfg.mdp);
  const QTable q_star = optimal_q(mdp, 1e-10);
  const TrialContext ctx = make_context(cfg, mdp, q_star);
  double worst = -1.0;
  std::vector<double> margins(10);
  parallel_for(10, hw_threads(), [&](long i) {
    margins[i] = run_trial(cfg, ctx, 100 + static_cast<std::uint64_t>(i)).max_drift_margin;
  });
  for (double m : margins) worst = std::max(worst, m);
  detail = "max (max|drift| - 0.75 ||u||) = " + std::to_string(worst);
  return worst <= 1e-12;
}

// ---- 5. sandwich recursions -----------------------------------------------

bool criterion_sandwich(std::string& detail) {
  ExperimentConfig cfg = desk_config(4, 0.5);  // run length 102177
  cfg.trackers = true;
  const Mdp mdp = build_mdp(cfg.mdp);
  const QTable q_star = optimal_q(mdp, 1e-10);
  const TrialContext ctx = make_context(cfg, mdp, q_star);
  std::vector<long> viol(20, 0), skipped(20, 0);
  parallel_for(20, hw_threads(), [&](long i) {
    const TrialTrace tr = run_trial(cfg, ctx, 500 + static_cast<std::uint64_t>(i));
    viol[i] = tr.trackers->xz_violations + tr.trackers->yw_violations;
    skipped[i] = tr.trackers->skipped_restarts_u + tr.trackers->skipped_restarts_r;
  });
  long total = 0, total_skipped = 0;
  for (long v : viol) total += v;
  for (long s : skipped) total_skipped += s;
  detail = std::to_string(total) + " violations, " + std::to_string(total_skipped) +
           " suspended restarts over 20 seeds x 102177 steps";
  return total == 0 && total_skipped == 0;
}

// ---- 6. numeric inequalities ----------------------------------------------------

bool criterion_numeric_inequalities(std::string& detail) {
  long checked = 0, violations = 0;
  for (int wi = 1; wi <= 9; ++wi) {
    const double omega = wi / 10.0;
    for (long t1 = 2; t1 <= 50; ++t1) {
      double prod = 1.0 - std::pow(static_cast<double>(t1), -omega);
      for (long t2 = t1 + 1; t2 <= 200; ++t2) {
        prod *= 1.0 - std::pow(static_cast<double>(t2), -omega);
        const double bound =
            std::exp(-static_cast<double>(t2 - t1) / std::pow(static_cast<double>(t2), omega));
        ++checked;
        if (prod > bound) ++violations;
      }
    }
  }
  for (double a = 1.5; a <= 20.0 + 1e-9; a += 0.5) {
    for (double b = 1.0; b <= 4.0; b += 1.0) {
      const double threshold = 2.0 * a * b * std::log(a * b);
      if (threshold <= 1.0) continue;
      for (double mult : {1.0, 1.5, 2.0, 5.0}) {
        const auto [lhs, rhs] = theory::tau_help_check(a, b, threshold * mult);
        ++checked;
        if (lhs > rhs) ++violations;
      }
    }
  }
  detail = std::to_string(violations) + " violations over " + std::to_string(checked) +
           " grid cells";
  return violations == 0;
}

// ---- 7. theory identities ---------------------------------------------------

bool criterion_identities(std::string& detail) {
  Rng rng(808);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform(1.0 / 3.0 + 1e-9, 1.0 - 1e-9);
    const auto c = theory::derive_constants(g, 1.0);
    worst = std::max(worst, std::abs(c.beta - c.xi));
    worst = std::max(worst, std::abs(c.gamma_dprime - c.gamma_prime));
  }
  if (worst > 1e-14) {
    detail = "identity residual " + std::to_string(worst);
    return false;
  }
  const auto c = theory::derive_constants(0.5, 1.0);
  for (long k = 0; k <= 100; ++k) {
    const double rel = std::abs(c.sigma * theory::d_seq(k, c) - theory::g_seq(k, c)) /
                       theory::g_seq(k, c);
    if (rel > 1e-12) {
      detail = "sigma*D_k vs G_k relative error " + std::to_string(rel) + " at k=" +
               std::to_string(k);
      return false;
    }
  }
  const long m = theory::m_star(0.5, 0.1, 4.0);
  const double d_m = theory::d_seq(m, c);
  detail = "m_star = " + std::to_string(m) + ", D_(m_star) = " + std::to_string(d_m);
  return m == 36 && d_m <= 0.1;
}

// ---- 8 & 9. desk-scale envelopes and convergence ---------------------------

// One shared 200-seed ensemble: tau_1 = 200 sits far below the conservative
// first-block minimum the analysis asks for, so the check is one-sided: the
// observed trajectories must do no worse than the predicted envelopes.
bool criteria_envelopes_and_convergence(bool& convergence_pass, std::string& detail,
                                        std::string& detail9) {
  ExperimentConfig cfg = desk_config(5, 0.25);  // run length 287480
  const long m_cap = theory::m_star(0.5, 0.5, 4.0);
  if (m_cap < cfg.schedule->n_blocks) cfg.schedule->n_blocks = static_cast<int>(m_cap);
  for (std::uint64_t s = 1; s <= 200; ++s) cfg.seeds.push_back(s);

  const EnsembleReport report = run_ensemble(cfg, hw_threads());
  long g_viol = 0, contain_viol = 0, final_ok = 0;
  for (const SeedResult& r : report.seeds) {
    if (!*r.g_env_all) ++g_viol;
    if (*r.g_env_all && !*r.sigma_d_env_all) ++contain_viol;
    final_ok += r.final_ra_norm <= 0.25;
  }
  const double g_rate = g_viol / 200.0;
  detail = "G-envelope violation rate " + std::to_string(g_rate) + ", containment misses " +
           std::to_string(contain_viol);
  const double conv_rate = final_ok / 200.0;
  detail9 = "||Q^A_T - Q*|| <= 0.25 for " + std::to_string(final_ok) + "/200 seeds at T=" +
            std::to_string(report.schedule->blocks.boundaries.back() - 1);
  convergence_pass = conv_rate >= 0.95;
  return g_rate <= 0.05 && contain_viol == 0;
}

// ---- 10. update split -------------------------------------------------------

bool criterion_update_split(std::string& detail) {
  const Mdp mdp = build_mdp(desk_config(1, 0.5).mdp);
  theory::TheoryParams tp;
  tp.gamma = 0.5;
  tp.kappa = 0.8;
  tp.delta_slack = 0.1;
  tp.omega = 0.8;
  tp.c = theory::c_min_composed(tp, 200, true) * 1.05;
  const long horizon = 1000000;
  theory::BlockSchedule sched = theory::epoch_schedule(200, theory::step_coeff(tp, true),
                                                       tp.omega, 12);
  while (sched.boundaries.back() > horizon) sched.boundaries.pop_back();
  const std::size_t n_epochs = sched.boundaries.size() - 1;  // complete epochs only

  const int n_seeds = 100;
  std::vector<long> totals(n_seeds, 0);
  std::vector<std::vector<long>> per_block(n_seeds, std::vector<long>(n_epochs, 0));
  parallel_for(n_seeds, hw_threads(), [&](long i) {
    Rng rng(9000 + static_cast<std::uint64_t>(i));
    LearnerState st = LearnerState::make(Algorithm::kSyncDouble, 0.8, mdp);
    StepInfo info;
    std::size_t j = 0;
    for (long t = 1; t <= horizon; ++t) {
      sync_double_q_step(st, mdp, rng, &info);
      if (info.chose_a) {
        ++totals[i];
        while (j + 1 < sched.boundaries.size() && t >= sched.boundaries[j + 1]) ++j;
        if (j + 1 < sched.boundaries.size() && t >= sched.boundaries[j]) ++per_block[i][j];
      }
    }
  });

  long total_ok = 0;
  const double band = 3.0 * std::sqrt(horizon / 4.0);
  for (long v : totals) total_ok += std::abs(v - horizon / 2.0) <= band;

  long block_pairs = 0, block_ok = 0;
  for (int i = 0; i < n_seeds; ++i)
    for (std::size_t j = 0; j < n_epochs; ++j) {
      const long len = sched.boundaries[j + 1] - sched.boundaries[j];
      ++block_pairs;
      block_ok += per_block[i][j] >= 0.5 * tp.kappa * static_cast<double>(len);
    }
  const double block_rate = static_cast<double>(block_ok) / block_pairs;
  detail = std::to_string(total_ok) + "/100 totals in the 3-sigma band; per-block rate " +
           std::to_string(block_rate) + " over " + std::to_string(block_pairs) + " pairs";
  return total_ok >= 99 && block_rate >= 0.95;
}

// ---- 11. covering -----------------------------------------------------------

bool criterion_covering(std::string& detail) {
  ExperimentConfig cfg = desk_config(1, 0.5);
  cfg.schedule.reset();
  cfg.horizon_t = 20000;
  cfg.algorithm = Algorithm::kAsyncDouble;
  cfg.exploration = ExplorationPolicy::Kind::kRoundRobin;
  cfg.collect_visits = true;
  GeneratorSpec gen = *cfg.mdp.generator;
  gen.n_states = 3;
  gen.n_actions = 3;
  cfg.mdp.generator = gen;
  const Mdp mdp = build_mdp(cfg.mdp);
  const QTable q_star = optimal_q(mdp, 1e-10);
  const TrialContext ctx = make_context(cfg, mdp, q_star);
  const TrialTrace tr = run_trial(cfg, ctx, 77);
  const CoveringResult cov = measure_covering(tr.visits, 3, 3);
  if (!cov.l) {
    detail = "stream never covered all pairs";
    return false;
  }
  Rng rng(1234);
  const long failures = sa2l_spot_check(tr.visits, 3, 3, *cov.l, 100, rng);
  detail = "measured L = " + std::to_string(*cov.l) + ", window-floor failures " +
           std::to_string(failures) + "/100";
  return *cov.l == 9 && failures == 0;
}

// ---- 12. overestimation -----------------------------------------------------

bool criterion_overestimation(std::string& detail) {
  const Mdp fan = make_fanout_mdp(8, 0.9, 1.0);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 500; ++s) seeds.push_back(s);
  const BiasStats st = overestimation_probe(fan, 10000, 0.8, seeds, hw_threads());
  detail = "vanilla bias " + std::to_string(st.vanilla_mean) + " (se " +
           std::to_string(st.vanilla_se) + "), double bias " +
           std::to_string(st.double_mean) + ", paired gap " + std::to_string(st.diff_mean) +
           " (se " + std::to_string(st.diff_se) + ")";
  return st.vanilla_mean > 3.0 * st.vanilla_se && st.diff_mean > 3.0 * st.diff_se;
}

// ---- 13. determinism ---------------------------------------------------------

bool criterion_determinism(std::string& detail) {
  ExperimentConfig cfg = desk_config(3, 0.5);
  cfg.trackers = true;
  for (std::uint64_t s = 1; s <= 5; ++s) cfg.seeds.push_back(s);
  const std::string serial = ensemble_report_to_json(run_ensemble(cfg, 1)).dump();
  const std::string threaded = ensemble_report_to_json(run_ensemble(cfg, 4)).dump();
  const std::string again = ensemble_report_to_json(run_ensemble(cfg, 4)).dump();
  detail = "report bytes: serial==parallel " +
           std::string(serial == threaded ? "yes" : "NO") + ", repeat identical " +
           std::string(threaded == again ? "yes" : "NO");
  return serial == threaded && threaded == again;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
  };

  bool convergence_pass = false;
  std::string detail9;

  const std::vector<Criterion> criteria = {
      {1, "oracle exactness", criterion_oracle},
      {2, "Bellman contraction", criterion_contraction},
      {3, "uniform boundedness over 50x3 runs", criterion_boundedness},
      {4, "drift contraction along double-Q runs", criterion_drift},
      {5, "sandwich recursions, 20 seeds", criterion_sandwich},
      {6, "product and tail inequalities on grids", criterion_numeric_inequalities},
      {7, "derived-constant identities and m_star", criterion_identities},
      {8, "desk-scale gap envelopes, 200 seeds",
       [&](std::string& d) { return criteria_envelopes_and_convergence(convergence_pass, d, detail9); }},
      {9, "convergence at the schedule end",
       [&](std::string& d) {
         d = detail9;
         return convergence_pass;
       }},
      {10, "fair update split, 100 seeds at T=1e6", criterion_update_split},
      {11, "round-robin covering number", criterion_covering},
      {12, "overestimation bias, vanilla vs double", criterion_overestimation},
      {13, "byte-identical reports across reruns and threads", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d. %s  (%.1fs)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                secs, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  if (failures == 0)
    std::printf("all %zu criteria passed\n", criteria.size());
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
