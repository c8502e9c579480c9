#include "dqsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dqsim {

namespace {

constexpr double kEnvelopeTol = 1e-9;
constexpr double kBoundTol = 1e-12;

void diff_into(const QTable& a, const QTable& b, QTable& out) {
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] - bv[i];
}

}  // namespace

TrialContext make_context(const ExperimentConfig& cfg, const Mdp& mdp,
                          const QTable& q_star) {
  TrialContext ctx;
  ctx.mdp = &mdp;
  ctx.q_star = &q_star;
  ctx.schedule = resolve_schedule(cfg, mdp);
  ctx.consts = theory::derive_constants(mdp.gamma(), mdp.r_max());
  return ctx;
}

TrialTrace run_trial(const ExperimentConfig& cfg, const TrialContext& ctx,
                     std::uint64_t seed) {
  const Mdp& mdp = *ctx.mdp;
  const QTable& q_star = *ctx.q_star;
  const int ns = mdp.n_states(), na = mdp.n_actions();
  const bool dbl = cfg.algorithm != Algorithm::kVanilla;

  long horizon = 0;
  const theory::BlockSchedule* sched = nullptr;
  if (ctx.schedule) {
    sched = &ctx.schedule->blocks;
    horizon = sched->boundaries.back() - 1;
  } else {
    horizon = *cfg.horizon_t;
  }

  TrialTrace trace;
  trace.total_iterations = horizon;
  if (sched) {
    trace.blocks.reserve(sched->boundaries.size() - 1);
    for (std::size_t j = 0; j + 1 < sched->boundaries.size(); ++j)
      trace.blocks.push_back({sched->boundaries[j], sched->boundaries[j + 1], 0.0, 0.0, 0});
  }

  Rng rng(seed);
  LearnerState st = LearnerState::make(cfg.algorithm, cfg.omega, mdp);
  ExplorationPolicy policy(cfg.exploration, cfg.epsilon_greedy);
  int current_state = 0;

  std::optional<SandwichTrackers> trackers;
  if (cfg.trackers && dbl && sched)
    trackers.emplace(*sched, ctx.consts, cfg.omega, ns, na, kEnvelopeTol);

  QTable u_buf(ns, na), r_buf(ns, na);
  QTable pre_qa, pre_qb;
  LearnerState pre;
  StepInfo info;

  std::size_t block_j = 0;
  auto observe = [&](long t, double u_norm, double ra_norm) {
    if (!sched) return;
    while (block_j < trace.blocks.size() && t >= trace.blocks[block_j].end) ++block_j;
    if (block_j < trace.blocks.size() && t >= trace.blocks[block_j].begin) {
      BlockStats& b = trace.blocks[block_j];
      b.max_u_norm = std::max(b.max_u_norm, u_norm);
      b.max_ra_norm = std::max(b.max_ra_norm, ra_norm);
    }
  };
  auto count_a = [&](long t, bool chose_a) {
    if (dbl && chose_a) ++trace.total_a_updates;
    if (!sched || !dbl || !chose_a) return;
    if (block_j < trace.blocks.size() && t >= trace.blocks[block_j].begin &&
        t < trace.blocks[block_j].end)
      ++trace.blocks[block_j].a_updates;
  };

  auto norms_now = [&](double& u_norm, double& ra, double& rb) {
    ra = sup_norm_diff(st.q_a, q_star);
    if (dbl) {
      u_norm = sup_norm_diff(st.q_b, st.q_a);
      rb = sup_norm_diff(st.q_b, q_star);
    } else {
      u_norm = 0.0;
      rb = 0.0;
    }
  };

  const bool record_all = cfg.stride == 1;
  auto record_due = [&](long t) {
    if (record_all || t == 1) return true;
    if ((t - 1) % cfg.stride == 0) return true;
    if (sched) {
      for (long b : sched->boundaries)
        if (b == t) return true;
    }
    return false;
  };

  if (cfg.collect_visits) trace.visits.reserve(static_cast<std::size_t>(horizon));

  for (long t = 1; t <= horizon; ++t) {
    double u_norm, ra, rb;
    norms_now(u_norm, ra, rb);
    trace.max_qa_norm = std::max(trace.max_qa_norm, sup_norm(st.q_a));
    trace.max_ra_norm = std::max(trace.max_ra_norm, ra);
    if (dbl) {
      trace.max_qb_norm = std::max(trace.max_qb_norm, sup_norm(st.q_b));
      trace.max_rb_norm = std::max(trace.max_rb_norm, rb);
    }
    observe(t, u_norm, ra);

    if (cfg.drift_check && dbl) {
      const QTable drift = exact_drift_mean_table(st, mdp);
      const double margin = sup_norm(drift) - ctx.consts.gamma_prime * u_norm;
      trace.max_drift_margin = std::max(trace.max_drift_margin, margin);
    }

    if (trackers) {
      diff_into(st.q_b, st.q_a, u_buf);
      diff_into(st.q_a, q_star, r_buf);
      trackers->begin_iteration(t, u_buf, r_buf);
      pre_qa = st.q_a;
      pre_qb = st.q_b;
    }

    switch (cfg.algorithm) {
      case Algorithm::kVanilla:
        vanilla_q_step(st, mdp, rng, &info);
        break;
      case Algorithm::kSyncDouble:
        sync_double_q_step(st, mdp, rng, &info);
        break;
      case Algorithm::kAsyncDouble:
        current_state = async_double_q_step(st, mdp, policy, current_state, rng, &info);
        break;
    }
    count_a(t, info.chose_a);
    if (cfg.collect_visits && cfg.algorithm == Algorithm::kAsyncDouble)
      trace.visits.push_back({info.chose_a, info.visited_state, info.visited_action});

    if (trackers) {
      pre.algorithm = st.algorithm;
      pre.omega = st.omega;
      pre.t = st.t - 1;
      pre.q_a = std::move(pre_qa);
      pre.q_b = std::move(pre_qb);
      trackers->advance(t, pre, mdp, info);
      diff_into(st.q_b, st.q_a, u_buf);
      diff_into(st.q_a, q_star, r_buf);
      trackers->check(u_buf, r_buf);
      pre_qa = std::move(pre.q_a);
      pre_qb = std::move(pre.q_b);
    }

    if (record_due(t))
      trace.records.push_back({t, u_norm, ra, rb, dbl && info.chose_a,
                               info.visited_state, info.visited_action});
  }

  double u_norm, ra, rb;
  norms_now(u_norm, ra, rb);
  trace.max_qa_norm = std::max(trace.max_qa_norm, sup_norm(st.q_a));
  trace.max_ra_norm = std::max(trace.max_ra_norm, ra);
  if (dbl) {
    trace.max_qb_norm = std::max(trace.max_qb_norm, sup_norm(st.q_b));
    trace.max_rb_norm = std::max(trace.max_rb_norm, rb);
  }
  observe(horizon + 1, u_norm, ra);
  trace.final_u_norm = u_norm;
  trace.final_ra_norm = ra;
  trace.final_rb_norm = rb;
  trace.records.push_back({horizon + 1, u_norm, ra, rb, false, -1, -1});
  if (trackers) trace.trackers = trackers->summary();
  return trace;
}

void write_trace_csv(const TrialTrace& trace, std::ostream& os) {
  os << "t,u_norm,ra_norm,rb_norm,chose_a,s,a\n";
  char buf[160];
  for (const TraceRecord& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%d,%d,%d\n", r.t,
                  r.u_norm, r.ra_norm, r.rb_norm, r.chose_a ? 1 : 0, r.s, r.a);
    os << buf;
  }
}

std::vector<bool> check_envelopes(const TrialTrace& trace,
                                  const theory::BlockSchedule& schedule,
                                  const theory::DerivedConstants& consts,
                                  EnvelopeMode mode) {
  const std::size_t n_blocks = schedule.boundaries.size() - 1;
  if (trace.blocks.size() < n_blocks)
    throw std::invalid_argument("check_envelopes: schedule extends beyond the trace");
  std::vector<bool> pass(n_blocks);
  for (std::size_t q = 0; q < n_blocks; ++q) {
    double bound = 0.0;
    double value = 0.0;
    switch (mode) {
      case EnvelopeMode::kGapVsG:
        bound = theory::g_seq(static_cast<long>(q) + 1, consts);
        value = trace.blocks[q].max_u_norm;
        break;
      case EnvelopeMode::kGapVsSigmaD:
        bound = consts.sigma * theory::d_seq(static_cast<long>(q) + 1, consts);
        value = trace.blocks[q].max_u_norm;
        break;
      case EnvelopeMode::kResidualVsD:
        bound = theory::d_seq(static_cast<long>(q) + 1, consts);
        value = trace.blocks[q].max_ra_norm;
        break;
    }
    pass[q] = value <= bound + kEnvelopeTol;
  }
  return pass;
}

UpdateCounts update_counts(const TrialTrace& trace,
                           const theory::BlockSchedule& schedule, double c,
                           int covering_l) {
  const std::size_t n_blocks = schedule.boundaries.size() - 1;
  if (trace.blocks.size() < n_blocks)
    throw std::invalid_argument("update_counts: schedule extends beyond the trace");
  UpdateCounts out;
  out.total_a_updates = trace.total_a_updates;
  for (std::size_t j = 0; j < n_blocks; ++j) {
    const double tau_k = static_cast<double>(schedule.boundaries[j]);
    const double threshold =
        c * static_cast<double>(covering_l) * std::pow(tau_k, schedule.omega);
    out.counts.push_back(trace.blocks[j].a_updates);
    out.thresholds.push_back(threshold);
    out.pass.push_back(static_cast<double>(trace.blocks[j].a_updates) >= threshold);
  }
  return out;
}

namespace {

// Smallest W such that every length-W window of `seq` covers all `n_pairs`
// ids; nullopt when even the full stream misses one.
std::optional<long> covering_window(const std::vector<int>& seq, int n_pairs) {
  const long n = static_cast<long>(seq.size());
  if (n == 0) return std::nullopt;
  std::vector<long> count(n_pairs, 0);
  int covered = 0;
  long j = 0;
  long best = 0;
  long first_uncovered = -1;
  for (long i = 0; i < n; ++i) {
    while (j < n && covered < n_pairs) {
      if (count[seq[j]]++ == 0) ++covered;
      ++j;
    }
    if (covered == n_pairs) {
      best = std::max(best, j - i);
    } else if (first_uncovered < 0) {
      first_uncovered = i;
    }
    if (--count[seq[i]] == 0) --covered;
  }
  if (first_uncovered == 0) return std::nullopt;
  if (first_uncovered > 0) best = std::max(best, n - first_uncovered + 1);
  return best;
}

}  // namespace

CoveringResult measure_covering(const std::vector<VisitEvent>& visits, int n_states,
                                int n_actions) {
  if (visits.empty()) throw std::invalid_argument("measure_covering: empty visit stream");
  const int n_pairs = n_states * n_actions;
  std::vector<int> seq_a, seq_b;
  for (const VisitEvent& v : visits) {
    const int id = v.s * n_actions + v.a;
    (v.chose_a ? seq_a : seq_b).push_back(id);
  }
  CoveringResult out;
  out.l_a = covering_window(seq_a, n_pairs);
  out.l_b = covering_window(seq_b, n_pairs);
  if (out.l_a && out.l_b) out.l = std::max(*out.l_a, *out.l_b);
  return out;
}

long count_pair_visits(const std::vector<VisitEvent>& visits, int s, int a,
                       long t1, long t2) {
  long count = 0;
  const long n = static_cast<long>(visits.size());
  for (long t = std::max<long>(t1, 1); t <= std::min(t2, n); ++t) {
    const VisitEvent& v = visits[t - 1];
    if (v.s == s && v.a == a) ++count;
  }
  return count;
}

long sa2l_spot_check(const std::vector<VisitEvent>& visits, int n_states,
                     int n_actions, long covering_l, int samples, Rng& rng) {
  const long n = static_cast<long>(visits.size());
  if (n < 2 * covering_l)
    throw std::invalid_argument("sa2l_spot_check: stream shorter than one 2L window");
  long failures = 0;
  for (int i = 0; i < samples; ++i) {
    const int s = rng.below(n_states);
    const int a = rng.below(n_actions);
    const long k_max = std::min<long>(std::max<long>(1, n / (2 * covering_l)), 16);
    const long k = 1 + static_cast<long>(rng.uniform01() * k_max);
    const long span = 2 * k * covering_l;
    if (span > n) continue;  // window must fit the stream
    const long t = 1 + static_cast<long>(rng.uniform01() * (n - span + 1));
    if (count_pair_visits(visits, s, a, t, t + span - 1) < k) ++failures;
  }
  return failures;
}

void parallel_for(long n, int parallelism, const std::function<void(long)>& fn) {
  const int workers = static_cast<int>(std::min<long>(std::max(parallelism, 1), n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EnsembleReport run_ensemble(const ExperimentConfig& cfg, int parallelism) {
  EnsembleReport report;
  report.config = cfg;

  const Mdp mdp = build_mdp(cfg.mdp);
  report.n_states = mdp.n_states();
  report.n_actions = mdp.n_actions();
  const QTable q_star = optimal_q(mdp, 1e-10);
  const TrialContext ctx = make_context(cfg, mdp, q_star);
  report.consts = ctx.consts;
  report.schedule = ctx.schedule;

  const double q_bound = mdp.r_max() / (1.0 - mdp.gamma()) + kBoundTol;
  const double r_bound = ctx.consts.v_max + kBoundTol;

  const long n = static_cast<long>(cfg.seeds.size());
  report.seeds.assign(n, {});
  parallel_for(n, parallelism, [&](long i) {
    const std::uint64_t seed = cfg.seeds[i];
    try {
      const TrialTrace trace = run_trial(cfg, ctx, seed);
      SeedResult r;
      r.seed = seed;
      r.final_ra_norm = trace.final_ra_norm;
      r.final_u_norm = trace.final_u_norm;
      r.final_ok = trace.final_ra_norm <= cfg.epsilon;
      r.uniform_bound_ok = trace.max_qa_norm <= q_bound && trace.max_qb_norm <= q_bound &&
                    trace.max_ra_norm <= r_bound && trace.max_rb_norm <= r_bound;
      if (ctx.schedule) {
        const auto& blocks = ctx.schedule->blocks;
        r.g_env = check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kGapVsG);
        r.sigma_d_env = check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kGapVsSigmaD);
        r.d_env = check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kResidualVsD);
        auto all_of = [](const std::vector<bool>& v) {
          return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
        };
        r.g_env_all = all_of(r.g_env);
        r.sigma_d_env_all = all_of(r.sigma_d_env);
        r.d_env_all = all_of(r.d_env);
        if (cfg.algorithm != Algorithm::kVanilla) {
          const UpdateCounts uc =
              update_counts(trace, blocks, ctx.schedule->c, ctx.schedule->covering_l);
          r.event_f = uc.pass;
        }
      }
      if (trace.trackers) {
        r.xz_violations = trace.trackers->xz_violations;
        r.yw_violations = trace.trackers->yw_violations;
      }
      if (cfg.collect_visits && cfg.algorithm == Algorithm::kAsyncDouble) {
        const CoveringResult cov =
            measure_covering(trace.visits, mdp.n_states(), mdp.n_actions());
        r.covering_l = cov.l ? *cov.l : -1;
      }
      report.seeds[i] = std::move(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial for seed " + std::to_string(seed) +
                               " failed: " + e.what());
    }
  });

  // Aggregate checks. The thresholds come from the configured (epsilon,
  // delta): error rates at most delta, success rates at least 1-delta.
  long final_ok = 0, uniform_bound_ok = 0, g_any_viol = 0, contain_viol = 0;
  long event_f_pass = 0, event_f_total = 0;
  long sandwich_viol = 0, uncovered = 0;
  bool have_env = false, have_trackers = false, have_event_f = false, have_cov = false;
  for (const SeedResult& r : report.seeds) {
    final_ok += r.final_ok;
    uniform_bound_ok += r.uniform_bound_ok;
    if (r.covering_l) {
      have_cov = true;
      if (*r.covering_l < 0) ++uncovered;
    }
    if (r.g_env_all.has_value()) {
      have_env = true;
      if (!*r.g_env_all) ++g_any_viol;
      if (*r.g_env_all && !*r.sigma_d_env_all) ++contain_viol;
    }
    if (!r.event_f.empty()) {
      have_event_f = true;
      for (bool b : r.event_f) {
        ++event_f_total;
        event_f_pass += b;
      }
    }
    if (r.xz_violations) {
      have_trackers = true;
      sandwich_viol += *r.xz_violations + *r.yw_violations;
    }
  }
  const double dn = static_cast<double>(n);
  report.checks.push_back({"final-error-rate", final_ok / dn >= 1.0 - cfg.delta,
                           final_ok / dn, 1.0 - cfg.delta});
  report.checks.push_back({"uniform-bound", uniform_bound_ok == n,
                           static_cast<double>(uniform_bound_ok), static_cast<double>(n)});
  if (have_env) {
    report.checks.push_back({"gap-envelope-violation-rate",
                             g_any_viol / dn <= cfg.delta, g_any_viol / dn, cfg.delta});
    report.checks.push_back({"sigma-d-containment", contain_viol == 0,
                             static_cast<double>(contain_viol), 0.0});
  }
  if (have_event_f && event_f_total > 0) {
    const double rate = static_cast<double>(event_f_pass) / event_f_total;
    report.checks.push_back({"update-count-rate", rate >= 1.0 - cfg.delta, rate,
                             1.0 - cfg.delta});
  }
  if (have_trackers) {
    report.checks.push_back({"sandwich-violations", sandwich_viol == 0,
                             static_cast<double>(sandwich_viol), 0.0});
  }
  if (have_cov) {
    report.checks.push_back({"covering-finite", uncovered == 0,
                             static_cast<double>(uncovered), 0.0});
  }
  report.all_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const CheckOutcome& c) { return c.pass; });
  return report;
}

namespace {

nlohmann::json consts_to_json(const theory::DerivedConstants& c) {
  return nlohmann::json{{"v_max", c.v_max},           {"xi", c.xi},
                        {"sigma", c.sigma},           {"beta", c.beta},
                        {"gamma_prime", c.gamma_prime}, {"gamma_dprime", c.gamma_dprime}};
}

nlohmann::json checks_to_json(const std::vector<CheckOutcome>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckOutcome& c : checks)
    arr.push_back(nlohmann::json{{"name", c.name},
                                 {"pass", c.pass},
                                 {"value", c.value},
                                 {"threshold", c.threshold}});
  return arr;
}

nlohmann::json bools_to_json(const std::vector<bool>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (bool b : v) arr.push_back(b);
  return arr;
}

nlohmann::json schedule_to_json(const ResolvedSchedule& s) {
  return nlohmann::json{{"c", s.c},
                        {"covering_l", s.covering_l},
                        {"step_coeff", s.blocks.step_coeff},
                        {"boundaries", s.blocks.boundaries}};
}

}  // namespace

nlohmann::json ensemble_report_to_json(const EnsembleReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = config_to_json(report.config);
  j["mdp"] = nlohmann::json{{"n_states", report.n_states}, {"n_actions", report.n_actions}};
  j["constants"] = consts_to_json(report.consts);
  if (report.schedule) j["schedule"] = schedule_to_json(*report.schedule);
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedResult& r : report.seeds) {
    nlohmann::json js{{"seed", r.seed},
                      {"final_ra_norm", r.final_ra_norm},
                      {"final_u_norm", r.final_u_norm},
                      {"final_ok", r.final_ok},
                      {"uniform_bound_ok", r.uniform_bound_ok}};
    if (r.g_env_all) {
      js["g_env"] = bools_to_json(r.g_env);
      js["sigma_d_env"] = bools_to_json(r.sigma_d_env);
      js["d_env"] = bools_to_json(r.d_env);
    }
    if (!r.event_f.empty()) js["event_f"] = bools_to_json(r.event_f);
    if (r.xz_violations) {
      js["xz_violations"] = *r.xz_violations;
      js["yw_violations"] = *r.yw_violations;
    }
    if (r.covering_l) js["covering_l"] = *r.covering_l;
    seeds.push_back(std::move(js));
  }
  j["seeds"] = std::move(seeds);
  j["checks"] = checks_to_json(report.checks);
  if (!report.notes.empty()) j["notes"] = report.notes;
  j["all_pass"] = report.all_pass;
  return j;
}

nlohmann::json trial_report_to_json(const ExperimentConfig& cfg,
                                    const TrialContext& ctx, std::uint64_t seed,
                                    const TrialTrace& trace) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = config_to_json(cfg);
  j["seed"] = seed;
  j["total_iterations"] = trace.total_iterations;
  j["total_a_updates"] = trace.total_a_updates;
  j["final_u_norm"] = trace.final_u_norm;
  j["final_ra_norm"] = trace.final_ra_norm;
  j["final_rb_norm"] = trace.final_rb_norm;
  j["max_qa_norm"] = trace.max_qa_norm;
  j["max_qb_norm"] = trace.max_qb_norm;
  j["max_ra_norm"] = trace.max_ra_norm;
  j["max_rb_norm"] = trace.max_rb_norm;
  if (std::isfinite(trace.max_drift_margin))
    j["max_drift_margin"] = trace.max_drift_margin;
  if (ctx.schedule) {
    j["schedule"] = schedule_to_json(*ctx.schedule);
    const auto& blocks = ctx.schedule->blocks;
    j["g_env"] = bools_to_json(check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kGapVsG));
    j["sigma_d_env"] =
        bools_to_json(check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kGapVsSigmaD));
    j["d_env"] =
        bools_to_json(check_envelopes(trace, blocks, ctx.consts, EnvelopeMode::kResidualVsD));
  }
  if (trace.trackers) {
    j["trackers"] = nlohmann::json{{"xz_violations", trace.trackers->xz_violations},
                                   {"yw_violations", trace.trackers->yw_violations},
                                   {"restarts", trace.trackers->restarts},
                                   {"min_xz_margin", trace.trackers->min_xz_margin},
                                   {"min_yw_margin", trace.trackers->min_yw_margin},
                                   {"max_drift_margin", trace.trackers->max_drift_margin}};
  }
  return j;
}

BiasStats overestimation_probe(const Mdp& mdp, long horizon, double omega,
                               const std::vector<std::uint64_t>& seeds,
                               int parallelism) {
  const QTable q_star = optimal_q(mdp, 1e-10);
  const double star_max = q_star(0, argmax_action(q_star, 0));
  const long n = static_cast<long>(seeds.size());
  std::vector<double> bias_v(n), bias_d(n);
  parallel_for(n, parallelism, [&](long i) {
    Rng rng_v(seeds[i]);
    LearnerState v = LearnerState::make(Algorithm::kVanilla, omega, mdp);
    for (long t = 0; t < horizon; ++t) vanilla_q_step(v, mdp, rng_v, nullptr);
    bias_v[i] = v.q_a(0, argmax_action(v.q_a, 0)) - star_max;

    Rng rng_d(seeds[i]);
    LearnerState d = LearnerState::make(Algorithm::kSyncDouble, omega, mdp);
    for (long t = 0; t < horizon; ++t) sync_double_q_step(d, mdp, rng_d, nullptr);
    bias_d[i] = d.q_a(0, argmax_action(d.q_a, 0)) - star_max;
  });

  auto mean_se = [n](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    return std::make_pair(mean, std::sqrt(var / static_cast<double>(n)));
  };
  std::vector<double> diff(n);
  for (long i = 0; i < n; ++i) diff[i] = bias_v[i] - bias_d[i];

  BiasStats out;
  out.n_seeds = n;
  std::tie(out.vanilla_mean, out.vanilla_se) = mean_se(bias_v);
  std::tie(out.double_mean, out.double_se) = mean_se(bias_d);
  std::tie(out.diff_mean, out.diff_se) = mean_se(diff);
  return out;
}

nlohmann::json bias_stats_to_json(const BiasStats& s) {
  return nlohmann::json{{"n_seeds", s.n_seeds},
                        {"vanilla_mean", s.vanilla_mean},
                        {"vanilla_se", s.vanilla_se},
                        {"double_mean", s.double_mean},
                        {"double_se", s.double_se},
                        {"diff_mean", s.diff_mean},
                        {"diff_se", s.diff_se}};
}

}  // namespace dqsim
