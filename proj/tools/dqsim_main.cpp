#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dqsim/config.hpp"
#include "dqsim/harness.hpp"
#include "dqsim/mdp.hpp"
#include "dqsim/theory.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

void write_json(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << j.dump(2) << "\n";
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos)
    return {static_cast<std::uint64_t>(std::stoull(text))};
  const auto lo = std::stoull(text.substr(0, pos));
  const auto hi = std::stoull(text.substr(pos + 2));
  if (hi < lo) throw std::runtime_error("--seeds: range end below start");
  std::vector<std::uint64_t> seeds;
  for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

dqsim::ExperimentConfig load_config(const std::string& path) {
  return dqsim::config_from_json(dqsim::parse_json_file(path));
}

void apply_overrides(dqsim::ExperimentConfig& cfg, const std::string& seeds,
                     std::optional<long> stride, const std::string& trackers,
                     const std::string& out_dir) {
  if (!seeds.empty()) cfg.seeds = parse_seed_range(seeds);
  if (stride) cfg.stride = *stride;
  if (trackers == "on") cfg.trackers = true;
  if (trackers == "off") cfg.trackers = false;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
}

int cmd_oracle(const std::string& mdp_path, const std::string& config_path,
               double tol, const std::string& out) {
  dqsim::Mdp mdp = [&] {
    if (!mdp_path.empty()) return dqsim::load_mdp(mdp_path);
    return dqsim::build_mdp(load_config(config_path).mdp);
  }();
  const dqsim::QTable q = dqsim::optimal_q(mdp, tol);
  json j = dqsim::qtable_to_json(q);
  j["tol"] = tol;
  j["schema_version"] = 1;
  write_json(j, out);
  return 0;
}

json tau1_min_or_error(dqsim::theory::BoundKind kind,
                       const dqsim::theory::TheoryParams& p,
                       const dqsim::theory::DerivedConstants& c) {
  try {
    return dqsim::theory::tau1_min(kind, p, c);
  } catch (const std::domain_error& e) {
    return json{{"error", e.what()}};
  }
}

int cmd_bounds(const std::string& params_path, const std::string& out) {
  namespace th = dqsim::theory;
  const json in = dqsim::parse_json_file(params_path);
  th::TheoryParams p;
  p.gamma = in.at("gamma").get<double>();
  p.epsilon = in.at("epsilon").get<double>();
  p.delta = in.at("delta").get<double>();
  p.omega = in.at("omega").get<double>();
  p.kappa = in.at("kappa").get<double>();
  p.delta_slack = in.at("delta_slack").get<double>();
  if (in.contains("covering_l")) p.covering_l = in.at("covering_l").get<int>();
  if (in.contains("r_max")) p.r_max = in.at("r_max").get<double>();
  const double tau_1 = in.at("tau_1").get<double>();
  const long sa_count = in.contains("sa_count")
                            ? in.at("sa_count").get<long>()
                            : in.at("n_states").get<long>() * in.at("n_actions").get<long>();
  const bool g_only = in.contains("g_only") && in.at("g_only").get<bool>();

  std::vector<std::string> warnings;
  if (g_only) {
    th::validate_for_g_sequence(p);
    if (p.kappa <= std::log(2.0))
      warnings.push_back("kappa <= ln 2: only the gap-sequence condition is evaluable");
  } else {
    th::validate_strict(p);
  }
  warnings.push_back(
      "the async conditional-bound failure probability uses the (delta_slack/(2+delta_slack))^2 "
      "factor throughout; a variant constant (1-2/e)^2 seen in some statements of this bound "
      "is treated as a typo and not used");
  warnings.push_back(
      "the async conditional-bound c lower bound is L*(ln(2+delta_slack)+1/tau_1^omega)/"
      "(2*(kappa-ln(2+delta_slack)-1/tau_1^omega)), with no kappa factor in the numerator "
      "unlike its synchronous counterpart; kept as stated");

  const th::DerivedConstants c = th::derive_constants(p.gamma, p.r_max);
  if (in.contains("c")) {
    p.c = in.at("c").get<double>();
  } else if (g_only) {
    p.c = th::c_min(th::BoundKind::kSyncG, p.kappa, p.delta_slack, tau_1, p.omega, 1);
    warnings.push_back("c not given; using the gap-sequence lower bound");
  } else {
    p.c = th::c_min_composed(p, tau_1, true);
    warnings.push_back("c not given; using the synchronous composed lower bound");
  }

  json j;
  j["schema_version"] = 1;
  j["params"] = {{"gamma", p.gamma},       {"epsilon", p.epsilon},
                 {"delta", p.delta},       {"omega", p.omega},
                 {"kappa", p.kappa},       {"delta_slack", p.delta_slack},
                 {"c", p.c},               {"covering_l", p.covering_l},
                 {"r_max", p.r_max},       {"tau_1", tau_1},
                 {"sa_count", sa_count}};
  j["constants"] = {{"v_max", c.v_max},
                    {"xi", c.xi},
                    {"sigma", c.sigma},
                    {"beta", c.beta},
                    {"gamma_prime", c.gamma_prime},
                    {"gamma_dprime", c.gamma_dprime},
                    {"beta_minus_xi", c.beta - c.xi},
                    {"gamma_dprime_minus_prime", c.gamma_dprime - c.gamma_prime}};

  json cmin;
  cmin["sync-g"] = th::c_min(th::BoundKind::kSyncG, p.kappa, p.delta_slack, tau_1, p.omega, 1);
  if (!g_only) {
    cmin["sync-d"] = th::c_min(th::BoundKind::kSyncD, p.kappa, p.delta_slack, tau_1, p.omega, 1);
    cmin["async-g"] =
        th::c_min(th::BoundKind::kAsyncG, p.kappa, p.delta_slack, tau_1, p.omega, p.covering_l);
    cmin["async-d"] =
        th::c_min(th::BoundKind::kAsyncD, p.kappa, p.delta_slack, tau_1, p.omega, p.covering_l);
    cmin["sync-composed"] = th::c_min_composed(p, tau_1, true);
    cmin["async-composed"] = th::c_min_composed(p, tau_1, false);
  }
  j["c_min"] = std::move(cmin);

  json tmin;
  tmin["sync-g"] = tau1_min_or_error(th::BoundKind::kSyncG, p, c);
  if (!g_only) {
    tmin["sync-d"] = tau1_min_or_error(th::BoundKind::kSyncD, p, c);
    tmin["async-g"] = tau1_min_or_error(th::BoundKind::kAsyncG, p, c);
    tmin["async-d"] = tau1_min_or_error(th::BoundKind::kAsyncD, p, c);
  }
  j["tau1_min"] = std::move(tmin);

  const long m = th::m_star(p.gamma, p.epsilon, c.v_max);
  const long n_valid = th::max_valid_block(c, p.epsilon);
  j["m_star"] = m;
  j["max_valid_block"] = n_valid;

  json fp;
  fp["sync-g"] = th::failure_prob(th::BoundKind::kSyncG, n_valid, p, c, tau_1, sa_count);
  if (!g_only) {
    fp["sync-d"] = th::failure_prob(th::BoundKind::kSyncD, n_valid, p, c, tau_1, sa_count);
    fp["async-g"] = th::failure_prob(th::BoundKind::kAsyncG, n_valid, p, c, tau_1, sa_count);
    fp["async-d"] = th::failure_prob(th::BoundKind::kAsyncD, n_valid, p, c, tau_1, sa_count);
  }
  j["failure_prob"] = std::move(fp);
  j["update_deficit_prob"] =
      th::update_deficit_prob(m, tau_1, p.c, p.kappa, p.omega, p.covering_l);

  const auto ts = th::iteration_scale(p, c, sa_count, 1, true);
  const auto ta = th::iteration_scale(p, c, sa_count, 1, false);
  j["iteration_scale"] = {
      {"sync", {{"lr_term", ts.lr_term}, {"block_term", ts.block_term}, {"total", ts.total}}},
      {"async", {{"lr_term", ta.lr_term}, {"block_term", ta.block_term}, {"total", ta.total}}},
      {"note", "order-of-magnitude indicators, constants not certified"}};
  j["warnings"] = warnings;
  write_json(j, out);
  return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t seed,
            const std::string& out_dir, std::optional<long> stride,
            const std::string& trackers) {
  dqsim::ExperimentConfig cfg = load_config(config_path);
  apply_overrides(cfg, "", stride, trackers, out_dir);
  const dqsim::Mdp mdp = dqsim::build_mdp(cfg.mdp);
  const dqsim::QTable q_star = dqsim::optimal_q(mdp, 1e-10);
  const dqsim::TrialContext ctx = dqsim::make_context(cfg, mdp, q_star);
  const dqsim::TrialTrace trace = dqsim::run_trial(cfg, ctx, seed);
  const json report = dqsim::trial_report_to_json(cfg, ctx, seed, trace);
  std::string out;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    out = cfg.out_dir + "/run_seed" + std::to_string(seed) + ".json";
    if (cfg.write_trace_csv) {
      std::ofstream csv(cfg.out_dir + "/trace_seed" + std::to_string(seed) + ".csv");
      dqsim::write_trace_csv(trace, csv);
    }
  }
  write_json(report, out);
  const bool sandwich_ok =
      !trace.trackers ||
      (trace.trackers->xz_violations == 0 && trace.trackers->yw_violations == 0);
  return sandwich_ok ? 0 : 1;
}

int cmd_ensemble(const std::string& config_path, const std::string& seeds,
                 int parallel, const std::string& out_dir,
                 std::optional<long> stride, const std::string& trackers) {
  dqsim::ExperimentConfig cfg = load_config(config_path);
  apply_overrides(cfg, seeds, stride, trackers, out_dir);
  const dqsim::EnsembleReport report = dqsim::run_ensemble(cfg, parallel);
  const json j = dqsim::ensemble_report_to_json(report);
  std::string out;
  if (!cfg.out_dir.empty()) out = cfg.out_dir + "/ensemble.json";
  write_json(j, out);
  return report.all_pass ? 0 : 1;
}

int cmd_covering(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_dir) {
  dqsim::ExperimentConfig cfg = load_config(config_path);
  if (cfg.algorithm != dqsim::Algorithm::kAsyncDouble)
    throw std::runtime_error("covering measurement needs an async-double config");
  cfg.collect_visits = true;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const dqsim::Mdp mdp = dqsim::build_mdp(cfg.mdp);
  const dqsim::QTable q_star = dqsim::optimal_q(mdp, 1e-10);
  const dqsim::TrialContext ctx = dqsim::make_context(cfg, mdp, q_star);
  const dqsim::TrialTrace trace = dqsim::run_trial(cfg, ctx, seed);
  const dqsim::CoveringResult cov =
      dqsim::measure_covering(trace.visits, mdp.n_states(), mdp.n_actions());
  json j;
  j["schema_version"] = 1;
  j["config"] = dqsim::config_to_json(cfg);
  j["seed"] = seed;
  j["iterations"] = trace.total_iterations;
  auto put = [&](const char* key, const std::optional<long>& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = "never-covered";
  };
  put("covering_l_a", cov.l_a);
  put("covering_l_b", cov.l_b);
  put("covering_l", cov.l);
  if (cov.l) {
    dqsim::Rng rng(seed ^ 0x5a2Lu);
    const long failures = dqsim::sa2l_spot_check(trace.visits, mdp.n_states(),
                                                 mdp.n_actions(), *cov.l, 100, rng);
    j["window_count_spot_check"] = {{"samples", 100}, {"failures", failures}};
  }
  std::string out;
  if (!cfg.out_dir.empty()) out = cfg.out_dir + "/covering.json";
  write_json(j, out);
  return cov.l.has_value() ? 0 : 1;
}

int cmd_overestimate(const std::string& config_path, int parallel,
                     const std::string& out_dir) {
  dqsim::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!cfg.horizon_t)
    throw std::runtime_error("overestimate needs a horizon_t config");
  const dqsim::Mdp mdp = dqsim::build_mdp(cfg.mdp);
  const dqsim::BiasStats stats =
      dqsim::overestimation_probe(mdp, *cfg.horizon_t, cfg.omega, cfg.seeds, parallel);
  json j = dqsim::bias_stats_to_json(stats);
  j["schema_version"] = 1;
  j["config"] = dqsim::config_to_json(cfg);
  std::string out;
  if (!cfg.out_dir.empty()) out = cfg.out_dir + "/overestimate.json";
  write_json(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular MDP simulator: vanilla and double Q-learning with "
               "block-wise convergence validation"};
  app.require_subcommand(1);

  std::string config_path, mdp_path, params_path, out, seeds_range, trackers;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int parallel = 1;
  long stride_val = 0;

  auto* oracle = app.add_subcommand("oracle", "compute the optimal Q-table");
  oracle->add_option("--mdp", mdp_path, "MDP JSON file");
  oracle->add_option("--config", config_path, "experiment config (for its MDP source)");
  oracle->add_option("--tol", tol, "sup-norm accuracy of the result");
  oracle->add_option("--out", out, "output file (stdout when omitted)");

  auto* bounds = app.add_subcommand("bounds", "evaluate every derived constant and bound");
  bounds->add_option("--params", params_path, "theory parameter JSON")->required();
  bounds->add_option("--out", out, "output file");

  auto* run = app.add_subcommand("run", "single seeded trial");
  run->add_option("--config", config_path)->required();
  run->add_option("--seed", seed);
  run->add_option("--out", out, "output directory");
  run->add_option("--stride", stride_val, "trace record stride");
  run->add_option("--trackers", trackers)->check(CLI::IsMember({"on", "off"}));

  auto* ens = app.add_subcommand("ensemble", "seeded Monte-Carlo ensemble");
  ens->add_option("--config", config_path)->required();
  ens->add_option("--seeds", seeds_range, "override seeds, e.g. 1..200");
  ens->add_option("--parallel", parallel, "worker threads");
  ens->add_option("--out", out, "output directory");
  ens->add_option("--stride", stride_val);
  ens->add_option("--trackers", trackers)->check(CLI::IsMember({"on", "off"}));

  auto* cov = app.add_subcommand("covering", "measure the empirical covering number");
  cov->add_option("--config", config_path)->required();
  cov->add_option("--seed", seed);
  cov->add_option("--out", out, "output directory");

  auto* over = app.add_subcommand("overestimate", "max-Q bias probe, vanilla vs double");
  over->add_option("--config", config_path)->required();
  over->add_option("--parallel", parallel);
  over->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<long> stride =
        stride_val > 0 ? std::optional<long>(stride_val) : std::nullopt;
    if (app.got_subcommand(oracle)) {
      if (mdp_path.empty() == config_path.empty())
        throw std::runtime_error("oracle: give exactly one of --mdp or --config");
      return cmd_oracle(mdp_path, config_path, tol, out);
    }
    if (app.got_subcommand(bounds)) return cmd_bounds(params_path, out);
    if (app.got_subcommand(run)) return cmd_run(config_path, seed, out, stride, trackers);
    if (app.got_subcommand(ens))
      return cmd_ensemble(config_path, seeds_range, parallel, out, stride, trackers);
    if (app.got_subcommand(cov)) return cmd_covering(config_path, seed, out);
    if (app.got_subcommand(over)) return cmd_overestimate(config_path, parallel, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
