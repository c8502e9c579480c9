#include "dqsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqsim {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw std::invalid_argument("config." + field + ": " + msg);
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
  GeneratorSpec g;
  g.kind = j.at("kind").get<std::string>();
  if (g.kind == "random") {
    g.n_states = j.at("n_states").get<int>();
    g.n_actions = j.at("n_actions").get<int>();
  } else if (g.kind == "chain") {
    g.n_states = j.at("n_states").get<int>();
    g.n_actions = 1;
  } else if (g.kind == "fanout") {
    g.arms = j.at("arms").get<int>();
  } else {
    fail("mdp.generator.kind", "must be one of random, chain, fanout");
  }
  g.gamma = j.at("gamma").get<double>();
  if (j.contains("r_max")) g.r_max = j.at("r_max").get<double>();
  if (j.contains("noise_halfwidth")) g.noise_halfwidth = j.at("noise_halfwidth").get<double>();
  if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
  return g;
}

nlohmann::json generator_to_json(const GeneratorSpec& g) {
  nlohmann::json j{{"kind", g.kind}, {"gamma", g.gamma}, {"r_max", g.r_max},
                   {"noise_halfwidth", g.noise_halfwidth}, {"seed", g.seed}};
  if (g.kind == "fanout") {
    j["arms"] = g.arms;
  } else {
    j["n_states"] = g.n_states;
    if (g.kind == "random") j["n_actions"] = g.n_actions;
  }
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("schema_version")) cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != 1) fail("schema_version", "only version 1 is supported");

  if (!j.contains("mdp")) fail("mdp", "missing");
  const auto& jm = j.at("mdp");
  const bool has_path = jm.contains("path");
  const bool has_gen = jm.contains("generator");
  if (has_path == has_gen) fail("mdp", "exactly one of path or generator is required");
  if (has_path) cfg.mdp.path = jm.at("path").get<std::string>();
  if (has_gen) cfg.mdp.generator = generator_from_json(jm.at("generator"));

  cfg.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  cfg.omega = j.at("omega").get<double>();
  if (!(cfg.omega > 0.0 && cfg.omega < 1.0)) fail("omega", "must lie in (0,1)");

  const bool has_t = j.contains("horizon_t");
  const bool has_sched = j.contains("schedule");
  if (has_t == has_sched) fail("horizon_t/schedule", "exactly one is required");
  if (has_t) {
    cfg.horizon_t = j.at("horizon_t").get<long>();
    if (*cfg.horizon_t < 0) fail("horizon_t", "must be nonnegative");
  } else {
    const auto& js = j.at("schedule");
    ScheduleSpec s;
    s.tau_1 = js.at("tau_1").get<long>();
    s.kappa = js.at("kappa").get<double>();
    s.delta_slack = js.at("delta_slack").get<double>();
    s.n_blocks = js.at("n_blocks").get<int>();
    if (js.contains("c")) s.c = js.at("c").get<double>();
    if (js.contains("c_from_min_factor"))
      s.c_from_min_factor = js.at("c_from_min_factor").get<double>();
    if (s.c.has_value() == s.c_from_min_factor.has_value())
      fail("schedule", "exactly one of c or c_from_min_factor is required");
    if (js.contains("covering_l")) s.covering_l = js.at("covering_l").get<int>();
    cfg.schedule = s;
  }

  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (!(cfg.epsilon > 0.0)) fail("epsilon", "must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) fail("delta", "must lie in (0,1)");

  if (!j.contains("seeds")) fail("seeds", "missing");
  const auto& jseeds = j.at("seeds");
  if (jseeds.contains("list")) {
    cfg.seeds = jseeds.at("list").get<std::vector<std::uint64_t>>();
  } else if (jseeds.contains("base") && jseeds.contains("count")) {
    const auto base = jseeds.at("base").get<std::uint64_t>();
    const auto count = jseeds.at("count").get<long>();
    if (count < 1) fail("seeds.count", "must be >= 1");
    for (long i = 0; i < count; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
  } else {
    fail("seeds", "need either list or base+count");
  }
  if (cfg.seeds.empty()) fail("seeds", "must not be empty");

  if (j.contains("exploration"))
    cfg.exploration = exploration_from_name(j.at("exploration").get<std::string>());
  if (j.contains("epsilon_greedy")) cfg.epsilon_greedy = j.at("epsilon_greedy").get<double>();
  if (j.contains("trackers")) cfg.trackers = j.at("trackers").get<bool>();
  if (j.contains("drift_check")) cfg.drift_check = j.at("drift_check").get<bool>();
  if (j.contains("collect_visits")) cfg.collect_visits = j.at("collect_visits").get<bool>();
  if (j.contains("stride")) cfg.stride = j.at("stride").get<long>();
  if (cfg.stride < 1) fail("stride", "must be >= 1");
  if (j.contains("write_trace_csv")) cfg.write_trace_csv = j.at("write_trace_csv").get<bool>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

  if (cfg.trackers && cfg.algorithm == Algorithm::kVanilla)
    fail("trackers", "gap trackers need two estimators, not available for vanilla");
  if (cfg.trackers && !cfg.schedule)
    fail("trackers", "trackers restart on block boundaries and need a schedule");
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  if (cfg.mdp.generator)
    j["mdp"] = nlohmann::json{{"generator", generator_to_json(*cfg.mdp.generator)}};
  else
    j["mdp"] = nlohmann::json{{"path", cfg.mdp.path}};
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["omega"] = cfg.omega;
  if (cfg.horizon_t) {
    j["horizon_t"] = *cfg.horizon_t;
  } else {
    const ScheduleSpec& s = *cfg.schedule;
    nlohmann::json js{{"tau_1", s.tau_1}, {"kappa", s.kappa},
                      {"delta_slack", s.delta_slack}, {"n_blocks", s.n_blocks}};
    if (s.c) js["c"] = *s.c;
    if (s.c_from_min_factor) js["c_from_min_factor"] = *s.c_from_min_factor;
    if (s.covering_l) js["covering_l"] = *s.covering_l;
    j["schedule"] = std::move(js);
  }
  j["epsilon"] = cfg.epsilon;
  j["delta"] = cfg.delta;
  j["seeds"] = nlohmann::json{{"list", cfg.seeds}};
  j["exploration"] = exploration_name(cfg.exploration);
  j["epsilon_greedy"] = cfg.epsilon_greedy;
  j["trackers"] = cfg.trackers;
  j["drift_check"] = cfg.drift_check;
  j["collect_visits"] = cfg.collect_visits;
  j["stride"] = cfg.stride;
  j["write_trace_csv"] = cfg.write_trace_csv;
  if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
  return j;
}

Mdp build_mdp(const MdpSource& src) {
  if (src.generator) {
    const GeneratorSpec& g = *src.generator;
    if (g.kind == "random")
      return make_random_mdp(g.n_states, g.n_actions, g.gamma, g.r_max,
                             g.noise_halfwidth, g.seed);
    if (g.kind == "chain") return make_chain_mdp(g.n_states, g.gamma);
    if (g.kind == "fanout") return make_fanout_mdp(g.arms, g.gamma, g.noise_halfwidth);
    fail("mdp.generator.kind", "must be one of random, chain, fanout");
  }
  return load_mdp(src.path);
}

std::optional<ResolvedSchedule> resolve_schedule(const ExperimentConfig& cfg, const Mdp& mdp) {
  if (!cfg.schedule) return std::nullopt;
  const ScheduleSpec& s = *cfg.schedule;
  ResolvedSchedule out;
  const bool sync = cfg.algorithm != Algorithm::kAsyncDouble;
  if (s.covering_l) {
    out.covering_l = *s.covering_l;
  } else if (sync) {
    out.covering_l = 1;
  } else if (cfg.exploration == ExplorationPolicy::Kind::kRoundRobin) {
    out.covering_l = mdp.n_states() * mdp.n_actions();
  } else {
    fail("schedule.covering_l",
         "required for asynchronous runs without the round-robin policy");
  }
  if (s.c) {
    out.c = *s.c;
  } else {
    theory::TheoryParams tp;
    tp.gamma = mdp.gamma();
    tp.r_max = mdp.r_max();
    tp.epsilon = cfg.epsilon;
    tp.delta = cfg.delta;
    tp.omega = cfg.omega;
    tp.kappa = s.kappa;
    tp.delta_slack = s.delta_slack;
    tp.covering_l = out.covering_l;
    out.c = *s.c_from_min_factor *
            theory::c_min_composed(tp, static_cast<double>(s.tau_1), sync);
  }
  const double coeff = 2.0 * out.c * (sync ? 1.0 : static_cast<double>(out.covering_l)) / s.kappa;
  out.blocks = theory::epoch_schedule(s.tau_1, coeff, cfg.omega, s.n_blocks);
  return out;
}

nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is a 1-based offset into the input; convert to line/column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": " << e.what();
    throw std::runtime_error(os.str());
  }
}

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

}  // namespace dqsim
