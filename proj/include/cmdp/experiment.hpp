#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cmdp/agent.hpp"
#include "cmdp/core.hpp"
#include "cmdp/harness.hpp"
#include "cmdp/random_instances.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {

// Stream derivation tags; distinct so class generation, adversary draws and
// episode rollouts never share a sequence.
inline constexpr std::uint64_t kClassGenTag = 1;
inline constexpr std::uint64_t kAdversaryTag = 2;
inline constexpr std::uint64_t kEpisodeTag = 3;

struct ClassSpec {
  int num_reward_members = 1;
  int num_dynamics_members = 1;
  std::uint64_t generation_seed = 0;
  double min_prob = kDefaultMinProb;
  // Explicit tables override generation when nonempty.
  std::vector<std::vector<double>> reward_members;
  std::vector<std::vector<double>> dynamics_members;
  int reward_truth_index = 0;
  int dynamics_truth_index = 0;
};

struct ExperimentConfig {
  Geometry geometry;
  int num_contexts = 1;
  ClassSpec classes;
  ContextSchedule schedule;
  long episodes = 1;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  AgentConfig agent;
};

namespace detail {

inline std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

inline ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cyclic") return ScheduleKind::kCyclic;
  if (name == "iid-uniform") return ScheduleKind::kIidUniform;
  if (name == "fixed-sequence") return ScheduleKind::kFixedSequence;
  if (name == "max-disagreement") return ScheduleKind::kMaxDisagreement;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

inline GammaVariant parse_variant(const std::string& name) {
  if (name == "exact-31") return GammaVariant::kExact31;
  if (name == "approx-62") return GammaVariant::kApprox62;
  throw std::invalid_argument("unknown agent variant '" + name + "'");
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig config;
  const auto& geom = j.at("geometry");
  config.geometry.num_states = geom.at("num_states").get<int>();
  config.geometry.num_actions = geom.at("num_actions").get<int>();
  config.geometry.horizon = geom.at("horizon").get<int>();
  config.geometry.start_state = geom.value("start_state", 0);
  config.num_contexts = geom.at("num_contexts").get<int>();

  const auto& cls = j.at("classes");
  if (cls.contains("reward_members") || cls.contains("dynamics_members")) {
    config.classes.reward_members =
        cls.at("reward_members").get<std::vector<std::vector<double>>>();
    config.classes.dynamics_members =
        cls.at("dynamics_members").get<std::vector<std::vector<double>>>();
    config.classes.reward_truth_index = cls.value("reward_truth_index", 0);
    config.classes.dynamics_truth_index = cls.value("dynamics_truth_index", 0);
  } else {
    config.classes.num_reward_members = cls.at("num_reward_members").get<int>();
    config.classes.num_dynamics_members =
        cls.at("num_dynamics_members").get<int>();
    config.classes.generation_seed =
        cls.at("generation_seed").get<std::uint64_t>();
    config.classes.min_prob = cls.value("min_prob", kDefaultMinProb);
  }

  const auto& sched = j.at("schedule");
  config.schedule.kind =
      detail::parse_schedule_kind(sched.at("kind").get<std::string>());
  if (config.schedule.kind == ScheduleKind::kFixedSequence)
    config.schedule.sequence = sched.at("sequence").get<std::vector<int>>();

  config.episodes = j.at("episodes").get<long>();
  if (config.episodes < 1)
    throw std::invalid_argument("config: episodes must be >= 1");
  config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (config.seeds.empty())
    throw std::invalid_argument("config: at least one seed required");
  config.output_dir = j.value("output_dir", std::string());

  config.agent.horizon_T = config.episodes;
  if (j.contains("agent")) {
    const auto& agent = j.at("agent");
    config.agent.delta = agent.value("delta", 0.05);
    if (agent.contains("gamma_override"))
      config.agent.gamma_override = agent.at("gamma_override").get<double>();
    if (agent.contains("r_sq_bound"))
      config.agent.r_sq_bound = agent.at("r_sq_bound").get<double>();
    if (agent.contains("r_log_bound"))
      config.agent.r_log_bound = agent.at("r_log_bound").get<double>();
    config.agent.variant =
        detail::parse_variant(agent.value("variant", std::string("approx-62")));
    config.agent.square_learning_rate = agent.value("square_learning_rate", 0.5);
    config.agent.solver_max_iterations =
        agent.value("solver_max_iterations", 0L);
  }
  return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse config file " + path + ": " +
                                e.what());
  }
  try {
    return parse_experiment_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid config " + path + ": " + e.what());
  }
}

// The CMDP is a function of the ClassSpec alone, so every seed of a run
// (and every rerun of the same config) sees the same world.
inline Cmdp build_world(const ExperimentConfig& config) {
  const ClassSpec& spec = config.classes;
  const Geometry& g = config.geometry;
  if (!spec.reward_members.empty()) {
    RewardClass rewards;
    for (const auto& table : spec.reward_members)
      rewards.members.push_back(RewardFunction{config.num_contexts,
                                               g.num_states, g.num_actions,
                                               table});
    rewards.truth_index = spec.reward_truth_index;
    DynamicsClass dynamics;
    for (const auto& table : spec.dynamics_members)
      dynamics.members.push_back(DynamicsFunction{config.num_contexts,
                                                  g.num_states, g.num_actions,
                                                  table});
    dynamics.truth_index = spec.dynamics_truth_index;
    return build_cmdp(std::move(rewards), std::move(dynamics), g);
  }
  RandomStream rng =
      RandomStream::derived(spec.generation_seed, kClassGenTag, 0);
  return random_cmdp(rng, config.num_contexts, g.num_states, g.num_actions,
                     g.horizon, spec.num_reward_members,
                     spec.num_dynamics_members, spec.min_prob, g.start_state);
}

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;
};

struct ExperimentSummary {
  double final_regret_mean = 0.0;
  double final_regret_std = 0.0;
  double sqrt_fit_coefficient = 0.0;
  double sqrt_fit_r2 = 0.0;
  double max_fw_gap = 0.0;
  bool oracle_bounds_respected = true;
  double gamma = 0.0;
  double epsilon = 0.0;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;
  ExperimentSummary summary;
};

// One seed's full episode loop; deterministic in (config, world, seed).
inline SeedRun run_seed(const ExperimentConfig& config, const Cmdp& world,
                        const RegretEvaluator& evaluator, std::uint64_t seed) {
  Agent agent(world.reward_class, world.dynamics_class, world.geometry,
              config.agent);
  RandomStream adversary = RandomStream::derived(seed, kAdversaryTag, 0);
  double sq_bound = agent.reward_oracle().regret_bound();
  double log_bound = agent.dynamics_oracle().regret_bound();
  SeedRun run;
  run.seed = seed;
  run.records.reserve(config.episodes);
  double cum_regret = 0.0;
  for (long t = 0; t < config.episodes; ++t) {
    WorldView view{&world, &agent.dynamics_oracle()};
    int context = next_context(config.schedule, t, config.num_contexts, view,
                               adversary);
    TabularMdp mdp = world.mdp_for_context(context);
    RandomStream episode_rng = RandomStream::derived(seed, kEpisodeTag,
                                                     static_cast<std::uint64_t>(t));
    auto env = [&](const Policy& policy) {
      return simulate_episode(mdp, policy, episode_rng);
    };
    EpisodeOutcome outcome = agent.run_episode(context, env);
    EpisodeRecord record = evaluator.evaluate(t + 1, outcome);
    cum_regret += record.inst_regret;
    record.cum_regret = cum_regret;
    check_record(record, sq_bound, log_bound);
    run.records.push_back(record);
  }
  return run;
}

inline const char* kCsvHeader =
    "t,context,value_opt,value_played,inst_regret,cum_regret,term1,term2,"
    "term3,e_sq_inc,hellinger_inc,fw_iters,fw_gap,converged,oracle_sq_regret,"
    "oracle_log_regret";

inline std::string csv_row(const EpisodeRecord& r) {
  std::ostringstream out;
  out << r.t << ',' << r.context << ',' << detail::format_double(r.value_opt)
      << ',' << detail::format_double(r.value_played) << ','
      << detail::format_double(r.inst_regret) << ','
      << detail::format_double(r.cum_regret) << ','
      << detail::format_double(r.term1) << ',' << detail::format_double(r.term2)
      << ',' << detail::format_double(r.term3) << ','
      << detail::format_double(r.e_sq_increment) << ','
      << detail::format_double(r.hellinger_increment) << ',' << r.fw_iters
      << ',' << detail::format_double(r.fw_gap) << ',' << (r.converged ? 1 : 0)
      << ',' << detail::format_double(r.oracle_sq_regret) << ','
      << detail::format_double(r.oracle_log_regret);
  return out.str();
}

inline void write_seed_csv(const std::string& path, const SeedRun& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kCsvHeader << '\n';
  for (const EpisodeRecord& r : run.records) out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Least-squares fit of c in cum_regret(t) ~ c sqrt(t) on the mean cumulative
// curve, with the fraction of variance it explains.
inline std::pair<double, double> sqrt_fit(const std::vector<double>& mean_curve) {
  double num = 0.0;
  double den = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < mean_curve.size(); ++i) {
    double t = static_cast<double>(i + 1);
    num += std::sqrt(t) * mean_curve[i];
    den += t;
    total += mean_curve[i];
  }
  double c = den > 0.0 ? num / den : 0.0;
  double mean = mean_curve.empty() ? 0.0 : total / mean_curve.size();
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < mean_curve.size(); ++i) {
    double t = static_cast<double>(i + 1);
    double resid = mean_curve[i] - c * std::sqrt(t);
    ss_res += resid * resid;
    ss_tot += (mean_curve[i] - mean) * (mean_curve[i] - mean);
  }
  double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return {c, r2};
}

inline ExperimentSummary summarize(const ExperimentConfig& config,
                                   const std::vector<SeedRun>& runs,
                                   double gamma, double epsilon,
                                   double sq_bound, double log_bound) {
  ExperimentSummary summary;
  summary.gamma = gamma;
  summary.epsilon = epsilon;
  std::vector<double> finals;
  finals.reserve(runs.size());
  for (const SeedRun& run : runs)
    finals.push_back(run.records.back().cum_regret);
  double sum = 0.0;
  for (double f : finals) sum += f;
  summary.final_regret_mean = sum / finals.size();
  double var = 0.0;
  for (double f : finals) {
    double d = f - summary.final_regret_mean;
    var += d * d;
  }
  summary.final_regret_std =
      finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;
  std::vector<double> mean_curve(static_cast<std::size_t>(config.episodes),
                                 0.0);
  for (const SeedRun& run : runs)
    for (std::size_t i = 0; i < run.records.size(); ++i)
      mean_curve[i] += run.records[i].cum_regret / runs.size();
  auto [coefficient, r2] = sqrt_fit(mean_curve);
  summary.sqrt_fit_coefficient = coefficient;
  summary.sqrt_fit_r2 = r2;
  for (const SeedRun& run : runs)
    for (const EpisodeRecord& r : run.records) {
      if (r.fw_gap > summary.max_fw_gap) summary.max_fw_gap = r.fw_gap;
      if (r.oracle_sq_regret > sq_bound + 1e-9 ||
          r.oracle_log_regret > log_bound + 1e-9)
        summary.oracle_bounds_respected = false;
    }
  return summary;
}

inline nlohmann::json summary_to_json(const ExperimentSummary& summary) {
  return nlohmann::json{
      {"final_regret_mean", summary.final_regret_mean},
      {"final_regret_std", summary.final_regret_std},
      {"sqrt_fit_coefficient", summary.sqrt_fit_coefficient},
      {"sqrt_fit_r2", summary.sqrt_fit_r2},
      {"max_fw_gap", summary.max_fw_gap},
      {"oracle_bounds_respected", summary.oracle_bounds_respected},
      {"gamma", summary.gamma},
      {"epsilon", summary.epsilon},
  };
}

// Runs every seed (in parallel), optionally persisting per-seed CSVs and the
// summary JSON under config.output_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       bool write_files = true) {
  Cmdp world = build_world(config);
  RegretEvaluator evaluator(world);
  Agent probe(world.reward_class, world.dynamics_class, world.geometry,
              config.agent);
  double gamma = probe.gamma();
  double epsilon = probe.epsilon();
  double sq_bound = probe.reward_oracle().regret_bound();
  double log_bound = probe.dynamics_oracle().regret_bound();

  std::vector<std::future<SeedRun>> futures;
  futures.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds)
    futures.push_back(std::async(std::launch::async, [&, seed] {
      return run_seed(config, world, evaluator, seed);
    }));
  ExperimentResult result;
  result.runs.reserve(config.seeds.size());
  for (auto& f : futures) result.runs.push_back(f.get());
  result.summary =
      summarize(config, result.runs, gamma, epsilon, sq_bound, log_bound);

  if (write_files && !config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    for (const SeedRun& run : result.runs)
      write_seed_csv(config.output_dir + "/seed_" + std::to_string(run.seed) +
                         ".csv",
                     run);
    std::ofstream out(config.output_dir + "/summary.json");
    if (!out)
      throw std::runtime_error("cannot open for writing: " +
                               config.output_dir + "/summary.json");
    out << summary_to_json(result.summary).dump(2) << '\n';
  }
  return result;
}

// Standalone solver input for the `solve` subcommand.
inline SolverProblem load_solver_problem(const std::string& path,
                                         double* epsilon_out) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse problem file " + path + ": " +
                                e.what());
  }
  try {
    if (epsilon_out) *epsilon_out = j.value("epsilon", 1e-6);
    return SolverProblem::make(
        j.at("dynamics").get<std::vector<double>>(),
        j.at("rewards").get<std::vector<double>>(), j.at("gamma").get<double>(),
        j.at("num_states").get<int>(), j.at("num_actions").get<int>(),
        j.at("horizon").get<int>(), j.value("start_state", 0));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid problem file " + path + ": " +
                                e.what());
  }
}

}  // namespace cmdp
