// Acceptance suite for the library. Each check is self-contained, prints one
// PASS/FAIL line with its wall-clock time, and has a hard runtime budget.
// The binary exits with the number of failed checks, so a zero exit status
// means every property below holds on this machine.
//
// Checks:
//   1. occupancy/value identities and polytope feasibility on random MDPs
//   2. the L1 vs squared-Hellinger inequality on random distribution pairs
//   3. the barrier solver against a closed-form optimum
//   4. the iterate-difference certificate on random solver instances
//   5. worst-case regret bounds for both online oracles
//   6. the per-episode regret decomposition identity on a reference run
//   7. sublinear regret growth of the shipped reference configuration
//   8. diagnostic series consistency, including the singleton-class run
//   9. bit-identical CSV output across repeated runs

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"

#ifndef ACCEPTANCE_CONFIG_DIR
#define ACCEPTANCE_CONFIG_DIR "configs"
#endif

namespace {

using cmdp::DynamicsClass;
using cmdp::DynamicsOracle;
using cmdp::DynamicsView;
using cmdp::EpisodeRecord;
using cmdp::ExperimentConfig;
using cmdp::ExperimentResult;
using cmdp::OccupancyMeasure;
using cmdp::Policy;
using cmdp::RandomStream;
using cmdp::RewardClass;
using cmdp::RewardOracle;
using cmdp::SeedRun;
using cmdp::SolverProblem;
using cmdp::SolverResult;
using cmdp::SquareSample;
using cmdp::TabularMdp;
using cmdp::TransitionSample;

std::string config_path(const char* name) {
  return std::string(ACCEPTANCE_CONFIG_DIR) + "/" + name;
}

std::string format_count(int i) {
  std::ostringstream out;
  out << "instance " << i;
  return out.str();
}

// ---- check 1: occupancy identities --------------------------------------

std::string check_occupancy_identities() {
  RandomStream rng(2026001);
  for (int i = 0; i < 100; ++i) {
    int S = 1 + static_cast<int>(rng.uniform_int(5));
    int A = 1 + static_cast<int>(rng.uniform_int(4));
    int H = 1 + static_cast<int>(rng.uniform_int(6));
    TabularMdp mdp = cmdp::random_mdp(rng, S, A, H);
    Policy pi = cmdp::random_policy(rng, H, S, A);
    DynamicsView view = DynamicsView::of(mdp);
    OccupancyMeasure q = cmdp::compute_occupancy(pi, view, mdp.start_state);
    if (!cmdp::satisfies_requirements(q, view, mdp.start_state, 1e-9))
      return format_count(i) + ": occupancy violates polytope requirements";
    double v_occ = cmdp::value_from_occupancy(q, mdp.mean_rewards.data());
    double v_bwd = cmdp::value_backward_induction(
        pi, view, mdp.mean_rewards.data(), mdp.start_state);
    if (std::fabs(v_occ - v_bwd) > 1e-10)
      return format_count(i) + ": occupancy value disagrees with backward "
                               "induction by " +
             std::to_string(std::fabs(v_occ - v_bwd));
  }
  return "";
}

// ---- check 2: L1 vs squared Hellinger -----------------------------------

std::string check_l1_hellinger() {
  RandomStream rng(2026002);
  for (int i = 0; i < 10000; ++i) {
    int n = 1 + static_cast<int>(rng.uniform_int(8));
    std::vector<double> p = cmdp::random_distribution(rng, n);
    std::vector<double> q = cmdp::random_distribution(rng, n);
    double l1 = cmdp::l1_distance(p.data(), q.data(), n);
    double h = cmdp::hellinger_sq(p.data(), q.data(), n);
    if (l1 * l1 > 4.0 * h)
      return "pair " + std::to_string(i) + ": l1^2 = " + std::to_string(l1 * l1) +
             " exceeds 4*hellinger_sq = " + std::to_string(4.0 * h);
  }
  return "";
}

// ---- check 3: solver closed-form optimum --------------------------------

std::string check_solver_analytic() {
  // One state, two actions, one step, rewards (1, 0), gamma = 2. The barrier
  // objective q0 + (log q0 + log q1) / 2 with q1 = 1 - q0 peaks where
  // 1 = (1/q0 - 1/q1) / 2, i.e. at q0 = 1/sqrt(2).
  SolverProblem problem =
      SolverProblem::make({1.0, 1.0}, {1.0, 0.0}, 2.0, 1, 2, 1, 0);
  std::vector<double> objectives;
  SolverResult result = cmdp::solve(
      problem, 1e-9, 0,
      [&](long, const OccupancyMeasure&, double objective, double) {
        objectives.push_back(objective);
      });
  if (!result.converged) return "solver did not report convergence";
  if (result.fw_gap > 1e-9)
    return "terminal gap " + std::to_string(result.fw_gap) +
           " exceeds requested 1e-9";
  const double kRoot = 0.70710678118654752;
  double q0 = result.q_hat.at(0, 0, 0);
  double q1 = result.q_hat.at(0, 0, 1);
  if (std::fabs(q0 - kRoot) > 1e-6 || std::fabs(q1 - (1.0 - kRoot)) > 1e-6)
    return "optimum (" + std::to_string(q0) + ", " + std::to_string(q1) +
           ") is not (1/sqrt(2), 1 - 1/sqrt(2)) to 1e-6";
  for (std::size_t k = 1; k < objectives.size(); ++k)
    if (objectives[k] + 1e-12 < objectives[k - 1])
      return "objective decreased at iteration " + std::to_string(k);
  return "";
}

// ---- check 4: iterate-difference certificate ----------------------------

std::string check_certificate() {
  RandomStream rng(2026004);
  for (int i = 0; i < 20; ++i) {
    int S = 1 + static_cast<int>(rng.uniform_int(4));
    int A = 1 + static_cast<int>(rng.uniform_int(3));
    int H = 1 + static_cast<int>(rng.uniform_int(4));
    std::vector<double> dynamics;
    dynamics.reserve(static_cast<std::size_t>(S) * A * S);
    for (int row = 0; row < S * A; ++row) {
      std::vector<double> r = cmdp::random_distribution(rng, S, 0.01);
      dynamics.insert(dynamics.end(), r.begin(), r.end());
    }
    std::vector<double> rewards(static_cast<std::size_t>(S) * A);
    for (double& v : rewards) v = rng.uniform01();
    double gamma = 0.5 * std::exp(rng.uniform01() * std::log(8.0));
    SolverProblem problem =
        SolverProblem::make(dynamics, rewards, gamma, S, A, H, 0);

    SolverResult reference = cmdp::solve(problem, 1e-10);
    std::vector<OccupancyMeasure> iterates;
    cmdp::solve(problem, 1e-6, 0,
                [&](long, const OccupancyMeasure& q, double, double) {
                  iterates.push_back(q);
                });
    for (std::size_t k = 0; k < iterates.size(); ++k) {
      cmdp::CertificatePair cert = cmdp::iterate_difference_certificate(
          problem, reference.q_hat, iterates[k]);
      if (cert.lhs > cert.rhs + 1e-9)
        return format_count(i) + " iterate " + std::to_string(k) +
               ": certificate lhs " + std::to_string(cert.lhs) +
               " exceeds rhs " + std::to_string(cert.rhs);
    }
  }
  return "";
}

// ---- check 5: oracle regret bounds --------------------------------------

std::string check_oracle_bounds() {
  const int kContexts = 4, kStates = 2, kActions = 2, kMembers = 8;
  const int kSteps = 500;
  for (int stream = 0; stream < 100; ++stream) {
    bool adversarial = stream < 50;
    RandomStream rng = RandomStream::derived(2026005, 1, stream);

    RewardClass rewards;
    for (int m = 0; m < kMembers; ++m)
      rewards.members.push_back(
          cmdp::random_reward_function(rng, kContexts, kStates, kActions));
    RewardOracle sq_oracle(rewards);
    for (int step = 0; step < kSteps; ++step) {
      int c = static_cast<int>(rng.uniform_int(kContexts));
      int s = static_cast<int>(rng.uniform_int(kStates));
      int a = static_cast<int>(rng.uniform_int(kActions));
      // The adversary always reports the outcome farthest from the current
      // prediction; the bound must hold for any outcome sequence.
      double y = adversarial
                     ? (sq_oracle.predict_point(c, s, a) < 0.5 ? 1.0 : 0.0)
                     : rng.uniform01();
      sq_oracle.update({SquareSample{c, s, a, y}});
    }
    if (sq_oracle.realized_regret() > sq_oracle.regret_bound() + 1e-9)
      return "square-loss stream " + std::to_string(stream) + ": regret " +
             std::to_string(sq_oracle.realized_regret()) + " exceeds bound " +
             std::to_string(sq_oracle.regret_bound());

    DynamicsClass dynamics;
    for (int m = 0; m < kMembers; ++m)
      dynamics.members.push_back(cmdp::random_dynamics_function(
          rng, kContexts, kStates, kActions, 0.01));
    DynamicsOracle log_oracle(dynamics);
    for (int step = 0; step < kSteps; ++step) {
      int c = static_cast<int>(rng.uniform_int(kContexts));
      int s = static_cast<int>(rng.uniform_int(kStates));
      int a = static_cast<int>(rng.uniform_int(kActions));
      int next = 0;
      if (adversarial) {
        // Most damaging observation: the successor the mixture considers
        // least likely (always positive here because members keep every
        // transition above the generation floor).
        double worst = 2.0;
        for (int s2 = 0; s2 < kStates; ++s2) {
          double prob = log_oracle.predict_point(c, s, a, s2);
          if (prob < worst) {
            worst = prob;
            next = s2;
          }
        }
      } else {
        next = static_cast<int>(rng.uniform_int(kStates));
      }
      log_oracle.update({TransitionSample{c, s, a, next}});
    }
    if (log_oracle.realized_regret() > log_oracle.regret_bound() + 1e-9)
      return "log-loss stream " + std::to_string(stream) + ": regret " +
             std::to_string(log_oracle.realized_regret()) +
             " exceeds bound " + std::to_string(log_oracle.regret_bound());
  }
  return "";
}

// ---- check 6: regret decomposition identity ------------------------------

std::string check_decomposition(ExperimentResult* out) {
  ExperimentConfig config =
      cmdp::load_experiment_config(config_path("reference.json"));
  config.episodes = 500;
  config.agent.horizon_T = 500;
  config.seeds = {config.seeds.front()};
  config.output_dir.clear();
  *out = cmdp::run_experiment(config, /*write_files=*/false);
  for (const EpisodeRecord& r : out->runs.front().records) {
    double gap = std::fabs(r.term1 + r.term2 + r.term3 - r.inst_regret);
    if (gap > 1e-9)
      return "episode " + std::to_string(r.t) + ": decomposition residual " +
             std::to_string(gap);
  }
  return "";
}

// ---- check 7: sublinear regret of the reference configuration ------------

std::string check_reference_regret() {
  ExperimentConfig config =
      cmdp::load_experiment_config(config_path("reference.json"));
  config.output_dir.clear();
  ExperimentResult result = cmdp::run_experiment(config, /*write_files=*/false);

  long T = config.episodes;
  double early_mean = 0.0;
  double late_mean = 0.0;
  for (const SeedRun& run : result.runs) {
    early_mean += run.records[T / 8 - 1].cum_regret / static_cast<double>(T / 8);
    late_mean += run.records[T - 1].cum_regret / static_cast<double>(T);
  }
  early_mean /= static_cast<double>(result.runs.size());
  late_mean /= static_cast<double>(result.runs.size());

  if (!(late_mean <= 0.5 * early_mean))
    return "average regret ratio " + std::to_string(late_mean / early_mean) +
           " exceeds 0.5 (early " + std::to_string(early_mean) + ", late " +
           std::to_string(late_mean) + ")";
  if (result.summary.sqrt_fit_r2 < 0.9)
    return "sqrt-curve fit R^2 " + std::to_string(result.summary.sqrt_fit_r2) +
           " is below 0.9";
  return "";
}

// ---- check 8: diagnostic consistency -------------------------------------

std::string check_diagnostics(const ExperimentResult& reference500) {
  for (const SeedRun& run : reference500.runs)
    for (const EpisodeRecord& r : run.records) {
      if (r.e_sq_increment < 0.0)
        return "reference episode " + std::to_string(r.t) +
               ": negative squared-error increment";
      if (r.hellinger_increment < 0.0)
        return "reference episode " + std::to_string(r.t) +
               ": negative Hellinger increment";
    }

  ExperimentConfig config =
      cmdp::load_experiment_config(config_path("singleton.json"));
  config.output_dir.clear();
  ExperimentResult result = cmdp::run_experiment(config, /*write_files=*/false);
  for (const SeedRun& run : result.runs)
    for (const EpisodeRecord& r : run.records) {
      if (r.e_sq_increment != 0.0 || r.hellinger_increment != 0.0)
        return "singleton episode " + std::to_string(r.t) +
               ": nonzero estimation diagnostics";
      if (r.term1 != 0.0 || r.term3 != 0.0)
        return "singleton episode " + std::to_string(r.t) +
               ": nonzero model-error terms";
    }
  return "";
}

// ---- check 9: determinism -------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string check_determinism() {
  namespace fs = std::filesystem;
  ExperimentConfig config =
      cmdp::load_experiment_config(config_path("smoke.json"));
  fs::path base = fs::temp_directory_path() / "cmdp_acceptance";
  fs::path dir_a = base / "a";
  fs::path dir_b = base / "b";
  fs::remove_all(base);

  config.output_dir = dir_a.string();
  cmdp::run_experiment(config, /*write_files=*/true);
  config.output_dir = dir_b.string();
  cmdp::run_experiment(config, /*write_files=*/true);

  std::string failure;
  for (std::uint64_t seed : config.seeds) {
    std::string name = "seed_" + std::to_string(seed) + ".csv";
    std::string a = read_file(dir_a / name);
    std::string b = read_file(dir_b / name);
    if (a.empty() || a != b) {
      failure = name + " differs between identical runs";
      break;
    }
  }
  fs::remove_all(base);
  return failure;
}

struct Check {
  const char* name;
  double budget_seconds;
  std::function<std::string()> body;
};

}  // namespace

int main() {
  ExperimentResult reference500;
  std::vector<Check> checks = {
      {"occupancy and value identities on 100 random instances", 5.0,
       check_occupancy_identities},
      {"L1 vs squared-Hellinger inequality on 10000 pairs", 1.0,
       check_l1_hellinger},
      {"barrier solver reaches the closed-form optimum", 1.0,
       check_solver_analytic},
      {"iterate-difference certificate on 20 random instances", 30.0,
       check_certificate},
      {"oracle regret bounds on 100 streams per oracle", 10.0,
       check_oracle_bounds},
      {"per-episode regret decomposition identity (T=500)", 30.0,
       [&] { return check_decomposition(&reference500); }},
      {"reference config: regret ratio <= 0.5 and sqrt fit R^2 >= 0.9", 300.0,
       check_reference_regret},
      {"diagnostics nondecreasing; singleton run has zero model error", 10.0,
       [&] { return check_diagnostics(reference500); }},
      {"bit-identical CSV output across repeated runs", 60.0,
       check_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      error = checks[i].body();
    } catch (const std::exception& e) {
      error = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && elapsed > checks[i].budget_seconds)
      error = "runtime " + std::to_string(elapsed) + " s exceeds budget of " +
              std::to_string(checks[i].budget_seconds) + " s";
    std::printf("%s  %zu/9  %-62s [%7.2f s]%s%s\n",
                error.empty() ? "PASS" : "FAIL", i + 1, checks[i].name,
                elapsed, error.empty() ? "" : "  ", error.c_str());
    std::fflush(stdout);
    if (!error.empty()) ++failures;
  }
  std::printf("acceptance: %d/9 checks passed\n",
              static_cast<int>(checks.size()) - failures);
  return failures;
}
