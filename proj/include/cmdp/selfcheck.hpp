#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cmdp/agent.hpp"
#include "cmdp/experiment.hpp"
#include "cmdp/harness.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/oracles.hpp"
#include "cmdp/random_instances.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {
namespace selfcheck {

inline constexpr std::uint64_t kCheckSeed = 0x5e1fc4ecull;

inline bool check_occupancy_identity(std::ostream& out) {
  RandomStream rng = RandomStream::derived(kCheckSeed, 101, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int S = 2 + rng.uniform_int(4);
    int A = 2 + rng.uniform_int(3);
    int H = 1 + rng.uniform_int(5);
    TabularMdp mdp = random_mdp(rng, S, A, H);
    Policy policy = random_policy(rng, H, S, A);
    OccupancyMeasure q =
        compute_occupancy(policy, DynamicsView::of(mdp), mdp.start_state);
    if (!satisfies_requirements(q, DynamicsView::of(mdp), mdp.start_state)) {
      out << "occupancy polytope violated on trial " << trial << "\n";
      return false;
    }
    double via_occupancy = value_from_occupancy(q, mdp.mean_rewards.data());
    double via_induction = value_backward_induction(
        policy, DynamicsView::of(mdp), mdp.mean_rewards.data(),
        mdp.start_state);
    if (std::abs(via_occupancy - via_induction) > 1e-10) {
      out << "value identity violated on trial " << trial << ": "
          << via_occupancy << " vs " << via_induction << "\n";
      return false;
    }
  }
  return true;
}

inline bool check_hellinger_l1(std::ostream& out) {
  RandomStream rng = RandomStream::derived(kCheckSeed, 102, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    int n = 2 + rng.uniform_int(5);
    std::vector<double> p = random_distribution(rng, n);
    std::vector<double> q = random_distribution(rng, n);
    double h2 = hellinger_sq(p.data(), q.data(), n);
    double l1 = l1_distance(p.data(), q.data(), n);
    if (h2 < 0.0 || l1 * l1 > 4.0 * h2 + 1e-12) {
      out << "Hellinger/L1 bound violated on trial " << trial << "\n";
      return false;
    }
    if (hellinger_sq(p.data(), p.data(), n) != 0.0) {
      out << "Hellinger self-distance nonzero on trial " << trial << "\n";
      return false;
    }
  }
  return true;
}

inline bool check_solver(std::ostream& out) {
  SolverProblem analytic = SolverProblem::make({1.0, 1.0}, {1.0, 0.0}, 2.0, 1,
                                               2, 1, 0);
  SolverResult res = solve(analytic, 1e-9);
  double expected = 1.0 / std::sqrt(2.0);
  if (!res.converged || std::abs(res.q_hat.at(0, 0, 0) - expected) > 1e-6 ||
      std::abs(res.q_hat.at(0, 0, 1) - (1.0 - expected)) > 1e-6) {
    out << "analytic two-action instance not solved: q = ("
        << res.q_hat.at(0, 0, 0) << ", " << res.q_hat.at(0, 0, 1) << ")\n";
    return false;
  }
  RandomStream rng = RandomStream::derived(kCheckSeed, 103, 0);
  for (int trial = 0; trial < 5; ++trial) {
    int S = 2 + rng.uniform_int(2);
    int A = 2 + rng.uniform_int(2);
    int H = 2 + rng.uniform_int(2);
    TabularMdp mdp = random_mdp(rng, S, A, H);
    double gamma = 0.5 + 3.5 * rng.uniform01();
    SolverProblem problem =
        SolverProblem::make(mdp.dynamics, mdp.mean_rewards, gamma, S, A, H,
                            mdp.start_state);
    double last_obj = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    SolverResult sr = solve(problem, 1e-8, 0,
                            [&](long, const OccupancyMeasure&, double obj,
                                double) {
                              if (obj < last_obj - 1e-12) monotone = false;
                              last_obj = obj;
                            });
    if (!sr.converged || !monotone ||
        !satisfies_requirements(sr.q_hat, problem.dynamics_view(),
                                problem.start_state)) {
      out << "solver failed on random trial " << trial << " (converged="
          << sr.converged << ", monotone=" << monotone << ")\n";
      return false;
    }
    for (int probe = 0; probe < 20; ++probe) {
      Policy pi = random_policy(rng, H, S, A);
      OccupancyMeasure q =
          compute_occupancy(pi, problem.dynamics_view(), problem.start_state);
      if (objective(problem, q) >
          objective(problem, sr.q_hat) + sr.fw_gap + 1e-9) {
        out << "probe beat the solver on trial " << trial << "\n";
        return false;
      }
    }
  }
  return true;
}

inline bool check_certificate(std::ostream& out) {
  RandomStream rng = RandomStream::derived(kCheckSeed, 104, 0);
  for (int trial = 0; trial < 5; ++trial) {
    int S = 2 + rng.uniform_int(2);
    int A = 2;
    int H = 2 + rng.uniform_int(2);
    TabularMdp mdp = random_mdp(rng, S, A, H);
    double gamma = 0.5 + 3.5 * rng.uniform01();
    SolverProblem problem = SolverProblem::make(
        mdp.dynamics, mdp.mean_rewards, gamma, S, A, H, mdp.start_state);
    SolverResult accurate = solve(problem, 1e-10);
    std::vector<OccupancyMeasure> iterates;
    solve(problem, 1e-8, 0,
          [&](long, const OccupancyMeasure& q, double, double) {
            iterates.push_back(q);
          });
    for (const OccupancyMeasure& q : iterates) {
      CertificatePair pair =
          iterate_difference_certificate(problem, accurate.q_hat, q);
      if (pair.lhs > pair.rhs + 1e-9) {
        out << "certificate violated on trial " << trial << ": lhs="
            << pair.lhs << " rhs=" << pair.rhs << "\n";
        return false;
      }
    }
  }
  return true;
}

inline bool check_oracle_bounds(std::ostream& out) {
  RandomStream rng = RandomStream::derived(kCheckSeed, 105, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int C = 1 + rng.uniform_int(3);
    int S = 2 + rng.uniform_int(2);
    int A = 2;
    int members = 2 + rng.uniform_int(6);
    RewardClass rewards;
    for (int i = 0; i < members; ++i)
      rewards.members.push_back(random_reward_function(rng, C, S, A));
    RewardOracle sq(rewards);
    DynamicsClass dynamics;
    for (int i = 0; i < members; ++i)
      dynamics.members.push_back(random_dynamics_function(rng, C, S, A));
    DynamicsOracle lg(dynamics);
    for (int step = 0; step < 200; ++step) {
      int c = rng.uniform_int(C);
      int s = rng.uniform_int(S);
      int a = rng.uniform_int(A);
      sq.update({{c, s, a, rng.uniform01()}});
      lg.update({{c, s, a, rng.uniform_int(S)}});
      if (sq.realized_regret() > sq.regret_bound() + 1e-9 ||
          lg.realized_regret() > lg.regret_bound() + 1e-9) {
        out << "oracle regret bound violated on trial " << trial << " step "
            << step << "\n";
        return false;
      }
    }
  }
  return true;
}

inline bool check_episode_records(std::ostream& out) {
  ExperimentConfig config;
  config.geometry = Geometry{2, 2, 3, 0};
  config.num_contexts = 3;
  config.classes.num_reward_members = 4;
  config.classes.num_dynamics_members = 4;
  config.classes.generation_seed = 77;
  config.schedule.kind = ScheduleKind::kCyclic;
  config.episodes = 50;
  config.seeds = {1};
  try {
    ExperimentResult a = run_experiment(config, false);
    ExperimentResult b = run_experiment(config, false);
    for (std::size_t i = 0; i < a.runs[0].records.size(); ++i)
      if (csv_row(a.runs[0].records[i]) != csv_row(b.runs[0].records[i])) {
        out << "rerun not bit-identical at episode " << (i + 1) << "\n";
        return false;
      }
  } catch (const InvariantViolation& e) {
    out << "episode invariant violated: " << e.what() << "\n";
    return false;
  }
  return true;
}

// Runs every property; prints one line per check; true iff all pass.
inline bool run_all(std::ostream& out) {
  struct Entry {
    const char* name;
    bool (*fn)(std::ostream&);
  };
  const Entry entries[] = {
      {"occupancy-identity", &check_occupancy_identity},
      {"hellinger-l1-bound", &check_hellinger_l1},
      {"solver", &check_solver},
      {"closeness-certificate", &check_certificate},
      {"oracle-regret-bounds", &check_oracle_bounds},
      {"episode-records", &check_episode_records},
  };
  bool all_ok = true;
  for (const Entry& entry : entries) {
    bool ok = entry.fn(out);
    out << (ok ? "PASS" : "FAIL") << "  " << entry.name << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok;
}

}  // namespace selfcheck
}  // namespace cmdp
