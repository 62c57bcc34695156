#include <cmath>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

#include "cmdp/agent.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/random_instances.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/solver.hpp"

namespace {

using cmdp::Agent;
using cmdp::AgentConfig;
using cmdp::Cmdp;
using cmdp::compute_gamma;
using cmdp::compute_occupancy;
using cmdp::EpisodeOutcome;
using cmdp::GammaVariant;
using cmdp::Policy;
using cmdp::RandomStream;
using cmdp::simulate_episode;
using cmdp::TabularMdp;

TEST(ComputeGamma, MatchesHighPrecisionReference) {
  double g = compute_gamma(2, 2, 1, 100, 0.5, std::log(2.0), std::log(2.0),
                           GammaVariant::kExact31);
  EXPECT_NEAR(g, 0.690882376764711933, 1e-12);
}

TEST(ComputeGamma, ScalesWithSqrtEpisodes) {
  double g1 = compute_gamma(3, 2, 4, 500, 0.05, 1.0, 1.0,
                            GammaVariant::kApprox62);
  double g4 = compute_gamma(3, 2, 4, 2000, 0.05, 1.0, 1.0,
                            GammaVariant::kApprox62);
  EXPECT_NEAR(g4 / g1, 2.0, 1e-14);
}

TEST(ComputeGamma, VariantRatioIsSqrtOfConstantRatio) {
  double g31 = compute_gamma(3, 2, 4, 500, 0.05, 1.0, 1.0,
                             GammaVariant::kExact31);
  double g62 = compute_gamma(3, 2, 4, 500, 0.05, 1.0, 1.0,
                             GammaVariant::kApprox62);
  EXPECT_NEAR(g62 / g31, 0.70710678118654752, 1e-15);
}

TEST(ComputeGamma, RejectsBadInputs) {
  EXPECT_THROW(compute_gamma(0, 2, 1, 10, 0.1, 1.0, 1.0,
                             GammaVariant::kExact31),
               std::invalid_argument);
  EXPECT_THROW(compute_gamma(2, 2, 1, 0, 0.1, 1.0, 1.0,
                             GammaVariant::kExact31),
               std::invalid_argument);
  EXPECT_THROW(compute_gamma(2, 2, 1, 10, 0.0, 1.0, 1.0,
                             GammaVariant::kExact31),
               std::invalid_argument);
  EXPECT_THROW(compute_gamma(2, 2, 1, 10, 1.0, 1.0, 1.0,
                             GammaVariant::kExact31),
               std::invalid_argument);
}

Cmdp MakeWorld(std::uint64_t seed, int contexts, int members) {
  RandomStream rng(seed);
  return cmdp::random_cmdp(rng, contexts, 2, 2, 3, members, members);
}

Agent MakeAgent(const Cmdp& world, AgentConfig config) {
  return Agent(world.reward_class, world.dynamics_class, world.geometry,
               config);
}

TEST(Agent, EpsilonGammaProductIsOneOverSixteenT) {
  Cmdp world = MakeWorld(1, 2, 3);
  for (long T : {1L, 10L, 400L}) {
    AgentConfig config;
    config.horizon_T = T;
    Agent agent = MakeAgent(world, config);
    EXPECT_NEAR(agent.epsilon() * agent.gamma() * 16.0 * T, 1.0, 1e-12);
    EXPECT_LE(agent.epsilon() * agent.gamma(), 1.0 / 16.0 + 1e-15);
  }
}

TEST(Agent, GammaOverrideWins) {
  Cmdp world = MakeWorld(2, 2, 3);
  AgentConfig config;
  config.horizon_T = 50;
  config.gamma_override = 7.5;
  Agent agent = MakeAgent(world, config);
  EXPECT_DOUBLE_EQ(agent.gamma(), 7.5);
}

TEST(Agent, DefaultBoundsComeFromTheOracles) {
  Cmdp world = MakeWorld(3, 2, 4);
  AgentConfig config;
  config.horizon_T = 50;
  Agent agent = MakeAgent(world, config);
  double expected = compute_gamma(2, 2, 3, 50, config.delta,
                                  2.0 * std::log(4.0), std::log(4.0),
                                  GammaVariant::kApprox62);
  EXPECT_NEAR(agent.gamma(), expected, 1e-14);
}

TEST(Agent, SingletonTruthPredictsTruthAndMaximizesTrueObjective) {
  Cmdp world = MakeWorld(4, 2, 1);
  AgentConfig config;
  config.horizon_T = 5;
  config.gamma_override = 4.0;
  Agent agent = MakeAgent(world, config);
  RandomStream rng(99);
  for (long t = 0; t < 5; ++t) {
    int context = static_cast<int>(t % 2);
    TabularMdp mdp = world.mdp_for_context(context);
    EpisodeOutcome outcome = agent.run_episode(context, [&](const Policy& pi) {
      return simulate_episode(mdp, pi, rng);
    });
    EXPECT_EQ(outcome.reward_estimate, world.true_rewards().slice(context));
    EXPECT_EQ(outcome.dynamics_estimate,
              world.true_dynamics().slice(context));
    cmdp::SolverProblem truth_problem = cmdp::SolverProblem::make(
        mdp.dynamics, mdp.mean_rewards, agent.gamma(), 2, 2, 3,
        mdp.start_state);
    double planned = cmdp::objective(truth_problem, outcome.solver.q_hat);
    RandomStream probe_rng(t);
    for (int probe = 0; probe < 20; ++probe) {
      Policy pi = cmdp::random_policy(probe_rng, 3, 2, 2);
      cmdp::OccupancyMeasure q = compute_occupancy(
          pi, truth_problem.dynamics_view(), mdp.start_state);
      EXPECT_LE(cmdp::objective(truth_problem, q),
                planned + outcome.solver.fw_gap + 1e-9);
    }
    EXPECT_DOUBLE_EQ(outcome.oracle_sq_regret, 0.0);
    EXPECT_DOUBLE_EQ(outcome.oracle_log_regret, 0.0);
  }
}

TEST(Agent, FirstEpisodeUsesUniformPriorAndOneUpdateStep) {
  Cmdp world = MakeWorld(5, 1, 2);
  AgentConfig config;
  config.horizon_T = 1;
  config.gamma_override = 3.0;
  Agent agent = MakeAgent(world, config);
  const auto& f0 = world.reward_class.members[0];
  const auto& f1 = world.reward_class.members[1];
  const auto& p0 = world.dynamics_class.members[0];
  const auto& p1 = world.dynamics_class.members[1];
  TabularMdp mdp = world.mdp_for_context(0);
  RandomStream rng(123);
  EpisodeOutcome outcome = agent.run_episode(0, [&](const Policy& pi) {
    return simulate_episode(mdp, pi, rng);
  });
  // Prior predictions are the unweighted averages of the two members.
  std::vector<double> f0_slice = f0.slice(0);
  std::vector<double> f1_slice = f1.slice(0);
  for (std::size_t i = 0; i < f0_slice.size(); ++i)
    EXPECT_NEAR(outcome.reward_estimate[i],
                0.5 * (f0_slice[i] + f1_slice[i]), 1e-15);
  // Post-episode weights follow one exponential-weights / Bayes step
  // recomputed directly from the realized trajectory.
  double sq_loss0 = 0.0;
  double sq_loss1 = 0.0;
  double lik0 = 1.0;
  double lik1 = 1.0;
  for (int h = 0; h < 3; ++h) {
    int s = outcome.trajectory.states[h];
    int a = outcome.trajectory.actions[h];
    int s2 = outcome.trajectory.states[h + 1];
    double r = outcome.trajectory.rewards[h];
    sq_loss0 += (f0.value(0, s, a) - r) * (f0.value(0, s, a) - r);
    sq_loss1 += (f1.value(0, s, a) - r) * (f1.value(0, s, a) - r);
    lik0 *= p0.prob(0, s, a, s2);
    lik1 *= p1.prob(0, s, a, s2);
  }
  double w0 = std::exp(-0.5 * sq_loss0);
  double w1 = std::exp(-0.5 * sq_loss1);
  std::vector<double> sq_weights = agent.reward_oracle().weights();
  EXPECT_NEAR(sq_weights[0], w0 / (w0 + w1), 1e-12);
  EXPECT_NEAR(sq_weights[1], w1 / (w0 + w1), 1e-12);
  std::vector<double> log_weights = agent.dynamics_oracle().weights();
  EXPECT_NEAR(log_weights[0], lik0 / (lik0 + lik1), 1e-12);
  EXPECT_NEAR(log_weights[1], lik1 / (lik0 + lik1), 1e-12);
}

TEST(Agent, EpisodesAreDeterministicGivenStreams) {
  Cmdp world = MakeWorld(6, 2, 3);
  auto run_once = [&]() {
    AgentConfig config;
    config.horizon_T = 8;
    config.gamma_override = 2.0;
    Agent agent = MakeAgent(world, config);
    std::vector<EpisodeOutcome> outcomes;
    for (long t = 0; t < 8; ++t) {
      int context = static_cast<int>(t % 2);
      TabularMdp mdp = world.mdp_for_context(context);
      RandomStream rng = RandomStream::derived(42, 3, t);
      outcomes.push_back(agent.run_episode(context, [&](const Policy& pi) {
        return simulate_episode(mdp, pi, rng);
      }));
    }
    return outcomes;
  };
  std::vector<EpisodeOutcome> a = run_once();
  std::vector<EpisodeOutcome> b = run_once();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].trajectory.states, b[i].trajectory.states);
    EXPECT_EQ(a[i].trajectory.actions, b[i].trajectory.actions);
    EXPECT_EQ(a[i].trajectory.rewards, b[i].trajectory.rewards);
    EXPECT_EQ(a[i].solver.q_hat.values, b[i].solver.q_hat.values);
    EXPECT_EQ(a[i].policy.probs, b[i].policy.probs);
    EXPECT_EQ(a[i].oracle_sq_regret, b[i].oracle_sq_regret);
    EXPECT_EQ(a[i].oracle_log_regret, b[i].oracle_log_regret);
  }
}

TEST(Agent, EpisodeIndexIncrementsByOne) {
  Cmdp world = MakeWorld(7, 1, 2);
  AgentConfig config;
  config.horizon_T = 3;
  config.gamma_override = 2.0;
  Agent agent = MakeAgent(world, config);
  TabularMdp mdp = world.mdp_for_context(0);
  RandomStream rng(5);
  EXPECT_EQ(agent.episode_index(), 0);
  for (long t = 0; t < 3; ++t) {
    agent.run_episode(0, [&](const Policy& pi) {
      return simulate_episode(mdp, pi, rng);
    });
    EXPECT_EQ(agent.episode_index(), t + 1);
  }
}

}  // namespace
