#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmdp/core.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

// Default floor on transition probabilities in generated instances; keeps
// every state reachable and log-likelihoods finite.
inline constexpr double kDefaultMinProb = 0.01;

// Uniform draw from the probability simplex (via exponential spacings),
// rejected until every coordinate is at least min_prob.
inline std::vector<double> random_distribution(RandomStream& rng, int n,
                                               double min_prob = 0.0) {
  if (n < 1) throw std::invalid_argument("random_distribution: n must be >= 1");
  if (min_prob * n > 1.0)
    throw std::invalid_argument("random_distribution: min_prob infeasible");
  std::vector<double> row(n);
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = rng.uniform01();
      if (u <= 0.0) u = 1e-300;
      row[i] = -std::log(u);
      sum += row[i];
    }
    double min_seen = 2.0;
    for (int i = 0; i < n; ++i) {
      row[i] /= sum;
      if (row[i] < min_seen) min_seen = row[i];
    }
    if (min_seen >= min_prob) return row;
  }
}

inline Policy random_policy(RandomStream& rng, int horizon, int num_states,
                            int num_actions) {
  Policy pi{horizon, num_states, num_actions,
            std::vector<double>(
                static_cast<std::size_t>(horizon) * num_states * num_actions)};
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s) {
      std::vector<double> row = random_distribution(rng, num_actions);
      for (int a = 0; a < num_actions; ++a) pi.prob(h, s, a) = row[a];
    }
  return pi;
}

inline TabularMdp random_mdp(RandomStream& rng, int num_states,
                             int num_actions, int horizon,
                             double min_prob = kDefaultMinProb) {
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.start_state = rng.uniform_int(num_states);
  mdp.dynamics.resize(static_cast<std::size_t>(num_states) * num_actions *
                      num_states);
  mdp.mean_rewards.resize(static_cast<std::size_t>(num_states) * num_actions);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) {
      std::vector<double> row =
          random_distribution(rng, num_states, min_prob);
      for (int s2 = 0; s2 < num_states; ++s2) mdp.transition(s, a, s2) = row[s2];
      mdp.reward(s, a) = rng.uniform01();
    }
  return mdp;
}

inline RewardFunction random_reward_function(RandomStream& rng,
                                             int num_contexts, int num_states,
                                             int num_actions) {
  RewardFunction f;
  f.num_contexts = num_contexts;
  f.num_states = num_states;
  f.num_actions = num_actions;
  f.values.resize(static_cast<std::size_t>(num_contexts) * num_states *
                  num_actions);
  for (double& v : f.values) v = rng.uniform01();
  return f;
}

inline DynamicsFunction random_dynamics_function(
    RandomStream& rng, int num_contexts, int num_states, int num_actions,
    double min_prob = kDefaultMinProb) {
  DynamicsFunction p;
  p.num_contexts = num_contexts;
  p.num_states = num_states;
  p.num_actions = num_actions;
  p.probs.resize(static_cast<std::size_t>(num_contexts) * num_states *
                 num_actions * num_states);
  for (int c = 0; c < num_contexts; ++c)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        std::vector<double> row =
            random_distribution(rng, num_states, min_prob);
        for (int s2 = 0; s2 < num_states; ++s2) p.prob(c, s, a, s2) = row[s2];
      }
  return p;
}

// Draws full reward and dynamics classes with uniformly chosen truth members.
inline Cmdp random_cmdp(RandomStream& rng, int num_contexts, int num_states,
                        int num_actions, int horizon, int num_reward_members,
                        int num_dynamics_members,
                        double min_prob = kDefaultMinProb,
                        int start_state = 0) {
  if (num_reward_members < 1 || num_dynamics_members < 1)
    throw std::invalid_argument("random_cmdp: class sizes must be >= 1");
  RewardClass rewards;
  rewards.members.reserve(num_reward_members);
  for (int i = 0; i < num_reward_members; ++i)
    rewards.members.push_back(
        random_reward_function(rng, num_contexts, num_states, num_actions));
  rewards.truth_index = rng.uniform_int(num_reward_members);
  DynamicsClass dynamics;
  dynamics.members.reserve(num_dynamics_members);
  for (int i = 0; i < num_dynamics_members; ++i)
    dynamics.members.push_back(random_dynamics_function(
        rng, num_contexts, num_states, num_actions, min_prob));
  dynamics.truth_index = rng.uniform_int(num_dynamics_members);
  Geometry geometry{num_states, num_actions, horizon, start_state};
  return build_cmdp(std::move(rewards), std::move(dynamics), geometry);
}

}  // namespace cmdp
