#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/rng.hpp"

namespace cmdp {

// Tolerance for stored probability tables (dynamics rows, policy rows).
inline constexpr double kRowSumTol = 1e-12;
// Tolerance for occupancy-measure polytope checks.
inline constexpr double kPolytopeTol = 1e-9;

// Thrown when an observed transition has zero probability under every class
// member, which cannot happen when the true dynamics are in the class.
class RealizabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_distribution_row(const double* row, int n, double tol,
                                   const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (row[i] < 0.0) {
      throw std::invalid_argument(what + ": negative entry");
    }
    sum += row[i];
  }
  if (sum < 1.0 - tol || sum > 1.0 + tol) {
    throw std::invalid_argument(what + ": row sums to " + std::to_string(sum));
  }
}

}  // namespace detail

// One context's realized MDP: stationary dynamics P(s'|s,a) and mean rewards
// r(s,a), a unique start state and a finite horizon.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int start_state = 0;
  std::vector<double> dynamics;      // P[s][a][s'], flat S*A*S
  std::vector<double> mean_rewards;  // r[s][a], flat S*A

  double transition(int s, int a, int s2) const {
    return dynamics[(static_cast<std::size_t>(s) * num_actions + a) *
                        num_states +
                    s2];
  }
  double& transition(int s, int a, int s2) {
    return dynamics[(static_cast<std::size_t>(s) * num_actions + a) *
                        num_states +
                    s2];
  }
  const double* transition_row(int s, int a) const {
    return dynamics.data() +
           (static_cast<std::size_t>(s) * num_actions + a) * num_states;
  }
  double reward(int s, int a) const {
    return mean_rewards[static_cast<std::size_t>(s) * num_actions + a];
  }
  double& reward(int s, int a) {
    return mean_rewards[static_cast<std::size_t>(s) * num_actions + a];
  }

  void validate() const {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
      throw std::invalid_argument("TabularMdp: empty geometry");
    if (start_state < 0 || start_state >= num_states)
      throw std::invalid_argument("TabularMdp: start state out of range");
    if (dynamics.size() !=
        static_cast<std::size_t>(num_states) * num_actions * num_states)
      throw std::invalid_argument("TabularMdp: dynamics size mismatch");
    if (mean_rewards.size() != static_cast<std::size_t>(num_states) * num_actions)
      throw std::invalid_argument("TabularMdp: reward size mismatch");
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        detail::check_distribution_row(
            transition_row(s, a), num_states, kRowSumTol,
            "dynamics row (s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                ")");
        double r = reward(s, a);
        if (r < 0.0 || r > 1.0)
          throw std::invalid_argument("TabularMdp: reward outside [0,1]");
      }
  }
};

// Finite context space; contexts are opaque ids 0..num_contexts-1.
struct ContextSpace {
  int num_contexts = 1;
};

// Context-dependent mean rewards f(c,s,a) in [0,1].
struct RewardFunction {
  int num_contexts = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;  // f[c][s][a], flat C*S*A

  double value(int c, int s, int a) const {
    return values[(static_cast<std::size_t>(c) * num_states + s) * num_actions +
                  a];
  }
  double& value(int c, int s, int a) {
    return values[(static_cast<std::size_t>(c) * num_states + s) * num_actions +
                  a];
  }
  // The S*A reward table of one context.
  std::vector<double> slice(int c) const {
    std::size_t n = static_cast<std::size_t>(num_states) * num_actions;
    auto begin = values.begin() + static_cast<std::ptrdiff_t>(n) * c;
    return std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(n));
  }

  void validate() const {
    if (values.size() !=
        static_cast<std::size_t>(num_contexts) * num_states * num_actions)
      throw std::invalid_argument("RewardFunction: size mismatch");
    for (double v : values)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("RewardFunction: entry outside [0,1]");
  }
};

// Context-dependent dynamics P(s'|s,a,c); every (c,s,a) row is a distribution.
struct DynamicsFunction {
  int num_contexts = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;  // P[c][s][a][s'], flat C*S*A*S

  double prob(int c, int s, int a, int s2) const {
    return probs[((static_cast<std::size_t>(c) * num_states + s) * num_actions +
                  a) *
                     num_states +
                 s2];
  }
  double& prob(int c, int s, int a, int s2) {
    return probs[((static_cast<std::size_t>(c) * num_states + s) * num_actions +
                  a) *
                     num_states +
                 s2];
  }
  const double* row(int c, int s, int a) const {
    return probs.data() +
           ((static_cast<std::size_t>(c) * num_states + s) * num_actions + a) *
               num_states;
  }
  // The S*A*S dynamics tensor of one context.
  std::vector<double> slice(int c) const {
    std::size_t n =
        static_cast<std::size_t>(num_states) * num_actions * num_states;
    auto begin = probs.begin() + static_cast<std::ptrdiff_t>(n) * c;
    return std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(n));
  }

  void validate() const {
    if (probs.size() != static_cast<std::size_t>(num_contexts) * num_states *
                            num_actions * num_states)
      throw std::invalid_argument("DynamicsFunction: size mismatch");
    for (int c = 0; c < num_contexts; ++c)
      for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
          detail::check_distribution_row(
              row(c, s, a), num_states, kRowSumTol,
              "dynamics row (c=" + std::to_string(c) + ",s=" +
                  std::to_string(s) + ",a=" + std::to_string(a) + ")");
  }
};

// Finite indexed family of reward or dynamics functions. truth_index marks
// the realizable member; only the simulator side ever dereferences it.
template <typename F>
struct FunctionClass {
  std::vector<F> members;
  int truth_index = 0;

  int size() const { return static_cast<int>(members.size()); }
  const F& truth() const {
    if (truth_index < 0 || truth_index >= size())
      throw std::invalid_argument("FunctionClass: truth index " +
                                  std::to_string(truth_index) +
                                  " out of range for " +
                                  std::to_string(size()) + " members");
    return members[static_cast<std::size_t>(truth_index)];
  }
};

using RewardClass = FunctionClass<RewardFunction>;
using DynamicsClass = FunctionClass<DynamicsFunction>;

// Stochastic non-stationary policy pi[h](a|s).
struct Policy {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;  // pi[h][s][a], flat H*S*A

  double prob(int h, int s, int a) const {
    return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                 a];
  }
  double& prob(int h, int s, int a) {
    return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                 a];
  }
  const double* row(int h, int s) const {
    return probs.data() +
           (static_cast<std::size_t>(h) * num_states + s) * num_actions;
  }

  static Policy uniform(int horizon, int num_states, int num_actions) {
    Policy pi{horizon, num_states, num_actions,
              std::vector<double>(static_cast<std::size_t>(horizon) *
                                      num_states * num_actions,
                                  1.0 / num_actions)};
    return pi;
  }

  void validate() const {
    if (probs.size() !=
        static_cast<std::size_t>(horizon) * num_states * num_actions)
      throw std::invalid_argument("Policy: size mismatch");
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < num_states; ++s)
        detail::check_distribution_row(
            row(h, s), num_actions, kRowSumTol,
            "policy row (h=" + std::to_string(h) + ",s=" + std::to_string(s) +
                ")");
  }
};

// One episode's realized interaction.
struct Trajectory {
  int context = 0;
  std::vector<int> states;      // s_0 .. s_H, length H+1
  std::vector<int> actions;     // a_0 .. a_{H-1}
  std::vector<double> rewards;  // r_0 .. r_{H-1}, each in {0,1}
};

struct Geometry {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int start_state = 0;
};

// A contextual MDP: context -> (dynamics, rewards) via the classes' truth
// members, over a shared geometry.
struct Cmdp {
  ContextSpace contexts;
  Geometry geometry;
  RewardClass reward_class;
  DynamicsClass dynamics_class;

  const RewardFunction& true_rewards() const { return reward_class.truth(); }
  const DynamicsFunction& true_dynamics() const {
    return dynamics_class.truth();
  }

  TabularMdp mdp_for_context(int c) const {
    if (c < 0 || c >= contexts.num_contexts)
      throw std::invalid_argument("Cmdp: context out of range");
    TabularMdp m;
    m.num_states = geometry.num_states;
    m.num_actions = geometry.num_actions;
    m.horizon = geometry.horizon;
    m.start_state = geometry.start_state;
    m.dynamics = true_dynamics().slice(c);
    m.mean_rewards = true_rewards().slice(c);
    return m;
  }
};

// Assembles and validates a CMDP from realizable classes. Throws
// std::invalid_argument naming the offending member on any mismatch.
inline Cmdp build_cmdp(RewardClass reward_class, DynamicsClass dynamics_class,
                       Geometry geometry) {
  if (reward_class.members.empty() || dynamics_class.members.empty())
    throw std::invalid_argument("build_cmdp: empty function class");
  int num_contexts = reward_class.members.front().num_contexts;
  if (num_contexts < 1)
    throw std::invalid_argument("build_cmdp: context space must be nonempty");
  for (std::size_t i = 0; i < reward_class.members.size(); ++i) {
    const auto& f = reward_class.members[i];
    if (f.num_contexts != num_contexts ||
        f.num_states != geometry.num_states ||
        f.num_actions != geometry.num_actions)
      throw std::invalid_argument("build_cmdp: reward member " +
                                  std::to_string(i) +
                                  " has mismatched dimensions");
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("build_cmdp: reward member " +
                                  std::to_string(i) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < dynamics_class.members.size(); ++i) {
    const auto& p = dynamics_class.members[i];
    if (p.num_contexts != num_contexts ||
        p.num_states != geometry.num_states ||
        p.num_actions != geometry.num_actions)
      throw std::invalid_argument("build_cmdp: dynamics member " +
                                  std::to_string(i) +
                                  " has mismatched dimensions");
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("build_cmdp: dynamics member " +
                                  std::to_string(i) + ": " + e.what());
    }
  }
  if (geometry.start_state < 0 || geometry.start_state >= geometry.num_states)
    throw std::invalid_argument("build_cmdp: start state out of range");
  if (geometry.horizon < 1)
    throw std::invalid_argument("build_cmdp: horizon must be >= 1");
  Cmdp cmdp{ContextSpace{num_contexts}, geometry, std::move(reward_class),
            std::move(dynamics_class)};
  cmdp.true_rewards();   // range-checks the truth indices
  cmdp.true_dynamics();
  return cmdp;
}

// Samples one episode: a_h ~ pi[h](.|s_h), s_{h+1} ~ P(.|s_h,a_h),
// r_h ~ Bernoulli(r(s_h,a_h)). Deterministic given the stream state.
inline Trajectory simulate_episode(const TabularMdp& mdp, const Policy& policy,
                                   RandomStream& rng) {
  if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
      policy.num_actions != mdp.num_actions)
    throw std::invalid_argument("simulate_episode: policy/mdp mismatch");
  Trajectory traj;
  traj.states.reserve(mdp.horizon + 1);
  traj.actions.reserve(mdp.horizon);
  traj.rewards.reserve(mdp.horizon);
  int s = mdp.start_state;
  traj.states.push_back(s);
  for (int h = 0; h < mdp.horizon; ++h) {
    int a = rng.categorical(policy.row(h, s), mdp.num_actions);
    int s2 = rng.categorical(mdp.transition_row(s, a), mdp.num_states);
    double r = rng.bernoulli(mdp.reward(s, a)) ? 1.0 : 0.0;
    traj.actions.push_back(a);
    traj.states.push_back(s2);
    traj.rewards.push_back(r);
    s = s2;
  }
  return traj;
}

}  // namespace cmdp
