#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cmdp/core.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/oracles.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {

// Which constant multiplies H^3 in the gamma tuning. kExact31 matches the
// guarantee for exact inner maximization; kApprox62 matches the guarantee
// for epsilon-approximate maximization (what the conditional-gradient solver
// provides), and is the default.
enum class GammaVariant { kExact31, kApprox62 };

struct AgentConfig {
  double delta = 0.05;
  long horizon_T = 1;
  std::optional<double> gamma_override;
  std::optional<double> r_sq_bound;   // default: the reward oracle's bound
  std::optional<double> r_log_bound;  // default: the dynamics oracle's bound
  GammaVariant variant = GammaVariant::kApprox62;
  double square_learning_rate = 0.5;
  long solver_max_iterations = 0;  // 0 -> solver picks its default
};

// gamma = sqrt( S A T / (K H^3 (2 R_sq + R_log + 18 H log(2H/delta))) ),
// K = 31 or 62 by variant.
inline double compute_gamma(int num_states, int num_actions, int horizon,
                            long episodes, double delta, double r_sq_bound,
                            double r_log_bound, GammaVariant variant) {
  if (num_states < 1 || num_actions < 1 || horizon < 1 || episodes < 1)
    throw std::invalid_argument("compute_gamma: nonpositive dimension");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("compute_gamma: delta must be in (0,1)");
  if (r_sq_bound < 0.0 || r_log_bound < 0.0)
    throw std::invalid_argument("compute_gamma: negative oracle bound");
  double constant = (variant == GammaVariant::kExact31) ? 31.0 : 62.0;
  double h = static_cast<double>(horizon);
  double numerator = static_cast<double>(num_states) * num_actions *
                     static_cast<double>(episodes);
  double denominator =
      constant * h * h * h *
      (2.0 * r_sq_bound + r_log_bound + 18.0 * h * std::log(2.0 * h / delta));
  return std::sqrt(numerator / denominator);
}

// Everything the agent produced and observed in one episode.
struct EpisodeOutcome {
  int context = 0;
  std::vector<double> reward_estimate;    // f_hat[s][a] at the context
  std::vector<double> dynamics_estimate;  // P_hat[s][a][s'] at the context
  Policy policy;
  SolverResult solver;  // solver.q_hat is the planned occupancy
  Trajectory trajectory;
  double oracle_sq_regret = 0.0;   // realized, after this episode's update
  double oracle_log_regret = 0.0;
};

// Runs the episode loop: predict reward and dynamics estimates from the
// oracles, maximize the barrier-regularized objective over occupancies under
// the estimated dynamics, play the induced policy, then feed the trajectory
// back into both oracles.
class Agent {
 public:
  using Environment = std::function<Trajectory(const Policy&)>;

  Agent(RewardClass reward_class, DynamicsClass dynamics_class,
        Geometry geometry, AgentConfig config)
      : geometry_(geometry),
        config_(config),
        reward_oracle_(std::move(reward_class), config.square_learning_rate),
        dynamics_oracle_(std::move(dynamics_class)) {
    double r_sq = config_.r_sq_bound.value_or(reward_oracle_.regret_bound());
    double r_log = config_.r_log_bound.value_or(dynamics_oracle_.regret_bound());
    gamma_ = config_.gamma_override.value_or(compute_gamma(
        geometry_.num_states, geometry_.num_actions, geometry_.horizon,
        config_.horizon_T, config_.delta, r_sq, r_log, config_.variant));
    if (!(gamma_ > 0.0))
      throw std::invalid_argument("Agent: gamma must be > 0");
    epsilon_ = 1.0 / (16.0 * gamma_ * static_cast<double>(config_.horizon_T));
  }

  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  long episode_index() const { return episode_index_; }
  const RewardOracle& reward_oracle() const { return reward_oracle_; }
  const DynamicsOracle& dynamics_oracle() const { return dynamics_oracle_; }

  EpisodeOutcome run_episode(int context, const Environment& env) {
    EpisodeOutcome outcome;
    outcome.context = context;
    outcome.reward_estimate = reward_oracle_.predict(context);
    outcome.dynamics_estimate = dynamics_oracle_.predict(context);
    SolverProblem problem = SolverProblem::make(
        outcome.dynamics_estimate, outcome.reward_estimate, gamma_,
        geometry_.num_states, geometry_.num_actions, geometry_.horizon,
        geometry_.start_state);
    outcome.solver =
        solve(problem, epsilon_, config_.solver_max_iterations);
    outcome.policy = policy_from_occupancy(outcome.solver.q_hat);
    outcome.trajectory = env(outcome.policy);
    int steps = geometry_.horizon;
    std::vector<SquareSample> reward_samples;
    std::vector<TransitionSample> transition_samples;
    reward_samples.reserve(steps);
    transition_samples.reserve(steps);
    for (int h = 0; h < steps; ++h) {
      reward_samples.push_back({context, outcome.trajectory.states[h],
                                outcome.trajectory.actions[h],
                                outcome.trajectory.rewards[h]});
      transition_samples.push_back({context, outcome.trajectory.states[h],
                                    outcome.trajectory.actions[h],
                                    outcome.trajectory.states[h + 1]});
    }
    reward_oracle_.update(reward_samples);
    dynamics_oracle_.update(transition_samples);
    outcome.oracle_sq_regret = reward_oracle_.realized_regret();
    outcome.oracle_log_regret = dynamics_oracle_.realized_regret();
    ++episode_index_;
    return outcome;
  }

 private:
  Geometry geometry_;
  AgentConfig config_;
  RewardOracle reward_oracle_;
  DynamicsOracle dynamics_oracle_;
  double gamma_ = 0.0;
  double epsilon_ = 0.0;
  long episode_index_ = 0;
};

}  // namespace cmdp
