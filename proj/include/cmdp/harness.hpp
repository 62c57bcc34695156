#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/agent.hpp"
#include "cmdp/core.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/oracles.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

// A run-level consistency check failed; carries the episode index.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(long episode, const std::string& what)
      : std::runtime_error("episode " + std::to_string(episode) + ": " + what),
        episode_(episode) {}
  long episode() const { return episode_; }

 private:
  long episode_;
};

enum class ScheduleKind { kCyclic, kIidUniform, kFixedSequence, kMaxDisagreement };

struct ContextSchedule {
  ScheduleKind kind = ScheduleKind::kCyclic;
  std::vector<int> sequence;  // used by kFixedSequence only
};

// What an adaptive adversary may inspect when choosing the next context: the
// true model and the learner's current dynamics mixture.
struct WorldView {
  const Cmdp* cmdp = nullptr;
  const DynamicsOracle* dynamics_oracle = nullptr;
};

// Context choice for episode t. The max-disagreement schedule picks the
// context where the learner's dynamics mixture is farthest (summed L1 over
// state-action rows) from the truth, ties to the lowest id.
inline int next_context(const ContextSchedule& schedule, long t,
                        int num_contexts, const WorldView& world,
                        RandomStream& adversary_rng) {
  switch (schedule.kind) {
    case ScheduleKind::kCyclic:
      return static_cast<int>(t % num_contexts);
    case ScheduleKind::kIidUniform:
      return adversary_rng.uniform_int(num_contexts);
    case ScheduleKind::kFixedSequence: {
      if (t < 0 || static_cast<std::size_t>(t) >= schedule.sequence.size())
        throw std::invalid_argument(
            "next_context: fixed sequence exhausted at t=" + std::to_string(t));
      int c = schedule.sequence[static_cast<std::size_t>(t)];
      if (c < 0 || c >= num_contexts)
        throw std::invalid_argument("next_context: context id out of range");
      return c;
    }
    case ScheduleKind::kMaxDisagreement: {
      if (world.cmdp == nullptr || world.dynamics_oracle == nullptr)
        throw std::invalid_argument(
            "next_context: max-disagreement needs a world view");
      const Cmdp& cmdp = *world.cmdp;
      int S = cmdp.geometry.num_states;
      int A = cmdp.geometry.num_actions;
      int best_c = 0;
      double best_disagreement = -1.0;
      for (int c = 0; c < num_contexts; ++c) {
        std::vector<double> p_hat = world.dynamics_oracle->predict(c);
        double total = 0.0;
        for (int s = 0; s < S; ++s)
          for (int a = 0; a < A; ++a) {
            const double* truth = cmdp.true_dynamics().row(c, s, a);
            const double* est =
                p_hat.data() + (static_cast<std::size_t>(s) * A + a) * S;
            total += l1_distance(truth, est, S);
          }
        if (total > best_disagreement) {
          best_disagreement = total;
          best_c = c;
        }
      }
      return best_c;
    }
  }
  throw std::logic_error("next_context: unknown schedule kind");
}

// One episode's evaluation row, written verbatim to the per-seed CSV.
struct EpisodeRecord {
  long t = 0;
  int context = 0;
  double value_opt = 0.0;
  double value_played = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double e_sq_increment = 0.0;
  double hellinger_increment = 0.0;
  long fw_iters = 0;
  double fw_gap = 0.0;
  bool converged = false;
  double oracle_sq_regret = 0.0;
  double oracle_log_regret = 0.0;
};

// Exact (sampling-free) episode evaluation against the true contextual MDP.
// Optimal policies and values per context are computed once and cached.
class RegretEvaluator {
 public:
  explicit RegretEvaluator(const Cmdp& cmdp) : cmdp_(&cmdp) {
    int C = cmdp.contexts.num_contexts;
    mdps_.reserve(C);
    optimal_.reserve(C);
    for (int c = 0; c < C; ++c) {
      mdps_.push_back(cmdp.mdp_for_context(c));
      const TabularMdp& mdp = mdps_.back();
      optimal_.push_back(optimal_policy(DynamicsView::of(mdp),
                                        mdp.mean_rewards.data(), mdp.horizon,
                                        mdp.start_state));
    }
  }

  const TabularMdp& true_mdp(int context) const {
    return mdps_[static_cast<std::size_t>(context)];
  }
  double optimal_value(int context) const {
    return optimal_[static_cast<std::size_t>(context)].value;
  }
  const Policy& optimal_policy_for(int context) const {
    return optimal_[static_cast<std::size_t>(context)].policy;
  }

  // Fills every EpisodeRecord field except cum_regret, which the caller
  // accumulates. All values come from backward induction, not rollouts:
  // term1 compares the true-optimal policy across true and estimated models,
  // term2 compares policies under the estimated model, term3 moves the
  // played policy back to the true model. The three telescope to
  // value_opt - value_played.
  EpisodeRecord evaluate(long t, const EpisodeOutcome& outcome) const {
    int c = outcome.context;
    const TabularMdp& mdp = true_mdp(c);
    DynamicsView truth_dyn = DynamicsView::of(mdp);
    DynamicsView est_dyn{outcome.dynamics_estimate.data(), mdp.num_states,
                         mdp.num_actions};
    const double* truth_rewards = mdp.mean_rewards.data();
    const double* est_rewards = outcome.reward_estimate.data();

    EpisodeRecord record;
    record.t = t;
    record.context = c;
    record.value_opt = optimal_value(c);
    record.value_played = value_backward_induction(
        outcome.policy, truth_dyn, truth_rewards, mdp.start_state);
    record.inst_regret = record.value_opt - record.value_played;

    const Policy& pi_star = optimal_policy_for(c);
    double v_star_est = value_backward_induction(pi_star, est_dyn, est_rewards,
                                                 mdp.start_state);
    double v_played_est = value_backward_induction(
        outcome.policy, est_dyn, est_rewards, mdp.start_state);
    record.term1 = record.value_opt - v_star_est;
    record.term2 = v_star_est - v_played_est;
    record.term3 = v_played_est - record.value_played;

    OccupancyMeasure q_true =
        compute_occupancy(outcome.policy, truth_dyn, mdp.start_state);
    int S = mdp.num_states;
    int A = mdp.num_actions;
    for (int h = 0; h < mdp.horizon; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          double mass = q_true.at(h, s, a);
          if (mass == 0.0) continue;
          double diff = est_rewards[static_cast<std::size_t>(s) * A + a] -
                        truth_rewards[static_cast<std::size_t>(s) * A + a];
          record.e_sq_increment += mass * diff * diff;
          record.hellinger_increment +=
              mass * hellinger_sq(
                         truth_dyn.row(s, a),
                         est_dyn.row(s, a), S);
        }

    record.fw_iters = outcome.solver.iterations;
    record.fw_gap = outcome.solver.fw_gap;
    record.converged = outcome.solver.converged;
    record.oracle_sq_regret = outcome.oracle_sq_regret;
    record.oracle_log_regret = outcome.oracle_log_regret;
    return record;
  }

 private:
  const Cmdp* cmdp_;
  std::vector<TabularMdp> mdps_;
  std::vector<GreedyResult> optimal_;
};

// Aborts the run on any per-episode consistency breach.
inline void check_record(const EpisodeRecord& record, double sq_bound,
                         double log_bound, double tol = 1e-9) {
  if (record.inst_regret < -tol)
    throw InvariantViolation(record.t, "negative instantaneous regret " +
                                           std::to_string(record.inst_regret));
  double decomposition = record.term1 + record.term2 + record.term3;
  if (std::abs(decomposition - record.inst_regret) > tol)
    throw InvariantViolation(
        record.t, "decomposition mismatch: terms sum to " +
                      std::to_string(decomposition) + " but regret is " +
                      std::to_string(record.inst_regret));
  if (record.e_sq_increment < 0.0)
    throw InvariantViolation(record.t, "negative squared-error increment");
  if (record.hellinger_increment < 0.0)
    throw InvariantViolation(record.t, "negative Hellinger increment");
  if (record.oracle_sq_regret > sq_bound + tol)
    throw InvariantViolation(
        record.t, "square-loss oracle regret " +
                      std::to_string(record.oracle_sq_regret) +
                      " exceeds bound " + std::to_string(sq_bound));
  if (record.oracle_log_regret > log_bound + tol)
    throw InvariantViolation(
        record.t, "log-loss oracle regret " +
                      std::to_string(record.oracle_log_regret) +
                      " exceeds bound " + std::to_string(log_bound));
}

}  // namespace cmdp
