#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/core.hpp"

namespace cmdp {

// Per-sample ledger cap standing in for an infinite log loss when a member
// assigns probability zero to an observed transition. The member's weight is
// still driven to exactly zero; only the bookkeeping stays finite.
inline constexpr double kMemberLossCap = 1e9;

struct SquareSample {
  int context = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
};

struct TransitionSample {
  int context = 0;
  int state = 0;
  int action = 0;
  int next_state = 0;
};

namespace detail {

// Normalized weights from log-scale storage, with max subtraction so a long
// run of updates cannot underflow every exponent at once.
inline std::vector<double> normalized_weights(
    const std::vector<double>& log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!(max_lw > -std::numeric_limits<double>::infinity()))
    throw std::logic_error("normalized_weights: all weights vanished");
  std::vector<double> w(log_weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - max_lw);
    sum += w[i];
  }
  for (double& wi : w) wi /= sum;
  return w;
}

inline void renormalize_log_weights(std::vector<double>& log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!(max_lw > -std::numeric_limits<double>::infinity()))
    throw std::logic_error("renormalize_log_weights: all weights vanished");
  for (double& lw : log_weights) lw -= max_lw;
}

}  // namespace detail

// Exponentially-weighted-average forecaster over a finite reward class.
// Predicts the weighted mean f_hat = sum_i w_i f_i and downweights each
// member by exp(-eta * square loss) after every sample.
class RewardOracle {
 public:
  explicit RewardOracle(RewardClass function_class, double learning_rate = 0.5)
      : class_(std::move(function_class)),
        eta_(learning_rate),
        log_weights_(class_.members.size(), 0.0),
        member_loss_(class_.members.size(), 0.0) {
    if (class_.members.empty())
      throw std::invalid_argument("RewardOracle: empty class");
    if (!(eta_ > 0.0))
      throw std::invalid_argument("RewardOracle: learning rate must be > 0");
  }

  int num_members() const { return static_cast<int>(class_.members.size()); }
  long samples_seen() const { return samples_seen_; }
  const RewardClass& function_class() const { return class_; }
  std::vector<double> weights() const {
    return detail::normalized_weights(log_weights_);
  }

  double predict_point(int context, int state, int action) const {
    std::vector<double> w = weights();
    double y = 0.0;
    for (int i = 0; i < num_members(); ++i)
      y += w[i] * class_.members[i].value(context, state, action);
    return y;
  }

  // Weighted-mean reward table f_hat[s][a] for one context.
  std::vector<double> predict(int context) const {
    const RewardFunction& first = class_.members.front();
    std::size_t n =
        static_cast<std::size_t>(first.num_states) * first.num_actions;
    std::vector<double> f_hat(n, 0.0);
    std::vector<double> w = weights();
    for (int i = 0; i < num_members(); ++i) {
      std::vector<double> slice = class_.members[i].slice(context);
      for (std::size_t j = 0; j < n; ++j) f_hat[j] += w[i] * slice[j];
    }
    return f_hat;
  }

  void update(const std::vector<SquareSample>& samples) {
    for (const SquareSample& sample : samples) {
      if (sample.reward < 0.0 || sample.reward > 1.0)
        throw std::invalid_argument("RewardOracle: reward outside [0,1]");
      double y_hat =
          predict_point(sample.context, sample.state, sample.action);
      double own = (y_hat - sample.reward) * (y_hat - sample.reward);
      own_loss_ += own;
      for (int i = 0; i < num_members(); ++i) {
        double fi =
            class_.members[i].value(sample.context, sample.state, sample.action);
        double loss = (fi - sample.reward) * (fi - sample.reward);
        member_loss_[static_cast<std::size_t>(i)] += loss;
        log_weights_[static_cast<std::size_t>(i)] -= eta_ * loss;
      }
      detail::renormalize_log_weights(log_weights_);
      ++samples_seen_;
    }
  }

  double own_loss() const { return own_loss_; }
  double member_loss(int i) const {
    return member_loss_[static_cast<std::size_t>(i)];
  }
  double min_member_loss() const {
    return *std::min_element(member_loss_.begin(), member_loss_.end());
  }
  double realized_regret() const { return own_loss_ - min_member_loss(); }
  // Worst-case regret of this forecaster: ln|F| / eta (2 ln|F| at eta = 1/2).
  double regret_bound() const { return std::log(num_members()) / eta_; }

 private:
  RewardClass class_;
  double eta_;
  std::vector<double> log_weights_;
  std::vector<double> member_loss_;
  double own_loss_ = 0.0;
  long samples_seen_ = 0;
};

// Bayesian-mixture forecaster over a finite dynamics class. Predicts the
// posterior-mixture transition tensor and multiplies each member's weight by
// its likelihood of the observed transition (log-loss updates at rate 1).
class DynamicsOracle {
 public:
  explicit DynamicsOracle(DynamicsClass function_class)
      : class_(std::move(function_class)),
        log_weights_(class_.members.size(), 0.0),
        member_loss_(class_.members.size(), 0.0) {
    if (class_.members.empty())
      throw std::invalid_argument("DynamicsOracle: empty class");
  }

  int num_members() const { return static_cast<int>(class_.members.size()); }
  long samples_seen() const { return samples_seen_; }
  const DynamicsClass& function_class() const { return class_; }
  std::vector<double> weights() const {
    return detail::normalized_weights(log_weights_);
  }

  double predict_point(int context, int state, int action,
                       int next_state) const {
    std::vector<double> w = weights();
    double p = 0.0;
    for (int i = 0; i < num_members(); ++i) {
      if (w[i] == 0.0) continue;
      p += w[i] * class_.members[i].prob(context, state, action, next_state);
    }
    return p;
  }

  // Posterior-mixture transition tensor P_hat[s][a][s'] for one context.
  std::vector<double> predict(int context) const {
    const DynamicsFunction& first = class_.members.front();
    std::size_t n = static_cast<std::size_t>(first.num_states) *
                    first.num_actions * first.num_states;
    std::vector<double> p_hat(n, 0.0);
    std::vector<double> w = weights();
    for (int i = 0; i < num_members(); ++i) {
      if (w[i] == 0.0) continue;
      std::vector<double> slice = class_.members[i].slice(context);
      for (std::size_t j = 0; j < n; ++j) p_hat[j] += w[i] * slice[j];
    }
    return p_hat;
  }

  void update(const std::vector<TransitionSample>& samples) {
    for (const TransitionSample& sample : samples) {
      double p_mix = predict_point(sample.context, sample.state, sample.action,
                                   sample.next_state);
      if (!(p_mix > 0.0))
        throw RealizabilityError(
            "DynamicsOracle: observed transition has mixture probability 0 "
            "(no member can explain sample " +
            std::to_string(samples_seen_) + ")");
      own_loss_ += -std::log(p_mix);
      for (int i = 0; i < num_members(); ++i) {
        double pi = class_.members[i].prob(sample.context, sample.state,
                                           sample.action, sample.next_state);
        if (pi > 0.0) {
          double loss = -std::log(pi);
          member_loss_[static_cast<std::size_t>(i)] += loss;
          log_weights_[static_cast<std::size_t>(i)] -= loss;
        } else {
          member_loss_[static_cast<std::size_t>(i)] += kMemberLossCap;
          log_weights_[static_cast<std::size_t>(i)] =
              -std::numeric_limits<double>::infinity();
        }
      }
      detail::renormalize_log_weights(log_weights_);
      ++samples_seen_;
    }
  }

  double own_loss() const { return own_loss_; }
  double member_loss(int i) const {
    return member_loss_[static_cast<std::size_t>(i)];
  }
  double min_member_loss() const {
    return *std::min_element(member_loss_.begin(), member_loss_.end());
  }
  double realized_regret() const { return own_loss_ - min_member_loss(); }
  // Worst-case regret of the Bayes mixture with a uniform prior: ln|F_P|.
  double regret_bound() const { return std::log(num_members()); }

 private:
  DynamicsClass class_;
  std::vector<double> log_weights_;
  std::vector<double> member_loss_;
  double own_loss_ = 0.0;
  long samples_seen_ = 0;
};

}  // namespace cmdp
