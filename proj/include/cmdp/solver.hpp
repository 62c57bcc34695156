#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmdp/core.hpp"
#include "cmdp/occupancy.hpp"

namespace cmdp {

// Width of the bisection interval in the exact line search, and the cap that
// keeps steps strictly inside the segment.
inline constexpr double kLineSearchTol = 1e-12;

// One context's barrier-regularized planning problem: maximize
//   sum_active q * rewards + (1/gamma) * sum_active log q
// over occupancy measures consistent with `dynamics`. The barrier is
// restricted to the active (reachable) coordinates; everything outside them
// is identically zero on the whole feasible set.
struct SolverProblem {
  std::vector<double> dynamics;  // P[s][a][s'], flat S*A*S
  std::vector<double> rewards;   // f[s][a], flat S*A
  double gamma = 1.0;
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int start_state = 0;
  std::vector<char> active;  // mask over (h,s,a), flat H*S*A

  DynamicsView dynamics_view() const {
    return {dynamics.data(), num_states, num_actions};
  }
  bool is_active(int h, int s, int a) const {
    return active[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                  a] != 0;
  }
  std::size_t coordinate_count() const {
    return static_cast<std::size_t>(horizon) * num_states * num_actions;
  }
  int active_count() const {
    int n = 0;
    for (char m : active) n += (m != 0);
    return n;
  }

  // Builds a validated problem; the active mask is the forward-reachability
  // closure of the start state under the supplied dynamics.
  static SolverProblem make(std::vector<double> dynamics,
                            std::vector<double> rewards, double gamma,
                            int num_states, int num_actions, int horizon,
                            int start_state) {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
      throw std::invalid_argument("SolverProblem: empty geometry");
    if (start_state < 0 || start_state >= num_states)
      throw std::invalid_argument("SolverProblem: start state out of range");
    if (!(gamma > 0.0))
      throw std::invalid_argument("SolverProblem: gamma must be > 0");
    if (dynamics.size() !=
        static_cast<std::size_t>(num_states) * num_actions * num_states)
      throw std::invalid_argument("SolverProblem: dynamics size mismatch");
    if (rewards.size() != static_cast<std::size_t>(num_states) * num_actions)
      throw std::invalid_argument("SolverProblem: rewards size mismatch");
    SolverProblem p;
    p.dynamics = std::move(dynamics);
    p.rewards = std::move(rewards);
    p.gamma = gamma;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.horizon = horizon;
    p.start_state = start_state;
    DynamicsView view = p.dynamics_view();
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a)
        detail::check_distribution_row(
            view.row(s, a), num_states, 1e-9,
            "SolverProblem dynamics row (s=" + std::to_string(s) + ",a=" +
                std::to_string(a) + ")");
    for (double r : p.rewards)
      if (r < -1e-9 || r > 1.0 + 1e-9)
        throw std::invalid_argument("SolverProblem: reward outside [0,1]");
    std::vector<char> reach = reachable_states(view, horizon, start_state);
    p.active.assign(p.coordinate_count(), 0);
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < num_states; ++s)
        if (reach[static_cast<std::size_t>(h) * num_states + s])
          for (int a = 0; a < num_actions; ++a)
            p.active[(static_cast<std::size_t>(h) * num_states + s) *
                         num_actions +
                     a] = 1;
    return p;
  }
};

struct SolverResult {
  OccupancyMeasure q_hat;
  double objective_value = 0.0;
  double fw_gap = std::numeric_limits<double>::infinity();
  long iterations = 0;
  double epsilon_requested = 0.0;
  bool converged = false;
};

// Called once per iterate with (iteration, q, objective(q), fw gap at q).
using SolverObserver =
    std::function<void(long, const OccupancyMeasure&, double, double)>;

inline double objective(const SolverProblem& problem,
                        const OccupancyMeasure& q) {
  if (q.size() != problem.coordinate_count())
    throw std::invalid_argument("objective: shape mismatch");
  double linear = 0.0;
  double barrier = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!problem.active[i]) continue;
    double qi = q.values[i];
    if (!(qi > 0.0)) return -std::numeric_limits<double>::infinity();
    linear += qi * problem.rewards[i % problem.rewards.size()];
    barrier += std::log(qi);
  }
  return linear + barrier / problem.gamma;
}

// grad[h][s][a] = f[s][a] + 1/(gamma q[h][s][a]) on active coordinates,
// 0 elsewhere (inactive coordinates are fixed at zero on the polytope).
inline std::vector<double> gradient(const SolverProblem& problem,
                                    const OccupancyMeasure& q) {
  if (q.size() != problem.coordinate_count())
    throw std::invalid_argument("gradient: shape mismatch");
  std::vector<double> g(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!problem.active[i]) continue;
    double gi = problem.rewards[i % problem.rewards.size()] +
                1.0 / (problem.gamma * q.values[i]);
    if (std::isnan(gi))
      throw std::logic_error("gradient: NaN at active coordinate " +
                             std::to_string(i));
    g[i] = gi;
  }
  return g;
}

// Maximizes <g, q> over the occupancy polytope: backward induction on the
// step-dependent reward table g yields a deterministic greedy policy (ties to
// the lowest action), whose occupancy is the maximizing vertex.
inline OccupancyMeasure linear_oracle(const SolverProblem& problem,
                                      const std::vector<double>& g) {
  GreedyResult greedy = greedy_backward_induction(
      g, problem.dynamics_view(), problem.horizon, problem.start_state);
  return compute_occupancy(greedy.policy, problem.dynamics_view(),
                           problem.start_state);
}

// Exact step size along q -> v: maximizes the concave 1-D restriction
// phi(eta) = objective((1-eta) q + eta v) by bisection on its derivative over
// [0, 1 - 1e-12], returning the lower bracket end so phi never decreases.
inline double line_search(const SolverProblem& problem,
                          const OccupancyMeasure& q,
                          const OccupancyMeasure& v) {
  if (q.size() != problem.coordinate_count() || v.size() != q.size())
    throw std::invalid_argument("line_search: shape mismatch");
  auto derivative = [&](double eta) {
    double d = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!problem.active[i]) continue;
      double diff = v.values[i] - q.values[i];
      double qi = q.values[i] + eta * diff;
      d += diff * problem.rewards[i % problem.rewards.size()] +
           diff / (problem.gamma * qi);
    }
    return d;
  };
  double lo = 0.0;
  double hi = 1.0 - kLineSearchTol;
  if (derivative(lo) <= 0.0) return 0.0;
  if (derivative(hi) >= 0.0) return hi;
  while (hi - lo > kLineSearchTol) {
    double mid = 0.5 * (lo + hi);
    if (derivative(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Conditional-gradient iteration budget: generous relative to the observed
// convergence of desk-scale instances, never below 100.
inline long default_max_iterations(const SolverProblem& problem,
                                   double epsilon) {
  double budget = 10.0 * problem.horizon * problem.num_states *
                  problem.num_actions * std::log(1.0 / epsilon);
  long cap = budget > 100.0 ? static_cast<long>(std::ceil(budget)) : 100;
  return cap;
}

// Conditional gradient (Frank-Wolfe) with exact line search. The duality gap
// <grad, v - q> upper-bounds the suboptimality of the concave objective, so
// converged results are epsilon-approximate maximizers.
inline SolverResult solve(const SolverProblem& problem, double epsilon,
                          long max_iterations = 0,
                          const SolverObserver& observer = nullptr) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("solve: epsilon must be > 0");
  if (max_iterations <= 0)
    max_iterations = default_max_iterations(problem, epsilon);
  Policy uniform = Policy::uniform(problem.horizon, problem.num_states,
                                   problem.num_actions);
  OccupancyMeasure q = compute_occupancy(uniform, problem.dynamics_view(),
                                         problem.start_state);
  SolverResult result;
  result.epsilon_requested = epsilon;
  double obj = objective(problem, q);
  for (long k = 0; k < max_iterations; ++k) {
    std::vector<double> grad = gradient(problem, q);
    OccupancyMeasure v = linear_oracle(problem, grad);
    double gap = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (problem.active[i]) gap += grad[i] * (v.values[i] - q.values[i]);
    if (observer) observer(k, q, obj, gap);
    result.iterations = k + 1;
    result.fw_gap = gap;
    if (gap <= epsilon) {
      result.converged = true;
      break;
    }
    double step = line_search(problem, q, v);
    if (step == 0.0) break;
    for (std::size_t i = 0; i < q.size(); ++i)
      q.values[i] += step * (v.values[i] - q.values[i]);
    obj = objective(problem, q);
  }
  result.q_hat = std::move(q);
  result.objective_value = obj;
  return result;
}

// Closeness certificate between an accurate maximizer q_tilde and any
// feasible q: returns lhs = sum_active (q/q_tilde - 1)^2 and
// rhs = 4 gamma (objective(q_tilde) - objective(q)); lhs <= rhs whenever
// q_tilde is optimal to high accuracy.
struct CertificatePair {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline CertificatePair iterate_difference_certificate(
    const SolverProblem& problem, const OccupancyMeasure& q_tilde,
    const OccupancyMeasure& q) {
  if (q_tilde.size() != problem.coordinate_count() ||
      q.size() != q_tilde.size())
    throw std::invalid_argument(
        "iterate_difference_certificate: shape mismatch");
  CertificatePair pair;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!problem.active[i]) continue;
    double ratio = q.values[i] / q_tilde.values[i] - 1.0;
    pair.lhs += ratio * ratio;
  }
  pair.rhs =
      4.0 * problem.gamma * (objective(problem, q_tilde) - objective(problem, q));
  return pair;
}

}  // namespace cmdp
