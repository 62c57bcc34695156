#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/core.hpp"

namespace cmdp {

// Read-only view of one context's dynamics tensor P[s][a][s'].
struct DynamicsView {
  const double* probs = nullptr;
  int num_states = 0;
  int num_actions = 0;

  const double* row(int s, int a) const {
    return probs +
           (static_cast<std::size_t>(s) * num_actions + a) * num_states;
  }
  double prob(int s, int a, int s2) const { return row(s, a)[s2]; }

  static DynamicsView of(const TabularMdp& mdp) {
    return {mdp.dynamics.data(), mdp.num_states, mdp.num_actions};
  }
  static DynamicsView of(const DynamicsFunction& dyn, int c) {
    return {dyn.probs.data() + static_cast<std::size_t>(c) * dyn.num_states *
                                   dyn.num_actions * dyn.num_states,
            dyn.num_states, dyn.num_actions};
  }
};

// State-action occupancy q[h][s][a] of a policy under some dynamics.
struct OccupancyMeasure {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;  // flat H*S*A

  double at(int h, int s, int a) const {
    return values[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                  a];
  }
  double& at(int h, int s, int a) {
    return values[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                  a];
  }
  const double* row(int h, int s) const {
    return values.data() +
           (static_cast<std::size_t>(h) * num_states + s) * num_actions;
  }
  std::size_t size() const { return values.size(); }

  double state_marginal(int h, int s) const {
    double sum = 0.0;
    for (int a = 0; a < num_actions; ++a) sum += at(h, s, a);
    return sum;
  }

  static OccupancyMeasure zeros(int horizon, int num_states, int num_actions) {
    return {horizon, num_states, num_actions,
            std::vector<double>(
                static_cast<std::size_t>(horizon) * num_states * num_actions,
                0.0)};
  }
};

// Forward recursion: q_0(s,a) = I[s=s0] pi_0(a|s) and
// q_{h+1}(s',a') = pi_{h+1}(a'|s') sum_{s,a} P(s'|s,a) q_h(s,a).
inline OccupancyMeasure compute_occupancy(const Policy& policy,
                                          const DynamicsView& dynamics,
                                          int start_state) {
  int H = policy.horizon;
  int S = policy.num_states;
  int A = policy.num_actions;
  if (dynamics.num_states != S || dynamics.num_actions != A)
    throw std::invalid_argument("compute_occupancy: policy/dynamics mismatch");
  if (start_state < 0 || start_state >= S)
    throw std::invalid_argument("compute_occupancy: start state out of range");
  OccupancyMeasure q = OccupancyMeasure::zeros(H, S, A);
  std::vector<double> state_dist(S, 0.0);
  state_dist[start_state] = 1.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      if (state_dist[s] == 0.0) continue;
      for (int a = 0; a < A; ++a)
        q.at(h, s, a) = state_dist[s] * policy.prob(h, s, a);
    }
    if (h + 1 == H) break;
    std::vector<double> next_dist(S, 0.0);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double mass = q.at(h, s, a);
        if (mass == 0.0) continue;
        const double* row = dynamics.row(s, a);
        for (int s2 = 0; s2 < S; ++s2) next_dist[s2] += mass * row[s2];
      }
    state_dist.swap(next_dist);
  }
  return q;
}

// pi_h(a|s) = q_h(s,a) / sum_a' q_h(s,a'); rows with no mass fall back to
// the uniform distribution so the policy is defined everywhere.
inline Policy policy_from_occupancy(const OccupancyMeasure& q) {
  Policy pi{q.horizon, q.num_states, q.num_actions,
            std::vector<double>(q.size(), 0.0)};
  for (int h = 0; h < q.horizon; ++h)
    for (int s = 0; s < q.num_states; ++s) {
      double total = q.state_marginal(h, s);
      if (total > 0.0) {
        for (int a = 0; a < q.num_actions; ++a)
          pi.prob(h, s, a) = q.at(h, s, a) / total;
      } else {
        for (int a = 0; a < q.num_actions; ++a)
          pi.prob(h, s, a) = 1.0 / q.num_actions;
      }
    }
  return pi;
}

// Expected return sum_{h,s,a} q_h(s,a) r(s,a) for a stationary reward table
// r[s][a].
inline double value_from_occupancy(const OccupancyMeasure& q,
                                   const double* rewards_sa) {
  double total = 0.0;
  std::size_t per_step = static_cast<std::size_t>(q.num_states) * q.num_actions;
  for (int h = 0; h < q.horizon; ++h) {
    const double* step = q.values.data() + per_step * h;
    for (std::size_t i = 0; i < per_step; ++i) total += step[i] * rewards_sa[i];
  }
  return total;
}

// Inner product against a step-dependent table g[h][s][a] of the same shape.
inline double inner_product(const OccupancyMeasure& q,
                            const std::vector<double>& g) {
  if (g.size() != q.size())
    throw std::invalid_argument("inner_product: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) total += q.values[i] * g[i];
  return total;
}

// Policy value by backward induction over Q_h(s,a) = r(s,a) + E[V_{h+1}].
// Agrees with value_from_occupancy up to roundoff.
inline double value_backward_induction(const Policy& policy,
                                       const DynamicsView& dynamics,
                                       const double* rewards_sa,
                                       int start_state) {
  int H = policy.horizon;
  int S = policy.num_states;
  int A = policy.num_actions;
  std::vector<double> v_next(S, 0.0);
  std::vector<double> v(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        double qsa = rewards_sa[static_cast<std::size_t>(s) * A + a];
        if (h + 1 < H) {
          const double* row = dynamics.row(s, a);
          for (int s2 = 0; s2 < S; ++s2) qsa += row[s2] * v_next[s2];
        }
        vs += policy.prob(h, s, a) * qsa;
      }
      v[s] = vs;
    }
    v_next = v;
  }
  return v_next[start_state];
}

// Deterministic greedy policy for step-dependent rewards g[h][s][a], computed
// by backward induction. Ties go to the lowest action index. Returns the
// policy and its value from start_state.
struct GreedyResult {
  Policy policy;
  double value = 0.0;
};

inline GreedyResult greedy_backward_induction(const std::vector<double>& g,
                                              const DynamicsView& dynamics,
                                              int horizon, int start_state) {
  int S = dynamics.num_states;
  int A = dynamics.num_actions;
  if (g.size() != static_cast<std::size_t>(horizon) * S * A)
    throw std::invalid_argument("greedy_backward_induction: shape mismatch");
  Policy pi{horizon, S, A,
            std::vector<double>(static_cast<std::size_t>(horizon) * S * A,
                                0.0)};
  std::vector<double> v_next(S, 0.0);
  std::vector<double> v(S, 0.0);
  for (int h = horizon - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      int best_a = 0;
      double best_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double qsa = g[(static_cast<std::size_t>(h) * S + s) * A + a];
        if (h + 1 < horizon) {
          const double* row = dynamics.row(s, a);
          for (int s2 = 0; s2 < S; ++s2) qsa += row[s2] * v_next[s2];
        }
        if (qsa > best_q) {
          best_q = qsa;
          best_a = a;
        }
      }
      pi.prob(h, s, best_a) = 1.0;
      v[s] = best_q;
    }
    v_next = v;
  }
  return {std::move(pi), v_next[start_state]};
}

// Optimal policy for a stationary reward table r[s][a] over the given horizon.
inline GreedyResult optimal_policy(const DynamicsView& dynamics,
                                   const double* rewards_sa, int horizon,
                                   int start_state) {
  int S = dynamics.num_states;
  int A = dynamics.num_actions;
  std::vector<double> g(static_cast<std::size_t>(horizon) * S * A);
  for (int h = 0; h < horizon; ++h)
    for (std::size_t i = 0; i < static_cast<std::size_t>(S) * A; ++i)
      g[static_cast<std::size_t>(h) * S * A + i] = rewards_sa[i];
  return greedy_backward_induction(g, dynamics, horizon, start_state);
}

// States reachable with positive probability at each step, as a flat H*S
// indicator. An (h,s,a) occupancy coordinate can be positive iff s is
// reachable at h.
inline std::vector<char> reachable_states(const DynamicsView& dynamics,
                                          int horizon, int start_state) {
  int S = dynamics.num_states;
  int A = dynamics.num_actions;
  std::vector<char> reach(static_cast<std::size_t>(horizon) * S, 0);
  reach[start_state] = 1;
  for (int h = 0; h + 1 < horizon; ++h)
    for (int s = 0; s < S; ++s) {
      if (!reach[static_cast<std::size_t>(h) * S + s]) continue;
      for (int a = 0; a < A; ++a) {
        const double* row = dynamics.row(s, a);
        for (int s2 = 0; s2 < S; ++s2)
          if (row[s2] > 0.0) reach[static_cast<std::size_t>(h + 1) * S + s2] = 1;
      }
    }
  return reach;
}

// Checks the three occupancy-polytope requirements: every step is a
// distribution over S*A, step 0 puts all mass on the start state, and
// consecutive steps are linked by the dynamics flow constraint.
inline bool satisfies_requirements(const OccupancyMeasure& q,
                                   const DynamicsView& dynamics,
                                   int start_state, double tol = kPolytopeTol) {
  int H = q.horizon;
  int S = q.num_states;
  int A = q.num_actions;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q.values[i] < -tol) return false;
  for (int h = 0; h < H; ++h) {
    double total = 0.0;
    for (int s = 0; s < S; ++s) total += q.state_marginal(h, s);
    if (std::abs(total - 1.0) > tol) return false;
  }
  for (int s = 0; s < S; ++s) {
    double expected = (s == start_state) ? 1.0 : 0.0;
    if (std::abs(q.state_marginal(0, s) - expected) > tol) return false;
  }
  for (int h = 0; h + 1 < H; ++h)
    for (int s2 = 0; s2 < S; ++s2) {
      double inflow = 0.0;
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          inflow += dynamics.prob(s, a, s2) * q.at(h, s, a);
      if (std::abs(q.state_marginal(h + 1, s2) - inflow) > tol) return false;
    }
  return true;
}

// Squared Hellinger distance sum_i (sqrt(p_i) - sqrt(q_i))^2 between two
// distributions given as length-n arrays.
inline double hellinger_sq(const double* p, const double* q, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    total += d * d;
  }
  return total;
}

inline double l1_distance(const double* p, const double* q, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += std::abs(p[i] - q[i]);
  return total;
}

}  // namespace cmdp
