#pragma once

#include <string>
#include <vector>

#include "put/matrix.hpp"
#include "put/rng.hpp"
#include "put/state_space.hpp"

namespace put {

// Column-stochastic Markov kernel: probs(i, j) = P(x_t = i | x_{t-1} = j).
// Columns are "from" states, rows are "to" states.
struct TransitionMatrix {
  StateSpace states;
  Matrix probs;

  int size() const { return states.size; }
  // P(to | from)
  double p(int to, int from) const { return probs(to, from); }
  void validate(double tol = 1e-12) const;
};

struct InitialDistribution {
  std::vector<double> probs;

  static InitialDistribution uniform(int n);
  static InitialDistribution point_mass(int n, int s);
  void validate(double tol = 1e-12) const;
};

TransitionMatrix make_uniform_chain(const StateSpace& space);

// Q1 family: weight r[d] / max(d, 1) per target at Manhattan distance d,
// normalized per column. r must cover every distance occurring on the grid.
TransitionMatrix make_q1_chain(int width, int height, const std::vector<double>& r);

// Q2 family: preferred-path weights u (r1 on the path's next cell, r0
// elsewhere) with the same distance normalization as Q1.
TransitionMatrix make_q2_chain(int width, int height, double r0, double r1);

std::vector<int> sample_path(const TransitionMatrix& chain, const InitialDistribution& init,
                             int n, Rng& rng);

// Laplace-smoothed transition counts; trajectories are independent (no
// transition across trajectory boundaries).
TransitionMatrix estimate_empirical_chain(const StateSpace& space,
                                          const std::vector<std::vector<int>>& paths,
                                          double alpha);

// Power iteration from uniform; throws on non-convergence with the residual.
std::vector<double> stationary_distribution(const TransitionMatrix& chain, double tol = 1e-12,
                                            int max_iters = 100000);

void save_transition_csv(const TransitionMatrix& chain, const std::string& path);
TransitionMatrix load_transition_csv(const std::string& path);

}  // namespace put
