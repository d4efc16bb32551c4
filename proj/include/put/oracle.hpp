#pragma once

#include <cstdint>
#include <vector>

#include "put/belief.hpp"
#include "put/distortion.hpp"
#include "put/markov.hpp"
#include "put/rng.hpp"

namespace put {

// Exact enumeration machinery for small instances. Sequences are encoded in
// base |W| with the first symbol most significant, so that the first t symbols
// of a code c are c / w^(n-t).

int64_t ipow(int64_t base, int exp);

// q_t(y_t | x^t, y^{t-1}) stored per full-history key.
// tables[t-1][(ix * w^(t-1) + iy) * w + y] where ix encodes x^t, iy encodes y^(t-1).
struct HistoryPolicy {
  int w = 0;
  int n = 0;
  std::vector<std::vector<double>> tables;

  static HistoryPolicy random(int w, int n, Rng& rng);
  double prob(int t, int64_t ix, int64_t iy, int y) const {  // t is 1-based
    return tables[t - 1][(ix * ipow(w, t - 1) + iy) * w + y];
  }
};

// q_t(y_t | x_t, x_{t-1}, y^{t-1}).
// t=1 table: [x1 * w + y]; t>=2: [((xt * w + xp) * w^(t-1) + iy) * w + y].
struct SimplifiedPolicy {
  int w = 0;
  int n = 0;
  std::vector<std::vector<double>> tables;

  static SimplifiedPolicy random(int w, int n, Rng& rng);
  // Stationary kernel sequence: the same a(y|x_t,x_{t-1}) at every step
  // (ignoring the release history). a must be pair-conditioned or state-conditioned.
  static SimplifiedPolicy from_kernel(const ActionKernel& a, int n);
  HistoryPolicy lift() const;
};

struct JointTable {
  int w = 0;
  int n = 0;
  std::vector<double> p;  // index ix * w^n + iy

  double mass() const;
};

inline constexpr int64_t kEnumerationBudget = 10'000'000;

JointTable enumerate_joint_history(const HistoryPolicy& policy, const TransitionMatrix& chain,
                                   const InitialDistribution& init);
JointTable enumerate_joint_simplified(const SimplifiedPolicy& policy,
                                      const TransitionMatrix& chain,
                                      const InitialDistribution& init);

// I(X^n; Y^n) in nats.
double mutual_information(const JointTable& joint);

// Eq-2-style decomposition: I(X^t; Y_t | Y^{t-1}) for t = 1..n.
std::vector<double> chain_rule_terms(const JointTable& joint);

// I(X_t, X_{t-1}; Y_t | Y^{t-1}) for t = 1..n (t=1 term is I(X_1; Y_1)).
std::vector<double> pairwise_terms(const JointTable& joint);

// Marginalizes the history policy's joint into the simplified class; zero-mass
// conditioning histories are filled uniformly.
SimplifiedPolicy simplify_policy(const HistoryPolicy& policy, const TransitionMatrix& chain,
                                 const InitialDistribution& init);

// P(x_t | y^t) from the enumerated joint; iy encodes the first t releases.
// Throws if the release prefix has zero probability.
std::vector<double> posterior_from_joint(const JointTable& joint, int t, int64_t iy);

// P(x_t, x_{t-1}, y^t) as a flat table (x_{t-1} dimension collapsed for t=1):
// index ((xt * w + xp) * w^t + iyt). Used by the Lemma 2 checks.
std::vector<double> pair_history_marginal(const JointTable& joint, int t);

// Expectation of (1/n) sum_t d(x_t, y_t) over full paths.
double expected_distortion_joint(const JointTable& joint, const DistortionMatrix& d);
// Same quantity from per-step marginals P(x_t, y_t).
double expected_distortion_stepwise(const JointTable& joint, const DistortionMatrix& d);

// ---- m = 2 machinery (Theorem 2) ----

struct Order2Chain {
  int w = 0;
  std::vector<double> init;    // p(x1)
  std::vector<double> second;  // p(x2|x1), [x2 * w + x1]
  std::vector<double> trans;   // p(xt|x_{t-1}, x_{t-2}), [(xt * w + xp) * w + xpp]

  static Order2Chain random(int w, Rng& rng);
};

// Policy in Q_S^m for m=2: conditions on the last three true symbols (clipped
// at the sequence start) and the full release history.
struct Order2Policy {
  int w = 0;
  int n = 0;
  std::vector<std::vector<double>> tables;
  // t=1: [x1 * w + y]; t=2: [((x2 * w + x1) * w + y1) * w + y];
  // t>=3: [(((xt * w + xp) * w + xpp) * w^(t-1) + iy) * w + y]

  static Order2Policy random(int w, int n, Rng& rng);
  // Lift of a first-order simplified stationary kernel.
  static Order2Policy from_kernel(const ActionKernel& a, int n);
};

struct MthOrderReport {
  double total_mi = 0.0;
  double term_sum = 0.0;
  double mi_residual = 0.0;
  double dist_joint = 0.0;
  double dist_stepwise = 0.0;
  double dist_residual = 0.0;
};

MthOrderReport mth_order_check(const Order2Chain& chain, const Order2Policy& policy, int n,
                               const DistortionMatrix& d);

// ---- exhaustive tiny-instance optimum ----

struct BruteForceOptions {
  ConstraintMode mode = ConstraintMode::ADC;
  double lambda = 1.0;
  double dbar = 0.0;
  double dhat = 0.0;
  int grid = 10;  // simplex grid resolution 1/grid
};

struct BruteForceResult {
  double cost = 0.0;        // per-step combined objective at the optimum
  double leakage = 0.0;     // per-step average leakage
  double distortion = 0.0;  // per-step average distortion
  std::vector<double> q1;   // [x1 * 2 + y]
  std::vector<double> q2;   // [((x2 * 2 + x1) * 2 + y1) * 2 + y]
};

// Brute-force grid search over simplified policies; |W| = 2, n <= 2 only.
BruteForceResult exhaustive_best_simplified(const TransitionMatrix& chain,
                                            const InitialDistribution& init,
                                            const DistortionMatrix& d, int n,
                                            const BruteForceOptions& opt);

}  // namespace put
