#pragma once

#include <map>
#include <memory>
#include <vector>

#include "put/belief.hpp"
#include "put/distortion.hpp"
#include "put/markov.hpp"
#include "put/rng.hpp"

namespace put {

struct BAOptions {
  double tol = 1e-11;    // stop when the objective improves by less than this
  int max_iters = 5000;
  // optional warm start, kernel layout; mixed with a little uniform mass to
  // keep every release reachable, which alternating minimization requires
  std::vector<double> init_channel;
};

struct BAResult {
  // q(y | x_t, x_{t-1}) stored [(xt * w + xp) * w + y]
  std::vector<double> channel;
  double mi = 0.0;          // I(X_t, X_{t-1}; Y) in nats under the prior
  double distortion = 0.0;  // E[d(X_t, Y)]
  double objective = 0.0;   // mi + lambda_ba * distortion
  int iterations = 0;
  bool converged = true;    // false iff max_iters was hit
  double last_delta = 0.0;  // objective change at the final iteration
};

// Alternating minimization of I + lambda_ba * E[d] for a single release step.
// prior is a distribution over (x_t, x_{t-1}), stored [xt * w + xp].
BAResult blahut_arimoto(const std::vector<double>& prior, const DistortionMatrix& d,
                        double lambda_ba, const BAOptions& opt = {});

struct BAFitResult {
  BAResult ba;
  double lambda = 0.0;  // multiplier achieving the budget
  // bracketing values, reported when the budget cannot be matched exactly
  double lambda_lo = 0.0, lambda_hi = 0.0;
  double dist_lo = 0.0, dist_hi = 0.0;
  bool matched = true;  // E[d] within dist_tol below dbar (or slack at lambda 0)
};

// Smallest multiplier whose channel meets E[d] <= dbar, bisected until the
// distortion sits within dist_tol below the budget. A positive lambda_hint
// seeds the bracket (useful when fitting a stream of nearby priors).
BAFitResult ba_fit_distortion(const std::vector<double>& prior, const DistortionMatrix& d,
                              double dbar, double dist_tol = 1e-4, const BAOptions& opt = {},
                              double lambda_hint = 0.0);

// Channels for the one-step-memory baseline, computed ahead of simulation.
// At step t the released-symbol memory is y_{t-1} alone, so the conditioning
// belief over x_{t-1} is a deterministic function of (t, y_{t-1}); each such
// belief gets a Blahut-Arimoto channel fitted to the distortion budget.
class MyopicPlan {
 public:
  struct Entry {
    std::vector<double> prior_prev;  // belief over x_{t-1}
    BAFitResult fit;
  };

  MyopicPlan(const TransitionMatrix& chain, const DistortionMatrix& d,
             const InitialDistribution& init, double dbar, int n);

  int horizon() const { return n_; }
  int width() const { return w_; }
  const TransitionMatrix& chain() const { return chain_; }
  const DistortionMatrix& metric() const { return dist_; }

  // Channel used at step t (1-based); y_prev is ignored at t = 1. Null for
  // release values that cannot occur at t-1.
  const Entry* at(int t, int y_prev) const;

  // Exact per-step expectations over the release process.
  double expected_leakage() const { return exp_leakage_; }
  double expected_distortion() const { return exp_distortion_; }
  bool all_matched() const { return all_matched_; }
  int solves() const { return solves_; }

 private:
  const Entry* solve(const std::vector<double>& belief_prev);

  const TransitionMatrix& chain_;
  const DistortionMatrix& dist_;
  InitialDistribution init_;
  double dbar_ = 0.0;
  int w_ = 0;
  int n_ = 0;
  // steps_[t-1][k]: k = 0 at t = 1, k = y_prev afterwards
  std::vector<std::vector<const Entry*>> steps_;
  std::map<std::vector<int64_t>, std::unique_ptr<Entry>> cache_;
  double exp_leakage_ = 0.0;
  double exp_distortion_ = 0.0;
  bool all_matched_ = true;
  int solves_ = 0;
};

struct MyopicResult {
  double avg_leakage = 0.0;    // one-step conditional MI, per step
  double avg_distortion = 0.0; // realized d(x_t, y_t), per step
  bool matched = true;
  int ba_solves = 0;
};

MyopicResult run_myopic(const TransitionMatrix& chain, const InitialDistribution& init,
                        const DistortionMatrix& d, double dbar, int n, int rollouts, Rng& rng);

// Sampled trajectories under a prepared plan, for adversary evaluation.
TraceSet myopic_traces(const MyopicPlan& plan, int rollouts, Rng& rng);

}  // namespace put
