#pragma once

#include <span>
#include <vector>

#include "put/distortion.hpp"
#include "put/markov.hpp"
#include "put/rng.hpp"

namespace put {

// beta(x) = P(X_{t-1} = x | Y^{t-1} = y^{t-1})
using Belief = std::vector<double>;

enum class ActionMode { StateConditioned, PairConditioned };
enum class ConstraintMode { ADC, IDC };

// Conditional release distribution. State-conditioned kernels store
// a(y | x_t) as |W|x|W| (x_t-major); pair-conditioned kernels store
// a(y | x_t, x_{t-1}) as |W|x|W|x|W|.
struct ActionKernel {
  ActionMode mode = ActionMode::StateConditioned;
  int w = 0;
  std::vector<double> probs;
  bool mask_degenerate = false;

  static ActionKernel uniform(int w, ActionMode mode);
  static ActionKernel truthful(int w, ActionMode mode);
  // constant release distribution, independent of (x_t, x_{t-1})
  static ActionKernel constant(int w, ActionMode mode, const std::vector<double>& dist);

  double p(int y, int xt, int xp) const {
    return mode == ActionMode::StateConditioned
               ? probs[static_cast<size_t>(xt) * w + y]
               : probs[(static_cast<size_t>(xt) * w + xp) * w + y];
  }
  std::span<double> slice(int xt, int xp) {
    size_t base = mode == ActionMode::StateConditioned
                      ? static_cast<size_t>(xt) * w
                      : (static_cast<size_t>(xt) * w + xp) * w;
    return {probs.data() + base, static_cast<size_t>(w)};
  }
  std::span<const double> slice(int xt, int xp) const {
    size_t base = mode == ActionMode::StateConditioned
                      ? static_cast<size_t>(xt) * w
                      : (static_cast<size_t>(xt) * w + xp) * w;
    return {probs.data() + base, static_cast<size_t>(w)};
  }
  int slice_count() const { return mode == ActionMode::StateConditioned ? w : w * w; }
  void validate(double tol = 1e-9) const;
};

struct StepCost {
  double leakage = 0.0;
  double distortion = 0.0;
  double combined = 0.0;
};

// P(y_t | y^{t-1}) under (beta, chain, a).
std::vector<double> release_marginal(const Belief& beta, const TransitionMatrix& chain,
                                     const ActionKernel& a);

// Bayesian update after observing y; throws on a zero-probability observation.
Belief belief_update(const Belief& beta, const TransitionMatrix& chain, const ActionKernel& a,
                     int y);

// log( a(y|x_t,x_{t-1}) / P(y|y^{t-1}) ), natural log.
double per_step_leakage(const ActionKernel& a, const Belief& beta, const TransitionMatrix& chain,
                        int xt, int xp, int y);

// L(beta, a) = I(X_t, X_{t-1}; Y_t | y^{t-1}) in nats.
double avg_leakage(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain);

double avg_distortion(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain,
                      const DistortionMatrix& d);

// combined = L + lambda * (D - dbar)
StepCost step_cost_adc(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain,
                       const DistortionMatrix& d, double lambda, double dbar);

// Zeroes infeasible y entries and renormalizes each conditional slice. A slice
// with no feasible mass falls back to uniform over the feasible set and sets
// mask_degenerate.
ActionKernel apply_idc_mask(const ActionKernel& a, const DistortionMatrix& d, double dhat);

// Aligned true/released trajectories, the adversary's raw material.
struct TraceSet {
  std::vector<std::vector<int>> truth;
  std::vector<std::vector<int>> released;
};

struct ExperienceTuple {
  Belief belief_before;
  int x_prev = 0;
  int x_cur = 0;
  int y = 0;
  Belief belief_after;
  StepCost cost;
};

struct EnvConfig {
  ConstraintMode mode = ConstraintMode::ADC;
  double lambda = 1.0;
  double dbar = 0.0;
  double dhat = 0.0;  // IDC threshold, used only for reporting
};

// The artificial environment: carries the belief and a sampled true pair.
class Environment {
 public:
  Environment(const TransitionMatrix& chain, const DistortionMatrix& d, EnvConfig cfg,
              Belief beta0, Rng& rng);

  void reset(Rng& rng);
  const Belief& belief() const { return belief_; }
  int true_prev() const { return x_prev_; }

  // Samples x_t and y_t, computes the step cost and the next belief.
  ExperienceTuple step(const ActionKernel& a, Rng& rng);

 private:
  const TransitionMatrix& chain_;
  const DistortionMatrix& dist_;
  EnvConfig cfg_;
  Belief beta0_;
  Belief belief_;
  int x_prev_ = 0;
};

}  // namespace put
