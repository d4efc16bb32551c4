#include "put/belief.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace put {

ActionKernel ActionKernel::uniform(int w, ActionMode mode) {
  ActionKernel a;
  a.mode = mode;
  a.w = w;
  size_t slices = mode == ActionMode::StateConditioned ? w : static_cast<size_t>(w) * w;
  a.probs.assign(slices * w, 1.0 / w);
  return a;
}

ActionKernel ActionKernel::truthful(int w, ActionMode mode) {
  ActionKernel a;
  a.mode = mode;
  a.w = w;
  size_t slices = mode == ActionMode::StateConditioned ? w : static_cast<size_t>(w) * w;
  a.probs.assign(slices * w, 0.0);
  for (size_t s = 0; s < slices; ++s) {
    int xt = mode == ActionMode::StateConditioned ? static_cast<int>(s)
                                                  : static_cast<int>(s / w);
    a.probs[s * w + xt] = 1.0;
  }
  return a;
}

ActionKernel ActionKernel::constant(int w, ActionMode mode, const std::vector<double>& dist) {
  if (static_cast<int>(dist.size()) != w)
    throw std::invalid_argument("ActionKernel::constant: distribution size mismatch");
  ActionKernel a;
  a.mode = mode;
  a.w = w;
  size_t slices = mode == ActionMode::StateConditioned ? w : static_cast<size_t>(w) * w;
  a.probs.resize(slices * w);
  for (size_t s = 0; s < slices; ++s)
    for (int y = 0; y < w; ++y) a.probs[s * w + y] = dist[y];
  return a;
}

void ActionKernel::validate(double tol) const {
  int slices = slice_count();
  for (int s = 0; s < slices; ++s) {
    double sum = 0.0;
    for (int y = 0; y < w; ++y) {
      double v = probs[static_cast<size_t>(s) * w + y];
      if (v < 0.0) throw std::invalid_argument("ActionKernel: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw std::invalid_argument("ActionKernel: slice " + std::to_string(s) +
                                  " sums to " + std::to_string(sum));
  }
}

// Marginal over x_t implied by (beta, chain): w(x_t) = sum_xp q(x_t|xp) beta(xp)
static std::vector<double> next_state_marginal(const Belief& beta,
                                               const TransitionMatrix& chain) {
  int n = chain.size();
  std::vector<double> w(n, 0.0);
  for (int xp = 0; xp < n; ++xp) {
    double b = beta[xp];
    if (b == 0.0) continue;
    for (int xt = 0; xt < n; ++xt) w[xt] += chain.p(xt, xp) * b;
  }
  return w;
}

std::vector<double> release_marginal(const Belief& beta, const TransitionMatrix& chain,
                                     const ActionKernel& a) {
  int n = chain.size();
  std::vector<double> m(n, 0.0);
  if (a.mode == ActionMode::StateConditioned) {
    auto w = next_state_marginal(beta, chain);
    for (int xt = 0; xt < n; ++xt) {
      double wx = w[xt];
      if (wx == 0.0) continue;
      auto sl = a.slice(xt, 0);
      for (int y = 0; y < n; ++y) m[y] += wx * sl[y];
    }
  } else {
    for (int xp = 0; xp < n; ++xp) {
      double b = beta[xp];
      if (b == 0.0) continue;
      for (int xt = 0; xt < n; ++xt) {
        double j = b * chain.p(xt, xp);
        if (j == 0.0) continue;
        auto sl = a.slice(xt, xp);
        for (int y = 0; y < n; ++y) m[y] += j * sl[y];
      }
    }
  }
  return m;
}

Belief belief_update(const Belief& beta, const TransitionMatrix& chain, const ActionKernel& a,
                     int y) {
  int n = chain.size();
  Belief out(n, 0.0);
  double denom = 0.0;
  for (int xt = 0; xt < n; ++xt) {
    double num = 0.0;
    for (int xp = 0; xp < n; ++xp) {
      double b = beta[xp];
      if (b == 0.0) continue;
      num += chain.p(xt, xp) * a.p(y, xt, xp) * b;
    }
    out[xt] = num;
    denom += num;
  }
  if (!(denom > 0.0))
    throw std::domain_error("belief_update: observation y=" + std::to_string(y) +
                            " has zero probability");
  for (double& v : out) v /= denom;
  return out;
}

double per_step_leakage(const ActionKernel& a, const Belief& beta, const TransitionMatrix& chain,
                        int xt, int xp, int y) {
  double num = a.p(y, xt, xp);
  if (!(num > 0.0))
    throw std::domain_error("per_step_leakage: zero action probability at the realized tuple");
  auto m = release_marginal(beta, chain, a);
  return std::log(num / m[y]);
}

double avg_leakage(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain) {
  int n = chain.size();
  auto m = release_marginal(beta, chain, a);
  std::vector<double> logm(n);
  for (int y = 0; y < n; ++y) logm[y] = m[y] > 0.0 ? std::log(m[y]) : 0.0;
  double acc = 0.0;
  if (a.mode == ActionMode::StateConditioned) {
    auto w = next_state_marginal(beta, chain);
    for (int xt = 0; xt < n; ++xt) {
      double wx = w[xt];
      if (wx == 0.0) continue;
      auto sl = a.slice(xt, 0);
      for (int y = 0; y < n; ++y) {
        double p = sl[y];
        if (p > 0.0) acc += wx * p * (std::log(p) - logm[y]);
      }
    }
  } else {
    for (int xp = 0; xp < n; ++xp) {
      double b = beta[xp];
      if (b == 0.0) continue;
      for (int xt = 0; xt < n; ++xt) {
        double j = b * chain.p(xt, xp);
        if (j == 0.0) continue;
        auto sl = a.slice(xt, xp);
        for (int y = 0; y < n; ++y) {
          double p = sl[y];
          if (p > 0.0) acc += j * p * (std::log(p) - logm[y]);
        }
      }
    }
  }
  // mutual information; clip tiny negative rounding
  return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;
}

double avg_distortion(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain,
                      const DistortionMatrix& d) {
  int n = chain.size();
  double acc = 0.0;
  if (a.mode == ActionMode::StateConditioned) {
    auto w = next_state_marginal(beta, chain);
    for (int xt = 0; xt < n; ++xt) {
      double wx = w[xt];
      if (wx == 0.0) continue;
      auto sl = a.slice(xt, 0);
      for (int y = 0; y < n; ++y) acc += wx * sl[y] * d.d(xt, y);
    }
  } else {
    for (int xp = 0; xp < n; ++xp) {
      double b = beta[xp];
      if (b == 0.0) continue;
      for (int xt = 0; xt < n; ++xt) {
        double j = b * chain.p(xt, xp);
        if (j == 0.0) continue;
        auto sl = a.slice(xt, xp);
        for (int y = 0; y < n; ++y) acc += j * sl[y] * d.d(xt, y);
      }
    }
  }
  return acc;
}

StepCost step_cost_adc(const Belief& beta, const ActionKernel& a, const TransitionMatrix& chain,
                       const DistortionMatrix& d, double lambda, double dbar) {
  if (lambda < 0.0) throw std::invalid_argument("step_cost_adc: lambda must be >= 0");
  StepCost c;
  c.leakage = avg_leakage(beta, a, chain);
  c.distortion = avg_distortion(beta, a, chain, d);
  c.combined = c.leakage + lambda * (c.distortion - dbar);
  return c;
}

ActionKernel apply_idc_mask(const ActionKernel& a, const DistortionMatrix& d, double dhat) {
  ActionKernel out = a;
  out.mask_degenerate = false;
  int n = a.w;
  int slices = a.slice_count();
  for (int s = 0; s < slices; ++s) {
    int xt = a.mode == ActionMode::StateConditioned ? s : s / n;
    auto sl = out.slice(xt, a.mode == ActionMode::StateConditioned ? 0 : s % n);
    double sum = 0.0;
    int feasible = 0;
    for (int y = 0; y < n; ++y) {
      if (d.d(xt, y) > dhat) {
        sl[y] = 0.0;
      } else {
        sum += sl[y];
        ++feasible;
      }
    }
    if (sum > 0.0) {
      for (int y = 0; y < n; ++y) sl[y] /= sum;
    } else {
      // all actor mass was infeasible: uniform over the feasible set
      out.mask_degenerate = true;
      for (int y = 0; y < n; ++y) sl[y] = d.d(xt, y) <= dhat ? 1.0 / feasible : 0.0;
    }
  }
  return out;
}

Environment::Environment(const TransitionMatrix& chain, const DistortionMatrix& d,
                         EnvConfig cfg, Belief beta0, Rng& rng)
    : chain_(chain), dist_(d), cfg_(cfg), beta0_(std::move(beta0)) {
  if (static_cast<int>(beta0_.size()) != chain_.size())
    throw std::invalid_argument("Environment: belief size mismatch");
  reset(rng);
}

void Environment::reset(Rng& rng) {
  belief_ = beta0_;
  x_prev_ = rng.discrete(beta0_);
}

ExperienceTuple Environment::step(const ActionKernel& a, Rng& rng) {
  int n = chain_.size();
  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) col[i] = chain_.p(i, x_prev_);
  int x_cur = rng.discrete(col);
  int y = rng.discrete(a.slice(x_cur, x_prev_));

  ExperienceTuple exp;
  exp.belief_before = belief_;
  exp.x_prev = x_prev_;
  exp.x_cur = x_cur;
  exp.y = y;
  if (cfg_.mode == ConstraintMode::ADC) {
    exp.cost = step_cost_adc(belief_, a, chain_, dist_, cfg_.lambda, cfg_.dbar);
  } else {
    exp.cost.leakage = avg_leakage(belief_, a, chain_);
    exp.cost.distortion = avg_distortion(belief_, a, chain_, dist_);
    exp.cost.combined = exp.cost.leakage;
  }
  exp.belief_after = belief_update(belief_, chain_, a, y);

  belief_ = exp.belief_after;
  x_prev_ = x_cur;
  return exp;
}

}  // namespace put
