#include "put/myopic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace put {

namespace {

// exact I(X_t, X_{t-1}; Y) and E[d] of an arbitrary channel under a pair prior
void channel_stats(const std::vector<double>& prior, const std::vector<double>& channel,
                   const DistortionMatrix& d, double* mi, double* dist) {
  int w = d.states.size;
  std::vector<double> r(w, 0.0);
  for (int pair = 0; pair < w * w; ++pair) {
    double p = prior[pair];
    if (p <= 0.0) continue;
    const double* q = &channel[static_cast<size_t>(pair) * w];
    for (int y = 0; y < w; ++y) r[y] += p * q[y];
  }
  double i = 0.0, e = 0.0;
  for (int pair = 0; pair < w * w; ++pair) {
    double p = prior[pair];
    if (p <= 0.0) continue;
    int xt = pair / w;
    const double* q = &channel[static_cast<size_t>(pair) * w];
    for (int y = 0; y < w; ++y) {
      if (q[y] <= 0.0) continue;
      i += p * q[y] * std::log(q[y] / r[y]);
      e += p * q[y] * d.d(xt, y);
    }
  }
  *mi = std::max(i, 0.0);
  *dist = e;
}

}  // namespace

BAResult blahut_arimoto(const std::vector<double>& prior, const DistortionMatrix& d,
                        double lambda_ba, const BAOptions& opt) {
  int w = d.states.size;
  if (static_cast<int>(prior.size()) != w * w)
    throw std::invalid_argument("blahut_arimoto: prior size mismatch");
  double total = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw std::invalid_argument("blahut_arimoto: negative prior mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("blahut_arimoto: prior does not sum to 1");
  if (lambda_ba < 0.0) throw std::invalid_argument("blahut_arimoto: lambda_ba < 0");

  BAResult res;
  if (opt.init_channel.empty()) {
    res.channel.assign(static_cast<size_t>(w) * w * w, 1.0 / w);
  } else {
    if (opt.init_channel.size() != static_cast<size_t>(w) * w * w)
      throw std::invalid_argument("blahut_arimoto: init_channel size mismatch");
    res.channel = opt.init_channel;
    for (double& q : res.channel) q = (1.0 - 1e-6) * q + 1e-6 / w;
  }

  // zero-mass pairs never touch the objective; skip them in the iteration
  std::vector<int> live;
  live.reserve(static_cast<size_t>(w) * w);
  for (int pair = 0; pair < w * w; ++pair)
    if (prior[pair] > 0.0) live.push_back(pair);

  double prev_obj = std::numeric_limits<double>::infinity();
  std::vector<double> r(w), lr(w), r2(w), logz(static_cast<size_t>(w) * w, 0.0);
  bool done = false;
  for (int it = 1; it <= opt.max_iters && !done; ++it) {
    // output marginal under the current channel
    std::fill(r.begin(), r.end(), 0.0);
    for (int pair : live) {
      double p = prior[pair];
      const double* q = &res.channel[static_cast<size_t>(pair) * w];
      for (int y = 0; y < w; ++y) r[y] += p * q[y];
    }
    for (int y = 0; y < w; ++y)
      lr[y] = r[y] > 0.0 ? std::log(r[y]) : -std::numeric_limits<double>::infinity();
    // channel update: q(y|pair) proportional to r(y) exp(-lambda d(xt, y))
    std::fill(r2.begin(), r2.end(), 0.0);
    for (int pair : live) {
      int xt = pair / w;
      double* q = &res.channel[static_cast<size_t>(pair) * w];
      double best = -std::numeric_limits<double>::infinity();
      for (int y = 0; y < w; ++y) {
        double s = lr[y] - lambda_ba * d.d(xt, y);
        q[y] = s;
        best = std::max(best, s);
      }
      double sum = 0.0;
      for (int y = 0; y < w; ++y) {
        q[y] = std::isfinite(q[y]) ? std::exp(q[y] - best) : 0.0;
        sum += q[y];
      }
      for (int y = 0; y < w; ++y) q[y] /= sum;
      logz[pair] = best + std::log(sum);
      double p = prior[pair];
      for (int y = 0; y < w; ++y) r2[y] += p * q[y];
    }
    // exact objective of the updated channel; log q comes from the update
    // scores (log q = lr - lambda d - logz), only the new marginal needs logs
    double mi = 0.0, dist = 0.0;
    for (int y = 0; y < w; ++y)
      r[y] = r2[y] > 0.0 ? std::log(r2[y]) : 0.0;  // reuse r as log r2
    for (int pair : live) {
      int xt = pair / w;
      double p = prior[pair];
      const double* q = &res.channel[static_cast<size_t>(pair) * w];
      for (int y = 0; y < w; ++y) {
        if (q[y] <= 0.0) continue;
        mi += p * q[y] * (lr[y] - lambda_ba * d.d(xt, y) - logz[pair] - r[y]);
        dist += p * q[y] * d.d(xt, y);
      }
    }
    mi = std::max(mi, 0.0);
    double obj = mi + lambda_ba * dist;
    if (obj > prev_obj + 1e-10)  // alternating minimization is monotone
      throw std::logic_error("blahut_arimoto: objective increased");
    res.mi = mi;
    res.distortion = dist;
    res.objective = obj;
    res.iterations = it;
    res.last_delta = prev_obj - obj;
    done = std::isfinite(prev_obj) && res.last_delta < opt.tol;
    prev_obj = obj;
  }
  res.converged = done;
  // rows the prior never reaches carry no information; hand back the marginal
  if (live.size() < static_cast<size_t>(w) * w) {
    std::fill(r2.begin(), r2.end(), 0.0);
    for (int pair : live) {
      double p = prior[pair];
      const double* q = &res.channel[static_cast<size_t>(pair) * w];
      for (int y = 0; y < w; ++y) r2[y] += p * q[y];
    }
    for (int pair = 0; pair < w * w; ++pair)
      if (prior[pair] <= 0.0)
        std::copy(r2.begin(), r2.end(), &res.channel[static_cast<size_t>(pair) * w]);
  }
  return res;
}

BAFitResult ba_fit_distortion(const std::vector<double>& prior, const DistortionMatrix& d,
                              double dbar, double dist_tol, const BAOptions& opt,
                              double lambda_hint) {
  if (dbar < 0.0) throw std::invalid_argument("ba_fit_distortion: dbar < 0");
  // each solve seeds the next one; successive multipliers are close, so the
  // warm start collapses the inner iteration count
  BAOptions o = opt;
  auto eval = [&](double lam) {
    BAResult r = blahut_arimoto(prior, d, lam, o);
    o.init_channel = r.channel;
    return r;
  };
  BAFitResult out;
  out.ba = eval(0.0);
  if (out.ba.distortion <= dbar) {
    out.lambda = 0.0;  // the budget is slack; the zero-rate channel wins
    return out;
  }
  // establish a bracket: distortion at lo exceeds the budget, at hi meets it
  double lo = 0.0;
  BAResult at_lo = out.ba;
  double hi = lambda_hint > 0.0 ? lambda_hint : 1.0;
  BAResult at_hi = eval(hi);
  while (at_hi.distortion > dbar) {
    lo = hi;
    at_lo = at_hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw std::runtime_error("ba_fit_distortion: budget unreachable, distortion " +
                               std::to_string(at_hi.distortion) + " at lambda " +
                               std::to_string(hi / 2.0));
    at_hi = eval(hi);
  }
  while (lo == 0.0 && hi > 1e-9) {
    // tighten the lower edge so a hint near the answer bisects in a few steps
    double cand = 0.5 * hi;
    BAResult at_cand = eval(cand);
    if (at_cand.distortion > dbar) {
      lo = cand;
      at_lo = std::move(at_cand);
    } else {
      hi = cand;
      at_hi = std::move(at_cand);
    }
  }
  // distortion is non-increasing in lambda; close in on the budget from below
  for (int it = 0; it < 200; ++it) {
    if (dbar - at_hi.distortion <= dist_tol) break;
    double mid = 0.5 * (lo + hi);
    BAResult at_mid = eval(mid);
    if (at_mid.distortion <= dbar) {
      hi = mid;
      at_hi = std::move(at_mid);
    } else {
      lo = mid;
      at_lo = std::move(at_mid);
    }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  out.lambda = hi;
  out.lambda_lo = lo;
  out.lambda_hi = hi;
  out.dist_lo = at_lo.distortion;
  out.dist_hi = at_hi.distortion;
  out.matched = dbar - at_hi.distortion <= dist_tol;
  if (!out.matched && at_lo.distortion > dbar) {
    // the budget sits on a linear face of the rate-distortion curve (E[d] as a
    // function of lambda jumps across it); timeshare the bracketing channels,
    // which are both optimal on the face, to land on the budget exactly
    double theta = (dbar - at_lo.distortion) / (at_hi.distortion - at_lo.distortion);
    BAResult mix = at_hi;
    for (size_t i = 0; i < mix.channel.size(); ++i)
      mix.channel[i] = theta * at_hi.channel[i] + (1.0 - theta) * at_lo.channel[i];
    channel_stats(prior, mix.channel, d, &mix.mi, &mix.distortion);
    mix.objective = mix.mi + hi * mix.distortion;
    out.ba = std::move(mix);
    out.matched = std::abs(out.ba.distortion - dbar) <= dist_tol;
    return out;
  }
  out.ba = std::move(at_hi);
  return out;
}

MyopicPlan::MyopicPlan(const TransitionMatrix& chain, const DistortionMatrix& d,
                       const InitialDistribution& init, double dbar, int n)
    : chain_(chain), dist_(d), init_(init), dbar_(dbar), w_(chain.size()), n_(n) {
  if (n < 1) throw std::invalid_argument("MyopicPlan: n must be >= 1");
  chain.validate();
  init.validate();
  if (static_cast<int>(init.probs.size()) != w_ || d.states.size != w_)
    throw std::invalid_argument("MyopicPlan: size mismatch");

  steps_.resize(n_);
  double leak = 0.0, dist_sum = 0.0;

  // step 1: conditioning belief over x_0 is the initial distribution
  const Entry* e0 = solve(init_.probs);
  steps_[0] = {e0};
  leak += e0->fit.ba.mi;
  dist_sum += e0->fit.ba.distortion;

  // joint P(x_t, y_t), stored [xt * w + y], carried forward one step at a time
  std::vector<double> joint(static_cast<size_t>(w_) * w_, 0.0);
  for (int xt = 0; xt < w_; ++xt)
    for (int xp = 0; xp < w_; ++xp) {
      double p = init_.probs[xp] * chain_.p(xt, xp);
      if (p <= 0.0) continue;
      for (int y = 0; y < w_; ++y)
        joint[static_cast<size_t>(xt) * w_ + y] +=
            p * e0->fit.ba.channel[(static_cast<size_t>(xt) * w_ + xp) * w_ + y];
    }

  for (int t = 2; t <= n_; ++t) {
    steps_[t - 1].assign(w_, nullptr);
    std::vector<double> next(static_cast<size_t>(w_) * w_, 0.0);
    for (int yp = 0; yp < w_; ++yp) {
      double mass = 0.0;
      for (int x = 0; x < w_; ++x) mass += joint[static_cast<size_t>(x) * w_ + yp];
      if (mass <= 0.0) continue;
      std::vector<double> belief(w_);
      for (int x = 0; x < w_; ++x) belief[x] = joint[static_cast<size_t>(x) * w_ + yp] / mass;
      const Entry* e = solve(belief);
      steps_[t - 1][yp] = e;
      leak += mass * e->fit.ba.mi;
      dist_sum += mass * e->fit.ba.distortion;
      for (int xt = 0; xt < w_; ++xt)
        for (int xp = 0; xp < w_; ++xp) {
          double p = mass * belief[xp] * chain_.p(xt, xp);
          if (p <= 0.0) continue;
          const double* q = &e->fit.ba.channel[(static_cast<size_t>(xt) * w_ + xp) * w_];
          for (int y = 0; y < w_; ++y) next[static_cast<size_t>(xt) * w_ + y] += p * q[y];
        }
    }
    joint.swap(next);
  }
  exp_leakage_ = leak / n_;
  exp_distortion_ = dist_sum / n_;
}

const MyopicPlan::Entry* MyopicPlan::at(int t, int y_prev) const {
  if (t < 1 || t > n_) throw std::out_of_range("MyopicPlan::at: step out of range");
  if (t == 1) return steps_[0][0];
  if (y_prev < 0 || y_prev >= w_) throw std::out_of_range("MyopicPlan::at: bad y_prev");
  return steps_[t - 1][y_prev];
}

const MyopicPlan::Entry* MyopicPlan::solve(const std::vector<double>& belief_prev) {
  // snap the belief onto the cache grid and solve for the snapped point, so
  // the channel is a pure function of the key and the forward recursion
  // settles onto repeating keys instead of drifting below the grid forever
  std::vector<int64_t> key(w_);
  int64_t key_sum = 0;
  for (int i = 0; i < w_; ++i) {
    key[i] = std::llround(belief_prev[i] * 1e8);
    key_sum += key[i];
  }
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second.get();

  auto entry = std::make_unique<Entry>();
  entry->prior_prev.resize(w_);
  for (int i = 0; i < w_; ++i)
    entry->prior_prev[i] = static_cast<double>(key[i]) / static_cast<double>(key_sum);
  std::vector<double> pair_prior(static_cast<size_t>(w_) * w_);
  for (int xt = 0; xt < w_; ++xt)
    for (int xp = 0; xp < w_; ++xp)
      pair_prior[static_cast<size_t>(xt) * w_ + xp] = entry->prior_prev[xp] * chain_.p(xt, xp);
  // the fit must stay a pure function of the key: any cross-solve warm state
  // would make the forward recursion drift instead of settling onto the cache
  BAOptions opt;
  opt.tol = 1e-9;  // plan-level comparisons live at 1e-3 and above
  entry->fit = ba_fit_distortion(pair_prior, dist_, dbar_, 1e-4, opt);
  all_matched_ = all_matched_ && entry->fit.matched;
  ++solves_;
  return cache_.emplace(std::move(key), std::move(entry)).first->second.get();
}

MyopicResult run_myopic(const TransitionMatrix& chain, const InitialDistribution& init,
                        const DistortionMatrix& d, double dbar, int n, int rollouts, Rng& rng) {
  if (rollouts < 1) throw std::invalid_argument("run_myopic: rollouts must be >= 1");
  MyopicPlan plan(chain, d, init, dbar, n);
  int w = chain.size();
  double leak = 0.0, dist_sum = 0.0;
  for (int roll = 0; roll < rollouts; ++roll) {
    int xp = rng.discrete(init.probs);
    int y_prev = -1;
    std::vector<double> col(w);
    for (int t = 1; t <= n; ++t) {
      for (int i = 0; i < w; ++i) col[i] = chain.p(i, xp);
      int xt = rng.discrete(col);
      const MyopicPlan::Entry* e = plan.at(t, y_prev);
      std::span<const double> slice(
          &e->fit.ba.channel[(static_cast<size_t>(xt) * w + xp) * w], static_cast<size_t>(w));
      int y = rng.discrete(slice);
      leak += e->fit.ba.mi;  // conditional MI given the realized y_{t-1}
      dist_sum += d.d(xt, y);
      xp = xt;
      y_prev = y;
    }
  }
  MyopicResult res;
  res.avg_leakage = leak / (static_cast<double>(n) * rollouts);
  res.avg_distortion = dist_sum / (static_cast<double>(n) * rollouts);
  res.matched = plan.all_matched();
  res.ba_solves = plan.solves();
  return res;
}

TraceSet myopic_traces(const MyopicPlan& plan, int rollouts, Rng& rng) {
  const TransitionMatrix& chain = plan.chain();
  const DistortionMatrix& d = plan.metric();
  (void)d;
  int w = plan.width();
  int n = plan.horizon();
  // the initial distribution lives inside the plan's step-1 conditioning belief
  const std::vector<double>& init = plan.at(1, 0)->prior_prev;
  TraceSet out;
  out.truth.resize(rollouts);
  out.released.resize(rollouts);
  std::vector<double> col(w);
  for (int roll = 0; roll < rollouts; ++roll) {
    int xp = rng.discrete(init);
    int y_prev = -1;
    for (int t = 1; t <= n; ++t) {
      for (int i = 0; i < w; ++i) col[i] = chain.p(i, xp);
      int xt = rng.discrete(col);
      const MyopicPlan::Entry* e = plan.at(t, y_prev);
      std::span<const double> slice(
          &e->fit.ba.channel[(static_cast<size_t>(xt) * w + xp) * w], static_cast<size_t>(w));
      int y = rng.discrete(slice);
      out.truth[roll].push_back(xt);
      out.released[roll].push_back(y);
      xp = xt;
      y_prev = y;
    }
  }
  return out;
}

}  // namespace put
