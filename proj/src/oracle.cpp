#include "put/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace put {

int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

static void fill_random_dist(std::vector<double>& table, size_t base, int w, Rng& rng) {
  double sum = 0.0;
  for (int y = 0; y < w; ++y) {
    double e = -std::log(rng.uniform_pos());
    table[base + y] = e;
    sum += e;
  }
  for (int y = 0; y < w; ++y) table[base + y] /= sum;
}

static void check_budget(int w, int n) {
  int64_t entries = ipow(w, 2 * n);
  if (entries > kEnumerationBudget)
    throw std::length_error("enumeration budget exceeded: |W|^(2n) = " +
                            std::to_string(entries) + " entries");
}

HistoryPolicy HistoryPolicy::random(int w, int n, Rng& rng) {
  HistoryPolicy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    size_t keys = static_cast<size_t>(ipow(w, t) * ipow(w, t - 1));
    p.tables[t - 1].assign(keys * w, 0.0);
    for (size_t k = 0; k < keys; ++k) fill_random_dist(p.tables[t - 1], k * w, w, rng);
  }
  return p;
}

SimplifiedPolicy SimplifiedPolicy::random(int w, int n, Rng& rng) {
  SimplifiedPolicy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    size_t keys = t == 1 ? w : static_cast<size_t>(w) * w * ipow(w, t - 1);
    p.tables[t - 1].assign(keys * w, 0.0);
    for (size_t k = 0; k < keys; ++k) fill_random_dist(p.tables[t - 1], k * w, w, rng);
  }
  return p;
}

SimplifiedPolicy SimplifiedPolicy::from_kernel(const ActionKernel& a, int n) {
  if (a.mode != ActionMode::StateConditioned)
    throw std::invalid_argument(
        "SimplifiedPolicy::from_kernel: only state-conditioned kernels lift cleanly "
        "(t=1 has no previous symbol)");
  int w = a.w;
  SimplifiedPolicy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  p.tables[0].resize(static_cast<size_t>(w) * w);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < w; ++y) p.tables[0][static_cast<size_t>(x) * w + y] = a.p(y, x, 0);
  for (int t = 2; t <= n; ++t) {
    size_t keys = static_cast<size_t>(w) * w * ipow(w, t - 1);
    p.tables[t - 1].resize(keys * w);
    for (int xt = 0; xt < w; ++xt)
      for (int xp = 0; xp < w; ++xp)
        for (int64_t iy = 0; iy < ipow(w, t - 1); ++iy)
          for (int y = 0; y < w; ++y)
            p.tables[t - 1][((static_cast<size_t>(xt) * w + xp) * ipow(w, t - 1) + iy) * w + y] =
                a.p(y, xt, xp);
  }
  return p;
}

HistoryPolicy SimplifiedPolicy::lift() const {
  HistoryPolicy h;
  h.w = w;
  h.n = n;
  h.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    int64_t nx = ipow(w, t), ny = ipow(w, t - 1);
    h.tables[t - 1].resize(static_cast<size_t>(nx) * ny * w);
    for (int64_t ix = 0; ix < nx; ++ix) {
      int xt = static_cast<int>(ix % w);
      int xp = t >= 2 ? static_cast<int>((ix / w) % w) : 0;
      for (int64_t iy = 0; iy < ny; ++iy) {
        for (int y = 0; y < w; ++y) {
          double v = t == 1 ? tables[0][static_cast<size_t>(xt) * w + y]
                            : tables[t - 1][((static_cast<size_t>(xt) * w + xp) * ny + iy) * w + y];
          h.tables[t - 1][(ix * ny + iy) * w + y] = v;
        }
      }
    }
  }
  return h;
}

double JointTable::mass() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

JointTable enumerate_joint_history(const HistoryPolicy& policy, const TransitionMatrix& chain,
                                   const InitialDistribution& init) {
  int w = policy.w, n = policy.n;
  check_budget(w, n);
  int64_t nn = ipow(w, n);
  JointTable joint;
  joint.w = w;
  joint.n = n;
  joint.p.assign(static_cast<size_t>(nn) * nn, 0.0);
  for (int64_t ix = 0; ix < nn; ++ix) {
    // path probability of x^n
    double px = init.probs[(ix / ipow(w, n - 1)) % w];
    for (int t = 2; t <= n && px > 0.0; ++t) {
      int xt = static_cast<int>((ix / ipow(w, n - t)) % w);
      int xp = static_cast<int>((ix / ipow(w, n - t + 1)) % w);
      px *= chain.p(xt, xp);
    }
    if (px == 0.0) continue;
    for (int64_t iy = 0; iy < nn; ++iy) {
      double p = px;
      for (int t = 1; t <= n && p > 0.0; ++t) {
        int64_t xpre = ix / ipow(w, n - t);
        int64_t ypre = iy / ipow(w, n - t + 1);
        int y = static_cast<int>((iy / ipow(w, n - t)) % w);
        p *= policy.prob(t, xpre, ypre, y);
      }
      joint.p[static_cast<size_t>(ix) * nn + iy] = p;
    }
  }
  return joint;
}

JointTable enumerate_joint_simplified(const SimplifiedPolicy& policy,
                                      const TransitionMatrix& chain,
                                      const InitialDistribution& init) {
  return enumerate_joint_history(policy.lift(), chain, init);
}

double mutual_information(const JointTable& joint) {
  int64_t nn = ipow(joint.w, joint.n);
  std::vector<double> px(nn, 0.0), py(nn, 0.0);
  for (int64_t ix = 0; ix < nn; ++ix)
    for (int64_t iy = 0; iy < nn; ++iy) {
      double v = joint.p[static_cast<size_t>(ix) * nn + iy];
      px[ix] += v;
      py[iy] += v;
    }
  double mi = 0.0;
  for (int64_t ix = 0; ix < nn; ++ix) {
    if (px[ix] == 0.0) continue;
    for (int64_t iy = 0; iy < nn; ++iy) {
      double v = joint.p[static_cast<size_t>(ix) * nn + iy];
      if (v > 0.0) mi += v * std::log(v / (px[ix] * py[iy]));
    }
  }
  return mi;
}

std::vector<double> chain_rule_terms(const JointTable& joint) {
  int w = joint.w, n = joint.n;
  int64_t nn = ipow(w, n);
  std::vector<double> terms(n, 0.0);
  for (int t = 1; t <= n; ++t) {
    int64_t wt = ipow(w, t), wt1 = ipow(w, t - 1);
    std::vector<double> a(static_cast<size_t>(wt) * wt, 0.0);   // (x^t, y^t)
    std::vector<double> c(wt, 0.0);                             // y^t
    int64_t shift = ipow(w, n - t);
    for (int64_t ix = 0; ix < nn; ++ix) {
      int64_t xa = ix / shift;
      for (int64_t iy = 0; iy < nn; ++iy) {
        double v = joint.p[static_cast<size_t>(ix) * nn + iy];
        if (v == 0.0) continue;
        int64_t ya = iy / shift;
        a[static_cast<size_t>(xa) * wt + ya] += v;
      }
    }
    std::vector<double> b(static_cast<size_t>(wt) * wt1, 0.0);  // (x^t, y^{t-1})
    std::vector<double> d(wt1, 0.0);                            // y^{t-1}
    for (int64_t xa = 0; xa < wt; ++xa)
      for (int64_t ya = 0; ya < wt; ++ya) {
        double v = a[static_cast<size_t>(xa) * wt + ya];
        if (v == 0.0) continue;
        b[static_cast<size_t>(xa) * wt1 + ya / w] += v;
        c[ya] += v;
        d[ya / w] += v;
      }
    double term = 0.0;
    for (int64_t xa = 0; xa < wt; ++xa)
      for (int64_t ya = 0; ya < wt; ++ya) {
        double v = a[static_cast<size_t>(xa) * wt + ya];
        if (v == 0.0) continue;
        double num = v / b[static_cast<size_t>(xa) * wt1 + ya / w];
        double den = c[ya] / d[ya / w];
        term += v * std::log(num / den);
      }
    terms[t - 1] = term;
  }
  return terms;
}

std::vector<double> pair_history_marginal(const JointTable& joint, int t) {
  int w = joint.w, n = joint.n;
  int64_t nn = ipow(w, n), wt = ipow(w, t);
  std::vector<double> a(static_cast<size_t>(w) * w * wt, 0.0);
  int64_t shift = ipow(w, n - t);
  for (int64_t ix = 0; ix < nn; ++ix) {
    int xt = static_cast<int>((ix / shift) % w);
    int xp = t >= 2 ? static_cast<int>((ix / (shift * w)) % w) : 0;
    size_t base = (static_cast<size_t>(xt) * w + xp) * wt;
    for (int64_t iy = 0; iy < nn; ++iy) {
      double v = joint.p[static_cast<size_t>(ix) * nn + iy];
      if (v != 0.0) a[base + iy / shift] += v;
    }
  }
  return a;
}

std::vector<double> posterior_from_joint(const JointTable& joint, int t, int64_t iy) {
  int w = joint.w;
  int64_t wt = ipow(w, t);
  if (t < 1 || t > joint.n || iy < 0 || iy >= wt)
    throw std::out_of_range("posterior_from_joint: bad (t, iy)");
  auto a = pair_history_marginal(joint, t);  // (xt, xp, y^t)
  std::vector<double> out(w, 0.0);
  double total = 0.0;
  for (int xt = 0; xt < w; ++xt)
    for (int xp = 0; xp < w; ++xp) {
      double v = a[(static_cast<size_t>(xt) * w + xp) * wt + iy];
      out[xt] += v;
      total += v;
    }
  if (!(total > 0.0))
    throw std::domain_error("posterior_from_joint: zero-probability release prefix");
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> pairwise_terms(const JointTable& joint) {
  int w = joint.w, n = joint.n;
  std::vector<double> terms(n, 0.0);
  for (int t = 1; t <= n; ++t) {
    int64_t wt = ipow(w, t), wt1 = ipow(w, t - 1);
    auto a = pair_history_marginal(joint, t);  // (xt, xp, y^t)
    std::vector<double> b(static_cast<size_t>(w) * w * wt1, 0.0);
    std::vector<double> c(wt, 0.0), d(wt1, 0.0);
    for (int xt = 0; xt < w; ++xt)
      for (int xp = 0; xp < w; ++xp)
        for (int64_t ya = 0; ya < wt; ++ya) {
          double v = a[(static_cast<size_t>(xt) * w + xp) * wt + ya];
          if (v == 0.0) continue;
          b[(static_cast<size_t>(xt) * w + xp) * wt1 + ya / w] += v;
          c[ya] += v;
          d[ya / w] += v;
        }
    double term = 0.0;
    for (int xt = 0; xt < w; ++xt)
      for (int xp = 0; xp < w; ++xp)
        for (int64_t ya = 0; ya < wt; ++ya) {
          double v = a[(static_cast<size_t>(xt) * w + xp) * wt + ya];
          if (v == 0.0) continue;
          double num = v / b[(static_cast<size_t>(xt) * w + xp) * wt1 + ya / w];
          double den = c[ya] / d[ya / w];
          term += v * std::log(num / den);
        }
    terms[t - 1] = term;
  }
  return terms;
}

SimplifiedPolicy simplify_policy(const HistoryPolicy& policy, const TransitionMatrix& chain,
                                 const InitialDistribution& init) {
  int w = policy.w, n = policy.n;
  JointTable joint = enumerate_joint_history(policy, chain, init);
  SimplifiedPolicy s;
  s.w = w;
  s.n = n;
  s.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    int64_t wt = ipow(w, t), wt1 = ipow(w, t - 1);
    auto a = pair_history_marginal(joint, t);  // (xt, xp, y^t)
    if (t == 1) {
      s.tables[0].assign(static_cast<size_t>(w) * w, 0.0);
      for (int xt = 0; xt < w; ++xt) {
        double total = 0.0;
        for (int y = 0; y < w; ++y) total += a[(static_cast<size_t>(xt) * w) * wt + y];
        for (int y = 0; y < w; ++y)
          s.tables[0][static_cast<size_t>(xt) * w + y] =
              total > 0.0 ? a[(static_cast<size_t>(xt) * w) * wt + y] / total : 1.0 / w;
      }
      continue;
    }
    s.tables[t - 1].assign(static_cast<size_t>(w) * w * wt1 * w, 0.0);
    for (int xt = 0; xt < w; ++xt)
      for (int xp = 0; xp < w; ++xp)
        for (int64_t iy = 0; iy < wt1; ++iy) {
          double total = 0.0;
          for (int y = 0; y < w; ++y)
            total += a[(static_cast<size_t>(xt) * w + xp) * wt + iy * w + y];
          size_t base = ((static_cast<size_t>(xt) * w + xp) * wt1 + iy) * w;
          for (int y = 0; y < w; ++y)
            s.tables[t - 1][base + y] =
                total > 0.0 ? a[(static_cast<size_t>(xt) * w + xp) * wt + iy * w + y] / total
                            : 1.0 / w;
        }
  }
  return s;
}

double expected_distortion_joint(const JointTable& joint, const DistortionMatrix& d) {
  int w = joint.w, n = joint.n;
  int64_t nn = ipow(w, n);
  double acc = 0.0;
  for (int64_t ix = 0; ix < nn; ++ix)
    for (int64_t iy = 0; iy < nn; ++iy) {
      double v = joint.p[static_cast<size_t>(ix) * nn + iy];
      if (v == 0.0) continue;
      double sum = 0.0;
      for (int t = 1; t <= n; ++t) {
        int64_t shift = ipow(w, n - t);
        sum += d.d(static_cast<int>((ix / shift) % w), static_cast<int>((iy / shift) % w));
      }
      acc += v * sum / n;
    }
  return acc;
}

double expected_distortion_stepwise(const JointTable& joint, const DistortionMatrix& d) {
  int w = joint.w, n = joint.n;
  int64_t nn = ipow(w, n);
  double acc = 0.0;
  for (int t = 1; t <= n; ++t) {
    std::vector<double> m(static_cast<size_t>(w) * w, 0.0);  // P(x_t, y_t)
    int64_t shift = ipow(w, n - t);
    for (int64_t ix = 0; ix < nn; ++ix) {
      int xt = static_cast<int>((ix / shift) % w);
      for (int64_t iy = 0; iy < nn; ++iy) {
        double v = joint.p[static_cast<size_t>(ix) * nn + iy];
        if (v != 0.0) m[static_cast<size_t>(xt) * w + (iy / shift) % w] += v;
      }
    }
    for (int x = 0; x < w; ++x)
      for (int y = 0; y < w; ++y) acc += m[static_cast<size_t>(x) * w + y] * d.d(x, y);
  }
  return acc / n;
}

// ---- order-2 ----

Order2Chain Order2Chain::random(int w, Rng& rng) {
  Order2Chain c;
  c.w = w;
  c.init.assign(w, 0.0);
  fill_random_dist(c.init, 0, w, rng);
  c.second.assign(static_cast<size_t>(w) * w, 0.0);
  for (int x1 = 0; x1 < w; ++x1) {
    std::vector<double> tmp(w);
    fill_random_dist(tmp, 0, w, rng);
    for (int x2 = 0; x2 < w; ++x2) c.second[static_cast<size_t>(x2) * w + x1] = tmp[x2];
  }
  c.trans.assign(static_cast<size_t>(w) * w * w, 0.0);
  for (int xp = 0; xp < w; ++xp)
    for (int xpp = 0; xpp < w; ++xpp) {
      std::vector<double> tmp(w);
      fill_random_dist(tmp, 0, w, rng);
      for (int xt = 0; xt < w; ++xt)
        c.trans[(static_cast<size_t>(xt) * w + xp) * w + xpp] = tmp[xt];
    }
  return c;
}

Order2Policy Order2Policy::random(int w, int n, Rng& rng) {
  Order2Policy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    size_t keys;
    if (t == 1)
      keys = w;
    else if (t == 2)
      keys = static_cast<size_t>(w) * w * w;
    else
      keys = static_cast<size_t>(w) * w * w * ipow(w, t - 1);
    p.tables[t - 1].assign(keys * w, 0.0);
    for (size_t k = 0; k < keys; ++k) fill_random_dist(p.tables[t - 1], k * w, w, rng);
  }
  return p;
}

Order2Policy Order2Policy::from_kernel(const ActionKernel& a, int n) {
  if (a.mode != ActionMode::StateConditioned)
    throw std::invalid_argument("Order2Policy::from_kernel: state-conditioned kernels only");
  int w = a.w;
  Order2Policy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  for (int t = 1; t <= n; ++t) {
    size_t keys;
    if (t == 1)
      keys = w;
    else if (t == 2)
      keys = static_cast<size_t>(w) * w * w;
    else
      keys = static_cast<size_t>(w) * w * w * ipow(w, t - 1);
    p.tables[t - 1].resize(keys * w);
    for (size_t k = 0; k < keys; ++k) {
      int xt;
      if (t == 1)
        xt = static_cast<int>(k);
      else if (t == 2)
        xt = static_cast<int>(k / (w * 1) / w);  // k = (x2*w + x1)*w + y1
      else
        xt = static_cast<int>(k / (static_cast<size_t>(w) * w * ipow(w, t - 1)));
      for (int y = 0; y < w; ++y) p.tables[t - 1][k * w + y] = a.p(y, xt, 0);
    }
  }
  return p;
}

MthOrderReport mth_order_check(const Order2Chain& chain, const Order2Policy& policy, int n,
                               const DistortionMatrix& d) {
  int w = chain.w;
  check_budget(w, n);
  int64_t nn = ipow(w, n);
  JointTable joint;
  joint.w = w;
  joint.n = n;
  joint.p.assign(static_cast<size_t>(nn) * nn, 0.0);
  for (int64_t ix = 0; ix < nn; ++ix) {
    double px = chain.init[(ix / ipow(w, n - 1)) % w];
    for (int t = 2; t <= n && px > 0.0; ++t) {
      int xt = static_cast<int>((ix / ipow(w, n - t)) % w);
      int xp = static_cast<int>((ix / ipow(w, n - t + 1)) % w);
      if (t == 2) {
        px *= chain.second[static_cast<size_t>(xt) * w + xp];
      } else {
        int xpp = static_cast<int>((ix / ipow(w, n - t + 2)) % w);
        px *= chain.trans[(static_cast<size_t>(xt) * w + xp) * w + xpp];
      }
    }
    if (px == 0.0) continue;
    for (int64_t iy = 0; iy < nn; ++iy) {
      double p = px;
      for (int t = 1; t <= n && p > 0.0; ++t) {
        int y = static_cast<int>((iy / ipow(w, n - t)) % w);
        int xt = static_cast<int>((ix / ipow(w, n - t)) % w);
        if (t == 1) {
          p *= policy.tables[0][static_cast<size_t>(xt) * w + y];
        } else if (t == 2) {
          int xp = static_cast<int>((ix / ipow(w, n - 1)) % w);
          int y1 = static_cast<int>((iy / ipow(w, n - 1)) % w);
          p *= policy.tables[1][((static_cast<size_t>(xt) * w + xp) * w + y1) * w + y];
        } else {
          int xp = static_cast<int>((ix / ipow(w, n - t + 1)) % w);
          int xpp = static_cast<int>((ix / ipow(w, n - t + 2)) % w);
          int64_t iyprev = iy / ipow(w, n - t + 1);
          p *= policy.tables[t - 1]
                   [(((static_cast<size_t>(xt) * w + xp) * w + xpp) * ipow(w, t - 1) + iyprev) *
                        w + y];
        }
      }
      joint.p[static_cast<size_t>(ix) * nn + iy] = p;
    }
  }

  MthOrderReport rep;
  rep.total_mi = mutual_information(joint);

  // terms I(last min(t, 3) true symbols; Y_t | Y^{t-1})
  for (int t = 1; t <= n; ++t) {
    int k = std::min(t, 3);
    int64_t wk = ipow(w, k), wt = ipow(w, t), wt1 = ipow(w, t - 1);
    std::vector<double> a(static_cast<size_t>(wk) * wt, 0.0);
    std::vector<double> b(static_cast<size_t>(wk) * wt1, 0.0);
    std::vector<double> c(wt, 0.0), dd(wt1, 0.0);
    int64_t shift = ipow(w, n - t);
    for (int64_t ix = 0; ix < nn; ++ix) {
      int64_t xk = (ix / shift) % wk;  // last k symbols of x^t
      for (int64_t iy = 0; iy < nn; ++iy) {
        double v = joint.p[static_cast<size_t>(ix) * nn + iy];
        if (v == 0.0) continue;
        int64_t ya = iy / shift;
        a[static_cast<size_t>(xk) * wt + ya] += v;
        b[static_cast<size_t>(xk) * wt1 + ya / w] += v;
        c[ya] += v;
        dd[ya / w] += v;
      }
    }
    double term = 0.0;
    for (int64_t xk = 0; xk < wk; ++xk)
      for (int64_t ya = 0; ya < wt; ++ya) {
        double v = a[static_cast<size_t>(xk) * wt + ya];
        if (v == 0.0) continue;
        term += v * std::log((v / b[static_cast<size_t>(xk) * wt1 + ya / w]) /
                             (c[ya] / dd[ya / w]));
      }
    rep.term_sum += term;
  }
  rep.mi_residual = std::abs(rep.total_mi - rep.term_sum);
  rep.dist_joint = expected_distortion_joint(joint, d);
  rep.dist_stepwise = expected_distortion_stepwise(joint, d);
  rep.dist_residual = std::abs(rep.dist_joint - rep.dist_stepwise);
  return rep;
}

// ---- tiny-instance brute force ----

namespace {

// One-step term under a weighted prior over (xt, xp): conditional MI plus
// lambda times expected distortion.
struct StepEval {
  double mi = 0.0;
  double dist = 0.0;
};

StepEval eval_step(const std::vector<double>& prior /* w*w, (xt, xp) */,
                   const std::vector<double>& channel /* per (xt, xp): P(y=0) */,
                   const DistortionMatrix& d, int w) {
  // marginal over y
  double m0 = 0.0, mass = 0.0;
  for (int xt = 0; xt < w; ++xt)
    for (int xp = 0; xp < w; ++xp) {
      double pr = prior[static_cast<size_t>(xt) * w + xp];
      m0 += pr * channel[static_cast<size_t>(xt) * w + xp];
      mass += pr;
    }
  double m[2] = {m0, mass - m0};
  StepEval ev;
  for (int xt = 0; xt < w; ++xt)
    for (int xp = 0; xp < w; ++xp) {
      double pr = prior[static_cast<size_t>(xt) * w + xp];
      if (pr == 0.0) continue;
      double p0 = channel[static_cast<size_t>(xt) * w + xp];
      double py[2] = {p0, 1.0 - p0};
      for (int y = 0; y < 2; ++y) {
        if (py[y] > 0.0 && m[y] > 0.0) ev.mi += pr * py[y] * std::log(py[y] * mass / m[y]);
        ev.dist += pr * py[y] * d.d(xt, y);
      }
    }
  // normalize by total prior mass (callers pass conditional priors)
  if (mass > 0.0) {
    ev.mi /= mass;
    ev.dist /= mass;
  }
  return ev;
}

}  // namespace

BruteForceResult exhaustive_best_simplified(const TransitionMatrix& chain,
                                            const InitialDistribution& init,
                                            const DistortionMatrix& d, int n,
                                            const BruteForceOptions& opt) {
  const int w = chain.size();
  if (w != 2 || n < 1 || n > 2)
    throw std::length_error("exhaustive_best_simplified: only |W|=2, n<=2 is enumerable");
  const int g = opt.grid;
  const bool idc = opt.mode == ConstraintMode::IDC;

  // candidate P(y=0) values for a slice keyed by true state xt
  auto candidates = [&](int xt) {
    std::vector<double> cs;
    bool y0_ok = !idc || d.d(xt, 0) <= opt.dhat;
    bool y1_ok = !idc || d.d(xt, 1) <= opt.dhat;
    if (y0_ok && y1_ok) {
      for (int k = 0; k <= g; ++k) cs.push_back(static_cast<double>(k) / g);
    } else if (y0_ok) {
      cs.push_back(1.0);
    } else {
      cs.push_back(0.0);
    }
    return cs;
  };

  auto step_cost = [&](const StepEval& ev) {
    return idc ? ev.mi : ev.mi + opt.lambda * (ev.dist - opt.dbar);
  };

  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();

  auto c0 = candidates(0), c1 = candidates(1);
  for (double q1a : c0)
    for (double q1b : c1) {
      // t=1: prior over x1 only (xp dimension collapsed to xp=0)
      std::vector<double> prior1(4, 0.0);
      prior1[0 * 2 + 0] = init.probs[0];
      prior1[1 * 2 + 0] = init.probs[1];
      std::vector<double> ch1(4, 0.0);
      ch1[0 * 2 + 0] = q1a;
      ch1[1 * 2 + 0] = q1b;
      StepEval ev1 = eval_step(prior1, ch1, d, 2);
      double cost1 = step_cost(ev1);

      if (n == 1) {
        if (cost1 < best.cost) {
          best.cost = cost1;
          best.leakage = ev1.mi;
          best.distortion = ev1.dist;
          best.q1 = {q1a, 1 - q1a, q1b, 1 - q1b};
          best.q2.clear();
        }
        continue;
      }

      // P(x1, y1)
      double pxy[2][2];
      pxy[0][0] = init.probs[0] * q1a;
      pxy[0][1] = init.probs[0] * (1 - q1a);
      pxy[1][0] = init.probs[1] * q1b;
      pxy[1][1] = init.probs[1] * (1 - q1b);

      double total2_cost = 0.0, total2_mi = 0.0, total2_dist = 0.0;
      std::vector<double> best_q2(16, 0.5);
      bool feasible = true;
      for (int y1 = 0; y1 < 2 && feasible; ++y1) {
        double py1 = pxy[0][y1] + pxy[1][y1];
        if (py1 == 0.0) continue;
        // conditional prior over (x2, x1) given y1
        std::vector<double> prior(4, 0.0);
        for (int x1 = 0; x1 < 2; ++x1)
          for (int x2 = 0; x2 < 2; ++x2)
            prior[static_cast<size_t>(x2) * 2 + x1] = pxy[x1][y1] / py1 * chain.p(x2, x1);
        auto cs0 = candidates(0), cs1 = candidates(1);
        double bc = std::numeric_limits<double>::infinity();
        StepEval bev;
        double bq[4] = {0, 0, 0, 0};
        std::vector<double> ch(4);
        for (double a00 : cs0)
          for (double a01 : cs0)
            for (double a10 : cs1)
              for (double a11 : cs1) {
                ch[0 * 2 + 0] = a00;  // (x2=0, x1=0)
                ch[0 * 2 + 1] = a01;
                ch[1 * 2 + 0] = a10;
                ch[1 * 2 + 1] = a11;
                StepEval ev = eval_step(prior, ch, d, 2);
                double c = step_cost(ev);
                if (c < bc) {
                  bc = c;
                  bev = ev;
                  bq[0] = a00;
                  bq[1] = a01;
                  bq[2] = a10;
                  bq[3] = a11;
                }
              }
        total2_cost += py1 * bc;
        total2_mi += py1 * bev.mi;
        total2_dist += py1 * bev.dist;
        for (int x2 = 0; x2 < 2; ++x2)
          for (int x1 = 0; x1 < 2; ++x1) {
            double p0 = bq[x2 * 2 + x1];
            size_t base = ((static_cast<size_t>(x2) * 2 + x1) * 2 + y1) * 2;
            best_q2[base + 0] = p0;
            best_q2[base + 1] = 1 - p0;
          }
      }
      double cost = (cost1 + total2_cost) / 2.0;
      if (cost < best.cost) {
        best.cost = cost;
        best.leakage = (ev1.mi + total2_mi) / 2.0;
        best.distortion = (ev1.dist + total2_dist) / 2.0;
        best.q1 = {q1a, 1 - q1a, q1b, 1 - q1b};
        best.q2 = best_q2;
      }
    }
  return best;
}

}  // namespace put
