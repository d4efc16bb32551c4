// End-to-end acceptance suite. Each criterion prints a single PASS/FAIL line;
// the process exits 0 only when every criterion passes. Heavy training
// artifacts (the 4x4-grid runs) are produced once and shared between the
// figure-shape, convergence and adversary criteria.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "put/a2c.hpp"
#include "put/adversary.hpp"
#include "put/belief.hpp"
#include "put/myopic.hpp"
#include "put/neural.hpp"
#include "put/oracle.hpp"

namespace fs = std::filesystem;
using namespace put;

namespace {

double now_s() {
  static auto t0 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string details;
};

bool g_all_pass = true;

void report(int k, const Outcome& o) {
  std::printf("CRITERION %d: %s (%s)\n", k, o.pass ? "PASS" : "FAIL", o.details.c_str());
  std::fflush(stdout);
  if (!o.pass) g_all_pass = false;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

TransitionMatrix random_chain(int w, Rng& rng) {
  TransitionMatrix m{StateSpace::make(w), Matrix(w, w)};
  for (int j = 0; j < w; ++j) {
    double sum = 0.0;
    for (int i = 0; i < w; ++i) sum += (m.probs(i, j) = 0.05 + rng.uniform());
    for (int i = 0; i < w; ++i) m.probs(i, j) /= sum;
  }
  return m;
}

InitialDistribution random_init(int w, Rng& rng) {
  InitialDistribution init;
  init.probs.resize(w);
  double sum = 0.0;
  for (double& p : init.probs) sum += (p = 0.05 + rng.uniform());
  for (double& p : init.probs) p /= sum;
  return init;
}

ActionKernel random_kernel(int w, ActionMode mode, Rng& rng) {
  ActionKernel a = ActionKernel::uniform(w, mode);
  for (int s = 0; s < a.slice_count(); ++s) {
    auto slice = a.slice(s / (mode == ActionMode::PairConditioned ? w : 1),
                         mode == ActionMode::PairConditioned ? s % w : 0);
    double sum = 0.0;
    for (double& p : slice) sum += (p = 0.05 + rng.uniform());
    for (double& p : slice) p /= sum;
  }
  return a;
}

DistortionMatrix random_distortion(int w, Rng& rng) {
  DistortionMatrix d{StateSpace::make(w), Matrix(w, w), "grid-steps"};
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < w; ++y) d.values(x, y) = x == y ? 0.0 : 0.2 + 2.0 * rng.uniform();
  return d;
}

DistortionMatrix hamming(int w) {
  DistortionMatrix d{StateSpace::make(w), Matrix(w, w), "grid-steps"};
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < w; ++y) d.values(x, y) = x == y ? 0.0 : 1.0;
  return d;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion1() {
  double start = now_s();
  Rng rng(101);
  int w = 3, n = 4;
  auto d = random_distortion(w, rng);
  double worst_slack = 1e300, worst_dev = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto chain = random_chain(w, rng);
    auto init = random_init(w, rng);
    auto policy = HistoryPolicy::random(w, n, rng);
    auto joint = enumerate_joint_history(policy, chain, init);
    double mi = mutual_information(joint);
    auto terms = pairwise_terms(joint);
    double term_sum = 0.0;
    for (double t : terms) term_sum += t;
    worst_slack = std::min(worst_slack, mi - term_sum);

    auto simp = simplify_policy(policy, chain, init);
    auto sjoint = enumerate_joint_simplified(simp, chain, init);
    for (int t = 1; t <= n; ++t) {
      auto a = pair_history_marginal(joint, t);
      auto b = pair_history_marginal(sjoint, t);
      for (size_t i = 0; i < a.size(); ++i)
        worst_dev = std::max(worst_dev, std::abs(a[i] - b[i]));
    }
    double smi = mutual_information(sjoint);
    auto sterms = pairwise_terms(sjoint);
    double ssum = 0.0;
    for (double t : sterms) ssum += t;
    // in the simplified class the pairwise sum is the total MI, and the
    // pairwise terms only depend on the preserved marginals
    worst_dev = std::max(worst_dev, std::abs(smi - ssum));
    worst_dev = std::max(worst_dev, std::abs(smi - term_sum));
    worst_dev = std::max(worst_dev, std::abs(expected_distortion_joint(joint, d) -
                                             expected_distortion_joint(sjoint, d)));
  }
  double el = now_s() - start;
  bool pass = worst_slack >= -1e-9 && worst_dev <= 1e-9 && el < 60.0;
  return {pass, fmt("100 policies |W|=3 n=4: min slack %.2e, max deviation %.2e, %.1fs",
                    worst_slack, worst_dev, el)};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
  Rng rng(202);
  double worst = 0.0;
  int count = 0;
  for (int w : {2, 3})
    for (int n : {2, 3, 4})
      for (int trial = 0; trial < 8; ++trial) {
        auto chain = random_chain(w, rng);
        auto init = random_init(w, rng);
        auto policy = HistoryPolicy::random(w, n, rng);
        auto joint = enumerate_joint_history(policy, chain, init);
        auto terms = chain_rule_terms(joint);
        double sum = 0.0;
        for (double t : terms) sum += t;
        worst = std::max(worst, std::abs(sum - mutual_information(joint)));
        ++count;
      }
  return {worst <= 1e-9, fmt("%d joints, max |sum - MI| = %.2e", count, worst)};
}

// ---------------------------------------------------------------- criterion 3

// recursively walk every positive-probability release prefix, comparing the
// recursive belief to the enumerated posterior
void walk_beliefs(const JointTable& joint, const TransitionMatrix& chain, const ActionKernel& a,
                  const Belief& beta, int t, int64_t iy, int n, double* worst) {
  if (t >= 1) {
    auto post = posterior_from_joint(joint, t, iy);
    // the recursion carries P(X_t | y^t) as the next conditioning belief
    for (int x = 0; x < chain.size(); ++x)
      *worst = std::max(*worst, std::abs(post[x] - beta[x]));
  }
  if (t == n) return;
  auto marg = release_marginal(beta, chain, a);
  for (int y = 0; y < chain.size(); ++y) {
    if (marg[y] <= 1e-12) continue;
    auto next = belief_update(beta, chain, a, y);
    walk_beliefs(joint, chain, a, next, t + 1, iy * chain.size() + y, n, worst);
  }
}

// Lift a pair-conditioned kernel onto the oracle's policy class. The
// environment draws x0 from init and x1 from the chain, so the enumerated
// joint starts at the pushed-forward distribution of x1, and the t=1 slice
// marginalizes x0 out of the kernel; the joint of (x1..xn, y1..yn) is
// unchanged because later steps never see x0 again.
SimplifiedPolicy simplified_from_pair(const ActionKernel& a, const TransitionMatrix& chain,
                                      const InitialDistribution& init,
                                      InitialDistribution* init1, int n) {
  int w = a.w;
  init1->probs.assign(w, 0.0);
  for (int x1 = 0; x1 < w; ++x1)
    for (int x0 = 0; x0 < w; ++x0) init1->probs[x1] += init.probs[x0] * chain.p(x1, x0);
  SimplifiedPolicy p;
  p.w = w;
  p.n = n;
  p.tables.resize(n);
  p.tables[0].assign(static_cast<size_t>(w) * w, 0.0);
  for (int x1 = 0; x1 < w; ++x1) {
    if (init1->probs[x1] <= 0.0) {
      for (int y = 0; y < w; ++y) p.tables[0][static_cast<size_t>(x1) * w + y] = 1.0 / w;
      continue;
    }
    for (int x0 = 0; x0 < w; ++x0) {
      double post = init.probs[x0] * chain.p(x1, x0) / init1->probs[x1];
      for (int y = 0; y < w; ++y)
        p.tables[0][static_cast<size_t>(x1) * w + y] += post * a.p(y, x1, x0);
    }
  }
  int64_t hist = 1;
  for (int t = 2; t <= n; ++t) {
    hist *= w;  // w^(t-1) release histories
    p.tables[t - 1].resize(static_cast<size_t>(w) * w * hist * w);
    for (int xt = 0; xt < w; ++xt)
      for (int xp = 0; xp < w; ++xp)
        for (int64_t iy = 0; iy < hist; ++iy)
          for (int y = 0; y < w; ++y)
            p.tables[t - 1][((static_cast<size_t>(xt) * w + xp) * hist + iy) * w + y] =
                a.p(y, xt, xp);
  }
  return p;
}

Outcome criterion3() {
  Rng rng(303);
  double worst = 0.0;
  int count = 0;
  auto run = [&](int w, int n, int trials) {
    for (int trial = 0; trial < trials; ++trial) {
      auto chain = random_chain(w, rng);
      auto init = random_init(w, rng);
      auto a = random_kernel(w, ActionMode::PairConditioned, rng);
      InitialDistribution init1;
      auto joint =
          enumerate_joint_simplified(simplified_from_pair(a, chain, init, &init1, n), chain, init1);
      walk_beliefs(joint, chain, a, init.probs, 0, 0, n, &worst);
      ++count;
    }
  };
  run(2, 5, 15);
  run(3, 4, 15);
  run(3, 5, 8);
  run(4, 3, 10);
  run(4, 5, 2);
  return {worst <= 1e-9, fmt("%d policies up to |W|=4, n=5, max |belief - posterior| = %.2e",
                             count, worst)};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  Rng rng(404);
  auto chain = make_q1_chain(3, 3, {1, 6, 5, 4, 3});
  auto init = InitialDistribution::uniform(9);
  auto d = manhattan_grid(3, 3);
  auto a = random_kernel(9, ActionMode::PairConditioned, rng);
  EnvConfig cfg;
  cfg.lambda = 0.0;

  // realized per-step log-ratio leakage vs the exact per-belief expectation
  Environment env(chain, d, cfg, init.probs, rng);
  const int episodes = 1000, n = 100;
  double mc_sum = 0.0, mc_sq = 0.0, exact_sum = 0.0;
  int64_t steps = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(rng);
    for (int t = 0; t < n; ++t) {
      Belief before = env.belief();
      int xp = env.true_prev();
      auto exp_t = env.step(a, rng);
      double realized = per_step_leakage(a, before, chain, exp_t.x_cur, xp, exp_t.y);
      mc_sum += realized;
      mc_sq += realized * realized;
      exact_sum += exp_t.cost.leakage;
      ++steps;
    }
  }
  double mc_mean = mc_sum / steps;
  double exact_mean = exact_sum / steps;
  double se = std::sqrt((mc_sq / steps - mc_mean * mc_mean) / steps);
  bool mc_ok = std::abs(mc_mean - exact_mean) <= 3.0 * se;

  // n = 1: the single-step leakage equals the enumerated mutual information.
  // State-conditioned kernel: with y1 independent of x0 given x1, the pair
  // leakage I(X1, X0; Y1) collapses to the oracle's I(X1; Y1).
  auto a1 = random_kernel(9, ActionMode::StateConditioned, rng);
  double one_step = avg_leakage(init.probs, a1, chain);
  InitialDistribution init1;
  init1.probs.assign(9, 0.0);
  for (int x1 = 0; x1 < 9; ++x1)
    for (int x0 = 0; x0 < 9; ++x0) init1.probs[x1] += init.probs[x0] * chain.p(x1, x0);
  auto joint1 = enumerate_joint_simplified(SimplifiedPolicy::from_kernel(a1, 1), chain, init1);
  double mi1 = mutual_information(joint1);
  bool exact_ok = std::abs(one_step - mi1) <= 1e-9;
  return {mc_ok && exact_ok,
          fmt("%lld steps: |mc - exact| = %.2e vs 3SE = %.2e; n=1 |L - MI| = %.2e",
              static_cast<long long>(steps), std::abs(mc_mean - exact_mean), 3.0 * se,
              std::abs(one_step - mi1))};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion5() {
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(5000 + seed);
    int in = 2 + static_cast<int>(rng.next_u64() % 3);
    int hidden = 3 + static_cast<int>(rng.next_u64() % 3);
    int out = 2 + static_cast<int>(rng.next_u64() % 3);
    auto mode = std::array{MLP::Output::Linear, MLP::Output::Tanh,
                           MLP::Output::Softplus}[seed % 3];
    auto net = MLP::make(in, hidden, out, mode, rng);
    std::vector<double> x(in), dout(out);
    for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
    for (double& v : dout) v = 2.0 * rng.uniform() - 1.0;
    ForwardCache cache;
    forward(net, x, &cache);
    auto g = backward(net, cache, dout);
    auto loss = [&](const MLP& m) {
      auto o = forward(m, x);
      double s = 0.0;
      for (int i = 0; i < out; ++i) s += dout[i] * o[i];
      return s;
    };
    const double h = 1e-6;
    for (int probe = 0; probe < 12; ++probe) {
      int l = static_cast<int>(rng.next_u64() % 3);
      size_t i = rng.next_u64() % net.W[l].data.size();
      MLP plus = net, minus = net;
      plus.W[l].data[i] += h;
      minus.W[l].data[i] -= h;
      double fd = (loss(plus) - loss(minus)) / (2.0 * h);
      double rel = std::abs(fd - g.W[l].data[i]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
    for (int probe = 0; probe < 4; ++probe) {
      int l = static_cast<int>(rng.next_u64() % 3);
      size_t i = rng.next_u64() % net.b[l].size();
      MLP plus = net, minus = net;
      plus.b[l][i] += h;
      minus.b[l][i] -= h;
      double fd = (loss(plus) - loss(minus)) / (2.0 * h);
      double rel = std::abs(fd - g.b[l][i]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }

    // Dirichlet log-density gradient w.r.t. the concentrations
    int k = 2 + static_cast<int>(rng.next_u64() % 3);
    std::vector<double> alpha(k), xs(k);
    double sum = 0.0;
    for (double& v : alpha) v = 0.3 + 2.5 * rng.uniform();
    for (double& v : xs) sum += (v = 0.05 + rng.uniform());
    for (double& v : xs) v /= sum;
    auto ga = dirichlet_log_prob_grad(alpha, xs);
    for (int i = 0; i < k; ++i) {
      auto ap = alpha, am = alpha;
      ap[i] += h;
      am[i] -= h;
      double fd = (dirichlet_log_prob(ap, xs) - dirichlet_log_prob(am, xs)) / (2.0 * h);
      double rel = std::abs(fd - ga[i]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-4, fmt("50 seeds, max relative FD error = %.2e", worst)};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6() {
  // iid uniform binary source, Hamming distortion: R(D) = ln 2 - H_b(D)
  std::vector<double> prior = {0.25, 0.25, 0.25, 0.25};
  auto d = hamming(2);
  double worst_rd = 0.0, worst_excess = 0.0;
  for (double D : {0.05, 0.1, 0.2}) {
    auto fit = ba_fit_distortion(prior, d, D);
    double hb = -D * std::log(D) - (1.0 - D) * std::log(1.0 - D);
    worst_rd = std::max(worst_rd, std::abs(fit.ba.mi - (std::log(2.0) - hb)));
    worst_excess = std::max(worst_excess, fit.ba.distortion - D);
  }
  // monotonicity is asserted inside every iteration (logic_error on violation)
  bool monotone = true;
  try {
    for (double lam : {0.0, 0.5, 2.0, 8.0}) blahut_arimoto(prior, d, lam);
  } catch (const std::logic_error&) {
    monotone = false;
  }
  bool pass = worst_rd <= 1e-3 && worst_excess <= 1e-4 && monotone;
  return {pass, fmt("max |R(D) error| = %.2e, max budget excess = %.2e, monotone = %s",
                    worst_rd, worst_excess, monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  Rng rng(707);
  double worst = 0.0;
  auto d = hamming(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto chain = Order2Chain::random(2, rng);
    auto policy = Order2Policy::random(2, 3, rng);
    auto rep = mth_order_check(chain, policy, 3, d);
    worst = std::max(worst, std::abs(rep.mi_residual));
    worst = std::max(worst, std::abs(rep.dist_residual));
  }
  return {worst <= 1e-9, fmt("30 instances |W|=2 n=3, max residual = %.2e", worst)};
}

// ------------------------------------------------------- criteria 8, 9, 11(d)

struct HeavyRuns {
  // criterion 8 artifacts, shared with criteria 9 and 11(d)
  bool ready = false;
  double idc_leak[3][4] = {};  // [family q0,q1,q2][dhat 1..4]
  double q2_trained_L = 0.0, q2_trained_D = 0.0, q2_myopic_L = 0.0, q2_myopic_D = 0.0;
  double q0_trained_L = 0.0, q0_trained_D = 0.0, q0_myopic_L = 0.0, q0_myopic_D = 0.0;
  LearningCurve q0_curve;
  double elapsed = 0.0;
  TransitionMatrix q2;
  DistortionMatrix d44;
  InitialDistribution init16;
  std::optional<MyopicPlan> q2_plan;  // the dbar=1.0 baseline plan
  std::optional<MLP> q2_actor;
  double q2_alpha_floor = 0.3;
};

HeavyRuns g_heavy;

void build_heavy_runs() {
  double start = now_s();
  HeavyRuns& H = g_heavy;
  H.d44 = manhattan_grid(4, 4);
  H.init16 = InitialDistribution::uniform(16);
  TransitionMatrix chains[3] = {make_uniform_chain(StateSpace::make_grid(4, 4)),
                                make_q1_chain(4, 4, {1, 6, 5, 4, 3, 2, 1}),
                                make_q2_chain(4, 4, 1.0, 6.0)};
  H.q2 = chains[2];

  // 12 instantaneous-constraint runs: three chain families, four thresholds
  for (int fam = 0; fam < 3; ++fam)
    for (int k = 0; k < 4; ++k) {
      TrainConfig cfg;
      cfg.n = 300;
      cfg.episodes = 2000;
      cfg.hidden = 64;
      cfg.mode = ConstraintMode::IDC;
      cfg.dhat = 1.0 + k;
      cfg.lambda = 0.0;
      cfg.seed = 21;
      auto tr = train(cfg, chains[fam], H.init16, H.d44);
      EnvConfig env_cfg;
      env_cfg.mode = ConstraintMode::IDC;
      env_cfg.dhat = cfg.dhat;
      Rng erng(99);
      auto ev = evaluate_actor(tr.actor, cfg.action_mode, chains[fam], H.init16, H.d44,
                               env_cfg, 300, 100, erng);
      H.idc_leak[fam][k] = ev.avg_leakage;
    }

  // Average-constraint run on the correlated chain, pair-conditioned actor.
  // The actor is behavior-cloned from the myopic plan's channels and then
  // fine-tuned with A2C: per-step policy-gradient noise alone cannot build a
  // sharp 16^3-way kernel within the runtime budget, but it holds and refines
  // one. The high concentration floor keeps the clone's zero-probability
  // releases pinned in softplus's flat region, where update noise cannot
  // inflate them.
  {
    const int w = 16, out_dim = w * w * w;
    const double conc = 300.0, floor = H.q2_alpha_floor;
    H.q2_plan.emplace(H.q2, H.d44, H.init16, 1.0, 300);
    H.q2_myopic_L = H.q2_plan->expected_leakage();
    H.q2_myopic_D = H.q2_plan->expected_distortion();

    std::set<const MyopicPlan::Entry*> seen;
    std::vector<const MyopicPlan::Entry*> entries;
    for (int t = 1; t <= H.q2_plan->horizon(); ++t)
      for (int yp = 0; yp < (t == 1 ? 1 : w); ++yp)
        if (const auto* e = H.q2_plan->at(t, yp))
          if (seen.insert(e).second) entries.push_back(e);

    auto inv_softplus = [](double a) { return a > 30.0 ? a : std::log(std::expm1(a)); };
    auto target = [&](const MyopicPlan::Entry* e, std::vector<double>& t) {
      t.resize(out_dim);
      for (int i = 0; i < out_dim; ++i)
        t[i] = std::max(conc * e->fit.ba.channel[i] - floor, 0.0);
    };

    Rng irng(77);
    MLP actor = MLP::make(w, 64, out_dim, MLP::Output::Softplus, irng);
    for (double& v : actor.W.back().data) v *= 0.1;
    std::vector<double> tv;
    target(entries[0], tv);
    for (int i = 0; i < out_dim; ++i)
      actor.b.back()[i] = tv[i] > 0.05 ? inv_softplus(tv[i]) : -10.0;

    AdamState opt = AdamState::zeros_like(actor);
    std::vector<double> dout(out_dim);
    for (int epoch = 0; epoch < 200; ++epoch)
      for (const auto* e : entries) {
        ForwardCache cache;
        std::vector<double> o = forward(actor, e->prior_prev, &cache);
        target(e, tv);
        for (int i = 0; i < out_dim; ++i)
          dout[i] = (o[i] - tv[i]) / conc / static_cast<double>(entries.size());
        Gradients g = backward(actor, cache, dout);
        adam_step(opt, actor, g, 1e-2);
      }

    EnvConfig env_cfg;
    env_cfg.lambda = 1.0;
    env_cfg.dbar = 1.0;
    Rng crng0(99);
    double clone_cost = evaluate_actor(actor, ActionMode::PairConditioned, H.q2, H.init16,
                                       H.d44, env_cfg, 300, 60, crng0, floor)
                            .avg_cost;

    TrainConfig cfg;
    cfg.n = 300;
    cfg.episodes = 2000;
    cfg.hidden = 64;
    cfg.lambda = 1.0;
    cfg.dbar = 1.0;
    cfg.seed = 11;
    cfg.alpha_floor = floor;
    cfg.action_mode = ActionMode::PairConditioned;
    cfg.actor_init = std::make_shared<MLP>(std::move(actor));
    Rng crng(78);
    MLP critic = MLP::make(w, 64, 1, MLP::Output::Linear, crng);
    for (double& v : critic.W.back().data) v *= 0.1;
    critic.b.back()[0] = clone_cost / (1.0 - cfg.gamma);
    cfg.critic_init = std::make_shared<MLP>(std::move(critic));

    auto tr = train(cfg, H.q2, H.init16, H.d44);
    Rng erng(99);
    auto ev = evaluate_actor(tr.actor, cfg.action_mode, H.q2, H.init16, H.d44, env_cfg,
                             300, 100, erng, floor);
    H.q2_trained_L = ev.avg_leakage;
    H.q2_trained_D = ev.avg_distortion;
    H.q2_actor = std::move(tr.actor);
  }

  // average-constraint run on the uniform chain; its learning curve doubles
  // as the convergence-shape fixture (3000 episodes)
  {
    TrainConfig cfg;
    cfg.n = 300;
    cfg.episodes = 3000;
    cfg.hidden = 64;
    cfg.lambda = 1.0;
    cfg.dbar = 1.0;
    cfg.seed = 11;
    auto tr = train(cfg, chains[0], H.init16, H.d44);
    EnvConfig env_cfg;
    env_cfg.lambda = cfg.lambda;
    env_cfg.dbar = cfg.dbar;
    Rng erng(99);
    auto ev = evaluate_actor(tr.actor, cfg.action_mode, chains[0], H.init16, H.d44, env_cfg,
                             300, 100, erng);
    H.q0_trained_L = ev.avg_leakage;
    H.q0_trained_D = ev.avg_distortion;
    MyopicPlan plan(chains[0], H.d44, H.init16, ev.avg_distortion, 300);
    H.q0_myopic_L = plan.expected_leakage();
    H.q0_myopic_D = plan.expected_distortion();
    H.q0_curve = std::move(tr.curve);
  }
  H.elapsed = now_s() - start;
  H.ready = true;
}

Outcome criterion8() {
  build_heavy_runs();
  const HeavyRuns& H = g_heavy;
  bool mono = true, order = true;
  for (int fam = 0; fam < 3; ++fam)
    for (int k = 1; k < 4; ++k)
      mono = mono && H.idc_leak[fam][k] <= H.idc_leak[fam][k - 1] + 0.05;
  for (int k = 0; k < 4; ++k) {
    order = order && H.idc_leak[2][k] <= H.idc_leak[1][k] + 0.05;
    order = order && H.idc_leak[1][k] <= H.idc_leak[0][k] + 0.05;
  }
  bool adc_q2 = H.q2_trained_L <= H.q2_myopic_L + 0.05 &&
                std::abs(H.q2_trained_D - H.q2_myopic_D) <= 0.05;
  bool adc_q0 = std::abs(H.q0_trained_L - H.q0_myopic_L) <= 0.05 &&
                std::abs(H.q0_trained_D - H.q0_myopic_D) <= 0.05;
  bool budget = H.elapsed <= 2700.0;
  bool pass = mono && order && adc_q2 && adc_q0 && budget;
  return {pass,
          fmt("idc monotone=%s ordering=%s; q2 adc %.3f vs myopic %.3f @D=%.2f; "
              "q0 adc %.3f vs myopic %.3f @D=%.2f; %.0fs",
              mono ? "yes" : "no", order ? "yes" : "no", H.q2_trained_L, H.q2_myopic_L,
              H.q2_trained_D, H.q0_trained_L, H.q0_myopic_L, H.q0_trained_D, H.elapsed)};
}

Outcome criterion9() {
  const auto& c = g_heavy.q0_curve.avg_cost;
  if (c.size() < 3000) return {false, "convergence curve missing"};
  auto ma = [&](size_t end) {
    double s = 0.0;
    for (size_t i = end - 500; i < end; ++i) s += c[i];
    return s / 500.0;
  };
  double at2500 = ma(2500), final_v = ma(c.size());
  bool pass = std::abs(at2500 - final_v) <= 0.10 * std::abs(final_v);
  return {pass, fmt("moving avg at 2500 = %.4f, final = %.4f, rel gap = %.1f%%", at2500,
                    final_v, 100.0 * std::abs(at2500 - final_v) / std::abs(final_v))};
}

// --------------------------------------------------------------- criterion 10

Outcome criterion10() {
  auto chain = make_uniform_chain(StateSpace::make(2));
  Matrix m(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  DistortionMatrix d{StateSpace::make(2), m, "grid-steps"};
  auto init = InitialDistribution::uniform(2);
  BruteForceOptions opt;
  opt.lambda = 1.0;
  opt.dbar = 0.25;
  auto brute = exhaustive_best_simplified(chain, init, d, 2, opt);

  TrainConfig cfg;
  cfg.n = 2;
  cfg.episodes = 2000;
  cfg.hidden = 16;
  cfg.lambda = 1.0;
  cfg.dbar = 0.25;
  cfg.actor_lr = 1e-3;
  cfg.critic_lr = 3e-3;
  cfg.seed = 31;
  auto tr = train(cfg, chain, init, d);
  EnvConfig env_cfg;
  env_cfg.lambda = cfg.lambda;
  env_cfg.dbar = cfg.dbar;
  Rng erng(99);
  auto ev = evaluate_actor(tr.actor, cfg.action_mode, chain, init, d, env_cfg, 2, 2000, erng);
  double gap = std::abs(ev.avg_cost - brute.cost);
  return {gap <= 0.02, fmt("trained cost %.4f vs grid optimum %.4f, gap %.4f", ev.avg_cost,
                           brute.cost, gap)};
}

// --------------------------------------------------------------- criterion 11

Outcome criterion11() {
  if (!g_heavy.ready) return {false, "heavy artifacts missing"};
  auto chain = make_q1_chain(3, 3, {1, 6, 5, 4, 3});
  auto init = InitialDistribution::uniform(9);
  auto d = manhattan_grid(3, 3);
  int n = 150;

  std::vector<AdversaryPolicy> pols;
  {
    AdversaryPolicy p;
    p.name = "truthful";
    p.constraint_value = 0.0;
    EnvConfig ec;
    ec.lambda = 0.0;
    auto kernel = ActionKernel::truthful(9, ActionMode::StateConditioned);
    Rng lrng(1);
    p.avg_leakage = evaluate_policy([&](const Belief&, Rng&) { return kernel; }, chain, init,
                                    d, ec, n, 5, lrng)
                        .avg_leakage;
    p.sample = [=](int rollouts, Rng& rng) {
      EnvConfig ec2;
      ec2.lambda = 0.0;
      return policy_traces([&](const Belief&, Rng&) { return kernel; }, chain, init, d, ec2, n,
                           rollouts, rng);
    };
    pols.push_back(std::move(p));
  }
  std::map<std::string, std::vector<double>> family_leak;
  std::vector<std::optional<MyopicPlan>> plans;
  plans.reserve(3);  // sample lambdas keep pointers into the vector
  for (double dbar : {0.5, 1.0, 1.5}) {
    plans.emplace_back(std::in_place, chain, d, init, dbar, n);
    const MyopicPlan* plan = &*plans.back();
    AdversaryPolicy p;
    p.name = fmt("myopic-%.1f", dbar);
    p.constraint_value = dbar;
    p.avg_leakage = plan->expected_leakage();
    p.sample = [plan](int rollouts, Rng& rng) { return myopic_traces(*plan, rollouts, rng); };
    family_leak["myopic"].push_back(p.avg_leakage);
    pols.push_back(std::move(p));
  }
  Rng krng(4);
  for (double dhat : {1.0, 2.0}) {
    auto masked = apply_idc_mask(random_kernel(9, ActionMode::StateConditioned, krng), d, dhat);
    EnvConfig ec;
    ec.mode = ConstraintMode::IDC;
    ec.dhat = dhat;
    AdversaryPolicy p;
    p.name = fmt("idc-%.0f", dhat);
    p.constraint_value = dhat;
    Rng lrng(2);
    p.avg_leakage =
        evaluate_policy([&, masked](const Belief&, Rng&) { return masked; }, chain, init, d,
                        ec, n, 40, lrng)
            .avg_leakage;
    p.sample = [=](int rollouts, Rng& rng) {
      EnvConfig ec2;
      ec2.mode = ConstraintMode::IDC;
      ec2.dhat = dhat;
      return policy_traces([&, masked](const Belief&, Rng&) { return masked; }, chain, init,
                           d, ec2, n, rollouts, rng);
    };
    family_leak["idc"].push_back(p.avg_leakage);
    pols.push_back(std::move(p));
  }

  Rng arng(1111);
  auto rows = compare_policies(pols, 9, {1}, 120, 0.1, arng);
  double ce_truthful = rows[0].ce[0];

  // (a) every distorted policy with constraint >= 1 beats the truthful rows
  bool a_ok = true;
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].constraint_value >= 1.0) a_ok = a_ok && ce_truthful < rows[i].ce[0];

  // (b) within each family, higher leakage means lower cross-entropy
  bool b_ok = true;
  auto family_rows = [&](const std::string& prefix) {
    std::vector<const AdversaryRow*> out;
    for (const auto& r : rows)
      if (r.policy.rfind(prefix, 0) == 0) out.push_back(&r);
    return out;
  };
  for (const char* famname : {"myopic-", "idc-"}) {
    auto fam = family_rows(famname);
    for (size_t i = 0; i < fam.size(); ++i)
      for (size_t j = 0; j < fam.size(); ++j)
        if (fam[i]->avg_leakage > fam[j]->avg_leakage + 1e-6)
          b_ok = b_ok && fam[i]->ce[0] < fam[j]->ce[0];
  }

  // (c) longer adversary memory never hurts: paired over 20 seeds on a
  // strongly periodic source released through a fixed noisy channel
  auto cyc = make_q2_chain(2, 2, 0.2, 12.0);
  auto d22 = manhattan_grid(2, 2);
  auto init4 = InitialDistribution::uniform(4);
  ActionKernel noisy = ActionKernel::uniform(4, ActionMode::StateConditioned);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) noisy.probs[static_cast<size_t>(x) * 4 + y] = x == y ? 0.7 : 0.1;
  double diff_sum = 0.0;
  int helped = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng trng(3000 + seed);
    EnvConfig ec;
    ec.lambda = 0.0;
    auto traces = policy_traces([&](const Belief&, Rng&) { return noisy; }, cyc, init4, d22,
                                ec, 120, 60, trng);
    TraceSet fit_set, test_set;
    for (size_t i = 0; i < traces.truth.size(); ++i) {
      auto& dst = i < traces.truth.size() * 4 / 5 ? fit_set : test_set;
      dst.truth.push_back(traces.truth[i]);
      dst.released.push_back(traces.released[i]);
    }
    double ce1 = MGramPredictor::fit(fit_set, 4, 1, 0.1).cross_entropy(test_set);
    double ce5 = MGramPredictor::fit(fit_set, 4, 5, 0.1).cross_entropy(test_set);
    diff_sum += ce5 - ce1;
    helped += ce5 <= ce1 ? 1 : 0;
  }
  bool c_ok = diff_sum / 20.0 <= 0.0;

  // (d) the trained average-constraint policy is at least as hard to predict
  // as the myopic baseline at matched distortion
  const HeavyRuns& H = g_heavy;
  EnvConfig ec_adc;
  ec_adc.lambda = 1.0;
  ec_adc.dbar = 1.0;
  auto trained_policy = frozen_actor_policy(*H.q2_actor, ActionMode::PairConditioned, H.d44,
                                            ec_adc, H.q2_alpha_floor);
  std::vector<AdversaryPolicy> duel(2);
  duel[0].name = "trained";
  duel[0].sample = [&](int rollouts, Rng& rng) {
    return policy_traces(trained_policy, H.q2, H.init16, H.d44, ec_adc, 300, rollouts, rng);
  };
  duel[1].name = "myopic";
  duel[1].sample = [&](int rollouts, Rng& rng) {
    return myopic_traces(*H.q2_plan, rollouts, rng);
  };
  Rng drng(2222);
  auto duel_rows = compare_policies(duel, 16, {1}, 120, 0.1, drng);
  bool d_ok = duel_rows[0].ce[0] >= duel_rows[1].ce[0];

  bool pass = a_ok && b_ok && c_ok && d_ok;
  return {pass, fmt("truthful CE %.3f lowest=%s; family monotone=%s; "
                    "m5<=m1 mean diff %.4f (%d/20); trained CE %.3f vs myopic %.3f",
                    ce_truthful, a_ok ? "yes" : "no", b_ok ? "yes" : "no", diff_sum / 20.0,
                    helped, duel_rows[0].ce[0], duel_rows[1].ce[0])};
}

// --------------------------------------------------------------- criterion 12

std::string run_cli(const std::string& args, int* exit_code) {
  std::string cmd = "cd " PUT_SOURCE_DIR " && " PUT_CLI_PATH " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  if (!pipe) {
    *exit_code = -1;
    return out;
  }
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, got);
  int status = pclose(pipe);
  *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion12() {
  fs::path out1 = fs::temp_directory_path() / "put_accept_geo1";
  fs::path out2 = fs::temp_directory_path() / "put_accept_geo2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  int rc1 = 0, rc2 = 0;
  run_cli("geolife --config configs/geolife.cfg --out " + out1.string(), &rc1);
  run_cli("geolife --config configs/geolife.cfg --out " + out2.string(), &rc2);
  if (rc1 != 0 || rc2 != 0) return {false, fmt("cli exit codes %d / %d", rc1, rc2)};
  std::string report = slurp(out1 / "report.txt");
  bool clusters_ok = report.find("clusters=16") != std::string::npos;
  bool identical = true;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    ++files;
    identical = identical && slurp(entry.path()) == slurp(out2 / entry.path().filename());
  }
  fs::remove_all(out1);
  fs::remove_all(out2);
  return {clusters_ok && identical && files > 0,
          fmt("16 clusters = %s, %d files byte-identical = %s", clusters_ok ? "yes" : "no",
              files, identical ? "yes" : "no")};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, fmt("exception: %s", e.what())};
  }
}

}  // namespace

int main() {
  now_s();
  report(1, guarded(criterion1));
  report(2, guarded(criterion2));
  report(3, guarded(criterion3));
  report(4, guarded(criterion4));
  report(5, guarded(criterion5));
  report(6, guarded(criterion6));
  report(7, guarded(criterion7));
  report(8, guarded(criterion8));
  report(9, guarded(criterion9));
  report(10, guarded(criterion10));
  report(11, guarded(criterion11));
  report(12, guarded(criterion12));
  std::printf("acceptance total: %.0fs, %s\n", now_s(), g_all_pass ? "all pass" : "FAILURES");
  return g_all_pass ? 0 : 1;
}
