#include "put/a2c.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "put/util.hpp"

namespace put {

void TrainConfig::validate() const {
  if (n < 1) throw std::invalid_argument("TrainConfig: n must be >= 1");
  if (episodes < 1) throw std::invalid_argument("TrainConfig: episodes must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("TrainConfig: gamma must lie in (0, 1)");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  if (hidden < 1) throw std::invalid_argument("TrainConfig: hidden width must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
}

static int actor_output_dim(int w, ActionMode mode) {
  return mode == ActionMode::StateConditioned ? w * w : w * w * w;
}

KernelSample actor_to_kernel(const MLP& actor, const Belief& beta, ActionMode mode, Rng& rng,
                             double alpha_floor) {
  int w = static_cast<int>(beta.size());
  KernelSample ks;
  std::vector<double> out = forward(actor, beta, &ks.cache);
  if (static_cast<int>(out.size()) != actor_output_dim(w, mode))
    throw std::invalid_argument("actor_to_kernel: actor output size mismatch");
  ks.alpha = std::move(out);
  for (double& a : ks.alpha) a += alpha_floor;

  ks.kernel.mode = mode;
  ks.kernel.w = w;
  ks.kernel.probs.resize(ks.alpha.size());
  int slices = ks.kernel.slice_count();
  for (int s = 0; s < slices; ++s) {
    std::span<const double> alpha(&ks.alpha[static_cast<size_t>(s) * w],
                                  static_cast<size_t>(w));
    std::vector<double> x = dirichlet_sample(alpha, rng);
    ks.log_prob += dirichlet_log_prob(alpha, x);
    std::copy(x.begin(), x.end(), ks.kernel.probs.begin() + static_cast<size_t>(s) * w);
  }
  return ks;
}

ActionKernel actor_mean_kernel(const MLP& actor, const Belief& beta, ActionMode mode,
                               double alpha_floor) {
  int w = static_cast<int>(beta.size());
  std::vector<double> out = forward(actor, beta);
  if (static_cast<int>(out.size()) != actor_output_dim(w, mode))
    throw std::invalid_argument("actor_mean_kernel: actor output size mismatch");
  ActionKernel a;
  a.mode = mode;
  a.w = w;
  a.probs.resize(out.size());
  int slices = a.slice_count();
  for (int s = 0; s < slices; ++s) {
    double sum = 0.0;
    for (int y = 0; y < w; ++y) sum += out[static_cast<size_t>(s) * w + y] + alpha_floor;
    for (int y = 0; y < w; ++y)
      a.probs[static_cast<size_t>(s) * w + y] =
          (out[static_cast<size_t>(s) * w + y] + alpha_floor) / sum;
  }
  return a;
}

double critic_value(const MLP& critic, const Belief& beta) {
  return forward(critic, beta)[0];
}

double td_error(const MLP& critic, const ExperienceTuple& exp, double gamma) {
  return exp.cost.combined + gamma * critic_value(critic, exp.belief_after) -
         critic_value(critic, exp.belief_before);
}

TrainResult train(const TrainConfig& cfg, const TransitionMatrix& chain,
                  const InitialDistribution& init, const DistortionMatrix& d) {
  cfg.validate();
  chain.validate();
  init.validate();
  int w = chain.size();

  Rng root(cfg.seed);
  Rng env_rng = root.spawn(1);
  Rng actor_rng = root.spawn(2);
  Rng init_a = root.spawn(3);
  Rng init_c = root.spawn(4);

  TrainResult res;
  res.actor = MLP::make(w, cfg.hidden, actor_output_dim(w, cfg.action_mode),
                        MLP::Output::Softplus, init_a);
  res.critic = MLP::make(w, cfg.hidden, 1, MLP::Output::Linear, init_c);
  if (cfg.actor_init) {
    if (cfg.actor_init->sizes != res.actor.sizes ||
        cfg.actor_init->output != res.actor.output)
      throw std::invalid_argument("train: actor_init shape mismatch");
    res.actor = *cfg.actor_init;
  }
  if (cfg.critic_init) {
    if (cfg.critic_init->sizes != res.critic.sizes ||
        cfg.critic_init->output != res.critic.output)
      throw std::invalid_argument("train: critic_init shape mismatch");
    res.critic = *cfg.critic_init;
  }
  AdamState actor_opt = AdamState::zeros_like(res.actor);
  AdamState critic_opt = AdamState::zeros_like(res.critic);

  EnvConfig ecfg;
  ecfg.mode = cfg.mode;
  ecfg.lambda = cfg.lambda;
  ecfg.dbar = cfg.dbar;
  ecfg.dhat = cfg.dhat;
  Environment env(chain, d, ecfg, init.probs, env_rng);

  double divergence_ref = 0.0;
  int divergence_run = 0;
  std::vector<double> dout;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    env.reset(env_rng);
    Belief beta = env.belief();
    double cost_sum = 0.0, leak_sum = 0.0, dist_sum = 0.0;
    for (int t = 0; t < cfg.n; ++t) {
      KernelSample ks = actor_to_kernel(res.actor, beta, cfg.action_mode, actor_rng,
                                        cfg.alpha_floor);
      ExperienceTuple exp =
          cfg.mode == ConstraintMode::IDC
              ? env.step(apply_idc_mask(ks.kernel, d, cfg.dhat), env_rng)
              : env.step(ks.kernel, env_rng);

      ForwardCache vc;
      double v = forward(res.critic, beta, &vc)[0];
      double v_next = forward(res.critic, exp.belief_after)[0];
      double delta = exp.cost.combined + cfg.gamma * v_next - v;

      // critic: semi-gradient of delta^2 (target frozen)
      std::vector<double> dv = {-2.0 * delta};
      Gradients gc = backward(res.critic, vc, dv);
      gc.clip_global_norm(cfg.clip_norm);
      adam_step(critic_opt, res.critic, gc, cfg.critic_lr);

      // actor: descend delta * grad log pi, through the concentration head
      dout.assign(ks.alpha.size(), 0.0);
      int slices = ks.kernel.slice_count();
      for (int s = 0; s < slices; ++s) {
        std::span<const double> alpha(&ks.alpha[static_cast<size_t>(s) * w],
                                      static_cast<size_t>(w));
        std::span<const double> x(&ks.kernel.probs[static_cast<size_t>(s) * w],
                                  static_cast<size_t>(w));
        std::vector<double> g = dirichlet_log_prob_grad(alpha, x);
        for (int y = 0; y < w; ++y) dout[static_cast<size_t>(s) * w + y] = delta * g[y];
      }
      Gradients ga = backward(res.actor, ks.cache, dout);
      ga.clip_global_norm(cfg.clip_norm);
      adam_step(actor_opt, res.actor, ga, cfg.actor_lr);

      cost_sum += exp.cost.combined;
      leak_sum += exp.cost.leakage;
      dist_sum += exp.cost.distortion;
      beta = exp.belief_after;
    }
    double avg_cost = cost_sum / cfg.n;
    res.curve.avg_cost.push_back(avg_cost);
    res.curve.avg_leakage.push_back(leak_sum / cfg.n);
    res.curve.avg_distortion.push_back(dist_sum / cfg.n);

    if (ep == 0) divergence_ref = std::max(std::abs(avg_cost), 1e-3);
    if (avg_cost > 10.0 * divergence_ref) {
      if (++divergence_run >= 200) {
        std::ostringstream msg;
        msg << "train: diverged at episode " << ep << ": average cost " << avg_cost
            << " exceeded 10x the initial " << divergence_ref
            << " for 200 consecutive episodes";
        throw std::runtime_error(msg.str());
      }
    } else {
      divergence_run = 0;
    }
  }
  return res;
}

EvalResult evaluate_policy(const PolicyFn& policy, const TransitionMatrix& chain,
                           const InitialDistribution& init, const DistortionMatrix& d,
                           const EnvConfig& env_cfg, int n, int rollouts, Rng& rng) {
  if (n < 1 || rollouts < 1)
    throw std::invalid_argument("evaluate_policy: n and rollouts must be >= 1");
  Environment env(chain, d, env_cfg, init.probs, rng);
  EvalResult res;
  for (int roll = 0; roll < rollouts; ++roll) {
    env.reset(rng);
    for (int t = 0; t < n; ++t) {
      ActionKernel a = policy(env.belief(), rng);
      ExperienceTuple exp = env.step(a, rng);
      res.avg_leakage += exp.cost.leakage;
      res.avg_distortion += exp.cost.distortion;
      res.avg_cost += exp.cost.combined;
    }
  }
  double steps = static_cast<double>(n) * rollouts;
  res.avg_leakage /= steps;
  res.avg_distortion /= steps;
  res.avg_cost /= steps;
  return res;
}

PolicyFn frozen_actor_policy(const MLP& actor, ActionMode mode, const DistortionMatrix& d,
                             const EnvConfig& env_cfg, double alpha_floor) {
  return [actor, mode, d, env_cfg, alpha_floor](const Belief& beta, Rng&) {
    ActionKernel a = actor_mean_kernel(actor, beta, mode, alpha_floor);
    if (env_cfg.mode == ConstraintMode::IDC) a = apply_idc_mask(a, d, env_cfg.dhat);
    return a;
  };
}

EvalResult evaluate_actor(const MLP& actor, ActionMode mode, const TransitionMatrix& chain,
                          const InitialDistribution& init, const DistortionMatrix& d,
                          const EnvConfig& env_cfg, int n, int rollouts, Rng& rng,
                          double alpha_floor) {
  return evaluate_policy(frozen_actor_policy(actor, mode, d, env_cfg, alpha_floor), chain,
                         init, d, env_cfg, n, rollouts, rng);
}

TraceSet policy_traces(const PolicyFn& policy, const TransitionMatrix& chain,
                       const InitialDistribution& init, const DistortionMatrix& d,
                       const EnvConfig& env_cfg, int n, int rollouts, Rng& rng) {
  Environment env(chain, d, env_cfg, init.probs, rng);
  TraceSet out;
  out.truth.resize(rollouts);
  out.released.resize(rollouts);
  for (int roll = 0; roll < rollouts; ++roll) {
    env.reset(rng);
    for (int t = 0; t < n; ++t) {
      ActionKernel a = policy(env.belief(), rng);
      ExperienceTuple exp = env.step(a, rng);
      out.truth[roll].push_back(exp.x_cur);
      out.released[roll].push_back(exp.y);
    }
  }
  return out;
}

std::vector<PutRecord> put_sweep(const TrainConfig& base, const std::vector<double>& values,
                                 const TransitionMatrix& chain, const InitialDistribution& init,
                                 const DistortionMatrix& d, int rollouts, int jobs,
                                 std::vector<LearningCurve>* curves) {
  if (values.empty()) throw std::invalid_argument("put_sweep: empty sweep list");
  std::vector<PutRecord> records(values.size());
  if (curves) curves->assign(values.size(), LearningCurve{});
  Rng root(base.seed);

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      TrainConfig cfg = base;
      cfg.seed = root.spawn(i + 1).seed();
      PutRecord& rec = records[i];
      if (cfg.mode == ConstraintMode::ADC) {
        cfg.lambda = values[i];
        rec.policy_name = "pdrp-adc";
        rec.constraint_mode = "adc";
        rec.constraint_value = cfg.dbar;
      } else {
        cfg.dhat = values[i];
        rec.policy_name = "pdrp-idc";
        rec.constraint_mode = "idc";
        rec.constraint_value = cfg.dhat;
      }
      rec.lambda = cfg.mode == ConstraintMode::ADC ? cfg.lambda : 0.0;
      rec.n = cfg.n;
      rec.rollouts = rollouts;
      rec.seed = cfg.seed;
      try {
        TrainResult tr = train(cfg, chain, init, d);
        if (curves) (*curves)[i] = tr.curve;
        EnvConfig ecfg;
        ecfg.mode = cfg.mode;
        ecfg.lambda = cfg.lambda;
        ecfg.dbar = cfg.dbar;
        ecfg.dhat = cfg.dhat;
        Rng eval_rng = Rng(cfg.seed).spawn(999);
        EvalResult ev = evaluate_actor(tr.actor, cfg.action_mode, chain, init, d, ecfg,
                                       cfg.n, rollouts, eval_rng, cfg.alpha_floor);
        rec.avg_leakage_nats = ev.avg_leakage;
        rec.avg_distortion = ev.avg_distortion;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  };

  int threads = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

void write_put_csv(const std::vector<PutRecord>& records, const std::string& path,
                   const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  out << "policy_name,constraint_mode,constraint_value,lambda,avg_leakage_nats,"
         "avg_distortion,n,rollouts,seed\n";
  for (const PutRecord& r : records) {
    if (r.failed) {
      out << "# point " << r.policy_name << " value=" << fmt_double(r.constraint_value)
          << " lambda=" << fmt_double(r.lambda) << " failed: " << r.error << "\n";
      continue;
    }
    out << r.policy_name << ',' << r.constraint_mode << ',' << fmt_double(r.constraint_value)
        << ',' << fmt_double(r.lambda) << ',' << fmt_double(r.avg_leakage_nats) << ','
        << fmt_double(r.avg_distortion) << ',' << r.n << ',' << r.rollouts << ',' << r.seed
        << "\n";
  }
  atomic_write(path, out.str());
}

void write_learning_csv(const LearningCurve& curve, const std::string& path,
                        const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  out << "episode,avg_cost,avg_leakage,avg_distortion\n";
  for (size_t i = 0; i < curve.avg_cost.size(); ++i)
    out << i << ',' << fmt_double(curve.avg_cost[i]) << ',' << fmt_double(curve.avg_leakage[i])
        << ',' << fmt_double(curve.avg_distortion[i]) << "\n";
  atomic_write(path, out.str());
}

}  // namespace put
