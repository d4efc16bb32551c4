#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "put/belief.hpp"
#include "put/distortion.hpp"
#include "put/markov.hpp"
#include "put/neural.hpp"
#include "put/rng.hpp"

namespace put {

struct TrainConfig {
  int n = 300;
  int episodes = 5000;
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  ConstraintMode mode = ConstraintMode::ADC;
  double lambda = 1.0;       // ADC multiplier
  double dbar = 0.0;         // ADC budget
  double dhat = 1.0;         // IDC per-step threshold
  ActionMode action_mode = ActionMode::StateConditioned;
  int hidden = 64;
  double clip_norm = 5.0;
  double alpha_floor = 1e-3;  // added to the softplus concentrations
  uint64_t seed = 1;
  // Optional warm starts: fine-tune these networks instead of fresh random
  // ones. Shapes must match the configured input/hidden/output sizes. A
  // critic whose initial output is near the true cost-to-go keeps the early
  // TD errors unbiased, which matters when the actor starts from a good
  // policy that biased updates would otherwise destroy.
  std::shared_ptr<const MLP> actor_init;
  std::shared_ptr<const MLP> critic_init;

  void validate() const;
};

struct LearningCurve {
  std::vector<double> avg_cost;
  std::vector<double> avg_leakage;
  std::vector<double> avg_distortion;
};

// One stochastic actor decision: Dirichlet draws per conditional slice.
struct KernelSample {
  ActionKernel kernel;
  double log_prob = 0.0;
  std::vector<double> alpha;  // concentrations, kernel layout
  ForwardCache cache;         // actor forward pass, kept for the update
};

KernelSample actor_to_kernel(const MLP& actor, const Belief& beta, ActionMode mode, Rng& rng,
                             double alpha_floor = 1e-3);

// Deterministic frozen policy: the Dirichlet mean of each slice.
ActionKernel actor_mean_kernel(const MLP& actor, const Belief& beta, ActionMode mode,
                               double alpha_floor = 1e-3);

double critic_value(const MLP& critic, const Belief& beta);

// delta = C + gamma * V(beta_{t+1}) - V(beta_t); the horizon end bootstraps
// like any other step.
double td_error(const MLP& critic, const ExperienceTuple& exp, double gamma);

struct TrainResult {
  MLP actor;
  MLP critic;
  LearningCurve curve;
};

// Advantage actor-critic over the belief MDP. Throws on divergence (running
// episode cost above 10x its initial value for 200 consecutive episodes).
TrainResult train(const TrainConfig& cfg, const TransitionMatrix& chain,
                  const InitialDistribution& init, const DistortionMatrix& d);

using PolicyFn = std::function<ActionKernel(const Belief&, Rng&)>;

struct EvalResult {
  double avg_leakage = 0.0;
  double avg_distortion = 0.0;
  double avg_cost = 0.0;
};

// Rolls the environment forward under the supplied policy, averaging the
// exact per-step conditional leakage and expected distortion.
EvalResult evaluate_policy(const PolicyFn& policy, const TransitionMatrix& chain,
                           const InitialDistribution& init, const DistortionMatrix& d,
                           const EnvConfig& env_cfg, int n, int rollouts, Rng& rng);

// Frozen-actor evaluation: mean kernel, IDC mask applied when configured.
EvalResult evaluate_actor(const MLP& actor, ActionMode mode, const TransitionMatrix& chain,
                          const InitialDistribution& init, const DistortionMatrix& d,
                          const EnvConfig& env_cfg, int n, int rollouts, Rng& rng,
                          double alpha_floor = 1e-3);

// Sampled trajectories under a policy, for adversary evaluation.
TraceSet policy_traces(const PolicyFn& policy, const TransitionMatrix& chain,
                       const InitialDistribution& init, const DistortionMatrix& d,
                       const EnvConfig& env_cfg, int n, int rollouts, Rng& rng);

PolicyFn frozen_actor_policy(const MLP& actor, ActionMode mode, const DistortionMatrix& d,
                             const EnvConfig& env_cfg, double alpha_floor = 1e-3);

struct PutRecord {
  std::string policy_name;
  std::string constraint_mode;  // "adc" | "idc"
  double constraint_value = 0.0;
  double lambda = 0.0;
  double avg_leakage_nats = 0.0;
  double avg_distortion = 0.0;
  int n = 0;
  int rollouts = 0;
  uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

// Trains and evaluates one point per sweep value (lambda for ADC, dhat for
// IDC); failed points are recorded and the sweep continues. Points run on up
// to `jobs` threads with per-point RNG streams. When curves is non-null it
// receives one learning curve per point.
std::vector<PutRecord> put_sweep(const TrainConfig& base, const std::vector<double>& values,
                                 const TransitionMatrix& chain, const InitialDistribution& init,
                                 const DistortionMatrix& d, int rollouts, int jobs,
                                 std::vector<LearningCurve>* curves = nullptr);

void write_put_csv(const std::vector<PutRecord>& records, const std::string& path,
                   const std::string& provenance);
void write_learning_csv(const LearningCurve& curve, const std::string& path,
                        const std::string& provenance);

}  // namespace put
