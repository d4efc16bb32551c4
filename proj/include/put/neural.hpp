#pragma once

#include <span>
#include <string>
#include <vector>

#include "put/matrix.hpp"
#include "put/rng.hpp"

namespace put {

// Two-hidden-layer MLP with leaky-ReLU hidden units and manual backprop.
struct MLP {
  enum class Output { Linear, Tanh, Softplus };

  std::vector<int> sizes;  // [in, h, h, out]
  Output output = Output::Linear;
  double leaky_slope = 0.01;
  std::vector<Matrix> W;                // W[l]: sizes[l+1] x sizes[l]
  std::vector<std::vector<double>> b;   // b[l]: sizes[l+1]

  static MLP make(int in, int hidden, int out, Output output, Rng& rng);
  size_t param_count() const;
};

struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // post-activation per layer
};

std::vector<double> forward(const MLP& net, std::span<const double> input,
                            ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> W;
  std::vector<std::vector<double>> b;

  static Gradients zeros_like(const MLP& net);
  void scale(double s);
  double global_norm() const;
  void clip_global_norm(double max_norm);
};

// dout is the loss gradient w.r.t. the network output (post output-activation).
Gradients backward(const MLP& net, const ForwardCache& cache, std::span<const double> dout);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::vector<Matrix> mW, vW;
  std::vector<std::vector<double>> mb, vb;

  static AdamState zeros_like(const MLP& net);
};

void adam_step(AdamState& state, MLP& net, const Gradients& g, double lr);

std::vector<double> dirichlet_sample(std::span<const double> alpha, Rng& rng);
double dirichlet_log_prob(std::span<const double> alpha, std::span<const double> x);
// d/dalpha_i of the log density at x.
std::vector<double> dirichlet_log_prob_grad(std::span<const double> alpha,
                                            std::span<const double> x);

double digamma(double x);

// Flat binary container: "PUTN" magic, layer count, layer sizes (LE int32),
// output activation code, then W/b per layer as LE float64.
void save_checkpoint(const MLP& net, const std::string& path);
MLP load_checkpoint(const std::string& path);

}  // namespace put
