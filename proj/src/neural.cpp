#include "put/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace put {

MLP MLP::make(int in, int hidden, int out, Output output, Rng& rng) {
  if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("MLP::make: bad sizes");
  MLP net;
  net.sizes = {in, hidden, hidden, out};
  net.output = output;
  for (int l = 0; l < 3; ++l) {
    int fan_in = net.sizes[l], fan_out = net.sizes[l + 1];
    double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * scale;
    net.W.push_back(std::move(w));
    net.b.emplace_back(fan_out, 0.0);
  }
  return net;
}

size_t MLP::param_count() const {
  size_t n = 0;
  for (size_t l = 0; l < W.size(); ++l) n += W[l].data.size() + b[l].size();
  return n;
}

static double softplus(double z) {
  // stable: log(1 + e^z)
  return z > 30.0 ? z : std::log1p(std::exp(z));
}

std::vector<double> forward(const MLP& net, std::span<const double> input, ForwardCache* cache) {
  if (static_cast<int>(input.size()) != net.sizes[0])
    throw std::invalid_argument("forward: input size mismatch");
  std::vector<double> cur(input.begin(), input.end());
  if (cache) {
    cache->input = cur;
    cache->pre.clear();
    cache->post.clear();
  }
  for (int l = 0; l < 3; ++l) {
    const Matrix& w = net.W[l];
    std::vector<double> z(w.rows);
    for (int i = 0; i < w.rows; ++i) {
      double s = net.b[l][i];
      const double* row = &w.data[static_cast<size_t>(i) * w.cols];
      for (int j = 0; j < w.cols; ++j) s += row[j] * cur[j];
      z[i] = s;
    }
    std::vector<double> a(w.rows);
    if (l < 2) {
      for (int i = 0; i < w.rows; ++i) a[i] = z[i] > 0.0 ? z[i] : net.leaky_slope * z[i];
    } else {
      switch (net.output) {
        case MLP::Output::Linear:
          a = z;
          break;
        case MLP::Output::Tanh:
          for (int i = 0; i < w.rows; ++i) a[i] = std::tanh(z[i]);
          break;
        case MLP::Output::Softplus:
          for (int i = 0; i < w.rows; ++i) a[i] = softplus(z[i]);
          break;
      }
    }
    if (cache) {
      cache->pre.push_back(z);
      cache->post.push_back(a);
    }
    cur = std::move(a);
  }
  return cur;
}

Gradients Gradients::zeros_like(const MLP& net) {
  Gradients g;
  for (int l = 0; l < 3; ++l) {
    g.W.emplace_back(net.W[l].rows, net.W[l].cols);
    g.b.emplace_back(net.b[l].size(), 0.0);
  }
  return g;
}

void Gradients::scale(double s) {
  for (auto& w : W)
    for (double& v : w.data) v *= s;
  for (auto& bb : b)
    for (double& v : bb) v *= s;
}

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const auto& w : W)
    for (double v : w.data) sq += v * v;
  for (const auto& bb : b)
    for (double v : bb) sq += v * v;
  return std::sqrt(sq);
}

void Gradients::clip_global_norm(double max_norm) {
  double n = global_norm();
  if (n > max_norm && n > 0.0) scale(max_norm / n);
}

Gradients backward(const MLP& net, const ForwardCache& cache, std::span<const double> dout) {
  if (cache.pre.size() != 3) throw std::invalid_argument("backward: cache from wrong forward");
  if (static_cast<int>(dout.size()) != net.sizes[3])
    throw std::invalid_argument("backward: output gradient size mismatch");
  Gradients g = Gradients::zeros_like(net);
  // delta at output layer pre-activation
  std::vector<double> delta(dout.begin(), dout.end());
  switch (net.output) {
    case MLP::Output::Linear:
      break;
    case MLP::Output::Tanh:
      for (size_t i = 0; i < delta.size(); ++i) {
        double t = cache.post[2][i];
        delta[i] *= 1.0 - t * t;
      }
      break;
    case MLP::Output::Softplus:
      for (size_t i = 0; i < delta.size(); ++i) {
        double z = cache.pre[2][i];
        delta[i] *= 1.0 / (1.0 + std::exp(-z));  // sigmoid
      }
      break;
  }
  for (int l = 2; l >= 0; --l) {
    const std::vector<double>& in = l == 0 ? cache.input : cache.post[l - 1];
    Matrix& gw = g.W[l];
    for (int i = 0; i < gw.rows; ++i) {
      double d = delta[i];
      g.b[l][i] = d;
      double* row = &gw.data[static_cast<size_t>(i) * gw.cols];
      for (int j = 0; j < gw.cols; ++j) row[j] = d * in[j];
    }
    if (l > 0) {
      const Matrix& w = net.W[l];
      std::vector<double> prev(w.cols, 0.0);
      for (int i = 0; i < w.rows; ++i) {
        double d = delta[i];
        const double* row = &w.data[static_cast<size_t>(i) * w.cols];
        for (int j = 0; j < w.cols; ++j) prev[j] += d * row[j];
      }
      for (int j = 0; j < w.cols; ++j) {
        double z = cache.pre[l - 1][j];
        prev[j] *= z > 0.0 ? 1.0 : net.leaky_slope;
      }
      delta = std::move(prev);
    }
  }
  return g;
}

AdamState AdamState::zeros_like(const MLP& net) {
  AdamState s;
  for (int l = 0; l < 3; ++l) {
    s.mW.emplace_back(net.W[l].rows, net.W[l].cols);
    s.vW.emplace_back(net.W[l].rows, net.W[l].cols);
    s.mb.emplace_back(net.b[l].size(), 0.0);
    s.vb.emplace_back(net.b[l].size(), 0.0);
  }
  return s;
}

void adam_step(AdamState& s, MLP& net, const Gradients& g, double lr) {
  s.step += 1;
  double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](double& p, double& m, double& v, double grad) {
    m = s.beta1 * m + (1.0 - s.beta1) * grad;
    v = s.beta2 * v + (1.0 - s.beta2) * grad * grad;
    p -= lr * (m / bc1) / (std::sqrt(v / bc2) + s.eps);
  };
  for (int l = 0; l < 3; ++l) {
    for (size_t i = 0; i < net.W[l].data.size(); ++i)
      update(net.W[l].data[i], s.mW[l].data[i], s.vW[l].data[i], g.W[l].data[i]);
    for (size_t i = 0; i < net.b[l].size(); ++i)
      update(net.b[l][i], s.mb[l][i], s.vb[l][i], g.b[l][i]);
  }
}

std::vector<double> dirichlet_sample(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double sum = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw std::domain_error("dirichlet_sample: concentration must be > 0");
    out[i] = rng.gamma(alpha[i]);
    sum += out[i];
  }
  if (sum <= 0.0) {
    // all gamma draws underflowed; fall back to the mode-free uniform point
    for (double& v : out) v = 1.0 / out.size();
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

double dirichlet_log_prob(std::span<const double> alpha, std::span<const double> x) {
  if (alpha.size() != x.size()) throw std::invalid_argument("dirichlet_log_prob: size mismatch");
  double alpha0 = 0.0, lp = 0.0, xsum = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw std::domain_error("dirichlet_log_prob: concentration must be > 0");
    double xi = std::max(x[i], 1e-12);
    xsum += x[i];
    alpha0 += alpha[i];
    lp += (alpha[i] - 1.0) * std::log(xi) - std::lgamma(alpha[i]);
  }
  if (std::abs(xsum - 1.0) > 1e-6)
    throw std::domain_error("dirichlet_log_prob: sample is off the simplex");
  return lp + std::lgamma(alpha0);
}

std::vector<double> dirichlet_log_prob_grad(std::span<const double> alpha,
                                            std::span<const double> x) {
  double alpha0 = 0.0;
  for (double a : alpha) alpha0 += a;
  double dg0 = digamma(alpha0);
  std::vector<double> g(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i)
    g[i] = dg0 - digamma(alpha[i]) + std::log(std::max(x[i], 1e-12));
  return g;
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be > 0");
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  // asymptotic series
  double f = 1.0 / (x * x);
  return r + std::log(x) - 0.5 / x -
         f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0))));
}

// ---- checkpoints ----

static void put_i32(std::string& s, int32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}

static void put_f64(std::string& s, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  s.append(b, 8);
}

void save_checkpoint(const MLP& net, const std::string& path) {
  std::string s;
  s += "PUTN";
  put_i32(s, static_cast<int32_t>(net.sizes.size()));
  for (int sz : net.sizes) put_i32(s, sz);
  put_i32(s, static_cast<int32_t>(net.output));
  put_f64(s, net.leaky_slope);
  for (size_t l = 0; l < net.W.size(); ++l) {
    for (double v : net.W[l].data) put_f64(s, v);
    for (double v : net.b[l]) put_f64(s, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << s;
}

MLP load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  auto read_i32 = [&]() {
    char b[4];
    in.read(b, 4);
    int32_t v;
    std::memcpy(&v, b, 4);
    return v;
  };
  auto read_f64 = [&]() {
    char b[8];
    in.read(b, 8);
    double v;
    std::memcpy(&v, b, 8);
    return v;
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PUTN", 4) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  int nlayers = read_i32();
  if (nlayers != 4) throw std::runtime_error("load_checkpoint: unsupported layer count");
  MLP net;
  net.sizes.resize(4);
  for (int i = 0; i < 4; ++i) net.sizes[i] = read_i32();
  net.output = static_cast<MLP::Output>(read_i32());
  net.leaky_slope = read_f64();
  for (int l = 0; l < 3; ++l) {
    Matrix w(net.sizes[l + 1], net.sizes[l]);
    for (double& v : w.data) v = read_f64();
    net.W.push_back(std::move(w));
    std::vector<double> bb(net.sizes[l + 1]);
    for (double& v : bb) v = read_f64();
    net.b.push_back(std::move(bb));
  }
  if (!in) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return net;
}

}  // namespace put
