#include "put/markov.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "put/util.hpp"

namespace put {

void TransitionMatrix::validate(double tol) const {
  if (probs.rows != states.size || probs.cols != states.size)
    throw std::invalid_argument("TransitionMatrix: shape does not match state space");
  for (int j = 0; j < states.size; ++j) {
    double sum = 0.0;
    for (int i = 0; i < states.size; ++i) {
      double v = probs(i, j);
      if (!(v >= 0.0 && v <= 1.0 + tol))
        throw std::invalid_argument("TransitionMatrix: entry out of [0,1] in column " +
                                    states.label(j));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw std::invalid_argument("TransitionMatrix: column " + states.label(j) +
                                  " sums to " + fmt_double(sum));
  }
}

InitialDistribution InitialDistribution::uniform(int n) {
  if (n < 1) throw std::invalid_argument("InitialDistribution: n must be >= 1");
  return InitialDistribution{std::vector<double>(n, 1.0 / n)};
}

InitialDistribution InitialDistribution::point_mass(int n, int s) {
  if (s < 0 || s >= n) throw std::invalid_argument("InitialDistribution: state out of range");
  InitialDistribution d{std::vector<double>(n, 0.0)};
  d.probs[s] = 1.0;
  return d;
}

void InitialDistribution::validate(double tol) const {
  double sum = 0.0;
  for (double v : probs) {
    if (v < 0.0) throw std::invalid_argument("InitialDistribution: negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("InitialDistribution: sums to " + fmt_double(sum));
}

TransitionMatrix make_uniform_chain(const StateSpace& space) {
  TransitionMatrix m{space, Matrix(space.size, space.size, 1.0 / space.size)};
  return m;
}

static int manhattan(int width, int a, int b) {
  int ra = a / width, ca = a % width;
  int rb = b / width, cb = b % width;
  return std::abs(ra - rb) + std::abs(ca - cb);
}

TransitionMatrix make_q1_chain(int width, int height, const std::vector<double>& r) {
  StateSpace space = StateSpace::make_grid(width, height);
  int n = space.size;
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      int d = manhattan(width, i, j);
      if (d >= static_cast<int>(r.size()))
        throw std::invalid_argument("make_q1_chain: weight table has no entry for distance " +
                                    std::to_string(d));
      if (!(r[d] > 0.0))
        throw std::invalid_argument("make_q1_chain: weight for distance " + std::to_string(d) +
                                    " must be positive");
      // self-transition uses max(d, 1) so the self term carries weight r[0]
      double w = r[d] / std::max(d, 1);
      m(i, j) = w;
      sum += w;
    }
    for (int i = 0; i < n; ++i) m(i, j) /= sum;
  }
  TransitionMatrix out{space, std::move(m)};
  out.validate();
  return out;
}

TransitionMatrix make_q2_chain(int width, int height, double r0, double r1) {
  if (!(r0 > 0.0) || !(r1 > 0.0))
    throw std::invalid_argument("make_q2_chain: weights must be positive");
  StateSpace space = StateSpace::make_grid(width, height);
  int n = space.size;
  // preferred successor of each state (1-based arithmetic as in the 4-column
  // construction, generalized to the configured width)
  auto preferred = [&](int j) {
    int s = j + 1;  // 1-based
    if (s == n) return j;               // last cell prefers itself
    if (s % width != 0) return j + 1;   // step right
    if (j + width < n) return j + width;  // wrap to next row
    return j;
  };
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    int pref = preferred(j);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = (i == pref) ? r1 : r0;
      int d = manhattan(width, i, j);
      double w = u / std::max(d, 1);
      m(i, j) = w;
      sum += w;
    }
    for (int i = 0; i < n; ++i) m(i, j) /= sum;
  }
  TransitionMatrix out{space, std::move(m)};
  out.validate();
  return out;
}

std::vector<int> sample_path(const TransitionMatrix& chain, const InitialDistribution& init,
                             int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_path: n must be >= 1");
  std::vector<int> path(n);
  path[0] = rng.discrete(init.probs);
  std::vector<double> col(chain.size());
  for (int t = 1; t < n; ++t) {
    int from = path[t - 1];
    for (int i = 0; i < chain.size(); ++i) col[i] = chain.p(i, from);
    path[t] = rng.discrete(col);
  }
  return path;
}

TransitionMatrix estimate_empirical_chain(const StateSpace& space,
                                          const std::vector<std::vector<int>>& paths,
                                          double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("estimate_empirical_chain: alpha must be >= 0");
  int n = space.size;
  Matrix counts(n, n);
  for (const auto& path : paths) {
    for (size_t t = 1; t < path.size(); ++t) {
      int from = path[t - 1], to = path[t];
      if (from < 0 || from >= n || to < 0 || to >= n)
        throw std::invalid_argument("estimate_empirical_chain: symbol out of state space");
      counts(to, from) += 1.0;
    }
  }
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += counts(i, j);
    if (total == 0.0 && alpha == 0.0)
      throw std::runtime_error("estimate_empirical_chain: no observations leaving state " +
                               space.label(j) + " and alpha = 0");
    double denom = total + alpha * n;
    for (int i = 0; i < n; ++i) m(i, j) = (counts(i, j) + alpha) / denom;
  }
  TransitionMatrix out{space, std::move(m)};
  out.validate();
  return out;
}

std::vector<double> stationary_distribution(const TransitionMatrix& chain, double tol,
                                            int max_iters) {
  chain.validate();
  int n = chain.size();
  std::vector<double> pi(n, 1.0 / n), next(n);
  double residual = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += chain.p(i, j) * pi[j];
      next[i] = s;
    }
    residual = 0.0;
    for (int i = 0; i < n; ++i) residual = std::max(residual, std::abs(next[i] - pi[i]));
    pi.swap(next);
    if (residual <= tol) return pi;
  }
  throw std::runtime_error("stationary_distribution: no convergence after " +
                           std::to_string(max_iters) + " iterations, residual " +
                           fmt_double(residual));
}

void save_transition_csv(const TransitionMatrix& chain, const std::string& path) {
  std::ostringstream os;
  int n = chain.size();
  for (int j = 0; j < n; ++j) os << (j ? "," : "") << chain.states.label(j);
  os << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) os << (j ? "," : "") << fmt_double(chain.probs(i, j));
    os << "\n";
  }
  atomic_write(path, os.str());
}

TransitionMatrix load_transition_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_transition_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_transition_csv: empty file");
  std::vector<std::string> labels = split_csv_line(line);
  int n = static_cast<int>(labels.size());
  StateSpace space = StateSpace::make(n);
  space.labels = labels;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_transition_csv: expected " + std::to_string(n) + " rows");
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n)
      throw std::runtime_error("load_transition_csv: row " + std::to_string(i + 1) +
                               " has wrong width");
    for (int j = 0; j < n; ++j) m(i, j) = std::strtod(cells[j].c_str(), nullptr);
  }
  TransitionMatrix out{std::move(space), std::move(m)};
  out.validate(1e-9);
  return out;
}

}  // namespace put
