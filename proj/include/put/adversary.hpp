#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "put/belief.hpp"
#include "put/rng.hpp"

namespace put {

// Count-based adversary: predicts the current true symbol from the last m
// released symbols (y_{t-m+1..t}), with additive smoothing.
class MGramPredictor {
 public:
  MGramPredictor(int w, int m, double alpha);

  static MGramPredictor fit(const TraceSet& pairs, int w, int m, double alpha);

  void observe(const std::vector<int>& truth, const std::vector<int>& released);
  // P(x_t | context); unseen contexts give the uniform smoothing prior.
  std::vector<double> predict(const std::vector<int>& released, int t) const;
  // -(1/T) sum log P(x_t | context), nats; positions with fewer than m
  // released symbols of history are skipped.
  double cross_entropy(const TraceSet& pairs) const;

  int memory() const { return m_; }
  int width() const { return w_; }

 private:
  uint64_t encode(const std::vector<int>& released, int t) const;

  int w_ = 0;
  int m_ = 1;
  double alpha_ = 0.1;
  std::unordered_map<uint64_t, std::vector<double>> counts_;
};

struct AdversaryPolicy {
  std::string name;
  double constraint_value = 0.0;
  double avg_leakage = 0.0;
  double avg_distortion = 0.0;
  std::function<TraceSet(int rollouts, Rng& rng)> sample;
};

struct AdversaryRow {
  std::string policy;
  double constraint_value = 0.0;
  double avg_leakage = 0.0;
  double avg_distortion = 0.0;
  std::vector<double> ce;  // one entry per requested memory length
};

// Samples rollouts per policy, fits the predictor on the first 80% and scores
// cross-entropy on the held-out 20%, per memory length.
std::vector<AdversaryRow> compare_policies(const std::vector<AdversaryPolicy>& policies, int w,
                                           const std::vector<int>& m_values, int rollouts,
                                           double alpha, Rng& rng);

void write_adversary_csv(const std::vector<AdversaryRow>& rows, const std::vector<int>& m_values,
                         const std::string& path, const std::string& provenance);

}  // namespace put
