#include "put/adversary.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "put/util.hpp"

namespace put {

MGramPredictor::MGramPredictor(int w, int m, double alpha) : w_(w), m_(m), alpha_(alpha) {
  if (w < 1) throw std::invalid_argument("MGramPredictor: alphabet size must be >= 1");
  if (m < 1) throw std::invalid_argument("MGramPredictor: memory must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("MGramPredictor: smoothing must be > 0");
  double cap = 1.0;
  for (int i = 0; i < m; ++i) {
    cap *= w;
    if (cap > 9e18) throw std::invalid_argument("MGramPredictor: context space too large");
  }
}

uint64_t MGramPredictor::encode(const std::vector<int>& released, int t) const {
  uint64_t code = 0;
  for (int i = t - m_ + 1; i <= t; ++i) {
    int y = released[i];
    if (y < 0 || y >= w_) throw std::out_of_range("MGramPredictor: symbol out of range");
    code = code * w_ + static_cast<uint64_t>(y);
  }
  return code;
}

void MGramPredictor::observe(const std::vector<int>& truth, const std::vector<int>& released) {
  if (truth.size() != released.size())
    throw std::invalid_argument("MGramPredictor: sequence length mismatch");
  for (int t = m_ - 1; t < static_cast<int>(truth.size()); ++t) {
    int x = truth[t];
    if (x < 0 || x >= w_) throw std::out_of_range("MGramPredictor: symbol out of range");
    auto& row = counts_[encode(released, t)];
    if (row.empty()) row.assign(w_, 0.0);
    row[x] += 1.0;
  }
}

MGramPredictor MGramPredictor::fit(const TraceSet& pairs, int w, int m, double alpha) {
  MGramPredictor p(w, m, alpha);
  if (pairs.truth.size() != pairs.released.size())
    throw std::invalid_argument("MGramPredictor::fit: trace count mismatch");
  for (size_t i = 0; i < pairs.truth.size(); ++i) p.observe(pairs.truth[i], pairs.released[i]);
  return p;
}

std::vector<double> MGramPredictor::predict(const std::vector<int>& released, int t) const {
  if (t < m_ - 1 || t >= static_cast<int>(released.size()))
    throw std::out_of_range("MGramPredictor::predict: not enough history");
  auto it = counts_.find(encode(released, t));
  std::vector<double> out(w_, 0.0);
  double total = alpha_ * w_;
  if (it != counts_.end())
    for (int x = 0; x < w_; ++x) total += it->second[x];
  for (int x = 0; x < w_; ++x) {
    double c = alpha_ + (it != counts_.end() ? it->second[x] : 0.0);
    out[x] = c / total;
  }
  return out;
}

double MGramPredictor::cross_entropy(const TraceSet& pairs) const {
  if (pairs.truth.size() != pairs.released.size())
    throw std::invalid_argument("MGramPredictor::cross_entropy: trace count mismatch");
  double sum = 0.0;
  int64_t steps = 0;
  for (size_t i = 0; i < pairs.truth.size(); ++i) {
    const auto& truth = pairs.truth[i];
    const auto& released = pairs.released[i];
    if (truth.size() != released.size())
      throw std::invalid_argument("MGramPredictor::cross_entropy: length mismatch");
    for (int t = m_ - 1; t < static_cast<int>(truth.size()); ++t) {
      sum -= std::log(predict(released, t)[truth[t]]);
      ++steps;
    }
  }
  if (steps == 0) throw std::invalid_argument("MGramPredictor::cross_entropy: no scorable steps");
  return sum / static_cast<double>(steps);
}

std::vector<AdversaryRow> compare_policies(const std::vector<AdversaryPolicy>& policies, int w,
                                           const std::vector<int>& m_values, int rollouts,
                                           double alpha, Rng& rng) {
  if (policies.empty()) throw std::invalid_argument("compare_policies: no policies");
  if (rollouts < 5) throw std::invalid_argument("compare_policies: need at least 5 rollouts");
  std::vector<AdversaryRow> rows;
  for (size_t i = 0; i < policies.size(); ++i) {
    Rng stream = rng.spawn(i + 1);
    TraceSet traces = policies[i].sample(rollouts, stream);
    size_t split = (traces.truth.size() * 4) / 5;  // fixed 80/20 over rollouts
    TraceSet train, test;
    train.truth.assign(traces.truth.begin(), traces.truth.begin() + split);
    train.released.assign(traces.released.begin(), traces.released.begin() + split);
    test.truth.assign(traces.truth.begin() + split, traces.truth.end());
    test.released.assign(traces.released.begin() + split, traces.released.end());

    AdversaryRow row;
    row.policy = policies[i].name;
    row.constraint_value = policies[i].constraint_value;
    row.avg_leakage = policies[i].avg_leakage;
    row.avg_distortion = policies[i].avg_distortion;
    for (int m : m_values)
      row.ce.push_back(MGramPredictor::fit(train, w, m, alpha).cross_entropy(test));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_adversary_csv(const std::vector<AdversaryRow>& rows, const std::vector<int>& m_values,
                         const std::string& path, const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  out << "policy,constraint_km_or_steps,avg_leakage_nats";
  for (int m : m_values) out << ",ce_m" << m;
  out << "\n";
  for (const AdversaryRow& r : rows) {
    out << r.policy << ',' << fmt_double(r.constraint_value) << ','
        << fmt_double(r.avg_leakage);
    for (double ce : r.ce) out << ',' << fmt_double(ce);
    out << "\n";
  }
  atomic_write(path, out.str());
}

}  // namespace put
