#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "put/adversary.hpp"

using namespace put;

namespace {

TraceSet cycle_traces(int w, int rollouts, int n, int phase_stride) {
  // truth follows a deterministic cycle; releases replay it exactly
  TraceSet ts;
  for (int i = 0; i < rollouts; ++i) {
    std::vector<int> x(n);
    for (int t = 0; t < n; ++t) x[t] = (i * phase_stride + t) % w;
    ts.truth.push_back(x);
    ts.released.push_back(x);
  }
  return ts;
}

}  // namespace

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(MGramPredictor(0, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(MGramPredictor(3, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(MGramPredictor(3, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MGramPredictor(10, 20, 0.1), std::invalid_argument);  // 10^20 contexts
}

TEST_CASE("unigram counting identity") {
  // m = 1: P(x | y) must equal the smoothed empirical conditional
  TraceSet ts;
  ts.truth = {{0, 0, 1}, {1, 0, 1}};
  ts.released = {{0, 1, 1}, {1, 1, 0}};
  double alpha = 0.5;
  auto pred = MGramPredictor::fit(ts, 2, 1, alpha);
  // context y=1 occurs at (0,1):x=0, (0,2):x=1, (1,1):x=0, (1,0):x=1
  // counts: x=0 twice, x=1 twice -> smoothed 2.5/5 each
  auto p = pred.predict({1}, 0);
  CHECK(p[0] == doctest::Approx(2.5 / 5.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(2.5 / 5.0).epsilon(1e-12));
  // context y=0 occurs at (0,0):x=0 and (1,2):x=1
  auto q = pred.predict({0}, 0);
  CHECK(q[0] == doctest::Approx(1.5 / 3.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(1.5 / 3.0).epsilon(1e-12));
}

TEST_CASE("unseen contexts fall back to uniform") {
  TraceSet ts;
  ts.truth = {{0, 0, 0, 0}};
  ts.released = {{0, 0, 0, 0}};
  auto pred = MGramPredictor::fit(ts, 3, 2, 0.1);
  auto p = pred.predict({1, 2, 1, 2}, 3);
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("a deterministic pattern is learned to near-zero cross entropy") {
  int w = 4, n = 40;
  auto train = cycle_traces(w, 20, n, 1);
  auto test = cycle_traces(w, 8, n, 1);
  auto pred = MGramPredictor::fit(train, w, 1, 1e-6);
  double ce = pred.cross_entropy(test);
  CHECK(ce >= 0.0);
  CHECK(ce < 1e-4);
  // memoryless smoothing-only predictor scores log w
  MGramPredictor blank(w, 1, 0.1);
  CHECK(blank.cross_entropy(test) == doctest::Approx(std::log(w)).epsilon(1e-12));
}

TEST_CASE("longer memory helps when the release lags the truth") {
  // releases are iid uniform and the truth copies the previous release, so
  // the current release alone carries nothing while a 2-gram context pins
  // the truth exactly
  int w = 3, n = 30;
  Rng rng(7);
  TraceSet ts;
  for (int i = 0; i < 30; ++i) {
    std::vector<int> x(n), y(n);
    for (int t = 0; t < n; ++t) y[t] = static_cast<int>(rng.next_u64() % w);
    x[0] = 0;
    for (int t = 1; t < n; ++t) x[t] = y[t - 1];
    ts.truth.push_back(x);
    ts.released.push_back(y);
  }
  double ce1 = MGramPredictor::fit(ts, w, 1, 0.01).cross_entropy(ts);
  double ce2 = MGramPredictor::fit(ts, w, 2, 0.01).cross_entropy(ts);
  CHECK(ce1 > 0.8 * std::log(w));
  CHECK(ce2 < 0.05);
  CHECK(ce2 < ce1);
}

TEST_CASE("cross entropy skips positions without a full context") {
  TraceSet ts;
  ts.truth = {{0, 1}};
  ts.released = {{0, 1}};
  MGramPredictor long_mem(2, 5, 0.1);
  // no position has 5 released symbols of history: nothing to score
  CHECK_THROWS_AS(long_mem.cross_entropy(ts), std::invalid_argument);
}

TEST_CASE("policy comparison harness") {
  int w = 3;
  auto truthful = [w](int rollouts, Rng& rng) {
    TraceSet ts;
    for (int i = 0; i < rollouts; ++i) {
      std::vector<int> x(25);
      for (auto& v : x) v = static_cast<int>(rng.next_u64() % w);
      ts.truth.push_back(x);
      ts.released.push_back(x);
    }
    return ts;
  };
  auto scrambled = [w](int rollouts, Rng& rng) {
    TraceSet ts;
    for (int i = 0; i < rollouts; ++i) {
      std::vector<int> x(25), y(25);
      for (auto& v : x) v = static_cast<int>(rng.next_u64() % w);
      for (auto& v : y) v = static_cast<int>(rng.next_u64() % w);
      ts.truth.push_back(x);
      ts.released.push_back(y);
    }
    return ts;
  };
  std::vector<AdversaryPolicy> policies = {
      {"truthful", 0.0, 1.0986, 0.0, truthful},
      {"scrambled", 2.0, 0.0, 1.4, scrambled},
  };
  Rng rng(51);
  auto rows = compare_policies(policies, w, {1, 2}, 50, 0.1, rng);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].policy == "truthful");
  CHECK(rows[0].constraint_value == 0.0);
  CHECK(rows[1].avg_distortion == 1.4);
  REQUIRE(rows[0].ce.size() == 2);
  // the truthful release is perfectly predictable; the scrambled one is not
  CHECK(rows[0].ce[0] < 0.2);
  CHECK(rows[1].ce[0] == doctest::Approx(std::log(w)).epsilon(0.05));
  CHECK(rows[0].ce[0] < rows[1].ce[0]);

  // determinism
  Rng rng2(51);
  auto again = compare_policies(policies, w, {1, 2}, 50, 0.1, rng2);
  CHECK(again[0].ce == rows[0].ce);
  CHECK(again[1].ce == rows[1].ce);

  CHECK_THROWS_AS(compare_policies(policies, w, {1}, 3, 0.1, rng), std::invalid_argument);
}

TEST_CASE("adversary csv layout") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "put_test_adv.csv";
  std::vector<AdversaryRow> rows = {{"p1", 0.5, 0.1, 0.2, {1.0, 0.5}}};
  write_adversary_csv(rows, {1, 5}, path.string(), "prov");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# prov");
  std::getline(in, line);
  CHECK(line == "policy,constraint_km_or_steps,avg_leakage_nats,ce_m1,ce_m5");
  std::getline(in, line);
  CHECK(line.substr(0, 3) == "p1,");
  fs::remove(path);
}
