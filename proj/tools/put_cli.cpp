#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "put/a2c.hpp"
#include "put/adversary.hpp"
#include "put/belief.hpp"
#include "put/distortion.hpp"
#include "put/geolife.hpp"
#include "put/markov.hpp"
#include "put/myopic.hpp"
#include "put/neural.hpp"
#include "put/oracle.hpp"
#include "put/util.hpp"

namespace fs = std::filesystem;
using namespace put;

namespace {

constexpr const char* kVersion = "put-0.1.0";

std::string provenance_line(const Config& cfg, uint64_t seed) {
  std::ostringstream out;
  out << "config_hash=" << std::hex << cfg.hash() << std::dec << " seed=" << seed
      << " version=" << kVersion;
  return out.str();
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric list entry '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

struct Source {
  TransitionMatrix chain;
  InitialDistribution init;
  DistortionMatrix dist;
};

Source build_source(const Config& cfg) {
  std::string kind = cfg.get_or("source.kind", "synth");
  if (kind == "files") {
    Source s{load_transition_csv(cfg.get("source.chain_csv")),
             InitialDistribution::uniform(1), load_distortion_csv(cfg.get("source.distortion_csv"))};
    if (s.chain.size() != s.dist.states.size)
      throw ConfigError("source files disagree on the alphabet size");
    s.init = InitialDistribution::uniform(s.chain.size());
    if (cfg.get_or("source.init", "uniform") == "stationary")
      s.init.probs = stationary_distribution(s.chain);
    return s;
  }
  if (kind != "synth") throw ConfigError("source.kind must be synth or files");
  int width = cfg.get_int_or("source.width", 4);
  int height = cfg.get_int_or("source.height", 4);
  std::string family = cfg.get_or("source.family", "q1");
  TransitionMatrix chain = [&] {
    if (family == "q0") return make_uniform_chain(StateSpace::make_grid(width, height));
    if (family == "q1") {
      std::vector<double> r =
          parse_double_list(cfg.get_or("source.q1_r", "1,6,5,4,3,2,1"));
      return make_q1_chain(width, height, r);
    }
    if (family == "q2")
      return make_q2_chain(width, height, cfg.get_double_or("source.q2_r0", 1.0),
                           cfg.get_double_or("source.q2_r1", 6.0));
    throw ConfigError("source.family must be q0, q1 or q2");
  }();
  InitialDistribution init = InitialDistribution::uniform(chain.size());
  if (cfg.get_or("source.init", "uniform") == "stationary")
    init.probs = stationary_distribution(chain);
  return {std::move(chain), std::move(init), manhattan_grid(width, height)};
}

TrainConfig train_config_from(const Config& cfg, uint64_t seed) {
  TrainConfig tc;
  tc.n = cfg.get_int_or("train.n", 300);
  tc.episodes = cfg.get_int_or("train.episodes", 5000);
  tc.gamma = cfg.get_double_or("train.gamma", 0.99);
  tc.actor_lr = cfg.get_double_or("train.actor_lr", 1e-4);
  tc.critic_lr = cfg.get_double_or("train.critic_lr", 1e-3);
  tc.hidden = cfg.get_int_or("train.hidden", 64);
  tc.clip_norm = cfg.get_double_or("train.clip_norm", 5.0);
  tc.lambda = cfg.get_double_or("train.lambda", 1.0);
  tc.dbar = cfg.get_double_or("train.dbar", 0.0);
  tc.dhat = cfg.get_double_or("train.dhat", 1.0);
  std::string mode = cfg.get_or("train.mode", "adc");
  if (mode == "adc")
    tc.mode = ConstraintMode::ADC;
  else if (mode == "idc")
    tc.mode = ConstraintMode::IDC;
  else
    throw ConfigError("train.mode must be adc or idc");
  std::string am = cfg.get_or("train.action_mode", "state");
  if (am == "state")
    tc.action_mode = ActionMode::StateConditioned;
  else if (am == "pair")
    tc.action_mode = ActionMode::PairConditioned;
  else
    throw ConfigError("train.action_mode must be state or pair");
  tc.seed = seed;
  return tc;
}

EnvConfig env_config_from(const TrainConfig& tc) {
  EnvConfig e;
  e.mode = tc.mode;
  e.lambda = tc.lambda;
  e.dbar = tc.dbar;
  e.dhat = tc.dhat;
  return e;
}

// ---------------- verify ----------------

struct CheckRow {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

TransitionMatrix random_chain(int w, Rng& rng) {
  Matrix m(w, w);
  for (int j = 0; j < w; ++j) {
    double sum = 0.0;
    for (int i = 0; i < w; ++i) {
      m(i, j) = -std::log(rng.uniform_pos());
      sum += m(i, j);
    }
    for (int i = 0; i < w; ++i) m(i, j) /= sum;
  }
  return {StateSpace::make(w), m};
}

InitialDistribution random_init(int w, Rng& rng) {
  InitialDistribution init;
  init.probs.resize(w);
  double sum = 0.0;
  for (double& v : init.probs) {
    v = -std::log(rng.uniform_pos());
    sum += v;
  }
  for (double& v : init.probs) v /= sum;
  return init;
}

ActionKernel random_state_kernel(int w, Rng& rng) {
  ActionKernel a = ActionKernel::uniform(w, ActionMode::StateConditioned);
  for (int s = 0; s < w; ++s) {
    auto sl = a.slice(s, 0);
    double sum = 0.0;
    for (int y = 0; y < w; ++y) {
      sl[y] = -std::log(rng.uniform_pos());
      sum += sl[y];
    }
    for (int y = 0; y < w; ++y) sl[y] /= sum;
  }
  return a;
}

DistortionMatrix random_distortion(int w, Rng& rng) {
  Matrix m(w, w);
  for (int x = 0; x < w; ++x)
    for (int y = x + 1; y < w; ++y) m(x, y) = m(y, x) = 1.0 + 3.0 * rng.uniform();
  return {StateSpace::make(w), m, "grid-steps"};
}

int cmd_verify(uint64_t seed, bool inject_belief_bug) {
  std::vector<CheckRow> rows;
  Rng rng(seed);

  {  // Lemma 1 / Lemma 2 / Theorem 1 over random history policies
    const int w = 3, n = 4, trials = 100;
    double worst_slack = 0.0, worst_mi = 0.0, worst_pair = 0.0, worst_dist = 0.0;
    double worst_chain_rule = 0.0, worst_linearity = 0.0;
    for (int k = 0; k < trials; ++k) {
      Rng r = rng.spawn(k + 1);
      auto chain = random_chain(w, r);
      auto init = random_init(w, r);
      auto d = random_distortion(w, r);
      auto hp = HistoryPolicy::random(w, n, r);
      auto joint = enumerate_joint_history(hp, chain, init);
      double mi = mutual_information(joint);
      auto pw = pairwise_terms(joint);
      double pw_sum = 0.0;
      for (double v : pw) pw_sum += v;
      worst_slack = std::min(worst_slack, mi - pw_sum);

      auto sp = simplify_policy(hp, chain, init);
      auto sjoint = enumerate_joint_simplified(sp, chain, init);
      worst_mi = std::max(worst_mi, std::abs(mutual_information(sjoint) - pw_sum));
      for (int t = 1; t <= n; ++t) {
        auto a = pair_history_marginal(joint, t);
        auto b = pair_history_marginal(sjoint, t);
        for (size_t i = 0; i < a.size(); ++i)
          worst_pair = std::max(worst_pair, std::abs(a[i] - b[i]));
      }
      worst_dist = std::max(worst_dist, std::abs(expected_distortion_joint(joint, d) -
                                                 expected_distortion_joint(sjoint, d)));

      auto cr = chain_rule_terms(joint);
      double cr_sum = 0.0;
      for (double v : cr) cr_sum += v;
      worst_chain_rule = std::max(worst_chain_rule, std::abs(cr_sum - mi));
      worst_linearity =
          std::max(worst_linearity, std::abs(expected_distortion_joint(joint, d) -
                                             expected_distortion_stepwise(joint, d)));
    }
    rows.push_back({"lemma1-slack (min, 100 policies)", worst_slack, -1e-9,
                    worst_slack >= -1e-9});
    rows.push_back({"lemma2-simplified-mi", worst_mi, 1e-9, worst_mi <= 1e-9});
    rows.push_back({"lemma2-pair-marginals", worst_pair, 1e-9, worst_pair <= 1e-9});
    rows.push_back({"lemma2-distortion", worst_dist, 1e-9, worst_dist <= 1e-9});
    rows.push_back({"chain-rule-identity (eq2)", worst_chain_rule, 1e-9,
                    worst_chain_rule <= 1e-9});
    rows.push_back({"distortion-linearity", worst_linearity, 1e-12, worst_linearity <= 1e-12});
  }

  {  // belief consistency (eq19): recursion vs enumerated posteriors
    const int w = 3, n = 4, trials = 50;
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
      Rng r = rng.spawn(1000 + k);
      auto chain = random_chain(w, r);
      auto beta0 = random_init(w, r);
      auto kernel = random_state_kernel(w, r);
      InitialDistribution init_x1;
      init_x1.probs.assign(w, 0.0);
      for (int x1 = 0; x1 < w; ++x1)
        for (int x0 = 0; x0 < w; ++x0)
          init_x1.probs[x1] += chain.p(x1, x0) * beta0.probs[x0];
      auto joint =
          enumerate_joint_simplified(SimplifiedPolicy::from_kernel(kernel, n), chain, init_x1);
      // walk every release prefix, carrying the recursive belief
      struct Node {
        Belief beta;
        int t;
        int64_t iy;
      };
      std::vector<Node> stack = {{beta0.probs, 0, 0}};
      while (!stack.empty()) {
        Node node = stack.back();
        stack.pop_back();
        if (node.t == n) continue;
        for (int y = 0; y < w; ++y) {
          Belief next;
          try {
            next = belief_update(node.beta, chain, kernel, y);
          } catch (const std::domain_error&) {
            continue;
          }
          if (inject_belief_bug)  // transposed chain in the recursion
            for (int i = 0; i < w; ++i) next[i] = node.beta[i];
          int64_t iy = node.iy * w + y;
          std::vector<double> oracle;
          try {
            oracle = posterior_from_joint(joint, node.t + 1, iy);
          } catch (const std::domain_error&) {
            continue;
          }
          for (int i = 0; i < w; ++i) worst = std::max(worst, std::abs(next[i] - oracle[i]));
          stack.push_back({std::move(next), node.t + 1, iy});
        }
      }
    }
    rows.push_back({"belief-consistency (eq19)", worst, 1e-9, worst <= 1e-9});
  }

  {  // leakage consistency at n=1: avg_leakage vs oracle MI
    const int w = 3;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      Rng r = rng.spawn(2000 + k);
      auto chain = random_chain(w, r);
      auto beta0 = random_init(w, r);
      auto kernel = random_state_kernel(w, r);
      InitialDistribution init_x1;
      init_x1.probs.assign(w, 0.0);
      for (int x1 = 0; x1 < w; ++x1)
        for (int x0 = 0; x0 < w; ++x0)
          init_x1.probs[x1] += chain.p(x1, x0) * beta0.probs[x0];
      auto joint =
          enumerate_joint_simplified(SimplifiedPolicy::from_kernel(kernel, 1), chain, init_x1);
      worst = std::max(worst, std::abs(avg_leakage(beta0.probs, kernel, chain) -
                                       mutual_information(joint)));
    }
    rows.push_back({"leakage-n1-oracle (eq20-21)", worst, 1e-9, worst <= 1e-9});
  }

  {  // Theorem 2 decomposition for order-2 chains
    const int w = 2, n = 3;
    double worst_mi = 0.0, worst_dist = 0.0;
    for (int k = 0; k < 50; ++k) {
      Rng r = rng.spawn(3000 + k);
      auto chain = Order2Chain::random(w, r);
      auto policy = Order2Policy::random(w, n, r);
      auto d = random_distortion(w, r);
      auto rep = mth_order_check(chain, policy, n, d);
      worst_mi = std::max(worst_mi, rep.mi_residual);
      worst_dist = std::max(worst_dist, rep.dist_residual);
    }
    rows.push_back({"theorem2-order2-decomposition", worst_mi, 1e-9, worst_mi <= 1e-9});
    rows.push_back({"theorem2-order2-distortion", worst_dist, 1e-12, worst_dist <= 1e-12});
  }

  bool all_pass = true;
  std::printf("%-38s %14s %12s  %s\n", "identity", "residual", "tolerance", "status");
  for (const CheckRow& row : rows) {
    all_pass = all_pass && row.pass;
    std::printf("%-38s %14.3e %12.0e  %s\n", row.name.c_str(), row.residual, row.tol,
                row.pass ? "PASS" : "FAIL");
  }
  if (!all_pass) {
    std::printf("verification FAILED\n");
    return 1;
  }
  std::printf("all identities verified\n");
  return 0;
}

// ---------------- synth-sweep ----------------

int cmd_synth_sweep(const Config& cfg, const std::string& out_dir, uint64_t seed, int jobs) {
  Source src = build_source(cfg);
  TrainConfig base = train_config_from(cfg, seed);
  std::vector<double> values = parse_double_list(cfg.get("sweep.values"));
  if (values.empty()) throw ConfigError("sweep.values is empty");
  std::string mode = cfg.get_or("sweep.mode", "adc");
  if (mode == "adc")
    base.mode = ConstraintMode::ADC;
  else if (mode == "idc")
    base.mode = ConstraintMode::IDC;
  else
    throw ConfigError("sweep.mode must be adc or idc");
  int rollouts = cfg.get_int_or("sweep.rollouts", 200);
  bool with_myopic = cfg.get_int_or("sweep.myopic", 0) != 0;
  std::string prefix = cfg.get_or("output.prefix", "sweep");

  fs::create_directories(out_dir);
  std::string prov = provenance_line(cfg, seed);

  std::vector<LearningCurve> curves;
  auto records = put_sweep(base, values, src.chain, src.init, src.dist, rollouts, jobs,
                           &curves);
  for (size_t i = 0; i < curves.size(); ++i) {
    if (records[i].failed) continue;
    std::ostringstream name;
    name << prefix << "_learning_" << i << ".csv";
    write_learning_csv(curves[i], (fs::path(out_dir) / name.str()).string(), prov);
  }

  if (with_myopic && base.mode == ConstraintMode::ADC) {
    size_t count = records.size();
    for (size_t i = 0; i < count; ++i) {
      if (records[i].failed) continue;
      PutRecord rec;
      rec.policy_name = "myopic";
      rec.constraint_mode = "adc";
      rec.constraint_value = records[i].avg_distortion;
      rec.lambda = records[i].lambda;
      rec.n = base.n;
      rec.rollouts = rollouts;
      rec.seed = records[i].seed;
      try {
        Rng mrng = Rng(seed).spawn(5000 + i);
        auto my = run_myopic(src.chain, src.init, src.dist, records[i].avg_distortion, base.n,
                             rollouts, mrng);
        rec.avg_leakage_nats = my.avg_leakage;
        rec.avg_distortion = my.avg_distortion;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
      records.push_back(std::move(rec));
    }
  }
  write_put_csv(records, (fs::path(out_dir) / (prefix + "_put.csv")).string(), prov);
  std::printf("wrote %s/%s_put.csv (%zu rows)\n", out_dir.c_str(), prefix.c_str(),
              records.size());
  return 0;
}

// ---------------- train / eval ----------------

int cmd_train(const Config& cfg, const std::string& out_dir, uint64_t seed) {
  Source src = build_source(cfg);
  TrainConfig tc = train_config_from(cfg, seed);
  TrainResult tr = train(tc, src.chain, src.init, src.dist);
  fs::create_directories(out_dir);
  std::string prov = provenance_line(cfg, seed);
  save_checkpoint(tr.actor, (fs::path(out_dir) / "actor.ckpt").string());
  save_checkpoint(tr.critic, (fs::path(out_dir) / "critic.ckpt").string());
  write_learning_csv(tr.curve, (fs::path(out_dir) / "learning.csv").string(), prov);
  std::printf("trained %d episodes; final avg cost %.6f\n", tc.episodes,
              tr.curve.avg_cost.back());
  return 0;
}

int cmd_eval(const Config& cfg, const std::string& out_file, uint64_t seed) {
  Source src = build_source(cfg);
  TrainConfig tc = train_config_from(cfg, seed);
  std::string ckpt = cfg.get("eval.actor");
  if (!fs::exists(ckpt)) throw std::runtime_error("missing checkpoint: " + ckpt);
  MLP actor = load_checkpoint(ckpt);
  int w = src.chain.size();
  ActionMode mode;
  if (actor.sizes.back() == w * w)
    mode = ActionMode::StateConditioned;
  else if (actor.sizes.back() == w * w * w)
    mode = ActionMode::PairConditioned;
  else
    throw std::runtime_error("checkpoint output size does not fit the alphabet");
  int rollouts = cfg.get_int_or("eval.rollouts", 200);
  int n = cfg.get_int_or("eval.n", tc.n);
  Rng rng = Rng(seed).spawn(7);
  EvalResult ev =
      evaluate_actor(actor, mode, src.chain, src.init, src.dist, env_config_from(tc), n,
                     rollouts, rng);
  PutRecord rec;
  rec.policy_name = cfg.get_or("eval.name", "checkpoint");
  rec.constraint_mode = tc.mode == ConstraintMode::ADC ? "adc" : "idc";
  rec.constraint_value = tc.mode == ConstraintMode::ADC ? tc.dbar : tc.dhat;
  rec.lambda = tc.mode == ConstraintMode::ADC ? tc.lambda : 0.0;
  rec.avg_leakage_nats = ev.avg_leakage;
  rec.avg_distortion = ev.avg_distortion;
  rec.n = n;
  rec.rollouts = rollouts;
  rec.seed = seed;
  write_put_csv({rec}, out_file, provenance_line(cfg, seed));
  std::printf("leakage %.6f nats, distortion %.6f\n", ev.avg_leakage, ev.avg_distortion);
  return 0;
}

// ---------------- geolife ----------------

int cmd_geolife(const Config& cfg, const std::string& out_dir) {
  std::string input_dir = cfg.get("geolife.input_dir");
  double eps_m = cfg.get_double_or("geolife.eps_m", 200.0);
  int min_pts = cfg.get_int_or("geolife.min_pts", 10);
  double stride_s = cfg.get_double_or("geolife.stride_s", 60.0);
  double alpha = cfg.get_double_or("geolife.alpha", 0.5);

  std::vector<std::string> files;
  if (fs::is_directory(input_dir))
    for (const auto& entry : fs::directory_iterator(input_dir))
      if (entry.path().extension() == ".plt") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());

  std::vector<std::vector<GpsPoint>> trajectories;
  for (const std::string& f : files) trajectories.push_back(load_plt(f));
  size_t total_points = 0;
  for (const auto& t : trajectories) total_points += t.size();
  if (total_points == 0) throw std::runtime_error("no parseable PLT points under " + input_dir);

  std::vector<GpsPoint> all;
  all.reserve(total_points);
  for (const auto& t : trajectories) all.insert(all.end(), t.begin(), t.end());
  ClusterModel model = dbscan(all, eps_m, min_pts);
  if (model.centers.empty()) throw std::runtime_error("DBSCAN produced no clusters");

  std::vector<std::vector<int>> sequences;
  size_t offset = 0;
  for (const auto& t : trajectories) {
    std::vector<int> assign(model.assignments.begin() + offset,
                            model.assignments.begin() + offset + t.size());
    offset += t.size();
    auto seq = to_symbol_sequence(t, assign, model, stride_s);
    if (!seq.empty()) sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) throw std::runtime_error("all symbol sequences came out empty");
  UserModel um = build_user_model(sequences, model, alpha);

  fs::create_directories(out_dir);
  std::string prov = provenance_line(cfg, 0);
  save_cluster_csv(model, (fs::path(out_dir) / "clusters.csv").string(), prov);
  save_sequences_csv(sequences, (fs::path(out_dir) / "sequences.csv").string(), prov);
  save_transition_csv(um.chain, (fs::path(out_dir) / "transition.csv").string());
  save_distortion_csv(um.distortion, (fs::path(out_dir) / "distortion.csv").string());

  int noise = 0;
  for (int a : model.assignments) noise += a < 0;
  size_t symbols = 0;
  for (const auto& s : sequences) symbols += s.size();
  std::ostringstream report;
  report << "# " << prov << "\n";
  report << "files=" << files.size() << "\n";
  report << "points=" << total_points << "\n";
  report << "clusters=" << model.centers.size() << "\n";
  report << "noise_points=" << noise << "\n";
  report << "sequences=" << sequences.size() << "\n";
  report << "symbols=" << symbols << "\n";
  atomic_write((fs::path(out_dir) / "report.txt").string(), report.str());
  std::printf("%zu clusters from %zu points (%d noise)\n", model.centers.size(), total_points,
              noise);
  return 0;
}

// ---------------- adversary ----------------

int cmd_adversary(const Config& cfg, const std::string& out_file, uint64_t seed) {
  Source src = build_source(cfg);
  int w = src.chain.size();
  std::vector<int> m_values = parse_int_list(cfg.get_or("adversary.m_values", "1,5"));
  int rollouts = cfg.get_int_or("adversary.rollouts", 100);
  int eval_rollouts = cfg.get_int_or("adversary.eval_rollouts", 50);
  double alpha = cfg.get_double_or("adversary.alpha", 0.1);
  int n = cfg.get_int_or("adversary.n", 300);
  TrainConfig tc = train_config_from(cfg, seed);

  std::vector<AdversaryPolicy> policies;
  Rng eval_rng = Rng(seed).spawn(11);

  auto add_kernel_policy = [&](const std::string& name, double constraint,
                               const PolicyFn& fn, const EnvConfig& ecfg) {
    AdversaryPolicy p;
    p.name = name;
    p.constraint_value = constraint;
    Rng r = eval_rng.spawn(policies.size() + 1);
    EvalResult ev =
        evaluate_policy(fn, src.chain, src.init, src.dist, ecfg, n, eval_rollouts, r);
    p.avg_leakage = ev.avg_leakage;
    p.avg_distortion = ev.avg_distortion;
    p.sample = [fn, &src, ecfg, n](int count, Rng& rng) {
      return policy_traces(fn, src.chain, src.init, src.dist, ecfg, n, count, rng);
    };
    policies.push_back(std::move(p));
  };

  if (cfg.get_int_or("policies.truthful", 1) != 0) {
    ActionKernel truth = ActionKernel::truthful(w, ActionMode::StateConditioned);
    EnvConfig ecfg;
    add_kernel_policy("truthful", 0.0, [truth](const Belief&, Rng&) { return truth; }, ecfg);
  }
  for (double dhat : parse_double_list(cfg.get_or("policies.idc_values", ""))) {
    ActionKernel ball = apply_idc_mask(ActionKernel::uniform(w, ActionMode::StateConditioned),
                                       src.dist, dhat);
    EnvConfig ecfg;
    ecfg.mode = ConstraintMode::IDC;
    ecfg.dhat = dhat;
    add_kernel_policy("idc-uniform", dhat, [ball](const Belief&, Rng&) { return ball; }, ecfg);
  }
  std::vector<std::unique_ptr<MyopicPlan>> plans;
  for (double dbar : parse_double_list(cfg.get_or("policies.myopic_values", ""))) {
    plans.push_back(std::make_unique<MyopicPlan>(src.chain, src.dist, src.init, dbar, n));
    MyopicPlan* plan = plans.back().get();
    AdversaryPolicy p;
    p.name = "myopic";
    p.constraint_value = dbar;
    p.avg_leakage = plan->expected_leakage();
    p.avg_distortion = plan->expected_distortion();
    p.sample = [plan](int count, Rng& rng) { return myopic_traces(*plan, count, rng); };
    policies.push_back(std::move(p));
  }
  {
    std::string list = cfg.get_or("policies.checkpoints", "");
    std::istringstream in(list);
    std::string path;
    while (std::getline(in, path, ',')) {
      if (path.empty()) continue;
      if (!fs::exists(path)) throw std::runtime_error("missing checkpoint: " + path);
      MLP actor = load_checkpoint(path);
      ActionMode mode = actor.sizes.back() == w * w ? ActionMode::StateConditioned
                                                    : ActionMode::PairConditioned;
      EnvConfig ecfg = env_config_from(tc);
      std::string name = tc.mode == ConstraintMode::ADC ? "pdrp-adc" : "pdrp-idc";
      double constraint = tc.mode == ConstraintMode::ADC ? tc.lambda : tc.dhat;
      add_kernel_policy(name, constraint,
                        frozen_actor_policy(actor, mode, src.dist, ecfg), ecfg);
    }
  }
  if (policies.empty()) throw ConfigError("no policies configured");

  Rng rng = Rng(seed).spawn(13);
  auto rows = compare_policies(policies, w, m_values, rollouts, alpha, rng);
  write_adversary_csv(rows, m_values, out_file, provenance_line(cfg, seed));
  std::printf("wrote %s (%zu rows)\n", out_file.c_str(), rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-utility trade-off toolkit for Markov time series"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  uint64_t seed = 1;
  int jobs = 1;
  bool inject_belief_bug = false;

  auto* verify = app.add_subcommand("verify", "run the exact-enumeration identity suite");
  verify->add_option("--seed", seed, "master seed");
  verify->add_flag("--inject-belief-bug", inject_belief_bug,
                   "corrupt the belief recursion (test fixture; must fail)");

  auto* sweep = app.add_subcommand("synth-sweep", "train and sweep on a synthetic grid source");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_path, "output directory")->required();
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--jobs", jobs, "worker threads");

  auto* train_cmd = app.add_subcommand("train", "train a single policy");
  train_cmd->add_option("--config", config_path, "config file")->required();
  train_cmd->add_option("--out", out_path, "output directory")->required();
  train_cmd->add_option("--seed", seed, "master seed");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy checkpoint");
  eval_cmd->add_option("--config", config_path, "config file")->required();
  eval_cmd->add_option("--out", out_path, "output CSV file")->required();
  eval_cmd->add_option("--seed", seed, "master seed");

  auto* geolife_cmd = app.add_subcommand("geolife", "GPS-trace clustering pipeline");
  geolife_cmd->add_option("--config", config_path, "config file")->required();
  geolife_cmd->add_option("--out", out_path, "output directory")->required();

  auto* adversary_cmd = app.add_subcommand("adversary", "m-gram adversary comparison");
  adversary_cmd->add_option("--config", config_path, "config file")->required();
  adversary_cmd->add_option("--out", out_path, "output CSV file")->required();
  adversary_cmd->add_option("--seed", seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(verify)) return cmd_verify(seed, inject_belief_bug);
    Config cfg = load_config(config_path);
    if (app.got_subcommand(sweep)) return cmd_synth_sweep(cfg, out_path, seed, jobs);
    if (app.got_subcommand(train_cmd)) return cmd_train(cfg, out_path, seed);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(cfg, out_path, seed);
    if (app.got_subcommand(geolife_cmd)) return cmd_geolife(cfg, out_path);
    if (app.got_subcommand(adversary_cmd)) return cmd_adversary(cfg, out_path, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
