#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(PUT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof(buf), pipe)) res.output.append(buf, got);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("verify subcommand passes and prints one row per identity") {
  auto res = run("verify --seed 3");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("belief-consistency") != std::string::npos);
  CHECK(res.output.find("chain-rule-identity") != std::string::npos);
  CHECK(res.output.find("FAIL") == std::string::npos);
  CHECK(res.output.find("all identities verified") != std::string::npos);
}

TEST_CASE("the injected belief bug is caught") {
  auto res = run("verify --seed 3 --inject-belief-bug");
  CHECK(res.exit_code == 1);
  auto pos = res.output.find("belief-consistency");
  REQUIRE(pos != std::string::npos);
  CHECK(res.output.find("FAIL", pos) != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
  auto missing = run("synth-sweep --config /nonexistent.cfg --out /tmp/put_cli_x");
  CHECK(missing.exit_code == 2);

  auto bad = write_config("put_cli_bad.cfg",
                          "[sweep]\nvalues = 0.5, banana\n[output]\nprefix = s\n");
  auto res = run("synth-sweep --config " + bad.string() + " --out /tmp/put_cli_x");
  CHECK(res.exit_code == 2);

  auto unknown = run("frobnicate");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("synth-sweep writes deterministic outputs with provenance") {
  auto cfg = write_config("put_cli_sweep.cfg",
                          "[source]\nkind = synth\nwidth = 2\nheight = 1\nfamily = q0\n"
                          "[sweep]\nmode = adc\nvalues = 0.5\nrollouts = 10\n"
                          "[train]\nn = 6\nepisodes = 10\nhidden = 8\n"
                          "[output]\nprefix = mini\n");
  fs::path out1 = fs::temp_directory_path() / "put_cli_sweep1";
  fs::path out2 = fs::temp_directory_path() / "put_cli_sweep2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  auto r1 = run("synth-sweep --config " + cfg.string() + " --out " + out1.string() + " --seed 9");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(fs::exists(out1 / "mini_put.csv"));
  REQUIRE(fs::exists(out1 / "mini_learning_0.csv"));
  std::string put_csv = slurp(out1 / "mini_put.csv");
  CHECK(put_csv.find("config_hash=") != std::string::npos);
  CHECK(put_csv.find("seed=9") != std::string::npos);
  CHECK(put_csv.find("version=put-0.1.0") != std::string::npos);

  auto r2 = run("synth-sweep --config " + cfg.string() + " --out " + out2.string() + " --seed 9");
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out2 / "mini_put.csv") == put_csv);
  CHECK(slurp(out2 / "mini_learning_0.csv") == slurp(out1 / "mini_learning_0.csv"));

  // a different seed changes the numbers
  fs::path out3 = fs::temp_directory_path() / "put_cli_sweep3";
  fs::remove_all(out3);
  auto r3 = run("synth-sweep --config " + cfg.string() + " --out " + out3.string() + " --seed 10");
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(out3 / "mini_put.csv") != put_csv);

  fs::remove_all(out1);
  fs::remove_all(out2);
  fs::remove_all(out3);
}

TEST_CASE("train then eval round trip") {
  auto cfg = write_config("put_cli_train.cfg",
                          "[source]\nkind = synth\nwidth = 2\nheight = 1\nfamily = q0\n"
                          "[train]\nn = 6\nepisodes = 10\nhidden = 8\nlambda = 0.5\n");
  fs::path out = fs::temp_directory_path() / "put_cli_train_out";
  fs::remove_all(out);
  auto r = run("train --config " + cfg.string() + " --out " + out.string() + " --seed 4");
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(out / "actor.ckpt"));
  REQUIRE(fs::exists(out / "critic.ckpt"));
  REQUIRE(fs::exists(out / "learning.csv"));

  auto ecfg = write_config("put_cli_eval.cfg",
                           "[source]\nkind = synth\nwidth = 2\nheight = 1\nfamily = q0\n"
                           "[train]\nn = 6\nlambda = 0.5\n"
                           "[eval]\nactor = " + (out / "actor.ckpt").string() +
                               "\nrollouts = 10\n");
  fs::path eval_csv = fs::temp_directory_path() / "put_cli_eval.csv";
  auto e = run("eval --config " + ecfg.string() + " --out " + eval_csv.string() + " --seed 4");
  REQUIRE(e.exit_code == 0);
  std::string body = slurp(eval_csv);
  CHECK(body.find("avg_leakage_nats") != std::string::npos);
  fs::remove_all(out);
  fs::remove(eval_csv);
}
