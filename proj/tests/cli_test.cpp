// Drives the command-line binary as a subprocess and checks exit codes and
// outputs against direct library calls.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "bidders.hpp"
#include "evaluation.hpp"
#include "io.hpp"

namespace fs = std::filesystem;
using namespace risauction;

namespace {

int g_failures = 0;
std::string g_cli;
fs::path g_dir;

void check(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "check failed: " << what << "\n";
    ++g_failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

void write_config(const fs::path& p) {
  std::ofstream(p) << R"({
  "scenario": {"n_ue": 6, "n_ris": 3, "m_bs": 8, "m_ris": 16},
  "train": {"total_steps": 256, "n_steps": 128, "hidden": [8], "eval_episodes": 1},
  "evaluation": {"n_macro": 3, "n_micro": 2}
})";
}

void test_accuracy() {
  const fs::path out = g_dir / "acc";
  const int code = run("accuracy --seed 5 --n-ue 6 --n-ris 3 --m-ris 16 --mbs 10,25,50,100 --macro 2 --micro 4 --out " +
                       out.string());
  check(code == 0, "accuracy exits 0");
  const std::string csv = slurp(out / "sinr_accuracy.csv");
  check(count_lines(csv) == 5, "accuracy CSV has a header and 4 rows");
  check(fs::exists(out / "manifest.json"), "accuracy writes a manifest");
}

void test_train_reproducible(const fs::path& cfg) {
  const fs::path a = g_dir / "train_a";
  const fs::path b = g_dir / "train_b";
  const std::string common = "train --beta 2 --seed 7 --jobs 1 --config " + cfg.string() + " --out ";
  check(run(common + a.string()) == 0, "first train exits 0");
  check(run(common + b.string()) == 0, "second train exits 0");
  const std::string pa = slurp(a / "policy.json");
  check(!pa.empty() && pa == slurp(b / "policy.json"), "same seed gives identical policy.json");
  check(slurp(a / "learning_curve.csv") == slurp(b / "learning_curve.csv"), "same seed gives identical curves");
}

void test_evaluate_matches_library(const fs::path& cfg_path) {
  const fs::path out = g_dir / "eval";
  check(run("evaluate --strategy value-heuristic --seed 13 --jobs 2 --config " + cfg_path.string() + " --out " +
            out.string()) == 0,
        "evaluate exits 0");

  RunConfig cfg;
  merge_json(cfg, read_json_file(cfg_path));
  cfg.validate();
  const Strategy s = uniform_strategy(BidderSpec::parse("value-heuristic"), cfg.scenario.n_bs);
  const EvalReport report = evaluate_strategies(cfg.eval_config(1), std::span<const Strategy>(&s, 1), 13);
  check(slurp(out / "eval_report.csv") == eval_report_csv(report), "CLI report equals the library report");
}

void test_usage_errors(const fs::path& cfg) {
  check(run("evaluate --no-such-flag") == 2, "unknown flag exits 2");
  check(run("") == 2, "missing subcommand exits 2");
  check(run("accuracy --seed 1 --mbs ten --out " + (g_dir / "bad_mbs").string()) == 2, "bad antenna list exits 2");
  check(run("evaluate --seed 1 --config " + cfg.string() + " --strategy rl:" + (g_dir / "missing.json").string() +
            " --out " + (g_dir / "bad_ckpt").string()) == 2,
        "missing checkpoint exits 2");
  check(run("--version") == 0, "version exits 0");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cli_test <path to risauction binary>\n";
    return 1;
  }
  g_cli = argv[1];
  g_dir = fs::temp_directory_path() / ("ra_cli_" + std::to_string(::getpid()));
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  const fs::path cfg = g_dir / "config.json";
  write_config(cfg);

  test_accuracy();
  test_train_reproducible(cfg);
  test_evaluate_matches_library(cfg);
  test_usage_errors(cfg);

  fs::remove_all(g_dir);
  if (g_failures) {
    std::cerr << g_failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "cli_test: all checks passed\n";
  return 0;
}
