// End-to-end checks of the zovr-bench executable: exit codes, output files,
// and byte-level determinism. The binary path arrives via ZOVR_BENCH.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "zovr/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

CmdResult run_cmd(const std::string& args, const std::string& env = "") {
  const char* bench = std::getenv("ZOVR_BENCH");
  REQUIRE_MESSAGE(bench != nullptr, "ZOVR_BENCH must point at the harness binary");
  const std::string cmd = env + " \"" + bench + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "zovr_cli_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage errors exit 2") {
  CHECK(run_cmd("").exit_code == 2);
  CHECK(run_cmd("run --algo rgf --out /tmp/x.csv").exit_code == 2);  // missing --problem
  CHECK(run_cmd("run --problem quadratic:d=2 --algo nope --out /tmp/x.csv --mu 0.01 "
                "--iters 3")
            .exit_code == 2);
  CHECK(run_cmd("run --problem quadratic:d=2 --algo rgf --out /tmp/x.csv --mu 0.01 "
                "--iters 3 --constants other")
            .exit_code == 2);
  CHECK(run_cmd("compare --problem quadratic:d=2 --algos rgf --threshold 1 "
                "--out /tmp/x.csv --mu 0.01 --iters 3")
            .exit_code == 2);
  // Explicit szvr configuration is all-or-nothing.
  const auto r = run_cmd("run --problem quadratic:d=2 --algo szvr-g --out /tmp/x.csv "
                         "--eta 0.1 --mu 0.01");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("--auto-eps") != std::string::npos);
}

TEST_CASE("unreadable or malformed datasets exit 3") {
  CHECK(run_cmd("run --problem logistic:data=/no/such/file.csv --algo rgf "
                "--out /tmp/x.csv --mu 0.01 --iters 3")
            .exit_code == 3);
  const fs::path bad = scratch_dir() / "bad.csv";
  std::ofstream(bad, std::ios::binary) << "f1,label\n1,2,3\n";
  const auto r = run_cmd("run --problem logistic:data=" + bad.string() +
                         " --algo rgf --out /tmp/x.csv --mu 0.01 --iters 3");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("line 2") != std::string::npos);
}

TEST_CASE("a diverging run exits 4 and salvages a partial trace") {
  const fs::path out = scratch_dir() / "diverged.csv";
  fs::remove(out);
  const auto r = run_cmd("run --problem quadratic:d=2 --algo szvr-g --out " + out.string() +
                         " --eta 1e160 --mu 0.01 --inner-iters 10 --epochs 1 --batch 1 "
                         "--x0 0.5");
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("partial trace written") != std::string::npos);
  const auto t = zovr::read_trace_csv(out);
  CHECK(!t.records.empty());
}

TEST_CASE("run writes a parseable trace and repeats byte-for-byte") {
  const fs::path out = scratch_dir() / "run.csv";
  const std::string args = "run --problem quadratic:d=6 --algo szvr-g --auto-eps 0.1 "
                           "--constants unit --budget 4000 --seeds 7 --out " +
                           out.string();
  const auto r1 = run_cmd(args);
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("seed 7:") != std::string::npos);
  const std::string first = slurp(out);
  const auto t = zovr::read_trace_csv(out);
  CHECK(!t.records.empty());
  CHECK(t.records.front().szo == 0);

  CHECK(run_cmd(args).exit_code == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("ZOVR_THREADS never changes the bytes, only the wall time") {
  const fs::path serial = scratch_dir() / "serial.csv";
  const fs::path pooled = scratch_dir() / "pooled.csv";
  const std::string tail = "run --problem quadratic:d=5 --algo rsg --mu 0.01 "
                           "--iters 200 --seeds 1..4 --x0 1 --out ";
  CHECK(run_cmd(tail + serial.string(), "ZOVR_THREADS=0").exit_code == 0);
  CHECK(run_cmd(tail + pooled.string(), "ZOVR_THREADS=4").exit_code == 0);
  for (int seed = 1; seed <= 4; ++seed) {
    CAPTURE(seed);
    const std::string tag = ".seed" + std::to_string(seed) + ".csv";
    const std::string a = slurp(scratch_dir() / ("serial" + tag));
    CHECK(!a.empty());
    CHECK(a == slurp(scratch_dir() / ("pooled" + tag)));
  }
}

TEST_CASE("multi-seed runs tag the output files; single seed does not") {
  const fs::path out = scratch_dir() / "tagged.csv";
  fs::remove(out);
  CHECK(run_cmd("run --problem quadratic:d=3 --algo rgf --mu 0.01 --iters 10 "
                "--seeds 2,9 --x0 1 --out " +
                out.string())
            .exit_code == 0);
  CHECK(!fs::exists(out));
  CHECK(fs::exists(scratch_dir() / "tagged.seed2.csv"));
  CHECK(fs::exists(scratch_dir() / "tagged.seed9.csv"));
  CHECK(run_cmd("run --problem quadratic:d=3 --algo rgf --mu 0.01 --iters 10 "
                "--seeds 2 --x0 1 --out " +
                out.string())
            .exit_code == 0);
  CHECK(fs::exists(out));
}

TEST_CASE("budget truncation is recorded in the trace and announced") {
  const fs::path out = scratch_dir() / "trunc.csv";
  const auto r = run_cmd("run --problem quadratic:d=4 --algo rsg --mu 0.01 --iters 100 "
                         "--budget 51 --x0 1 --out " +
                         out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("(budget truncated)") != std::string::npos);
  const auto t = zovr::read_trace_csv(out);
  CHECK(t.truncated);
  CHECK(t.records.back().szo == 50);  // two evaluations per step never split
}

TEST_CASE("compare writes the summary table with medians per algorithm") {
  const fs::path out = scratch_dir() / "cmp.csv";
  const auto r = run_cmd("compare --problem quadratic:d=3 --algos rgf,rsg "
                         "--threshold 1e-6 --mu 1e-4 --budget 4000 --seeds 1,2,3 "
                         "--x0 1 --out " +
                         out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("rgf") != std::string::npos);
  CHECK(r.output.find("median evals-to-threshold") != std::string::npos);
  std::istringstream csv(slurp(out));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "algo,seed,evals_to_threshold,final_f,final_grad_sq");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);

  // An unreachable threshold reports the sentinel, not a number.
  const auto r2 = run_cmd("compare --problem quadratic:d=3 --algos rgf,rsg "
                          "--threshold 1e-300 --mu 1e-4 --budget 400 --seeds 1 "
                          "--x0 1 --out " +
                          out.string());
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out).find(">budget") != std::string::npos);
  CHECK(r2.output.find(">budget") != std::string::npos);
}

TEST_CASE("config files feed defaults and explicit flags still win") {
  const fs::path cfg = scratch_dir() / "run.cfg";
  std::ofstream(cfg, std::ios::binary) << "mu=0.01\niters=40\nx0=1\n";
  const fs::path a = scratch_dir() / "cfg_a.csv";
  const fs::path b = scratch_dir() / "cfg_b.csv";
  const fs::path c = scratch_dir() / "cfg_c.csv";
  const std::string base = "run --problem quadratic:d=4 --algo rgf --seeds 3 ";
  CHECK(run_cmd(base + "--config " + cfg.string() + " --out " + a.string()).exit_code == 0);
  CHECK(run_cmd(base + "--mu 0.01 --iters 40 --x0 1 --out " + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  // --iters on the command line overrides the config file's value.
  CHECK(run_cmd(base + "--config " + cfg.string() + " --iters 10 --out " + c.string())
            .exit_code == 0);
  const auto tc = zovr::read_trace_csv(c);
  CHECK(tc.records.back().szo == 2 * 10);
}

TEST_CASE("verify prints one row per check and exits by the outcome") {
  const auto r = run_cmd("verify --seed 12345");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("checks, 0 failed") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
  // One header plus one row per check plus the summary line.
  int lines = 0;
  for (char ch : r.output)
    if (ch == '\n') ++lines;
  CHECK(lines >= 60);
}

TEST_SUITE_END();
