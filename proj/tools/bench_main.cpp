// Experiment harness: run one optimizer and emit checkpoint traces, compare
// several on a shared problem and budget, or print the bound-verification
// table. All randomness flows from --seeds; repeated invocations are
// byte-identical, including across ZOVR_THREADS settings.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "zovr/core.hpp"
#include "zovr/optimizers.hpp"
#include "zovr/oracles.hpp"
#include "zovr/problems.hpp"
#include "zovr/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitObjective = 4;
constexpr int kExitVerifyFail = 5;

using zovr::BlackBoxProblem;
using zovr::Trace;
using zovr::Vec;

// --- flag plumbing ---------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// "1,3,7-9" or "1..5": comma-separated values and inclusive ranges.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) throw std::invalid_argument("empty seed token in '" + s + "'");
    auto range_at = tok.find("..");
    std::size_t range_len = 2;
    if (range_at == std::string::npos) {
      range_at = tok.find('-', 1);  // skip a leading sign position
      range_len = 1;
    }
    try {
      if (range_at == std::string::npos) {
        seeds.push_back(std::stoull(tok));
      } else {
        const std::uint64_t lo = std::stoull(tok.substr(0, range_at));
        const std::uint64_t hi = std::stoull(tok.substr(range_at + range_len));
        if (hi < lo) throw std::invalid_argument("descending seed range '" + tok + "'");
        if (hi - lo > 100000) throw std::invalid_argument("seed range too large: '" + tok + "'");
        for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad seed token '" + tok + "'");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  return seeds;
}

// Selector grammar: name[:key=value[,key=value...]], e.g.
//   quadratic:d=10
//   logistic:data=data/logistic_synth.csv
//   sigmoid-ls:data=data/logistic_synth.csv
//   attack:model=data/attack_model.csv,images=data/attack_images.csv,C=1
struct SelectorArgs {
  std::string name;
  std::vector<std::pair<std::string, std::string>> kv;

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    return std::nullopt;
  }
  std::string require(const std::string& key) const {
    if (auto v = get(key)) return *v;
    throw std::invalid_argument("problem '" + name + "' needs " + key + "=...");
  }
  double number(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number for " + key + ": '" + *v + "'");
    }
  }
};

SelectorArgs parse_selector(const std::string& sel) {
  SelectorArgs out;
  const auto colon = sel.find(':');
  out.name = sel.substr(0, colon);
  if (colon != std::string::npos) {
    for (const auto& pair : split(sel.substr(colon + 1), ',')) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("bad problem parameter '" + pair + "' (want key=value)");
      out.kv.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
    }
  }
  return out;
}

BlackBoxProblem build_problem(const std::string& sel) {
  const auto args = parse_selector(sel);
  if (args.name == "quadratic") {
    const double dv = args.number("d", 0.0);
    const int d = static_cast<int>(dv);
    if (d < 1 || d != dv) throw std::invalid_argument("quadratic needs an integer d >= 1");
    return zovr::make_quadratic(d).problem;
  }
  if (args.name == "logistic") {
    return zovr::make_logistic(zovr::load_dataset_csv(args.require("data")));
  }
  if (args.name == "sigmoid-ls") {
    return zovr::make_sigmoid_least_squares(zovr::load_dataset_csv(args.require("data")));
  }
  if (args.name == "attack") {
    const auto model = zovr::load_model_csv(args.require("model"));
    const auto images = zovr::load_dataset_csv(args.require("images"));
    return zovr::make_universal_attack(model, images, args.number("C", 1.0),
                                       args.number("kappa", 0.0), args.number("box", 1.0));
  }
  throw std::invalid_argument("unknown problem '" + args.name +
                              "' (quadratic, logistic, sigmoid-ls, attack)");
}

int thread_cap() {
  const char* env = std::getenv("ZOVR_THREADS");
  if (!env || !*env) return 0;
  const int v = std::atoi(env);
  return v < 0 ? 0 : v;
}

// Runs fn(0..count-1), possibly on `threads` workers. Output order is the
// caller's concern; fn must only touch its own slot.
void for_each_index(int count, const std::function<void(int)>& fn) {
  const int threads = std::min(thread_cap(), count);
  if (threads < 2) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

// --- shared run machinery ---------------------------------------------------

enum class Algo { kSzvrG, kSzvrGMb, kRgf, kRsg };

Algo parse_algo(const std::string& s) {
  if (s == "szvr-g") return Algo::kSzvrG;
  if (s == "szvr-g-mb") return Algo::kSzvrGMb;
  if (s == "rgf") return Algo::kRgf;
  if (s == "rsg") return Algo::kRsg;
  throw std::invalid_argument("unknown algorithm '" + s +
                              "' (szvr-g, szvr-g-mb, rgf, rsg)");
}

const char* algo_name(Algo a) {
  switch (a) {
    case Algo::kSzvrG: return "szvr-g";
    case Algo::kSzvrGMb: return "szvr-g-mb";
    case Algo::kRgf: return "rgf";
    case Algo::kRsg: return "rsg";
  }
  return "?";
}

// Everything resolved from flags/config file except the per-seed choices.
struct RunPlan {
  bool has_auto = false;
  double eps = 0.0;
  int b0 = 1;
  zovr::TheoryConstants tc = zovr::TheoryConstants::benchmark();
  std::optional<double> eta, mu, q, r_hat;
  std::optional<int> K, S, D, B;
  std::optional<std::int64_t> iters;
  std::uint64_t budget = zovr::kNoBudget;
  int stride = 0;
  std::vector<double> x0;  // empty: origin; one value: broadcast
  std::string config_path;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Flat `key = value` config files mirror the long flags. CLI11 applies
// config files only on the root command, so the file is expanded into flag
// tokens inserted just after the subcommand name; explicit flags come later
// in the argument list and win under the take-last policy.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto where = [&] { return "config " + path + " line " + std::to_string(lineno); };
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where() + ": want key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.front() == '-')
      throw std::invalid_argument(where() + ": bad key '" + key + "'");
    if (key == "config") throw std::invalid_argument(where() + ": config files do not nest");
    if (value.empty()) throw std::invalid_argument(where() + ": empty value for '" + key + "'");
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  if (path.empty()) return args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "run" || args[i] == "compare") {
      const auto tokens = config_tokens(path);
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, tokens.begin(),
                  tokens.end());
      break;
    }
  }
  return args;
}

Vec resolve_x0(const RunPlan& plan, int d) {
  if (plan.x0.empty()) return {};
  if (plan.x0.size() == 1) return Vec(d, plan.x0[0]);
  if (static_cast<int>(plan.x0.size()) == d) return Vec(plan.x0.begin(), plan.x0.end());
  throw std::invalid_argument("--x0 wants one value (broadcast) or exactly d values");
}

double default_mu(const BlackBoxProblem& p, double eps, const zovr::TheoryConstants& tc) {
  if (p.smoothness == zovr::Smoothness::kC11)
    return tc.c_mu * 2.0 * eps / (p.lipschitz * std::pow(p.d + 6.0, 1.5));
  return tc.c_mu * eps / (p.lipschitz * std::sqrt(static_cast<double>(p.d)));
}

// An estimate of f(x0) - f*, used only to size the epoch count.
double gap_estimate(const BlackBoxProblem& p, const RunPlan& plan) {
  zovr::QueryLedger scratch;
  Vec x0 = resolve_x0(plan, p.d);
  if (x0.empty()) x0 = zovr::zeros(p.d);
  return zovr::full_objective(p, x0, scratch, zovr::Phase::kReporting);
}

zovr::OptimizerConfig make_szvr_config(const BlackBoxProblem& p, const RunPlan& plan,
                                       std::uint64_t seed) {
  zovr::OptimizerConfig cfg;
  if (plan.has_auto) {
    const std::optional<double> r = plan.r_hat ? plan.r_hat
                                               : std::optional<double>(gap_estimate(p, plan));
    cfg = p.smoothness == zovr::Smoothness::kC11
              ? zovr::auto_config_smooth(p, plan.eps, plan.b0, plan.tc, seed, r, plan.budget)
              : zovr::auto_config_nonsmooth(p, plan.eps, plan.b0, plan.tc, seed, r,
                                            plan.budget);
  } else {
    if (!plan.eta || !plan.mu || !plan.K || !plan.S || !plan.B)
      throw std::invalid_argument(
          "explicit configuration needs --eta, --mu, --inner-iters, --epochs, --batch "
          "(or use --auto-eps)");
    cfg.eta = *plan.eta;
    cfg.mu = *plan.mu;
    cfg.K = *plan.K;
    cfg.S = *plan.S;
    cfg.D = plan.D.value_or(1);
    cfg.B = *plan.B;
    cfg.b0 = plan.b0;
    cfg.q = plan.q.value_or(0.0);
    cfg.eta_unclamped = cfg.eta;
    cfg.eval_budget = plan.budget;
    cfg.master_seed = seed;
  }
  // Explicit flags win over computed values.
  if (plan.eta) cfg.eta = *plan.eta;
  if (plan.mu) cfg.mu = *plan.mu;
  if (plan.K) cfg.K = *plan.K;
  if (plan.S) cfg.S = *plan.S;
  if (plan.D) cfg.D = *plan.D;
  if (plan.B) cfg.B = *plan.B;
  if (plan.q) cfg.q = *plan.q;
  cfg.checkpoint_stride = plan.stride;
  return cfg;
}

std::int64_t baseline_iterations(const RunPlan& plan, std::int64_t cost_per_iter) {
  if (plan.iters) return *plan.iters;
  if (plan.budget != zovr::kNoBudget)
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(plan.budget / cost_per_iter));
  throw std::invalid_argument("rgf/rsg need --iters or --budget");
}

Trace execute(const BlackBoxProblem& p, Algo algo, const RunPlan& plan,
              std::uint64_t seed, zovr::QueryLedger& ledger) {
  switch (algo) {
    case Algo::kSzvrG: {
      auto cfg = make_szvr_config(p, plan, seed);
      cfg.b0 = 1;
      return zovr::run_szvr_g(p, cfg, ledger, resolve_x0(plan, p.d));
    }
    case Algo::kSzvrGMb: {
      const auto cfg = make_szvr_config(p, plan, seed);
      return zovr::run_szvr_g_minibatch(p, cfg, ledger, resolve_x0(plan, p.d));
    }
    case Algo::kRgf: {
      zovr::RgfOptions opt;
      opt.eta = plan.eta ? *plan.eta : zovr::rgf_default_eta(p.d, p.lipschitz);
      if (plan.mu)
        opt.mu = *plan.mu;
      else if (plan.has_auto)
        opt.mu = default_mu(p, plan.eps, plan.tc);
      else
        throw std::invalid_argument("rgf needs --mu or --auto-eps");
      opt.iterations = baseline_iterations(plan, 2 * std::int64_t{p.n});
      opt.seed = seed;
      opt.eval_budget = plan.budget;
      opt.checkpoint_stride = plan.stride;
      return zovr::run_rgf(p, opt, ledger, resolve_x0(plan, p.d));
    }
    case Algo::kRsg: {
      zovr::RsgOptions opt;
      opt.eta = plan.eta ? *plan.eta : zovr::rgf_default_eta(p.d, p.lipschitz);
      if (plan.mu)
        opt.mu = *plan.mu;
      else if (plan.has_auto)
        opt.mu = default_mu(p, plan.eps, plan.tc);
      else
        throw std::invalid_argument("rsg needs --mu or --auto-eps");
      opt.iterations = baseline_iterations(plan, 2);
      opt.seed = seed;
      opt.eval_budget = plan.budget;
      opt.checkpoint_stride = plan.stride;
      return zovr::run_rsg(p, opt, ledger, resolve_x0(plan, p.d));
    }
  }
  throw std::logic_error("unhandled algorithm");
}

std::filesystem::path seed_path(const std::filesystem::path& out, std::uint64_t seed,
                                bool multi) {
  if (!multi) return out;
  std::filesystem::path p = out;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += ".seed" + std::to_string(seed);
  p += ext;
  return p;
}

// Per-run result slot for parallel execution; errors are re-thrown in seed
// order so behavior never depends on thread interleaving.
struct RunSlot {
  std::optional<Trace> trace;
  std::exception_ptr error;
};

// Registers the option flags shared by run and compare.
void add_plan_flags(CLI::App* cmd, RunPlan& plan, std::string& constants) {
  cmd->add_option("--auto-eps", plan.eps,
                  "Derive the schedule from a target accuracy")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--b0", plan.b0, "Pairs averaged per inner step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eta", plan.eta, "Step size");
  cmd->add_option("--mu", plan.mu, "Smoothing radius");
  cmd->add_option("--inner-iters", plan.K, "Inner steps per epoch");
  cmd->add_option("--epochs", plan.S, "Epoch count");
  cmd->add_option("--directions", plan.D, "Directions per epoch");
  cmd->add_option("--batch", plan.B, "Component batch per epoch");
  cmd->add_option("--q", plan.q, "Coupling parameter (diagnostic)");
  cmd->add_option("--r-hat", plan.r_hat,
                  "Optimality-gap estimate for epoch sizing (default: f at the origin)");
  cmd->add_option("--iters", plan.iters, "Iterations for rgf/rsg");
  cmd->add_option("--budget", plan.budget, "Evaluation budget (szo units)");
  cmd->add_option("--stride", plan.stride, "Checkpoint stride (0: K/10)");
  cmd->add_option("--x0", plan.x0, "Start point: one value broadcast to d, or d values")
      ->delimiter(',');
  cmd->add_option("--constants", constants, "Schedule constants: unit or benchmark")
      ->check(CLI::IsMember({"unit", "benchmark"}));
  cmd->add_option("--config", plan.config_path,
                  "Flat key=value file mirroring the long flags; explicit flags win");
}

void finish_plan(CLI::App* cmd, RunPlan& plan, const std::string& constants) {
  plan.has_auto = cmd->count("--auto-eps") > 0;
  plan.tc = constants == "unit" ? zovr::TheoryConstants::unit()
                                : zovr::TheoryConstants::benchmark();
  if (!cmd->count("--eta")) plan.eta.reset();
  if (!cmd->count("--mu")) plan.mu.reset();
  if (!cmd->count("--inner-iters")) plan.K.reset();
  if (!cmd->count("--epochs")) plan.S.reset();
  if (!cmd->count("--directions")) plan.D.reset();
  if (!cmd->count("--batch")) plan.B.reset();
  if (!cmd->count("--q")) plan.q.reset();
  if (!cmd->count("--r-hat")) plan.r_hat.reset();
  if (!cmd->count("--iters")) plan.iters.reset();
}

// --- subcommands -------------------------------------------------------------

int cmd_run(const std::string& problem_sel, const std::string& algo_name_,
            const RunPlan& plan, const std::string& seeds_text,
            const std::filesystem::path& out) {
  const auto problem = build_problem(problem_sel);
  const Algo algo = parse_algo(algo_name_);
  const auto seeds = parse_seeds(seeds_text);
  const bool multi = seeds.size() > 1;

  std::vector<RunSlot> slots(seeds.size());
  for_each_index(static_cast<int>(seeds.size()), [&](int i) {
    try {
      zovr::QueryLedger ledger;
      slots[i].trace = execute(problem, algo, plan, seeds[i], ledger);
    } catch (...) {
      slots[i].error = std::current_exception();
    }
  });

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (slots[i].error) {
      try {
        std::rethrow_exception(slots[i].error);
      } catch (const zovr::RunError& e) {
        // Salvage the partial trace before reporting the failure.
        zovr::write_trace_csv(e.trace, seed_path(out, seeds[i], multi));
        std::fprintf(stderr, "seed %" PRIu64 ": %s (partial trace written)\n", seeds[i],
                     e.what());
        return kExitObjective;
      }
    }
    const Trace& t = *slots[i].trace;
    zovr::write_trace_csv(t, seed_path(out, seeds[i], multi));
    const auto& last = t.records.back();
    std::printf("seed %" PRIu64 ": f=%s szo=%" PRIu64 " records=%zu%s\n", seeds[i],
                zovr::format_double(last.f).c_str(), last.szo, t.records.size(),
                t.truncated ? " (budget truncated)" : "");
  }
  return kExitOk;
}

// First checkpoint at or below the threshold, in szo units.
std::optional<std::uint64_t> evals_to_threshold(const Trace& t, double threshold) {
  for (const auto& r : t.records)
    if (r.grad_sq && *r.grad_sq <= threshold) return r.szo;
  return std::nullopt;
}

int cmd_compare(const std::string& problem_sel, const std::vector<std::string>& algo_names,
                const RunPlan& plan, const std::string& seeds_text, double threshold,
                const std::filesystem::path& out) {
  if (algo_names.size() < 2)
    throw std::invalid_argument("compare needs at least two --algos entries");
  const auto problem = build_problem(problem_sel);
  if (!problem.analytic_gradient)
    throw std::invalid_argument(
        "compare thresholds on the reported gradient norm; problem '" + problem.name +
        "' has no analytic gradient");
  std::vector<Algo> algos;
  for (const auto& a : algo_names) algos.push_back(parse_algo(a));
  const auto seeds = parse_seeds(seeds_text);

  const int jobs = static_cast<int>(algos.size() * seeds.size());
  std::vector<RunSlot> slots(jobs);
  for_each_index(jobs, [&](int i) {
    try {
      zovr::QueryLedger ledger;
      slots[i].trace =
          execute(problem, algos[i / seeds.size()], plan, seeds[i % seeds.size()], ledger);
    } catch (...) {
      slots[i].error = std::current_exception();
    }
  });

  std::string csv = "algo,seed,evals_to_threshold,final_f,final_grad_sq\n";
  constexpr double kUnreached = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < algos.size(); ++a) {
    std::vector<double> evals;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      auto& slot = slots[a * seeds.size() + s];
      if (slot.error) std::rethrow_exception(slot.error);
      const Trace& t = *slot.trace;
      const auto hit = evals_to_threshold(t, threshold);
      evals.push_back(hit ? static_cast<double>(*hit) : kUnreached);
      const auto& last = t.records.back();
      csv += std::string(algo_name(algos[a])) + "," + std::to_string(seeds[s]) + ",";
      csv += hit ? std::to_string(*hit) : ">budget";
      csv += "," + zovr::format_double(last.f) + ",";
      csv += last.grad_sq ? zovr::format_double(*last.grad_sq) : "";
      csv += "\n";
    }
    std::sort(evals.begin(), evals.end());
    const double med = evals[(evals.size() - 1) / 2];
    if (med == kUnreached)
      std::printf("%-10s median evals-to-threshold: >budget\n", algo_name(algos[a]));
    else
      std::printf("%-10s median evals-to-threshold: %.0f\n", algo_name(algos[a]), med);
  }

  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out.string());
  f << csv;
  return kExitOk;
}

int cmd_verify(std::uint64_t seed) {
  const auto results = zovr::run_verification_suite(seed);
  int failed = 0;
  std::printf("%-42s %14s %14s %12s  %s\n", "check", "measured", "bound", "margin", "result");
  for (const auto& r : results) {
    if (!r.pass) ++failed;
    std::printf("%-42s %14.6g %14.6g %12.3g  %s\n", r.name.c_str(), r.measured, r.bound,
                r.margin, r.pass ? "pass" : "FAIL");
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order variance-reduced optimization harness"};
  app.require_subcommand(1);

  std::string problem_sel, algo_one, seeds_text = "1", constants = "benchmark";
  std::vector<std::string> algo_many;
  std::filesystem::path out;
  double threshold = 0.0;
  std::uint64_t verify_seed = 12345;
  RunPlan run_plan, cmp_plan;
  std::string cmp_constants = "benchmark";

  auto* run = app.add_subcommand("run", "Run one optimizer, write checkpoint traces");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  run->add_option("--problem", problem_sel, "Problem selector, e.g. quadratic:d=10")
      ->required();
  run->add_option("--algo", algo_one, "szvr-g, szvr-g-mb, rgf, or rsg")->required();
  run->add_option("--seeds", seeds_text, "Seed list: 1,2,5-8 or 1..5 (default 1)");
  run->add_option("--out", out, "Trace CSV path (seed tag inserted for multi-seed)")
      ->required();
  add_plan_flags(run, run_plan, constants);

  auto* cmp = app.add_subcommand("compare", "Run several optimizers, tabulate medians");
  cmp->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmp->add_option("--problem", problem_sel, "Problem selector")->required();
  cmp->add_option("--algos", algo_many, "Two or more of szvr-g, szvr-g-mb, rgf, rsg")
      ->required()
      ->delimiter(',');
  cmp->add_option("--threshold", threshold, "Reported gradient-norm-squared target")
      ->required()
      ->check(CLI::PositiveNumber);
  cmp->add_option("--seeds", seeds_text, "Seed list (default 1)");
  cmp->add_option("--out", out, "Summary CSV path")->required();
  add_plan_flags(cmp, cmp_plan, cmp_constants);

  auto* ver = app.add_subcommand("verify", "Check estimator bounds against oracles");
  ver->add_option("--seed", verify_seed, "Base seed for the Monte Carlo checks");

  try {
    auto args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (run->parsed()) {
      finish_plan(run, run_plan, constants);
      return cmd_run(problem_sel, algo_one, run_plan, seeds_text, out);
    }
    if (cmp->parsed()) {
      finish_plan(cmp, cmp_plan, cmp_constants);
      return cmd_compare(problem_sel, algo_many, cmp_plan, seeds_text, threshold, out);
    }
    if (ver->parsed()) return cmd_verify(verify_seed);
  } catch (const zovr::ParseError& e) {
    std::fprintf(stderr, "error: %s (line %d)\n", e.what(), e.line());
    return kExitParse;
  } catch (const zovr::ObjectiveError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitObjective;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
  return kExitUsage;
}
