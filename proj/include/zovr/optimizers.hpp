#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "zovr/config.hpp"
#include "zovr/core.hpp"

namespace zovr {

// Aborted run carrying everything recorded up to the last finite iterate.
class RunError : public ObjectiveError {
 public:
  RunError(const std::string& what, Trace partial)
      : ObjectiveError(what), trace(std::move(partial)) {}
  Trace trace;
};

void validate_config(const OptimizerConfig& cfg, const BlackBoxProblem& p);

// Epoch-anchored variance-reduced descent. One epoch: fresh directions and
// component batch, anchored estimate G at x_tilde, K inner steps, then
// x_tilde moves to the last iterate. Requires cfg.b0 == 1.
// Empty x0 means the origin.
Trace run_szvr_g(const BlackBoxProblem& p, const OptimizerConfig& cfg,
                 QueryLedger& ledger, Vec x0 = {});

// Same loop with each inner estimate averaging cfg.b0 sampled difference
// pairs around the shared anchor term.
Trace run_szvr_g_minibatch(const BlackBoxProblem& p, const OptimizerConfig& cfg,
                           QueryLedger& ledger, Vec x0 = {});

struct RgfOptions {
  double eta = 0.0;
  double mu = 0.0;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
  std::uint64_t eval_budget = kNoBudget;
  int checkpoint_stride = 0;  // 0: ceil(iterations / 10)
};

// Single-direction two-point descent on the full objective; one iteration
// costs 2n units (2 when n == 1).
Trace run_rgf(const BlackBoxProblem& p, const RgfOptions& opt, QueryLedger& ledger,
              Vec x0 = {});

struct RsgOptions {
  double eta = 0.0;  // used when eta_schedule is empty
  std::function<double(std::int64_t)> eta_schedule;
  double mu = 0.0;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
  std::uint64_t eval_budget = kNoBudget;
  int checkpoint_stride = 0;
};

// Stochastic single-sample baseline: one component and one direction per
// iteration, 2 units each. Also records the randomized-output iterate drawn
// uniformly from {1, ..., iterations}.
Trace run_rsg(const BlackBoxProblem& p, const RsgOptions& opt, QueryLedger& ledger,
              Vec x0 = {});

// Step size the single-direction baselines default to on C11 problems.
double rgf_default_eta(int d, double L1);

// Theory-driven schedules. r_hat sizes the epoch count (target optimality
// gap estimate; 1.0 when absent); eval_budget, when finite, caps the epoch
// count so the planned run fits.
OptimizerConfig auto_config_smooth(const BlackBoxProblem& p, double eps, int b0,
                                   const TheoryConstants& tc, std::uint64_t master_seed,
                                   std::optional<double> r_hat = std::nullopt,
                                   std::uint64_t eval_budget = kNoBudget);

OptimizerConfig auto_config_nonsmooth(const BlackBoxProblem& p, double eps, int b0,
                                      const TheoryConstants& tc, std::uint64_t master_seed,
                                      std::optional<double> r_hat = std::nullopt,
                                      std::uint64_t eval_budget = kNoBudget);

}  // namespace zovr
