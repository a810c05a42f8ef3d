#include "zovr/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "zovr/estimators.hpp"
#include "zovr/rng.hpp"

namespace zovr {

namespace {

using Clock = std::chrono::steady_clock;

// ceil/floor with a relative guard band so formula values that are exact
// integers in real arithmetic survive one-ulp pow() noise.
long long ceil_guarded(double v) {
  return static_cast<long long>(std::ceil(v - 1e-9 * std::max(1.0, std::abs(v))));
}
long long floor_guarded(double v) {
  return static_cast<long long>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
}

int clamp_count(long long v) {
  return static_cast<int>(std::clamp<long long>(v, 1, 1'000'000'000));
}

int stride_or_default(int stride, std::int64_t steps) {
  if (stride > 0) return stride;
  return static_cast<int>(std::min<std::int64_t>((steps + 9) / 10, 1'000'000'000));
}

class Recorder {
 public:
  Recorder(const BlackBoxProblem& p, QueryLedger& ledger, Trace& trace)
      : p_(p), ledger_(ledger), trace_(trace), t0_(Clock::now()) {}

  void record(int epoch, std::int64_t iter, std::span<const double> x) {
    TraceRecord r;
    r.epoch = epoch;
    r.iter = iter;
    r.szo = ledger_.szo();
    r.f = full_objective(p_, x, ledger_, Phase::kReporting);
    if (p_.analytic_gradient) r.grad_sq = norm_sq(p_.analytic_gradient(x));
    r.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0_).count();
    trace_.records.push_back(r);
  }

  std::uint64_t last_szo() const {
    return trace_.records.empty() ? 0 : trace_.records.back().szo;
  }

 private:
  const BlackBoxProblem& p_;
  QueryLedger& ledger_;
  Trace& trace_;
  Clock::time_point t0_;
};

Vec resolve_x0(const BlackBoxProblem& p, Vec x0) {
  if (x0.empty()) return zeros(p.d);
  if (static_cast<int>(x0.size()) != p.d)
    throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) +
                                ", problem expects " + std::to_string(p.d));
  if (!all_finite(x0)) throw std::invalid_argument("x0 has non-finite coordinates");
  return x0;
}

Trace run_szvr_impl(const BlackBoxProblem& p, const OptimizerConfig& cfg,
                    QueryLedger& ledger, Vec x0, bool minibatch) {
  validate_config(cfg, p);
  if (!minibatch && cfg.b0 != 1)
    throw std::invalid_argument("run_szvr_g uses one pair per step; b0 > 1 needs the mini-batch variant");

  Vec x = resolve_x0(p, std::move(x0));
  Trace tr;
  tr.config = cfg;
  Recorder rec(p, ledger, tr);
  rec.record(0, 0, x);

  const int stride = stride_or_default(cfg.checkpoint_stride, cfg.K);
  const std::uint64_t anchor_cost = static_cast<std::uint64_t>(cfg.B) * (cfg.D + 1);
  // A step recomputes the anchor term only when the sampled component missed
  // the batch; with B == n every component is cached.
  const std::uint64_t worst_step =
      static_cast<std::uint64_t>(cfg.b0) * (cfg.B == p.n ? 2 : 4);

  int epoch = 0;
  std::int64_t step_in_epoch = 0;
  bool truncated = false;
  try {
    Vec est;
    for (int s = 0; s < cfg.S; ++s) {
      epoch = s;
      step_in_epoch = 0;
      if (ledger.szo() + anchor_cost > cfg.eval_budget) {
        truncated = true;
        break;
      }
      const std::uint64_t epoch_seed = mix(cfg.master_seed, static_cast<std::uint64_t>(s));
      DirectionSet dirs(epoch_seed, cfg.D, p.d);
      CounterRng sampler(epoch_seed, kStreamSampling);
      SampleBatch batch = sample_batch(p.n, cfg.B, sampler);
      const AnchorCache cache = anchor_gradient(p, x, dirs, std::move(batch), cfg.mu, ledger);

      for (int k = 0; k < cfg.K; ++k) {
        if (ledger.szo() + worst_step > cfg.eval_budget) {
          truncated = true;
          break;
        }
        if (minibatch) {
          minibatch_vr_estimate_into(p, x, cache, cfg.b0, sampler, cfg.mu, ledger, est);
        } else {
          const int i = static_cast<int>(sampler.bounded(static_cast<std::uint64_t>(p.n)));
          const int j = static_cast<int>(sampler.bounded(static_cast<std::uint64_t>(cfg.D)));
          vr_estimate_into(p, x, cache, j, i, cfg.mu, ledger, est);
        }
        axpy(-cfg.eta, est, x);
        if (!all_finite(x))
          throw ObjectiveError("iterate became non-finite at epoch " + std::to_string(s) +
                               ", inner step " + std::to_string(k + 1));
        step_in_epoch = k + 1;
        if ((k + 1) % stride == 0 || k + 1 == cfg.K) rec.record(s, k + 1, x);
      }
      if (truncated) break;
    }
  } catch (const ObjectiveError& e) {
    tr.truncated = truncated;
    throw RunError(e.what(), std::move(tr));
  }

  if (truncated && ledger.szo() != rec.last_szo()) rec.record(epoch, step_in_epoch, x);
  tr.truncated = truncated;
  tr.final_point = std::move(x);
  return tr;
}

}  // namespace

void validate_config(const OptimizerConfig& cfg, const BlackBoxProblem& p) {
  std::string bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) {
      if (!bad.empty()) bad += "; ";
      bad += what;
    }
  };
  require(std::isfinite(cfg.eta) && cfg.eta > 0.0, "eta must be positive and finite");
  require(std::isfinite(cfg.mu) && cfg.mu > 0.0, "mu must be positive and finite");
  require(cfg.K >= 1, "K must be >= 1");
  require(cfg.S >= 1, "S must be >= 1");
  require(cfg.D >= 1, "D must be >= 1");
  require(cfg.B >= 1, "B must be >= 1");
  require(cfg.B <= p.n, "B must not exceed the component count n");
  require(cfg.b0 >= 1, "b0 must be >= 1");
  require(cfg.eval_budget >= 1, "eval_budget must be >= 1");
  require(cfg.checkpoint_stride >= 0, "checkpoint_stride must be >= 0");
  require(std::isfinite(cfg.q) && cfg.q >= 0.0, "q must be >= 0 and finite");
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad);
}

Trace run_szvr_g(const BlackBoxProblem& p, const OptimizerConfig& cfg,
                 QueryLedger& ledger, Vec x0) {
  return run_szvr_impl(p, cfg, ledger, std::move(x0), false);
}

Trace run_szvr_g_minibatch(const BlackBoxProblem& p, const OptimizerConfig& cfg,
                           QueryLedger& ledger, Vec x0) {
  return run_szvr_impl(p, cfg, ledger, std::move(x0), true);
}

double rgf_default_eta(int d, double L1) { return 1.0 / (4.0 * (d + 4.0) * L1); }

Trace run_rgf(const BlackBoxProblem& p, const RgfOptions& opt, QueryLedger& ledger,
              Vec x0) {
  if (!(opt.eta > 0.0) || !std::isfinite(opt.eta))
    throw std::invalid_argument("rgf: eta must be positive");
  if (!(opt.mu > 0.0) || !std::isfinite(opt.mu))
    throw std::invalid_argument("rgf: mu must be positive");
  if (opt.iterations < 1 || opt.iterations > 1'000'000'000)
    throw std::invalid_argument("rgf: iterations out of range");

  Vec x = resolve_x0(p, std::move(x0));
  Trace tr;
  Recorder rec(p, ledger, tr);
  rec.record(0, 0, x);

  const int stride = stride_or_default(opt.checkpoint_stride, opt.iterations);
  const std::uint64_t step_cost = 2ull * p.n;
  const DirectionSet dirs(mix(opt.seed, 0), static_cast<int>(opt.iterations), p.d);

  Vec u, xp(p.d);
  bool truncated = false;
  std::int64_t done = 0;
  try {
    for (std::int64_t k = 0; k < opt.iterations; ++k) {
      if (ledger.szo() + step_cost > opt.eval_budget) {
        truncated = true;
        break;
      }
      dirs.direction_into(static_cast<int>(k), u);
      const double f0 = full_objective(p, x, ledger, Phase::kInner);
      for (int c = 0; c < p.d; ++c) xp[c] = x[c] + opt.mu * u[c];
      const double f1 = full_objective(p, xp, ledger, Phase::kInner);
      axpy(-opt.eta * (f1 - f0) / opt.mu, u, x);
      if (!all_finite(x))
        throw ObjectiveError("iterate became non-finite at iteration " + std::to_string(k + 1));
      done = k + 1;
      if (done % stride == 0 || done == opt.iterations) rec.record(0, done, x);
    }
  } catch (const ObjectiveError& e) {
    tr.truncated = truncated;
    throw RunError(e.what(), std::move(tr));
  }

  if (truncated && ledger.szo() != rec.last_szo()) rec.record(0, done, x);
  tr.truncated = truncated;
  tr.final_point = std::move(x);
  return tr;
}

Trace run_rsg(const BlackBoxProblem& p, const RsgOptions& opt, QueryLedger& ledger,
              Vec x0) {
  const bool scheduled = static_cast<bool>(opt.eta_schedule);
  if (!scheduled && (!(opt.eta > 0.0) || !std::isfinite(opt.eta)))
    throw std::invalid_argument("rsg: eta must be positive (or pass a schedule)");
  if (!(opt.mu > 0.0) || !std::isfinite(opt.mu))
    throw std::invalid_argument("rsg: mu must be positive");
  if (opt.iterations < 1 || opt.iterations > 1'000'000'000)
    throw std::invalid_argument("rsg: iterations out of range");

  Vec x = resolve_x0(p, std::move(x0));
  Trace tr;
  Recorder rec(p, ledger, tr);
  rec.record(0, 0, x);

  const int stride = stride_or_default(opt.checkpoint_stride, opt.iterations);
  const DirectionSet dirs(mix(opt.seed, 0), static_cast<int>(opt.iterations), p.d);
  CounterRng sampler(mix(opt.seed, 0), kStreamSampling);
  CounterRng pick(mix(opt.seed, 0), kStreamOutput);
  const std::int64_t r_iter =
      1 + static_cast<std::int64_t>(pick.bounded(static_cast<std::uint64_t>(opt.iterations)));

  Vec u, xp(p.d);
  bool truncated = false;
  std::int64_t done = 0;
  try {
    for (std::int64_t k = 0; k < opt.iterations; ++k) {
      if (ledger.szo() + 2 > opt.eval_budget) {
        truncated = true;
        break;
      }
      const int i = static_cast<int>(sampler.bounded(static_cast<std::uint64_t>(p.n)));
      dirs.direction_into(static_cast<int>(k), u);
      const double eta = scheduled ? opt.eta_schedule(k) : opt.eta;
      if (!(eta > 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("rsg: schedule produced a non-positive step");
      const double f0 = evaluate_component(p, x, i, ledger, Phase::kInner);
      for (int c = 0; c < p.d; ++c) xp[c] = x[c] + opt.mu * u[c];
      const double f1 = evaluate_component(p, xp, i, ledger, Phase::kInner);
      axpy(-eta * (f1 - f0) / opt.mu, u, x);
      if (!all_finite(x))
        throw ObjectiveError("iterate became non-finite at iteration " + std::to_string(k + 1));
      done = k + 1;
      if (done == r_iter) {
        tr.randomized_iter = r_iter;
        tr.randomized_point = x;
      }
      if (done % stride == 0 || done == opt.iterations) rec.record(0, done, x);
    }
  } catch (const ObjectiveError& e) {
    tr.truncated = truncated;
    throw RunError(e.what(), std::move(tr));
  }

  if (truncated && ledger.szo() != rec.last_szo()) rec.record(0, done, x);
  tr.truncated = truncated;
  tr.final_point = std::move(x);
  return tr;
}

namespace {

void check_auto_args(const BlackBoxProblem& p, double eps, int b0, const TheoryConstants& tc) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (b0 < 1) throw std::invalid_argument("b0 must be >= 1");
  if (!(p.lipschitz > 0.0) || !std::isfinite(p.lipschitz))
    throw std::invalid_argument("problem lacks a positive smoothness constant");
  for (double c : {tc.c_eta, tc.c_K, tc.c_D, tc.c_mu, tc.c_B})
    if (!(c > 0.0) || !std::isfinite(c))
      throw std::invalid_argument("theory constants must be positive");
}

// Epochs sized so S * K covers the theory iteration target, then capped so
// the planned run fits an explicit budget (worst-case inner charges).
int size_epochs(std::int64_t K, double eta, double eps, double r_hat,
                std::uint64_t anchor_cost, std::uint64_t worst_step,
                std::uint64_t eval_budget) {
  const double t_target = 24.0 * r_hat / (eps * eps * eta);
  const long long t_iters = std::max<long long>(1, ceil_guarded(t_target));
  long long S = (t_iters + K - 1) / K;
  if (eval_budget != kNoBudget) {
    const std::uint64_t epoch_cost = anchor_cost + static_cast<std::uint64_t>(K) * worst_step;
    const long long fit = static_cast<long long>(eval_budget / epoch_cost);
    S = std::min(S, std::max<long long>(1, fit));
  }
  return clamp_count(S);
}

}  // namespace

OptimizerConfig auto_config_smooth(const BlackBoxProblem& p, double eps, int b0,
                                   const TheoryConstants& tc, std::uint64_t master_seed,
                                   std::optional<double> r_hat,
                                   std::uint64_t eval_budget) {
  check_auto_args(p, eps, b0, tc);
  if (p.smoothness != Smoothness::kC11)
    throw std::invalid_argument("auto_config_smooth needs a C11 problem");
  const double d = p.d;
  const double L1 = p.lipschitz;

  OptimizerConfig cfg;
  cfg.B = clamp_count(std::min<long long>(p.n, ceil_guarded(tc.c_B / (eps * eps))));
  const double B = cfg.B;

  const double eta_raw =
      tc.c_eta * std::min(std::cbrt(static_cast<double>(b0)) /
                              (std::pow(d, 2.0 / 3.0) * std::cbrt(B)),
                          std::pow(static_cast<double>(b0), 2.0 / 3.0) /
                              (std::cbrt(d) * std::pow(B, 2.0 / 3.0)));
  const double eta_stab = 1.0 / (18.0 * std::sqrt(d) * L1);
  cfg.eta_unclamped = eta_raw;
  cfg.eta = std::min(eta_raw, eta_stab);
  const double eta = cfg.eta;

  cfg.mu = tc.c_mu * 2.0 * eps / (L1 * std::pow(d + 6.0, 1.5));
  cfg.q = 6.0 * std::sqrt(L1 * L1 * L1 * (d + 4.0) * eta);

  // Two epoch-length ceilings: the schedule form 2 / max{d eta^2, sqrt(d)
  // eta^{3/2}} and the stability requirement (q eta + 18 L1^2 (d+4) eta^2) K
  // <= 1. The min keeps both.
  const double k_schedule =
      2.0 / std::max(d * eta * eta, std::sqrt(d) * std::pow(eta, 1.5));
  const double k_stability = 1.0 / (cfg.q * eta + 18.0 * L1 * L1 * (d + 4.0) * eta * eta);
  cfg.K = clamp_count(floor_guarded(tc.c_K * std::min(k_schedule, k_stability)));
  cfg.D = clamp_count(ceil_guarded(tc.c_D * eta * d));

  cfg.b0 = b0;
  cfg.master_seed = master_seed;
  cfg.eval_budget = eval_budget;
  cfg.provenance = Provenance::kAutoSmooth;

  const std::uint64_t anchor_cost = static_cast<std::uint64_t>(cfg.B) * (cfg.D + 1);
  const std::uint64_t worst_step =
      static_cast<std::uint64_t>(b0) * (cfg.B == p.n ? 2 : 4);
  cfg.S = size_epochs(cfg.K, eta, eps, r_hat.value_or(1.0), anchor_cost, worst_step,
                      eval_budget);
  return cfg;
}

OptimizerConfig auto_config_nonsmooth(const BlackBoxProblem& p, double eps, int b0,
                                      const TheoryConstants& tc, std::uint64_t master_seed,
                                      std::optional<double> r_hat,
                                      std::uint64_t eval_budget) {
  check_auto_args(p, eps, b0, tc);
  if (p.smoothness != Smoothness::kC00)
    throw std::invalid_argument("auto_config_nonsmooth needs a C00 problem");
  const double d = p.d;
  const double L0 = p.lipschitz;

  OptimizerConfig cfg;
  cfg.mu = tc.c_mu * eps / (L0 * std::sqrt(d));
  cfg.B = clamp_count(std::min<long long>(p.n, ceil_guarded(tc.c_B / (eps * eps))));
  const double B = cfg.B;

  const double eta_raw = tc.c_eta * std::pow(eps, 5.0 / 3.0) *
                         std::cbrt(static_cast<double>(b0)) /
                         (std::pow(d, 5.0 / 3.0) * std::cbrt(B));
  // The schedule requires eta strictly below eps / d; fall to the midpoint
  // when the raw value is not.
  cfg.eta_unclamped = eta_raw;
  cfg.eta = eta_raw < eps / d ? eta_raw : 0.5 * eps / d;
  const double eta = cfg.eta;

  cfg.K = clamp_count(floor_guarded(tc.c_K * eps * eps / (d * d * eta * eta)));
  cfg.D = clamp_count(ceil_guarded(tc.c_D * eta * d * d * d / (eps * eps * eps)));
  cfg.q = std::pow(d, 1.5) / eps * std::sqrt(eta);

  cfg.b0 = b0;
  cfg.master_seed = master_seed;
  cfg.eval_budget = eval_budget;
  cfg.provenance = Provenance::kAutoNonsmooth;

  const std::uint64_t anchor_cost = static_cast<std::uint64_t>(cfg.B) * (cfg.D + 1);
  const std::uint64_t worst_step =
      static_cast<std::uint64_t>(b0) * (cfg.B == p.n ? 2 : 4);
  cfg.S = size_epochs(cfg.K, eta, eps, r_hat.value_or(1.0), anchor_cost, worst_step,
                      eval_budget);
  return cfg;
}

}  // namespace zovr
