#pragma once

// Independent reference computations used by tests and the verify command:
// Monte-Carlo estimates with standard errors, exact brute-force enumerations,
// and finite differences. Nothing here feeds an optimizer step.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zovr/core.hpp"

namespace zovr {

struct McScalar {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

struct McVec {
  Vec mean;
  Vec stderr_;  // componentwise
  std::int64_t samples = 0;
};

// E_u[f(x + mu u)] over fresh standard normal u (full objective).
McScalar smoothed_value_mc(const BlackBoxProblem& p, std::span<const double> x,
                           double mu, std::int64_t samples, std::uint64_t seed);

// E[(F(x + mu u; xi) - F(x; xi)) / mu * u] over fresh u and uniform xi.
McVec smoothed_gradient_mc(const BlackBoxProblem& p, std::span<const double> x,
                           double mu, std::int64_t samples, std::uint64_t seed);

// Exact average of ||mean of a size-B subset||^2 over all C(n, B) subsets.
// n is capped at 20; intended for n <= 12.
double subset_mean_sq_bruteforce(const std::vector<Vec>& v, int B);

// Closed form the enumeration is checked against for zero-sum v:
// (n - B) / (B (n - 1)) * (1/n) sum ||v_i||^2.
double subset_mean_sq_formula(const std::vector<Vec>& v, int B);

// Exact (1/(nD)) sum_{i,j} h(i, j) over the full grid; n * D <= 10^4.
Vec pair_average_bruteforce(const std::function<Vec(int, int)>& h, int n, int D);

// E||u||^p for u ~ N(0, I_d), p in {2, 4, 6}.
McScalar gaussian_moment_mc(int d, int p, std::int64_t samples, std::uint64_t seed);

// E[<g, u>^2 ||u||^2]; exact value is (d + 2) ||g||^2.
McScalar directional_moment_mc(std::span<const double> g, std::int64_t samples,
                               std::uint64_t seed);

// Central differences on the full objective; reporting-phase charges when a
// ledger is supplied.
Vec finite_diff_gradient(const BlackBoxProblem& p, std::span<const double> x, double h,
                         QueryLedger* ledger = nullptr);

// One verification row: a measured quantity against its bound. For
// inequality checks `bound` already includes the Monte-Carlo slack; for
// equality checks it is measured-vs-expected with `margin` = tol - |diff|.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - measured; negative means FAIL
  bool pass = false;
};

// The bound-verification suite behind the verify command: smoothing error,
// Gaussian moment and directional-moment bounds, the exact subset identity,
// anchored-estimate variance, drift bounds, and the non-smooth counterparts,
// all at fixed seeds. Runs in well under a minute.
std::vector<CheckResult> run_verification_suite(std::uint64_t seed);

}  // namespace zovr
