#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zovr/config.hpp"
#include "zovr/vec.hpp"

namespace zovr {

// Query accounting phases. Anchor and inner evaluations are the optimization
// cost; reporting evaluations (logging f, gradients for traces) never count
// toward a budget.
enum class Phase { kAnchor, kInner, kReporting };

enum class Smoothness { kC11, kC00 };

// The objective never returns a gradient; one component evaluation is the
// unit of cost everywhere.
class QueryLedger {
 public:
  void charge(Phase p, std::uint64_t units = 1) { counts_[index(p)] += units; }

  std::uint64_t anchor() const { return counts_[0]; }
  std::uint64_t inner() const { return counts_[1]; }
  std::uint64_t reporting() const { return counts_[2]; }

  // All evaluations ever made through this ledger.
  std::uint64_t total() const { return counts_[0] + counts_[1] + counts_[2]; }

  // Optimization queries only: the budget axis and the trace szo column.
  std::uint64_t szo() const { return counts_[0] + counts_[1]; }

  void reset() { counts_[0] = counts_[1] = counts_[2] = 0; }

 private:
  static int index(Phase p) { return static_cast<int>(p); }
  std::uint64_t counts_[3] = {0, 0, 0};
};

// Finite-sum black box f(x) = (1/n) sum_i F(x; xi_i). Components are pure
// functions; all state lives in the caller.
struct BlackBoxProblem {
  int n = 1;
  int d = 0;
  Smoothness smoothness = Smoothness::kC11;
  double lipschitz = 0.0;  // L1 for C11 objectives, L0 for C00
  std::function<double(std::span<const double>, int)> component;
  // Optional; used for reporting only, never inside an optimizer step.
  std::function<Vec(std::span<const double>)> analytic_gradient;
  std::optional<double> variance_bound;
  std::string name;
};

// Non-finite objective value: the run is aborted rather than letting NaN
// propagate through iterates.
class ObjectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

// One component evaluation; charges exactly one unit to `phase`.
double evaluate_component(const BlackBoxProblem& p, std::span<const double> x, int i,
                          QueryLedger& ledger, Phase phase);

// f(x): all n components in index order; charges n units.
double full_objective(const BlackBoxProblem& p, std::span<const double> x,
                      QueryLedger& ledger, Phase phase);

struct TraceRecord {
  int epoch = 0;
  std::int64_t iter = 0;     // inner steps completed within the epoch
  std::uint64_t szo = 0;     // cumulative optimization queries
  double f = 0.0;
  std::optional<double> grad_sq;
  double wall_ms = 0.0;      // excluded from serialized traces
};

struct Trace {
  std::vector<TraceRecord> records;
  Vec final_point;
  bool truncated = false;
  OptimizerConfig config;
  // Randomized-output convention (single-direction baseline): a uniformly
  // drawn iterate index and the iterate held there.
  std::optional<std::int64_t> randomized_iter;
  Vec randomized_point;
};

}  // namespace zovr
