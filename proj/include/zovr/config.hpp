#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace zovr {

inline constexpr std::uint64_t kNoBudget = std::numeric_limits<std::uint64_t>::max();

// Multipliers on the theory-driven schedules. Unit values reproduce the
// published formulas; the benchmark preset carries tuned values used by the
// comparison harness.
struct TheoryConstants {
  double c_eta = 1.0;
  double c_K = 1.0;
  double c_D = 1.0;
  double c_mu = 1.0;
  double c_B = 1.0;

  static TheoryConstants unit() { return {}; }
  static TheoryConstants benchmark();
};

enum class Provenance { kManual, kAutoSmooth, kAutoNonsmooth };

struct OptimizerConfig {
  double eta = 0.0;        // step size
  double mu = 0.0;         // smoothing radius
  int K = 1;               // inner steps per epoch
  int S = 1;               // epochs
  int D = 1;               // directions per epoch
  int B = 1;               // component batch per epoch
  int b0 = 1;              // pairs averaged per inner step (mini-batch variant)
  double q = 0.0;          // coupling parameter; diagnostic, 0 when not set
  double eta_unclamped = 0.0;  // auto-config step before the stability clamp
  std::uint64_t eval_budget = kNoBudget;
  int checkpoint_stride = 0;   // 0: ceil(K / 10)
  std::uint64_t master_seed = 0;
  Provenance provenance = Provenance::kManual;
};

const char* to_string(Provenance p);

}  // namespace zovr
