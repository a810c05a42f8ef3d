#include "zovr/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace zovr {

double evaluate_component(const BlackBoxProblem& p, std::span<const double> x, int i,
                          QueryLedger& ledger, Phase phase) {
  if (static_cast<int>(x.size()) != p.d)
    throw std::invalid_argument("evaluate_component: x has dimension " +
                                std::to_string(x.size()) + ", problem expects " +
                                std::to_string(p.d));
  if (i < 0 || i >= p.n)
    throw std::out_of_range("evaluate_component: component index " + std::to_string(i) +
                            " outside [0, " + std::to_string(p.n) + ")");
  if (!all_finite(x))
    throw std::invalid_argument("evaluate_component: non-finite coordinate in x");
  ledger.charge(phase);
  const double v = p.component(x, i);
  if (!std::isfinite(v))
    throw ObjectiveError("component " + std::to_string(i) + " returned non-finite value");
  return v;
}

double full_objective(const BlackBoxProblem& p, std::span<const double> x,
                      QueryLedger& ledger, Phase phase) {
  double s = 0.0;
  for (int i = 0; i < p.n; ++i) s += evaluate_component(p, x, i, ledger, phase);
  return s / p.n;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kManual: return "manual";
    case Provenance::kAutoSmooth: return "auto_smooth";
    case Provenance::kAutoNonsmooth: return "auto_nonsmooth";
  }
  return "?";
}

TheoryConstants TheoryConstants::benchmark() {
  // Tuned on the shipped logistic benchmark (see README): a larger step,
  // clamped by the stability bound, and long inner loops to amortize the
  // per-epoch anchor cost B(D+1).
  TheoryConstants tc;
  tc.c_eta = 2.0;
  tc.c_K = 20.0;
  tc.c_D = 1.0;
  tc.c_mu = 1.0;
  tc.c_B = 1.0;
  return tc;
}

}  // namespace zovr
