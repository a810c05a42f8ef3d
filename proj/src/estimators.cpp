#include "zovr/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace zovr {

namespace {

// x + mu * u, built with one fixed expression so identical inputs give
// identical bits at every call site (exact term cancellation depends on it).
void perturb(std::span<const double> x, double mu, std::span<const double> u, Vec& out) {
  out.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = x[c] + mu * u[c];
}

void check_mu(double mu, std::span<const double> x) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("smoothing radius mu must be positive and finite");
  static std::atomic<bool> warned{false};
  if (mu < 1e3 * DBL_EPSILON * (1.0 + norm_inf(x)) && !warned.exchange(true))
    std::fprintf(stderr,
                 "zovr: warning: mu=%g is near machine precision for this iterate; "
                 "difference quotients may lose all significant digits\n",
                 mu);
}

thread_local Vec tl_u;
thread_local Vec tl_xp;

}  // namespace

DirectionSet::DirectionSet(std::uint64_t epoch_seed, int D, int d)
    : seed_(epoch_seed), D_(D), d_(d) {
  if (D <= 0 || d <= 0) throw std::invalid_argument("DirectionSet: D and d must be positive");
}

void DirectionSet::direction_into(int j, Vec& out) const {
  if (j < 0 || j >= D_)
    throw std::out_of_range("DirectionSet: index " + std::to_string(j) + " outside [0, " +
                            std::to_string(D_) + ")");
  out.resize(d_);
  const std::array<std::uint64_t, 2> key{seed_, kStreamDirections};
  for (int block = 0; 2 * block < d_; ++block) {
    const auto z = normal_pair({static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(block)}, key);
    out[2 * block] = z[0];
    if (2 * block + 1 < d_) out[2 * block + 1] = z[1];
  }
}

Vec DirectionSet::direction(int j) const {
  Vec out;
  direction_into(j, out);
  return out;
}

int SampleBatch::find(int i) const {
  const auto it = std::lower_bound(indices.begin(), indices.end(), i);
  if (it == indices.end() || *it != i) return -1;
  return static_cast<int>(it - indices.begin());
}

SampleBatch sample_batch(int n, int B, CounterRng& rng) {
  SampleBatch b;
  b.n = n;
  b.indices = sample_without_replacement(n, B, rng);
  return b;
}

Vec two_point_estimate(const BlackBoxProblem& p, std::span<const double> x,
                       std::span<const double> u, double mu, int i,
                       QueryLedger& ledger, Phase phase,
                       std::optional<double> base_value) {
  check_mu(mu, x);
  if (u.size() != x.size())
    throw std::invalid_argument("two_point_estimate: u and x dimensions differ");
  const double f0 = base_value ? *base_value : evaluate_component(p, x, i, ledger, phase);
  perturb(x, mu, u, tl_xp);
  const double f1 = evaluate_component(p, tl_xp, i, ledger, phase);
  const double c = (f1 - f0) / mu;
  Vec g(x.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = c * u[k];
  return g;
}

AnchorCache anchor_gradient(const BlackBoxProblem& p, Vec anchor,
                            DirectionSet directions, SampleBatch batch, double mu,
                            QueryLedger& ledger) {
  if (static_cast<int>(anchor.size()) != p.d || directions.dim() != p.d)
    throw std::invalid_argument("anchor_gradient: dimension mismatch");
  if (batch.indices.empty() || batch.n != p.n)
    throw std::invalid_argument("anchor_gradient: batch was not drawn from this problem");
  check_mu(mu, anchor);

  const int B = static_cast<int>(batch.indices.size());
  const int D = directions.size();

  std::vector<double> base(B);
  for (int pos = 0; pos < B; ++pos)
    base[pos] = evaluate_component(p, anchor, batch.indices[pos], ledger, Phase::kAnchor);

  std::vector<double> perturbed(static_cast<std::size_t>(D) * B);
  Vec g = zeros(p.d);
  Vec u, xp;
  for (int j = 0; j < D; ++j) {
    directions.direction_into(j, u);
    perturb(anchor, mu, u, xp);
    double diff_sum = 0.0;
    for (int pos = 0; pos < B; ++pos) {
      const double fv = evaluate_component(p, xp, batch.indices[pos], ledger, Phase::kAnchor);
      perturbed[static_cast<std::size_t>(j) * B + pos] = fv;
      diff_sum += fv - base[pos];
    }
    axpy(diff_sum / (static_cast<double>(B) * mu), u, g);
  }
  scale(g, 1.0 / D);

  return AnchorCache{std::move(anchor), std::move(batch), std::move(directions),
                     mu,                std::move(base),  std::move(perturbed),
                     std::move(g)};
}

namespace {

// Shared term: fresh slope at x minus anchored slope, both along direction j
// for component i. Returns the scalar coefficient on u_j.
double vr_coefficient(const BlackBoxProblem& p, std::span<const double> x,
                      const AnchorCache& cache, int j, int i, double mu,
                      QueryLedger& ledger, const Vec& u) {
  const double f0 = evaluate_component(p, x, i, ledger, Phase::kInner);
  perturb(x, mu, u, tl_xp);
  const double f1 = evaluate_component(p, tl_xp, i, ledger, Phase::kInner);
  const double fresh = (f1 - f0) / mu;

  double anchored;
  const int pos = cache.batch.find(i);
  if (pos >= 0) {
    anchored = cache.slope(j, pos);
  } else {
    const double a0 = evaluate_component(p, cache.anchor, i, ledger, Phase::kInner);
    perturb(cache.anchor, mu, u, tl_xp);
    const double a1 = evaluate_component(p, tl_xp, i, ledger, Phase::kInner);
    anchored = (a1 - a0) / mu;
  }
  return fresh - anchored;
}

void check_vr_args(const BlackBoxProblem& p, std::span<const double> x,
                   const AnchorCache& cache, int j, int i, double mu) {
  if (static_cast<int>(x.size()) != p.d)
    throw std::invalid_argument("vr_estimate: x dimension mismatch");
  if (mu != cache.mu)
    throw std::invalid_argument("vr_estimate: mu differs from the cached anchor state");
  if (j < 0 || j >= cache.D())
    throw std::out_of_range("vr_estimate: direction index out of range");
  if (i < 0 || i >= p.n) throw std::out_of_range("vr_estimate: component index out of range");
  check_mu(mu, x);
}

}  // namespace

void vr_estimate_into(const BlackBoxProblem& p, std::span<const double> x,
                      const AnchorCache& cache, int j, int i, double mu,
                      QueryLedger& ledger, Vec& out) {
  check_vr_args(p, x, cache, j, i, mu);
  cache.directions.direction_into(j, tl_u);
  const double c = vr_coefficient(p, x, cache, j, i, mu, ledger, tl_u);
  out.resize(p.d);
  for (int k = 0; k < p.d; ++k) out[k] = c * tl_u[k] + cache.grad[k];
}

Vec vr_estimate(const BlackBoxProblem& p, std::span<const double> x,
                const AnchorCache& cache, int j, int i, double mu,
                QueryLedger& ledger) {
  Vec out;
  vr_estimate_into(p, x, cache, j, i, mu, ledger, out);
  return out;
}

void minibatch_vr_estimate_into(const BlackBoxProblem& p, std::span<const double> x,
                                const AnchorCache& cache, int b0, CounterRng& sampler,
                                double mu, QueryLedger& ledger, Vec& out) {
  if (b0 < 1) throw std::invalid_argument("minibatch_vr_estimate: b0 must be >= 1");
  out = cache.grad;
  Vec u;
  for (int t = 0; t < b0; ++t) {
    const int i = static_cast<int>(sampler.bounded(static_cast<std::uint64_t>(p.n)));
    const int j = static_cast<int>(sampler.bounded(static_cast<std::uint64_t>(cache.D())));
    check_vr_args(p, x, cache, j, i, mu);
    cache.directions.direction_into(j, u);
    const double c = vr_coefficient(p, x, cache, j, i, mu, ledger, u);
    axpy(c / b0, u, out);
  }
}

Vec minibatch_vr_estimate(const BlackBoxProblem& p, std::span<const double> x,
                          const AnchorCache& cache, int b0, CounterRng& sampler,
                          double mu, QueryLedger& ledger) {
  Vec out;
  minibatch_vr_estimate_into(p, x, cache, b0, sampler, mu, ledger, out);
  return out;
}

}  // namespace zovr
