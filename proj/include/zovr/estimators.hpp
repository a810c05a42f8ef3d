#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zovr/core.hpp"
#include "zovr/rng.hpp"

namespace zovr {

// D nominal-i.i.d. N(0, I_d) directions addressed by index. Nothing is
// stored: direction j is a pure function of (epoch_seed, j), so regeneration
// is bit-identical and a set of any size costs O(1) memory.
class DirectionSet {
 public:
  DirectionSet(std::uint64_t epoch_seed, int D, int d);

  int size() const { return D_; }
  int dim() const { return d_; }
  std::uint64_t seed() const { return seed_; }

  void direction_into(int j, Vec& out) const;
  Vec direction(int j) const;

 private:
  std::uint64_t seed_;
  int D_;
  int d_;
};

// Uniform without-replacement component batch, indices sorted ascending.
struct SampleBatch {
  std::vector<int> indices;
  int n = 0;  // population size the batch was drawn from

  bool full() const { return static_cast<int>(indices.size()) == n; }
  // Position of i in `indices`, or -1.
  int find(int i) const;
};

SampleBatch sample_batch(int n, int B, CounterRng& rng);

// Two-point form (F(x + mu u; xi_i) - F(x; xi_i)) / mu * u.
// Charges 2 units, or 1 when the caller already holds F(x; xi_i).
Vec two_point_estimate(const BlackBoxProblem& p, std::span<const double> x,
                       std::span<const double> u, double mu, int i,
                       QueryLedger& ledger, Phase phase,
                       std::optional<double> base_value = std::nullopt);

// Frozen per-epoch anchor state: every F value behind the anchored gradient
// estimate G, plus G itself. Immutable once built.
struct AnchorCache {
  Vec anchor;                     // x_tilde
  SampleBatch batch;              // B component indices, sorted
  DirectionSet directions;        // D directions
  double mu = 0.0;
  std::vector<double> base;       // base[pos] = F(anchor; xi_{batch[pos]})
  std::vector<double> perturbed;  // perturbed[j * B + pos] = F(anchor + mu u_j; xi_{batch[pos]})
  Vec grad;                       // G: mean over j of mean over i of two-point terms

  int B() const { return static_cast<int>(batch.indices.size()); }
  int D() const { return directions.size(); }
  // Anchored slope (perturbed - base)/mu for cached component position.
  double slope(int j, int pos) const {
    return (perturbed[static_cast<std::size_t>(j) * base.size() + pos] - base[pos]) / mu;
  }
};

// Builds the anchor estimate G averaged over the batch and the direction set.
// Charges exactly B * (D + 1) anchor-phase units. Accumulation order is
// fixed: components innermost, directions outermost.
AnchorCache anchor_gradient(const BlackBoxProblem& p, Vec anchor,
                            DirectionSet directions, SampleBatch batch, double mu,
                            QueryLedger& ledger);

// Variance-reduced estimate at x for direction j and component i:
//   two_point(x) - two_point(anchor) + G.
// The anchor term reads the cache when i is in the batch (2 inner units
// total) and is recomputed otherwise (4 units). At x == anchor with a cache
// hit the two slopes are the same bits, so the result equals G exactly.
Vec vr_estimate(const BlackBoxProblem& p, std::span<const double> x,
                const AnchorCache& cache, int j, int i, double mu,
                QueryLedger& ledger);
void vr_estimate_into(const BlackBoxProblem& p, std::span<const double> x,
                      const AnchorCache& cache, int j, int i, double mu,
                      QueryLedger& ledger, Vec& out);

// Mini-batch variant: b0 (i, j) pairs drawn i.i.d. from `sampler` (component
// index first, then direction index), difference terms averaged, then G
// added. With b0 = 1 this is bit-identical to vr_estimate fed by the same
// sampler stream.
Vec minibatch_vr_estimate(const BlackBoxProblem& p, std::span<const double> x,
                          const AnchorCache& cache, int b0, CounterRng& sampler,
                          double mu, QueryLedger& ledger);
void minibatch_vr_estimate_into(const BlackBoxProblem& p, std::span<const double> x,
                                const AnchorCache& cache, int b0, CounterRng& sampler,
                                double mu, QueryLedger& ledger, Vec& out);

}  // namespace zovr
