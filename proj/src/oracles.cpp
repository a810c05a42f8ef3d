#include "zovr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "zovr/estimators.hpp"
#include "zovr/rng.hpp"

namespace zovr {

namespace {

struct Acc {
  double sum = 0.0, sumsq = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
    return std::sqrt(var / n);
  }
};

void check_samples(std::int64_t samples) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
}

}  // namespace

McScalar smoothed_value_mc(const BlackBoxProblem& p, std::span<const double> x,
                           double mu, std::int64_t samples, std::uint64_t seed) {
  check_samples(samples);
  CounterRng rng(seed, kStreamOracle);
  QueryLedger scratch;
  Vec u(p.d), xp(p.d);
  Acc a;
  for (std::int64_t s = 0; s < samples; ++s) {
    rng.fill_normal(u);
    for (int c = 0; c < p.d; ++c) xp[c] = x[c] + mu * u[c];
    a.add(full_objective(p, xp, scratch, Phase::kReporting));
  }
  return {a.mean(), a.se(), samples};
}

McVec smoothed_gradient_mc(const BlackBoxProblem& p, std::span<const double> x,
                           double mu, std::int64_t samples, std::uint64_t seed) {
  check_samples(samples);
  CounterRng rng(seed, kStreamOracle);
  QueryLedger scratch;
  Vec base(p.n);
  for (int i = 0; i < p.n; ++i) base[i] = evaluate_component(p, x, i, scratch, Phase::kReporting);

  Vec u(p.d), xp(p.d), sum(p.d, 0.0), sumsq(p.d, 0.0);
  for (std::int64_t s = 0; s < samples; ++s) {
    rng.fill_normal(u);
    const int i = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(p.n)));
    for (int c = 0; c < p.d; ++c) xp[c] = x[c] + mu * u[c];
    const double coef =
        (evaluate_component(p, xp, i, scratch, Phase::kReporting) - base[i]) / mu;
    for (int c = 0; c < p.d; ++c) {
      const double v = coef * u[c];
      sum[c] += v;
      sumsq[c] += v * v;
    }
  }
  McVec out;
  out.samples = samples;
  out.mean.resize(p.d);
  out.stderr_.resize(p.d);
  for (int c = 0; c < p.d; ++c) {
    out.mean[c] = sum[c] / samples;
    const double var =
        std::max(0.0, (sumsq[c] - sum[c] * sum[c] / samples) / (samples - 1));
    out.stderr_[c] = std::sqrt(var / samples);
  }
  return out;
}

double subset_mean_sq_bruteforce(const std::vector<Vec>& v, int B) {
  const int n = static_cast<int>(v.size());
  if (n < 1 || n > 20) throw std::invalid_argument("subset enumeration needs 1 <= n <= 20");
  if (B < 1 || B > n) throw std::invalid_argument("need 1 <= B <= n");
  const std::size_t dim = v[0].size();
  for (const auto& x : v)
    if (x.size() != dim) throw std::invalid_argument("ragged vector family");

  std::vector<int> idx(B);
  for (int k = 0; k < B; ++k) idx[k] = k;
  double total = 0.0;
  std::int64_t count = 0;
  Vec mean(dim);
  while (true) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (int k = 0; k < B; ++k) axpy(1.0 / B, v[idx[k]], mean);
    total += norm_sq(mean);
    ++count;
    // next combination in lexicographic order
    int pos = B - 1;
    while (pos >= 0 && idx[pos] == n - B + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int k = pos + 1; k < B; ++k) idx[k] = idx[k - 1] + 1;
  }
  return total / count;
}

double subset_mean_sq_formula(const std::vector<Vec>& v, int B) {
  const int n = static_cast<int>(v.size());
  if (B < 1 || B > n) throw std::invalid_argument("need 1 <= B <= n");
  if (B == n) return 0.0;
  double ms = 0.0;
  for (const auto& x : v) ms += norm_sq(x);
  ms /= n;
  return (static_cast<double>(n - B) / (static_cast<double>(B) * (n - 1))) * ms;
}

Vec pair_average_bruteforce(const std::function<Vec(int, int)>& h, int n, int D) {
  if (n < 1 || D < 1 || static_cast<long long>(n) * D > 10'000)
    throw std::invalid_argument("pair grid limited to n * D <= 10^4");
  Vec acc = h(0, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < D; ++j) {
      if (i == 0 && j == 0) continue;
      const Vec term = h(i, j);
      if (term.size() != acc.size()) throw std::invalid_argument("ragged grid values");
      axpy(1.0, term, acc);
    }
  scale(acc, 1.0 / (static_cast<double>(n) * D));
  return acc;
}

McScalar gaussian_moment_mc(int d, int p, std::int64_t samples, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (p != 2 && p != 4 && p != 6) throw std::invalid_argument("p must be 2, 4, or 6");
  check_samples(samples);
  CounterRng rng(seed, kStreamOracle);
  Vec u(d);
  Acc a;
  for (std::int64_t s = 0; s < samples; ++s) {
    rng.fill_normal(u);
    const double n2 = norm_sq(u);
    a.add(p == 2 ? n2 : p == 4 ? n2 * n2 : n2 * n2 * n2);
  }
  return {a.mean(), a.se(), samples};
}

McScalar directional_moment_mc(std::span<const double> g, std::int64_t samples,
                               std::uint64_t seed) {
  check_samples(samples);
  CounterRng rng(seed, kStreamOracle);
  Vec u(g.size());
  Acc a;
  for (std::int64_t s = 0; s < samples; ++s) {
    rng.fill_normal(u);
    const double ip = dot(g, u);
    a.add(ip * ip * norm_sq(u));
  }
  return {a.mean(), a.se(), samples};
}

Vec finite_diff_gradient(const BlackBoxProblem& p, std::span<const double> x, double h,
                         QueryLedger* ledger) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive");
  QueryLedger local;
  QueryLedger& led = ledger ? *ledger : local;
  Vec xp(x.begin(), x.end());
  Vec g(p.d);
  for (int c = 0; c < p.d; ++c) {
    const double saved = xp[c];
    xp[c] = saved + h;
    const double fp = full_objective(p, xp, led, Phase::kReporting);
    xp[c] = saved - h;
    const double fm = full_objective(p, xp, led, Phase::kReporting);
    xp[c] = saved;
    g[c] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Verification suite.

namespace {

// Finite-sum quadratic (1/n) sum_i (1/2)||x - c_i||^2: every smoothed or
// exact gradient is available in closed form (both equal x - mean(c)).
struct ShiftedQuadratic {
  BlackBoxProblem problem;
  std::vector<Vec> centers;
  Vec center_mean;

  Vec gradient(std::span<const double> x) const {
    Vec g(x.size());
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = x[c] - center_mean[c];
    return g;
  }
};

ShiftedQuadratic make_shifted_quadratic(int n, int d, std::uint64_t seed) {
  auto centers = std::make_shared<std::vector<Vec>>();
  CounterRng rng(seed, kStreamOracle);
  for (int i = 0; i < n; ++i) {
    Vec c(d);
    rng.fill_normal(c);
    scale(c, 0.6);
    centers->push_back(std::move(c));
  }
  ShiftedQuadratic q;
  q.centers = *centers;
  q.center_mean = zeros(d);
  for (const auto& c : *centers) axpy(1.0 / n, c, q.center_mean);
  q.problem.n = n;
  q.problem.d = d;
  q.problem.smoothness = Smoothness::kC11;
  q.problem.lipschitz = 1.0;
  q.problem.name = "shifted-quadratic";
  q.problem.component = [centers](std::span<const double> x, int i) {
    double s = 0.0;
    const Vec& c = (*centers)[i];
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = x[k] - c[k];
      s += t * t;
    }
    return 0.5 * s;
  };
  return q;
}

Vec unit_point(int d, double scale_to, std::uint64_t seed) {
  CounterRng rng(seed, kStreamOracle);
  Vec x(d);
  rng.fill_normal(x);
  scale(x, scale_to / norm2(x));
  return x;
}

double cube(double v) { return v * v * v; }

}  // namespace

std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto ineq = [&out](std::string name, double measured, double bound, double slack) {
    CheckResult r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound + slack;
    r.margin = r.bound - measured;
    r.pass = measured <= r.bound;
    out.push_back(std::move(r));
  };
  auto equal = [&out](std::string name, double diff, double tol) {
    CheckResult r;
    r.name = std::move(name);
    r.measured = diff;
    r.bound = tol;
    r.margin = tol - diff;
    r.pass = diff <= tol;
    out.push_back(std::move(r));
  };

  const int d_grid[] = {2, 5, 10, 20};
  const double mu_grid[] = {0.01, 0.1};
  const int dir_grid[] = {1, 4, 16};
  std::uint64_t row = 0;
  auto next_seed = [&row, seed]() { return mix(seed, ++row); };

  // E||u||^p against (d + p)^{p/2}.
  for (int d : d_grid)
    for (int p : {2, 4, 6}) {
      const auto m = gaussian_moment_mc(d, p, 120'000, next_seed());
      ineq("gaussian-moment d=" + std::to_string(d) + " p=" + std::to_string(p), m.mean,
           std::pow(d + p, p / 2.0), 3.0 * m.stderr_);
    }

  // E[<g,u>^2 ||u||^2] against (d + 4) ||g||^2 (exact value (d + 2) ||g||^2).
  for (int d : d_grid) {
    const Vec g = unit_point(d, 1.7, next_seed());
    const auto m = directional_moment_mc(g, 120'000, next_seed());
    ineq("directional-moment d=" + std::to_string(d), m.mean, (d + 4.0) * norm_sq(g),
         3.0 * m.stderr_);
  }

  // |f_mu - f| <= mu L0 sqrt(d) on the norm objective (L0 = 1).
  {
    BlackBoxProblem norm_p;
    norm_p.n = 1;
    norm_p.smoothness = Smoothness::kC00;
    norm_p.lipschitz = 1.0;
    norm_p.name = "norm";
    norm_p.component = [](std::span<const double> x, int) { return norm2(x); };
    for (int d : d_grid)
      for (double mu : mu_grid) {
        norm_p.d = d;
        const Vec x = unit_point(d, 1.0, next_seed());
        const auto m = smoothed_value_mc(norm_p, x, mu, 60'000, next_seed());
        ineq("smoothing-gap-c0 d=" + std::to_string(d) + " mu=" + std::to_string(mu),
             std::abs(m.mean - norm2(x)), mu * std::sqrt(static_cast<double>(d)),
             3.0 * m.stderr_);
      }
  }

  // Two-point estimator deviation on the identity quadratic:
  // E||G - grad f_mu||^2 <= (mu^2/2)(d+6)^3 + 2(d+4)||grad f||^2.
  for (int d : d_grid)
    for (double mu : mu_grid) {
      const Vec x = unit_point(d, 1.3, next_seed());
      CounterRng rng(next_seed(), kStreamOracle);
      Vec u(d);
      Acc a;
      const double f0 = 0.5 * norm_sq(x);
      for (int s = 0; s < 100'000; ++s) {
        rng.fill_normal(u);
        double f1 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double t = x[c] + mu * u[c];
          f1 += t * t;
        }
        const double coef = (0.5 * f1 - f0) / mu;
        double dev = 0.0;
        for (int c = 0; c < d; ++c) {
          const double t = coef * u[c] - x[c];
          dev += t * t;
        }
        a.add(dev);
      }
      ineq("two-point-variance d=" + std::to_string(d) + " mu=" + std::to_string(mu),
           a.mean(), 0.5 * mu * mu * cube(d + 6.0) + 2.0 * (d + 4.0) * norm_sq(x),
           3.0 * a.se());
    }

  // ||grad f||^2 <= 2 ||grad f_mu||^2 + (mu^2/2) L1^2 (d+6)^3, with the
  // smoothed gradient estimated by Monte Carlo.
  {
    BlackBoxProblem quad;
    quad.n = 1;
    quad.smoothness = Smoothness::kC11;
    quad.lipschitz = 1.0;
    quad.name = "quadratic";
    quad.component = [](std::span<const double> x, int) { return 0.5 * norm_sq(x); };
    for (int d : {5, 20})
      for (double mu : mu_grid) {
        quad.d = d;
        const Vec x = unit_point(d, 1.0, next_seed());
        const auto g = smoothed_gradient_mc(quad, x, mu, 120'000, next_seed());
        double se_norm = 0.0;
        for (int c = 0; c < d; ++c)
          se_norm += 2.0 * std::abs(g.mean[c]) * g.stderr_[c] + g.stderr_[c] * g.stderr_[c];
        ineq("grad-vs-smoothed d=" + std::to_string(d) + " mu=" + std::to_string(mu),
             norm_sq(x), 2.0 * norm_sq(g.mean) + 0.5 * mu * mu * cube(d + 6.0),
             3.0 * 2.0 * se_norm);
      }
  }

  // Without-replacement subset identity, exact to numerical precision.
  {
    CounterRng rng(next_seed(), kStreamOracle);
    const int n = 6;
    std::vector<Vec> v;
    Vec mean = zeros(4);
    for (int i = 0; i < n; ++i) {
      Vec x(4);
      rng.fill_normal(x);
      axpy(1.0 / n, x, mean);
      v.push_back(std::move(x));
    }
    for (auto& x : v)
      for (int c = 0; c < 4; ++c) x[c] -= mean[c];
    for (int B = 1; B <= n; ++B) {
      const double brute = subset_mean_sq_bruteforce(v, B);
      const double formula = subset_mean_sq_formula(v, B);
      equal("subset-identity n=6 B=" + std::to_string(B), std::abs(brute - formula),
            1e-12 * std::max(1.0, std::abs(formula)));
    }
  }

  // Subsampled grid second moment against (1/D + [B<n]/B) full-grid bound,
  // on a centered discrete family.
  {
    const int n = 5, M = 7, dim = 3;
    CounterRng rng(next_seed(), kStreamOracle);
    std::vector<std::vector<Vec>> h(n, std::vector<Vec>(M));
    Vec grand = zeros(dim);
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < M; ++m) {
        h[i][m].resize(dim);
        rng.fill_normal(h[i][m]);
        axpy(1.0 / (n * M), h[i][m], grand);
      }
    for (auto& hi : h)
      for (auto& x : hi)
        for (int c = 0; c < dim; ++c) x[c] -= grand[c];
    double full_ms = 0.0;
    for (const auto& hi : h)
      for (const auto& x : hi) full_ms += norm_sq(x) / (n * M);
    for (int B : {2, 5}) {
      const int D = 3;
      CounterRng trial_rng(next_seed(), kStreamOracle);
      Acc a;
      Vec acc(dim);
      for (int t = 0; t < 120'000; ++t) {
        const auto batch = sample_without_replacement(n, B, trial_rng);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int rep = 0; rep < D; ++rep) {
          const int m = static_cast<int>(trial_rng.bounded(M));
          for (int i : batch) axpy(1.0 / (static_cast<double>(B) * D), h[i][m], acc);
        }
        a.add(norm_sq(acc));
      }
      const double indicator = B < n ? 1.0 : 0.0;
      ineq("grid-subsample-bound B=" + std::to_string(B), a.mean(),
           (1.0 / D + indicator / B) * full_ms, 3.0 * a.se());
    }
  }

  // Anchored-estimate variance: E||G - grad f_mu(x)||^2 within
  // (1/D + [B<n]/B) ((mu^2/2) L1^2 (d+6)^3 + 2 (d+4) ||grad f(x)||^2).
  {
    auto run_cell = [&](int d, double mu, int D, int B) {
      const auto q = make_shifted_quadratic(6, d, next_seed());
      const Vec x = unit_point(d, 1.2, next_seed());
      const Vec gref = q.gradient(x);
      CounterRng rng(next_seed(), kStreamSampling);
      QueryLedger scratch;
      Acc a;
      for (int t = 0; t < 4000; ++t) {
        DirectionSet dirs(mix(seed, 0xace0 + row * 4001 + t), D, d);
        auto batch = sample_batch(q.problem.n, B, rng);
        const auto cache =
            anchor_gradient(q.problem, x, dirs, std::move(batch), mu, scratch);
        a.add(norm_sq(sub(cache.grad, gref)));
      }
      const double indicator = B < q.problem.n ? 1.0 : 0.0;
      ineq("anchored-variance d=" + std::to_string(d) + " mu=" + std::to_string(mu) +
               " D=" + std::to_string(D) + " B=" + std::to_string(B),
           a.mean(),
           (1.0 / D + indicator / B) *
               (0.5 * mu * mu * cube(d + 6.0) + 2.0 * (d + 4.0) * norm_sq(gref)),
           3.0 * a.se());
    };
    for (int D : dir_grid)
      for (int B : {2, 6})
        for (double mu : mu_grid) run_cell(10, mu, D, B);
    for (int d : {2, 5, 20}) run_cell(d, 0.01, 4, 2);
  }

  // Inner-difference drift: E||G(x) - G(anchor)||^2 within
  // (3/2) L1^2 mu^2 (d+6)^3 + 3 L1^2 (d+4) ||x - anchor||^2.
  for (int d : {2, 10, 20})
    for (double mu : mu_grid) {
      const auto q = make_shifted_quadratic(6, d, next_seed());
      const Vec anchor = unit_point(d, 1.0, next_seed());
      Vec x = anchor;
      const Vec delta = unit_point(d, 0.5, next_seed());
      axpy(1.0, delta, x);
      CounterRng rng(next_seed(), kStreamOracle);
      QueryLedger scratch;
      Vec u(d), xp(d);
      Acc a;
      for (int s = 0; s < 100'000; ++s) {
        rng.fill_normal(u);
        const int i = static_cast<int>(rng.bounded(6));
        const double fx = evaluate_component(q.problem, x, i, scratch, Phase::kReporting);
        for (int c = 0; c < d; ++c) xp[c] = x[c] + mu * u[c];
        const double fxp = evaluate_component(q.problem, xp, i, scratch, Phase::kReporting);
        const double fa = evaluate_component(q.problem, anchor, i, scratch, Phase::kReporting);
        for (int c = 0; c < d; ++c) xp[c] = anchor[c] + mu * u[c];
        const double fap = evaluate_component(q.problem, xp, i, scratch, Phase::kReporting);
        const double coef = ((fxp - fx) - (fap - fa)) / mu;
        a.add(coef * coef * norm_sq(u));
      }
      ineq("drift-variance d=" + std::to_string(d) + " mu=" + std::to_string(mu), a.mean(),
           1.5 * mu * mu * cube(d + 6.0) + 3.0 * (d + 4.0) * norm_sq(delta), 3.0 * a.se());
    }

  // Non-smooth direction averaging: E||mean_D G - grad f_mu||^2 <=
  // (1/D) L0^2 (d+2)^2 on the norm objective.
  {
    BlackBoxProblem norm_p;
    norm_p.n = 1;
    norm_p.smoothness = Smoothness::kC00;
    norm_p.lipschitz = 1.0;
    norm_p.name = "norm";
    norm_p.component = [](std::span<const double> x, int) { return norm2(x); };
    for (int d : {2, 10})
      for (double mu : mu_grid) {
        norm_p.d = d;
        const Vec x = unit_point(d, 1.0, next_seed());
        const auto gref = smoothed_gradient_mc(norm_p, x, mu, 600'000, next_seed());
        for (int D : dir_grid) {
          CounterRng rng(next_seed(), kStreamOracle);
          QueryLedger scratch;
          const double f0 = norm2(x);
          Vec u(d), xp(d), acc(d);
          Acc a;
          for (int t = 0; t < 3000; ++t) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int m = 0; m < D; ++m) {
              rng.fill_normal(u);
              for (int c = 0; c < d; ++c) xp[c] = x[c] + mu * u[c];
              const double coef = (norm2(xp) - f0) / mu;
              axpy(coef / D, u, acc);
            }
            a.add(norm_sq(sub(acc, gref.mean)));
          }
          ineq("direction-average-c0 d=" + std::to_string(d) + " mu=" + std::to_string(mu) +
                   " D=" + std::to_string(D),
               a.mean(), (d + 2.0) * (d + 2.0) / D, 3.0 * a.se());
        }
      }

    // Non-smooth point-difference bound:
    // E||G(x) - G(x')||^2 <= (1/mu^2)(d+2) L0^2 ||x - x'||^2.
    for (int d : {2, 10, 20}) {
      const double mu = 0.1;
      norm_p.d = d;
      const Vec x = unit_point(d, 1.0, next_seed());
      Vec x2 = x;
      const Vec delta = unit_point(d, 0.03, next_seed());
      axpy(1.0, delta, x2);
      CounterRng rng(next_seed(), kStreamOracle);
      Vec u(d), xp(d);
      Acc a;
      const double f0 = norm2(x), f2 = norm2(x2);
      for (int s = 0; s < 100'000; ++s) {
        rng.fill_normal(u);
        for (int c = 0; c < d; ++c) xp[c] = x[c] + mu * u[c];
        const double s1 = (norm2(xp) - f0) / mu;
        for (int c = 0; c < d; ++c) xp[c] = x2[c] + mu * u[c];
        const double s2 = (norm2(xp) - f2) / mu;
        const double coef = s1 - s2;
        a.add(coef * coef * norm_sq(u));
      }
      ineq("lipschitz-diff-c0 d=" + std::to_string(d), a.mean(),
           (d + 2.0) / (mu * mu) * norm_sq(delta), 3.0 * a.se());
    }
  }

  return out;
}

}  // namespace zovr
