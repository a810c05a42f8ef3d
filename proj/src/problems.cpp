#include "zovr/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "zovr/trace_io.hpp"

namespace zovr {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^t) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ParseError("bad numeric field '" + std::string(s) + "'", line);
  return v;
}

long long parse_int(std::string_view s, int line) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ParseError("bad integer field '" + std::string(s) + "'", line);
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double max_row_norm_sq(const Dataset& data) {
  double m = 0.0;
  for (int i = 0; i < data.n; ++i) m = std::max(m, norm_sq(data.row(i)));
  return m;
}

// Targets in {0,1} from labels encoded {0,1} or {-1,+1}.
std::vector<double> binary_targets(const Dataset& data, const char* who) {
  bool zero_one = true, pm_one = true;
  for (int y : data.labels) {
    zero_one = zero_one && (y == 0 || y == 1);
    pm_one = pm_one && (y == -1 || y == 1);
  }
  if (!zero_one && !pm_one)
    throw std::invalid_argument(std::string(who) +
                                ": labels must be binary ({0,1} or {-1,+1})");
  std::vector<double> t(data.labels.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = zero_one ? data.labels[i] : (data.labels[i] + 1) / 2;
  return t;
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
  auto is = open_or_throw(path);
  Dataset data;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (lineno == 1) {
      if (f.size() < 2 || f.back() != "label")
        throw ParseError("header must be f1,...,fd,label", lineno);
      for (std::size_t c = 0; c + 1 < f.size(); ++c)
        if (f[c] != "f" + std::to_string(c + 1))
          throw ParseError("header column " + std::to_string(c + 1) + " must be f" +
                               std::to_string(c + 1),
                           lineno);
      data.d = static_cast<int>(f.size()) - 1;
      continue;
    }
    if (static_cast<int>(f.size()) != data.d + 1)
      throw ParseError("expected " + std::to_string(data.d + 1) + " fields, got " +
                           std::to_string(f.size()),
                       lineno);
    for (int c = 0; c < data.d; ++c) {
      const double v = parse_double(f[c], lineno);
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", lineno);
      data.features.push_back(v);
    }
    const long long y = parse_int(f.back(), lineno);
    if (y < -1 || y > 1'000'000) throw ParseError("label out of range", lineno);
    data.labels.push_back(static_cast<int>(y));
    ++data.n;
  }
  if (data.n == 0) throw ParseError("dataset has no rows", lineno);
  int max_label = 0;
  for (int y : data.labels) max_label = std::max(max_label, y);
  data.num_classes = std::max(2, max_label + 1);
  return data;
}

Vec LinearSoftmaxModel::logits(std::span<const double> x) const {
  Vec z(num_classes);
  for (int k = 0; k < num_classes; ++k)
    z[k] = dot({W.data() + static_cast<std::size_t>(k) * d, static_cast<std::size_t>(d)}, x) +
           b[k];
  return z;
}

LinearSoftmaxModel load_model_csv(const std::filesystem::path& path) {
  auto is = open_or_throw(path);
  LinearSoftmaxModel m;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty model file", 1);
  strip_cr(line);
  {
    const auto f = split(line, ' ');
    if (f.size() != 2) throw ParseError("first line must be 'K d'", 1);
    m.num_classes = static_cast<int>(parse_int(f[0], 1));
    m.d = static_cast<int>(parse_int(f[1], 1));
    if (m.num_classes < 2 || m.d < 1) throw ParseError("model shape out of range", 1);
  }
  int lineno = 1;
  for (int k = 0; k < m.num_classes; ++k) {
    if (!std::getline(is, line)) throw ParseError("missing weight row", lineno + 1);
    ++lineno;
    strip_cr(line);
    const auto f = split(line, ',');
    if (static_cast<int>(f.size()) != m.d)
      throw ParseError("weight row needs " + std::to_string(m.d) + " values", lineno);
    for (const auto& s : f) m.W.push_back(parse_double(s, lineno));
  }
  if (!std::getline(is, line)) throw ParseError("missing bias row", lineno + 1);
  ++lineno;
  strip_cr(line);
  const auto f = split(line, ',');
  if (static_cast<int>(f.size()) != m.num_classes)
    throw ParseError("bias row needs " + std::to_string(m.num_classes) + " values", lineno);
  for (const auto& s : f) m.b.push_back(parse_double(s, lineno));
  return m;
}

void save_model_csv(const std::filesystem::path& path, const LinearSoftmaxModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << m.num_classes << ' ' << m.d << '\n';
  for (int k = 0; k < m.num_classes; ++k) {
    for (int j = 0; j < m.d; ++j)
      os << (j ? "," : "") << format_double(m.W[static_cast<std::size_t>(k) * m.d + j]);
    os << '\n';
  }
  for (int k = 0; k < m.num_classes; ++k) os << (k ? "," : "") << format_double(m.b[k]);
  os << '\n';
}

BlackBoxProblem make_logistic(const Dataset& data) {
  if (data.n < 1) throw std::invalid_argument("make_logistic: empty dataset");
  const auto d0 = data.d;
  BlackBoxProblem p;
  p.n = data.n;
  p.smoothness = Smoothness::kC11;
  p.lipschitz = 0.25 * max_row_norm_sq(data);
  p.name = "logistic";

  bool binary = data.num_classes <= 2;
  for (int y : data.labels)
    if (y < 0) binary = true;  // sign-encoded labels are binary by construction

  const auto shared = std::make_shared<Dataset>(data);
  if (binary) {
    const auto t = std::make_shared<std::vector<double>>(binary_targets(data, "make_logistic"));
    p.d = d0;
    p.component = [shared, t](std::span<const double> th, int i) {
      const double z = dot(th, shared->row(i));
      return softplus(-z) + (1.0 - (*t)[i]) * z;
    };
    p.analytic_gradient = [shared, t](std::span<const double> th) {
      Vec g(th.size(), 0.0);
      for (int i = 0; i < shared->n; ++i) {
        const auto xi = shared->row(i);
        axpy((sigmoid(dot(th, xi)) - (*t)[i]) / shared->n, xi, g);
      }
      return g;
    };
    return p;
  }

  // One-vs-all: per-class parameter blocks, per-sample loss summed over
  // classes. Block Hessians are independent, so the binary L1 bound holds.
  const int C = data.num_classes;
  for (int y : data.labels)
    if (y < 0 || y >= C) throw std::invalid_argument("make_logistic: label outside [0, C)");
  p.d = d0 * C;
  p.component = [shared, C, d0](std::span<const double> th, int i) {
    const auto xi = shared->row(i);
    double loss = 0.0;
    for (int c = 0; c < C; ++c) {
      const double z = dot(th.subspan(static_cast<std::size_t>(c) * d0, d0), xi);
      loss += softplus(-z) + (shared->labels[i] == c ? 0.0 : 1.0) * z;
    }
    return loss;
  };
  p.analytic_gradient = [shared, C, d0](std::span<const double> th) {
    Vec g(th.size(), 0.0);
    for (int i = 0; i < shared->n; ++i) {
      const auto xi = shared->row(i);
      for (int c = 0; c < C; ++c) {
        const double z = dot(th.subspan(static_cast<std::size_t>(c) * d0, d0), xi);
        const double coef = (sigmoid(z) - (shared->labels[i] == c ? 1.0 : 0.0)) / shared->n;
        for (int j = 0; j < d0; ++j) g[static_cast<std::size_t>(c) * d0 + j] += coef * xi[j];
      }
    }
    return g;
  };
  return p;
}

double QuadraticProblem::value(std::span<const double> x) const {
  if (A.empty()) return 0.5 * norm_sq(x);
  const int d = problem.d;
  double s = 0.0;
  for (int r = 0; r < d; ++r)
    s += x[r] * dot({A.data() + static_cast<std::size_t>(r) * d, static_cast<std::size_t>(d)}, x);
  return 0.5 * s;
}

Vec QuadraticProblem::gradient(std::span<const double> x) const {
  if (A.empty()) return Vec(x.begin(), x.end());
  const int d = problem.d;
  Vec g(d);
  for (int r = 0; r < d; ++r)
    g[r] = dot({A.data() + static_cast<std::size_t>(r) * d, static_cast<std::size_t>(d)}, x);
  return g;
}

QuadraticProblem make_quadratic(int d) { return make_quadratic(d, {}); }

QuadraticProblem make_quadratic(int d, std::vector<double> A) {
  if (d < 1) throw std::invalid_argument("make_quadratic: d must be >= 1");
  auto q = std::make_shared<QuadraticProblem>();
  q->A = std::move(A);
  double L1 = 1.0;
  if (q->A.empty()) {
    q->trace_A = d;
  } else {
    if (static_cast<int>(q->A.size()) != d * d)
      throw std::invalid_argument("make_quadratic: A must be d x d");
    for (int r = 0; r < d; ++r)
      for (int c = r + 1; c < d; ++c)
        if (std::abs(q->A[r * d + c] - q->A[c * d + r]) > 1e-12)
          throw std::invalid_argument("make_quadratic: A must be symmetric");
    for (int r = 0; r < d; ++r) q->trace_A += q->A[r * d + r];
    // Largest eigenvalue by power iteration; A is assumed PSD.
    Vec v(d, 1.0 / std::sqrt(static_cast<double>(d))), w(d);
    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
      for (int r = 0; r < d; ++r)
        w[r] = dot({q->A.data() + static_cast<std::size_t>(r) * d, static_cast<std::size_t>(d)}, v);
      const double nw = norm2(w);
      if (nw == 0.0) break;
      lam = nw;
      for (int r = 0; r < d; ++r) v[r] = w[r] / nw;
    }
    L1 = std::max(lam, 1e-12);
  }
  q->problem.n = 1;
  q->problem.d = d;
  q->problem.smoothness = Smoothness::kC11;
  q->problem.lipschitz = L1;
  q->problem.name = "quadratic";
  q->problem.component = [q0 = q.get(), keep = q](std::span<const double> x, int) {
    return q0->value(x);
  };
  q->problem.analytic_gradient = [q0 = q.get(), keep = q](std::span<const double> x) {
    return q0->gradient(x);
  };
  QuadraticProblem out = *q;  // copies A/trace; problem lambdas keep q alive
  return out;
}

BlackBoxProblem make_sigmoid_least_squares(const Dataset& data) {
  if (data.n < 1) throw std::invalid_argument("make_sigmoid_least_squares: empty dataset");
  const auto shared = std::make_shared<Dataset>(data);
  const auto t = std::make_shared<std::vector<double>>(
      binary_targets(data, "make_sigmoid_least_squares"));
  BlackBoxProblem p;
  p.n = data.n;
  p.d = data.d;
  p.smoothness = Smoothness::kC11;
  // Envelope on |d^2/dz^2 (sigmoid(z) - t)^2|: 2 (sup sigma'^2 + sup |sigma''|)
  // = 2 (1/16 + 1/(6 sqrt(3))) < 0.3175.
  p.lipschitz = 0.3175 * max_row_norm_sq(data);
  p.name = "sigmoid-ls";
  p.component = [shared, t](std::span<const double> th, int i) {
    const double e = sigmoid(dot(th, shared->row(i))) - (*t)[i];
    return e * e;
  };
  p.analytic_gradient = [shared, t](std::span<const double> th) {
    Vec g(th.size(), 0.0);
    for (int i = 0; i < shared->n; ++i) {
      const auto xi = shared->row(i);
      const double s = sigmoid(dot(th, xi));
      axpy(2.0 * (s - (*t)[i]) * s * (1.0 - s) / shared->n, xi, g);
    }
    return g;
  };
  return p;
}

BlackBoxProblem make_universal_attack(const LinearSoftmaxModel& model, const Dataset& images,
                                      double C, double kappa, double box_radius) {
  if (model.d != images.d)
    throw std::invalid_argument("make_universal_attack: model and image dimensions differ");
  if (!(C > 0.0) || !(kappa >= 0.0) || !(box_radius > 0.0))
    throw std::invalid_argument("make_universal_attack: need C > 0, kappa >= 0, box_radius > 0");
  for (int y : images.labels)
    if (y < 0 || y >= model.num_classes)
      throw std::invalid_argument("make_universal_attack: label outside model classes");

  double max_row = 0.0;
  for (int k = 0; k < model.num_classes; ++k)
    max_row = std::max(max_row, norm2({model.W.data() + static_cast<std::size_t>(k) * model.d,
                                       static_cast<std::size_t>(model.d)}));

  const auto m = std::make_shared<LinearSoftmaxModel>(model);
  const auto imgs = std::make_shared<Dataset>(images);
  BlackBoxProblem p;
  p.n = images.n;
  p.d = model.d;
  p.smoothness = Smoothness::kC00;
  p.lipschitz = 2.0 * C * max_row + 2.0 * box_radius / images.n;
  p.name = "attack";
  p.component = [m, imgs, C, kappa](std::span<const double> th, int i) {
    const auto xi = imgs->row(i);
    const int l = imgs->labels[i];
    const int d = m->d;
    double z_label = 0.0;
    double other = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m->num_classes; ++k) {
      const double* w = m->W.data() + static_cast<std::size_t>(k) * d;
      double z = m->b[k];
      for (int j = 0; j < d; ++j) z += w[j] * (xi[j] + th[j]);
      if (k == l)
        z_label = z;
      else
        other = std::max(other, z);
    }
    return C * std::max(z_label - other, -kappa) + norm_sq(th) / imgs->n;
  };
  return p;
}

LinearSoftmaxModel fit_linear_softmax(const Dataset& data, double ridge) {
  if (data.n < 1) throw std::invalid_argument("fit_linear_softmax: empty dataset");
  if (ridge <= 0.0) throw std::invalid_argument("fit_linear_softmax: ridge must be positive");
  const int d = data.d, n = data.n, K = data.num_classes, m = d + 1;

  // Normal equations with a bias column: (X^T X + ridge I) Theta = X^T Y.
  std::vector<double> G(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> R(static_cast<std::size_t>(m) * K, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto xi = data.row(i);
    auto at = [&](int r) { return r < d ? xi[r] : 1.0; };
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) G[static_cast<std::size_t>(r) * m + c] += at(r) * at(c);
      R[static_cast<std::size_t>(r) * K + data.labels[i]] += at(r);
    }
  }
  for (int r = 0; r < m; ++r) G[static_cast<std::size_t>(r) * m + r] += ridge;

  // Cholesky G = L L^T.
  std::vector<double> L(static_cast<std::size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c <= r; ++c) {
      double s = G[static_cast<std::size_t>(r) * m + c];
      for (int k = 0; k < c; ++k)
        s -= L[static_cast<std::size_t>(r) * m + k] * L[static_cast<std::size_t>(c) * m + k];
      if (r == c) {
        if (s <= 0.0) throw std::runtime_error("fit_linear_softmax: Gram matrix not PD");
        L[static_cast<std::size_t>(r) * m + r] = std::sqrt(s);
      } else {
        L[static_cast<std::size_t>(r) * m + c] = s / L[static_cast<std::size_t>(c) * m + c];
      }
    }
  }
  auto solve_col = [&](int k, std::vector<double>& theta) {
    Vec y(m);
    for (int r = 0; r < m; ++r) {
      double s = R[static_cast<std::size_t>(r) * K + k];
      for (int c = 0; c < r; ++c) s -= L[static_cast<std::size_t>(r) * m + c] * y[c];
      y[r] = s / L[static_cast<std::size_t>(r) * m + r];
    }
    for (int r = m - 1; r >= 0; --r) {
      double s = y[r];
      for (int c = r + 1; c < m; ++c) s -= L[static_cast<std::size_t>(c) * m + r] * theta[c];
      theta[r] = s / L[static_cast<std::size_t>(r) * m + r];
    }
  };

  LinearSoftmaxModel model;
  model.num_classes = K;
  model.d = d;
  model.W.resize(static_cast<std::size_t>(K) * d);
  model.b.resize(K);
  std::vector<double> theta(m);
  for (int k = 0; k < K; ++k) {
    solve_col(k, theta);
    for (int j = 0; j < d; ++j) model.W[static_cast<std::size_t>(k) * d + j] = theta[j];
    model.b[k] = theta[d];
  }
  return model;
}

}  // namespace zovr
