#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zovr/core.hpp"

namespace zovr {

// Row-major feature matrix plus integer labels.
struct Dataset {
  int n = 0;
  int d = 0;
  int num_classes = 0;  // max label + 1
  std::vector<double> features;
  std::vector<int> labels;

  std::span<const double> row(int i) const {
    return {features.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }
};

// Header "f1,...,fd,label"; labels are non-negative integers except that -1
// is accepted (sign-encoded binary labels).
Dataset load_dataset_csv(const std::filesystem::path& path);

// Linear scorer Z(x) = W x + b.
struct LinearSoftmaxModel {
  int num_classes = 0;
  int d = 0;
  std::vector<double> W;  // row-major, num_classes x d
  Vec b;

  Vec logits(std::span<const double> x) const;
};

// First line "K d", then K weight rows, then one row of K biases.
LinearSoftmaxModel load_model_csv(const std::filesystem::path& path);
void save_model_csv(const std::filesystem::path& path, const LinearSoftmaxModel& m);

// Cross-entropy on sigmoid scores. Binary labels {0,1} use a single weight
// block (parameter dimension d); multi-class labels use one-vs-all blocks
// (parameter dimension d * num_classes, loss summed over classes).
// L1 = (1/4) max_i ||xi_i||^2.
BlackBoxProblem make_logistic(const Dataset& data);

// (1/2) x^T A x with exact smoothed-objective accessors for oracle tests.
struct QuadraticProblem {
  BlackBoxProblem problem;
  std::vector<double> A;  // row-major d x d; empty means identity
  double trace_A = 0.0;

  double value(std::span<const double> x) const;
  Vec gradient(std::span<const double> x) const;  // also the smoothed gradient
  double smoothed_value(std::span<const double> x, double mu) const {
    return value(x) + 0.5 * mu * mu * trace_A;
  }
};

QuadraticProblem make_quadratic(int d);                         // A = I
QuadraticProblem make_quadratic(int d, std::vector<double> A);  // symmetric PSD

// Per-sample squared error (sigmoid(<theta, xi>) - t)^2 with targets t in
// {0,1}; labels may be encoded {0,1} or {-1,+1}. Bounded, smooth, non-convex.
BlackBoxProblem make_sigmoid_least_squares(const Dataset& data);

// Margin-hinge objective for a shared additive perturbation theta applied to
// every image:
//   F(theta; xi_i) = C max{ Z_{l_i}(x_i+theta) - max_{j != l_i} Z_j(x_i+theta), -kappa }
//                    + (1/N) ||theta||^2.
// Piecewise linear plus quadratic: C00 with
//   L0 = 2 C max-row-norm(W) + (2/N) box_radius,
// valid while ||theta|| stays within box_radius.
BlackBoxProblem make_universal_attack(const LinearSoftmaxModel& model, const Dataset& images,
                                      double C = 1.0, double kappa = 0.0,
                                      double box_radius = 1.0);

// Ridge least-squares fit of one-hot targets; the tiny trainer behind the
// shipped attack model.
LinearSoftmaxModel fit_linear_softmax(const Dataset& data, double ridge = 1e-3);

}  // namespace zovr
