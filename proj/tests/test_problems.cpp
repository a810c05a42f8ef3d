#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "zovr/oracles.hpp"
#include "zovr/problems.hpp"

using namespace zovr;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("zovr_test_" + name);
  std::ofstream os(p, std::ios::binary);
  os << body;
  return p;
}

fs::path data_dir() {
  if (const char* env = std::getenv("ZOVR_DATA")) return env;
  return "data";
}

Dataset tiny_binary() {
  Dataset d;
  d.n = 4;
  d.d = 2;
  d.num_classes = 2;
  d.features = {1.0, 0.0, 0.0, 1.0, -1.0, 0.5, 0.5, -1.5};
  d.labels = {0, 1, 1, 0};
  return d;
}

}  // namespace

TEST_SUITE_BEGIN("problems");

TEST_CASE("load_dataset_csv parses features and labels") {
  const auto p = write_temp("ds.csv", "f1,f2,label\n0.5,1.25,0\n-1,0.75,1\n");
  const auto d = load_dataset_csv(p);
  CHECK(d.n == 2);
  CHECK(d.d == 2);
  CHECK(d.num_classes == 2);
  CHECK(d.row(0)[0] == 0.5);
  CHECK(d.row(1)[1] == 0.75);
  CHECK(d.labels[0] == 0);
  CHECK(d.labels[1] == 1);
}

TEST_CASE("load_dataset_csv accepts sign-encoded binary labels") {
  const auto p = write_temp("ds_pm.csv", "f1,label\n2,-1\n3,1\n");
  const auto d = load_dataset_csv(p);
  CHECK(d.labels[0] == -1);
  CHECK(d.num_classes == 2);
}

TEST_CASE("load_dataset_csv tolerates CRLF line endings and blank lines") {
  const auto p = write_temp("ds_crlf.csv", "f1,label\r\n1.5,0\r\n\r\n2.5,1\r\n");
  const auto d = load_dataset_csv(p);
  CHECK(d.n == 2);
  CHECK(d.row(1)[0] == 2.5);
}

TEST_CASE("load_dataset_csv rejects malformed input with line numbers") {
  auto expect_line = [](const std::string& name, const std::string& body, int line) {
    const auto p = write_temp(name, body);
    try {
      load_dataset_csv(p);
      CHECK(false);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("h1.csv", "x1,f2,label\n1,2,0\n", 1);           // wrong column name
  expect_line("h2.csv", "f1,f2\n1,2\n", 1);                   // no label column
  expect_line("r1.csv", "f1,f2,label\n1,2,0\n1,2\n", 3);      // ragged row
  expect_line("r2.csv", "f1,label\nabc,0\n", 2);              // bad numeric
  expect_line("r3.csv", "f1,label\ninf,0\n", 2);              // non-finite feature
  expect_line("r4.csv", "f1,label\n1,-2\n", 2);               // label out of range
  expect_line("r5.csv", "f1,label\n", 1);                     // no rows
  CHECK_THROWS_AS(load_dataset_csv("no_such_file_zovr.csv"), std::runtime_error);
}

TEST_CASE("make_logistic on binary labels") {
  const auto d = tiny_binary();
  const auto p = make_logistic(d);
  CHECK(p.n == 4);
  CHECK(p.d == 2);
  CHECK(p.smoothness == Smoothness::kC11);
  // L1 = (1/4) max ||row||^2; the last row is the largest.
  CHECK(p.lipschitz == doctest::Approx(0.25 * (0.25 + 2.25)).epsilon(1e-15));
  QueryLedger led;
  CHECK(full_objective(p, zeros(2), led, Phase::kReporting) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const Vec x = {0.3, -0.7};
  const Vec fd = finite_diff_gradient(p, x, 1e-6);
  const Vec an = p.analytic_gradient(x);
  for (int k = 0; k < 2; ++k) CHECK(fd[k] == doctest::Approx(an[k]).epsilon(1e-6));
}

TEST_CASE("make_logistic one-vs-all expands the parameter space") {
  Dataset d;
  d.n = 3;
  d.d = 2;
  d.num_classes = 3;
  d.features = {1, 0, 0, 1, 1, 1};
  d.labels = {0, 1, 2};
  const auto p = make_logistic(d);
  CHECK(p.d == 6);
  QueryLedger led;
  CHECK(full_objective(p, zeros(6), led, Phase::kReporting) ==
        doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  const Vec x = {0.1, -0.2, 0.3, 0.0, -0.1, 0.2};
  const Vec fd = finite_diff_gradient(p, x, 1e-6);
  const Vec an = p.analytic_gradient(x);
  for (int k = 0; k < 6; ++k) CHECK(fd[k] == doctest::Approx(an[k]).epsilon(1e-5));
  Dataset bad = d;
  bad.labels = {0, 1, 3};  // outside [0, num_classes)
  CHECK_THROWS_AS(make_logistic(bad), std::invalid_argument);
}

TEST_CASE("quadratic with identity matrix") {
  const auto q = make_quadratic(3);
  CHECK(q.problem.n == 1);
  CHECK(q.problem.lipschitz == doctest::Approx(1.0).epsilon(1e-9));
  const Vec x = {1.0, 2.0, -2.0};
  CHECK(q.value(x) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(q.gradient(x) == x);
  CHECK(q.trace_A == doctest::Approx(3.0));
  QueryLedger led;
  CHECK(evaluate_component(q.problem, x, 0, led, Phase::kInner) == q.value(x));
}

TEST_CASE("quadratic with a custom matrix") {
  const std::vector<double> A = {2.0, 1.0, 1.0, 3.0};
  const auto q = make_quadratic(2, A);
  const Vec x = {1.0, -1.0};
  // x^T A x / 2 = (2 - 1 - 1 + 3) / 2.
  CHECK(q.value(x) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(q.gradient(x)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.gradient(x)[1] == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(q.trace_A == doctest::Approx(5.0));
  // Largest eigenvalue of [[2,1],[1,3]] is (5 + sqrt(5)) / 2.
  CHECK(q.problem.lipschitz ==
        doctest::Approx(0.5 * (5.0 + std::sqrt(5.0))).epsilon(1e-6));
  CHECK(q.smoothed_value(x, 0.1) ==
        doctest::Approx(q.value(x) + 0.5 * 0.01 * 5.0).epsilon(1e-12));
}

TEST_CASE("sigmoid least squares matches hand computation") {
  const auto d = tiny_binary();
  const auto p = make_sigmoid_least_squares(d);
  CHECK(p.lipschitz == doctest::Approx(0.3175 * 2.5).epsilon(1e-12));
  const Vec x = {0.4, -0.1};
  QueryLedger led;
  const double z = 0.4 * 1.0 + (-0.1) * 0.0;
  const double s = 1.0 / (1.0 + std::exp(-z));
  CHECK(evaluate_component(p, x, 0, led, Phase::kInner) ==
        doctest::Approx(s * s).epsilon(1e-12));  // target of row 0 is 0
  const Vec fd = finite_diff_gradient(p, x, 1e-6);
  const Vec an = p.analytic_gradient(x);
  for (int k = 0; k < 2; ++k) CHECK(fd[k] == doctest::Approx(an[k]).epsilon(1e-6));
  Dataset bad = d;
  bad.labels = {0, 2, 1, 0};
  CHECK_THROWS_AS(make_sigmoid_least_squares(bad), std::invalid_argument);
}

TEST_CASE("universal attack objective by hand") {
  LinearSoftmaxModel m;
  m.num_classes = 2;
  m.d = 2;
  m.W = {1.0, 0.0, 0.0, 1.0};
  m.b = {0.0, 0.5};
  Dataset imgs;
  imgs.n = 1;
  imgs.d = 2;
  imgs.num_classes = 2;
  imgs.features = {2.0, 0.0};
  imgs.labels = {0};
  const auto p = make_universal_attack(m, imgs, 1.5, 0.25, 1.0);
  CHECK(p.smoothness == Smoothness::kC00);
  CHECK(p.lipschitz == doctest::Approx(2.0 * 1.5 * 1.0 + 2.0 * 1.0 / 1.0).epsilon(1e-12));
  QueryLedger led;
  // theta = 0: margin = z_0 - z_1 = 2.0 - 0.5.
  CHECK(evaluate_component(p, zeros(2), 0, led, Phase::kInner) ==
        doctest::Approx(1.5 * 1.5).epsilon(1e-12));
  // Deep past the hinge the loss flattens at -C kappa plus the penalty.
  const Vec th = {-3.0, 3.0};  // margin = -1 - 3.5 < -kappa
  CHECK(evaluate_component(p, th, 0, led, Phase::kInner) ==
        doctest::Approx(1.5 * -0.25 + 18.0 / 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(make_universal_attack(m, imgs, 0.0), std::invalid_argument);
  Dataset wrong = imgs;
  wrong.labels = {5};
  CHECK_THROWS_AS(make_universal_attack(m, wrong), std::invalid_argument);
}

TEST_CASE("model csv round-trips bitwise") {
  LinearSoftmaxModel m;
  m.num_classes = 2;
  m.d = 3;
  m.W = {0.1, -0.2, 1.0 / 3.0, 2e-7, 5.5, -0.125};
  m.b = {0.25, -1.0 / 7.0};
  const fs::path p = fs::temp_directory_path() / "zovr_test_model.csv";
  save_model_csv(p, m);
  const auto r = load_model_csv(p);
  CHECK(r.num_classes == m.num_classes);
  CHECK(r.d == m.d);
  CHECK(r.W == m.W);
  CHECK(r.b == m.b);
}

TEST_CASE("model csv rejects malformed files") {
  auto expect = [](const std::string& name, const std::string& body) {
    const auto p = write_temp(name, body);
    CHECK_THROWS_AS(load_model_csv(p), ParseError);
  };
  expect("m1.csv", "");
  expect("m2.csv", "2\n1,2\n3,4\n0,0\n");        // malformed shape line
  expect("m3.csv", "2 2\n1,2\n3\n0,0\n");        // short weight row
  expect("m4.csv", "2 2\n1,2\n3,4\n0\n");        // short bias row
  expect("m5.csv", "2 2\n1,2\n");                // missing rows
}

TEST_CASE("fit_linear_softmax separates an easy dataset") {
  Dataset d;
  d.n = 6;
  d.d = 2;
  d.num_classes = 2;
  d.features = {2, 0, 2.2, 0.2, 1.8, -0.1, -2, 0, -2.1, 0.3, -1.9, -0.2};
  d.labels = {0, 0, 0, 1, 1, 1};
  const auto m = fit_linear_softmax(d);
  for (int i = 0; i < d.n; ++i) {
    const auto z = m.logits(d.row(i));
    const int other = 1 - d.labels[i];
    CHECK(z[d.labels[i]] > z[other]);
  }
  CHECK_THROWS_AS(fit_linear_softmax(d, 0.0), std::invalid_argument);
}

TEST_CASE("shipped datasets load and satisfy their contracts") {
  const auto dir = data_dir();
  if (!fs::exists(dir / "logistic_synth.csv")) {
    MESSAGE("shipped data not found under ", dir.string(), "; set ZOVR_DATA");
    return;
  }
  const auto logi = load_dataset_csv(dir / "logistic_synth.csv");
  CHECK(logi.n == 200);
  CHECK(logi.d == 50);
  CHECK(logi.num_classes == 2);
  const auto digits = load_dataset_csv(dir / "digits_synth.csv");
  CHECK(digits.n == 160);
  CHECK(digits.d == 16);
  CHECK(digits.num_classes == 4);
  const auto model = load_model_csv(dir / "attack_model.csv");
  const auto imgs = load_dataset_csv(dir / "attack_images.csv");
  CHECK(model.num_classes == 3);
  CHECK(model.d == 27);
  CHECK(imgs.n == 12);
  // The shipped model classifies every shipped image correctly with margin.
  double worst = 1e300;
  for (int i = 0; i < imgs.n; ++i) {
    const auto z = model.logits(imgs.row(i));
    double other = -1e300;
    for (int k = 0; k < model.num_classes; ++k)
      if (k != imgs.labels[i]) other = std::max(other, z[k]);
    worst = std::min(worst, z[imgs.labels[i]] - other);
  }
  CHECK(worst > 0.5);
}

TEST_SUITE_END();
