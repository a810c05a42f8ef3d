#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "zovr/core.hpp"

using namespace zovr;

namespace {

BlackBoxProblem tiny_sum() {
  // f(x) = (1/3) sum_i (i + 1) * x_0
  BlackBoxProblem p;
  p.n = 3;
  p.d = 1;
  p.lipschitz = 0.0;
  p.name = "tiny";
  p.component = [](std::span<const double> x, int i) { return (i + 1) * x[0]; };
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("ledger charges per phase") {
  QueryLedger led;
  CHECK(led.total() == 0);
  led.charge(Phase::kAnchor);
  led.charge(Phase::kAnchor, 4);
  led.charge(Phase::kInner, 2);
  led.charge(Phase::kReporting, 10);
  CHECK(led.anchor() == 5);
  CHECK(led.inner() == 2);
  CHECK(led.reporting() == 10);
  CHECK(led.szo() == 7);  // reporting never counts toward the budget axis
  CHECK(led.total() == 17);
  led.reset();
  CHECK(led.total() == 0);
  CHECK(led.szo() == 0);
}

TEST_CASE("evaluate_component charges one unit to the named phase") {
  const auto p = tiny_sum();
  QueryLedger led;
  const double x[] = {2.0};
  CHECK(evaluate_component(p, x, 1, led, Phase::kInner) == 4.0);
  CHECK(led.inner() == 1);
  CHECK(led.anchor() == 0);
  CHECK(led.reporting() == 0);
  CHECK(evaluate_component(p, x, 0, led, Phase::kReporting) == 2.0);
  CHECK(led.szo() == 1);
  CHECK(led.total() == 2);
}

TEST_CASE("full_objective averages all components in order") {
  const auto p = tiny_sum();
  QueryLedger led;
  const double x[] = {3.0};
  CHECK(full_objective(p, x, led, Phase::kAnchor) == doctest::Approx(6.0));
  CHECK(led.anchor() == 3);
}

TEST_CASE("evaluate_component validates inputs") {
  const auto p = tiny_sum();
  QueryLedger led;
  const double x[] = {1.0};
  const double xy[] = {1.0, 2.0};
  CHECK_THROWS_AS(evaluate_component(p, xy, 0, led, Phase::kInner), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_component(p, x, -1, led, Phase::kInner), std::out_of_range);
  CHECK_THROWS_AS(evaluate_component(p, x, 3, led, Phase::kInner), std::out_of_range);
  const double bad[] = {std::nan("")};
  CHECK_THROWS_AS(evaluate_component(p, bad, 0, led, Phase::kInner), std::invalid_argument);
  CHECK(led.total() == 0);  // rejected calls are never charged
}

TEST_CASE("non-finite component value raises ObjectiveError") {
  BlackBoxProblem p = tiny_sum();
  p.component = [](std::span<const double>, int) { return std::nan(""); };
  QueryLedger led;
  const double x[] = {1.0};
  CHECK_THROWS_AS(evaluate_component(p, x, 0, led, Phase::kInner), ObjectiveError);
  CHECK(led.inner() == 1);  // the evaluation itself was spent
}

TEST_CASE("ParseError carries a line number") {
  const ParseError e("bad field", 7);
  CHECK(e.line() == 7);
  CHECK(std::string(e.what()) == "bad field");
}

TEST_SUITE_END();
