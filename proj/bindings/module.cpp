#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "zovr/core.hpp"
#include "zovr/optimizers.hpp"
#include "zovr/oracles.hpp"
#include "zovr/problems.hpp"
#include "zovr/trace_io.hpp"

namespace py = pybind11;
using namespace zovr;

namespace {

BlackBoxProblem from_callable(std::function<double(std::vector<double>, int)> f, int n,
                              int d, double lipschitz, bool smooth_gradient,
                              std::string name) {
  BlackBoxProblem p;
  p.n = n;
  p.d = d;
  p.smoothness = smooth_gradient ? Smoothness::kC11 : Smoothness::kC00;
  p.lipschitz = lipschitz;
  p.name = std::move(name);
  p.component = [f = std::move(f)](std::span<const double> x, int i) {
    return f(std::vector<double>(x.begin(), x.end()), i);
  };
  return p;
}

py::list records_out(const Trace& t) {
  py::list rows;
  for (const auto& r : t.records) {
    py::dict row;
    row["epoch"] = r.epoch;
    row["iter"] = r.iter;
    row["szo_count"] = r.szo;
    row["f_value"] = r.f;
    row["grad_norm_sq"] = r.grad_sq ? py::object(py::float_(*r.grad_sq)) : py::none();
    rows.append(row);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeroth-order variance-reduced optimization";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ObjectiveError>(m, "ObjectiveError", PyExc_RuntimeError);

  m.attr("NO_BUDGET") = kNoBudget;

  py::class_<QueryLedger>(m, "QueryLedger", "Exact oracle-evaluation counter")
      .def(py::init<>())
      .def("szo", &QueryLedger::szo, "Budgeted evaluations: anchor + inner")
      .def("total", &QueryLedger::total)
      .def("anchor", &QueryLedger::anchor)
      .def("inner", &QueryLedger::inner)
      .def("reporting", &QueryLedger::reporting)
      .def("reset", &QueryLedger::reset);

  py::class_<BlackBoxProblem>(m, "Problem")
      .def_readonly("n", &BlackBoxProblem::n)
      .def_readonly("d", &BlackBoxProblem::d)
      .def_readonly("lipschitz", &BlackBoxProblem::lipschitz)
      .def_readonly("name", &BlackBoxProblem::name)
      .def_property_readonly("smooth",
                             [](const BlackBoxProblem& p) {
                               return p.smoothness == Smoothness::kC11;
                             })
      .def(
          "component",
          [](const BlackBoxProblem& p, const std::vector<double>& x, int i,
             QueryLedger& ledger) {
            return evaluate_component(p, x, i, ledger, Phase::kReporting);
          },
          py::arg("x"), py::arg("i"), py::arg("ledger"))
      .def("value",
           [](const BlackBoxProblem& p, const std::vector<double>& x) {
             QueryLedger scratch;
             return full_objective(p, x, scratch, Phase::kReporting);
           })
      .def("gradient", [](const BlackBoxProblem& p, const std::vector<double>& x) {
        if (!p.analytic_gradient)
          throw std::invalid_argument("problem has no analytic gradient");
        return p.analytic_gradient(x);
      });

  py::class_<OptimizerConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("eta", &OptimizerConfig::eta)
      .def_readwrite("mu", &OptimizerConfig::mu)
      .def_readwrite("K", &OptimizerConfig::K)
      .def_readwrite("S", &OptimizerConfig::S)
      .def_readwrite("D", &OptimizerConfig::D)
      .def_readwrite("B", &OptimizerConfig::B)
      .def_readwrite("b0", &OptimizerConfig::b0)
      .def_readwrite("q", &OptimizerConfig::q)
      .def_readwrite("eta_unclamped", &OptimizerConfig::eta_unclamped)
      .def_readwrite("eval_budget", &OptimizerConfig::eval_budget)
      .def_readwrite("checkpoint_stride", &OptimizerConfig::checkpoint_stride)
      .def_readwrite("master_seed", &OptimizerConfig::master_seed)
      .def_property_readonly("provenance", [](const OptimizerConfig& c) {
        return std::string(to_string(c.provenance));
      });

  py::class_<Trace>(m, "Trace")
      .def_property_readonly("records", &records_out)
      .def_readonly("final_point", &Trace::final_point)
      .def_readonly("truncated", &Trace::truncated);

  m.def("quadratic", [](int d) { return make_quadratic(d).problem; }, py::arg("d"));
  m.def(
      "logistic",
      [](const std::string& path) { return make_logistic(load_dataset_csv(path)); },
      py::arg("data"));
  m.def(
      "sigmoid_least_squares",
      [](const std::string& path) {
        return make_sigmoid_least_squares(load_dataset_csv(path));
      },
      py::arg("data"));
  m.def(
      "universal_attack",
      [](const std::string& model, const std::string& images, double C, double kappa,
         double box_radius) {
        return make_universal_attack(load_model_csv(model), load_dataset_csv(images), C,
                                     kappa, box_radius);
      },
      py::arg("model"), py::arg("images"), py::arg("C") = 1.0, py::arg("kappa") = 0.0,
      py::arg("box_radius") = 1.0);
  m.def("from_callable", &from_callable, py::arg("f"), py::arg("n"), py::arg("d"),
        py::arg("lipschitz"), py::arg("smooth") = true, py::arg("name") = "callable",
        "Wrap f(x, i) -> float as an n-component black-box objective");

  m.def(
      "auto_config_smooth",
      [](const BlackBoxProblem& p, double eps, int b0, std::uint64_t seed,
         std::optional<double> r_hat, std::uint64_t budget) {
        return auto_config_smooth(p, eps, b0, TheoryConstants::benchmark(), seed, r_hat,
                                  budget);
      },
      py::arg("problem"), py::arg("eps"), py::arg("b0") = 1, py::arg("seed") = 0,
      py::arg("r_hat") = std::nullopt, py::arg("budget") = kNoBudget);
  m.def(
      "auto_config_nonsmooth",
      [](const BlackBoxProblem& p, double eps, int b0, std::uint64_t seed,
         std::optional<double> r_hat, std::uint64_t budget) {
        return auto_config_nonsmooth(p, eps, b0, TheoryConstants::benchmark(), seed, r_hat,
                                     budget);
      },
      py::arg("problem"), py::arg("eps"), py::arg("b0") = 1, py::arg("seed") = 0,
      py::arg("r_hat") = std::nullopt, py::arg("budget") = kNoBudget);

  m.def(
      "run_szvr_g",
      [](const BlackBoxProblem& p, const OptimizerConfig& cfg, QueryLedger& ledger,
         std::vector<double> x0) {
        return cfg.b0 > 1 ? run_szvr_g_minibatch(p, cfg, ledger, std::move(x0))
                          : run_szvr_g(p, cfg, ledger, std::move(x0));
      },
      py::arg("problem"), py::arg("config"), py::arg("ledger"),
      py::arg("x0") = std::vector<double>{});
  m.def(
      "run_rgf",
      [](const BlackBoxProblem& p, double eta, double mu, std::int64_t iterations,
         std::uint64_t seed, QueryLedger& ledger, std::uint64_t budget,
         std::vector<double> x0) {
        RgfOptions opt;
        opt.eta = eta;
        opt.mu = mu;
        opt.iterations = iterations;
        opt.seed = seed;
        opt.eval_budget = budget;
        return run_rgf(p, opt, ledger, std::move(x0));
      },
      py::arg("problem"), py::arg("eta"), py::arg("mu"), py::arg("iterations"),
      py::arg("seed"), py::arg("ledger"), py::arg("budget") = kNoBudget,
      py::arg("x0") = std::vector<double>{});
  m.def(
      "run_rsg",
      [](const BlackBoxProblem& p, double eta, double mu, std::int64_t iterations,
         std::uint64_t seed, QueryLedger& ledger, std::uint64_t budget,
         std::vector<double> x0) {
        RsgOptions opt;
        opt.eta = eta;
        opt.mu = mu;
        opt.iterations = iterations;
        opt.seed = seed;
        opt.eval_budget = budget;
        return run_rsg(p, opt, ledger, std::move(x0));
      },
      py::arg("problem"), py::arg("eta"), py::arg("mu"), py::arg("iterations"),
      py::arg("seed"), py::arg("ledger"), py::arg("budget") = kNoBudget,
      py::arg("x0") = std::vector<double>{});

  m.def("rgf_default_eta", &rgf_default_eta, py::arg("d"), py::arg("lipschitz"));
  m.def(
      "write_trace_csv",
      [](const Trace& t, const std::string& path) { write_trace_csv(t, path); },
      py::arg("trace"), py::arg("path"));
}
