#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermoform/cli/commands.hpp"
#include "thermoform/cli/verify.hpp"
#include "thermoform/cocycle.hpp"
#include "thermoform/convex.hpp"
#include "thermoform/measures.hpp"
#include "thermoform/parallel.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/spectrum.hpp"

namespace py = pybind11;
using namespace thermoform;

namespace {

std::optional<QDomain> parse_domain(const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  if (*name == "positive_q") return QDomain::PositiveQ;
  if (*name == "all_q") return QDomain::AllQ;
  throw InvalidArgument("domain must be 'positive_q' or 'all_q'");
}

py::dict curve_dict(const PressureCurve& c) {
  py::dict d;
  d["q"] = c.q_grid;
  d["value"] = c.values;
  d["upper"] = c.upper;
  d["lower"] = c.lower;
  d["n"] = c.n;
  d["domain"] = to_string(c.domain);
  d["convexity_defect"] = c.convexity_defect;
  d["label"] = c.label;
  return d;
}

py::dict domain_dict(const DomainEstimate& e) {
  py::dict d;
  d["lower"] = e.lower;
  d["upper"] = e.upper;
  d["n"] = e.n;
  d["max_averages"] = e.max_averages;
  d["min_averages"] = e.min_averages;
  d["upper_bracket"] = e.upper_bracket;
  d["lower_bracket"] = e.lower_bracket;
  d["slope_upper"] = e.slope_upper;
  d["slope_lower"] = e.slope_lower;
  d["lower_source"] = e.lower_source;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of thermoform";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_MemoryError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  py::class_<ShiftSpace>(m, "ShiftSpace")
      .def_static("full", &ShiftSpace::full, py::arg("alphabet_size"), py::arg("word_budget") = kDefaultWordBudget)
      .def_static("subshift", &ShiftSpace::subshift, py::arg("transitions"),
                  py::arg("word_budget") = kDefaultWordBudget)
      .def_property_readonly("alphabet_size", &ShiftSpace::alphabet_size)
      .def_property_readonly("is_full", &ShiftSpace::is_full)
      .def("word_count", &ShiftSpace::word_count, py::arg("n"))
      .def("enumerate_words", &ShiftSpace::enumerate_words, py::arg("n"))
      .def("is_admissible", [](const ShiftSpace& s, const Word& w) { return s.is_admissible(w); });

  py::class_<WordPotential>(m, "Potential")
      .def("__call__", [](const WordPotential& p, const Word& w) { return p(w).as_double(); })
      .def_property_readonly("structure", [](const WordPotential& p) { return std::string(to_string(p.structure())); })
      .def_property_readonly("description", &WordPotential::description);

  m.def("norm_potential", [](std::vector<Eigen::MatrixXd> ms) { return norm_potential(MatrixCocycle(std::move(ms))); },
        py::arg("matrices"));
  m.def("singular_value_potential",
        [](std::vector<Eigen::MatrixXd> ms, std::size_t j) {
          return singular_value_potential(MatrixCocycle(std::move(ms)), j);
        },
        py::arg("matrices"), py::arg("j"));
  m.def("symbol_potential",
        [](const ShiftSpace& s, const std::vector<double>& values) {
          return birkhoff_potential(s, AdditiveWindowPotential::from_symbol_values(s, values));
        },
        py::arg("space"), py::arg("values"));
  m.def("constant_potential",
        [](const ShiftSpace& s, double c) { return birkhoff_potential(s, AdditiveWindowPotential::constant(s, c)); },
        py::arg("space"), py::arg("c"));

  m.def("check_irreducibility",
        [](std::vector<Eigen::MatrixXd> ms) {
          const auto v = check_irreducibility(MatrixCocycle(std::move(ms)));
          return py::make_tuple(v.irreducible, v.witness);
        },
        py::arg("matrices"));

  m.def("finite_pressure", &finite_pressure, py::arg("space"), py::arg("phi"), py::arg("q"), py::arg("n"));
  m.def("pressure_curve",
        [](const ShiftSpace& s, const WordPotential& p, const std::vector<double>& q, std::size_t n,
           std::optional<std::string> domain) { return curve_dict(pressure_curve(s, p, q, n, parse_domain(domain))); },
        py::arg("space"), py::arg("phi"), py::arg("q_grid"), py::arg("n"), py::arg("domain") = py::none());

  m.def("lyapunov_domain",
        [](const ShiftSpace& s, const WordPotential& p, std::size_t n, std::optional<std::string> domain) {
          return domain_dict(lyapunov_domain(s, p, n, parse_domain(domain)));
        },
        py::arg("space"), py::arg("phi"), py::arg("n"), py::arg("domain") = py::none());
  m.def("spectrum_value",
        [](const ShiftSpace& s, const WordPotential& p, double alpha, std::size_t n, std::optional<std::string> domain) {
          return spectrum_value(s, p, alpha, n, parse_domain(domain)).as_double();
        },
        py::arg("space"), py::arg("phi"), py::arg("alpha"), py::arg("n"), py::arg("domain") = py::none());
  m.def("spectrum_curve",
        [](const ShiftSpace& s, const WordPotential& p, const std::vector<double>& alphas, std::size_t n,
           std::optional<std::string> domain) {
          const auto c = spectrum_curve(s, p, alphas, n, parse_domain(domain));
          std::vector<double> values;
          for (const auto& v : c.values) values.push_back(v.as_double());
          py::dict d;
          d["alpha"] = c.alpha_grid;
          d["value"] = values;
          d["boundary_active"] = c.boundary_active;
          d["domain"] = domain_dict(c.domain);
          d["q_domain"] = to_string(c.q_domain);
          d["provenance"] = c.provenance;
          return d;
        },
        py::arg("space"), py::arg("phi"), py::arg("alpha_grid"), py::arg("n"), py::arg("domain") = py::none());

  m.def("legendre_inf",
        [](const std::vector<double>& grid, const std::vector<double>& values, double alpha, const std::string& domain) {
          const auto r = legendre_inf(GridFunction(grid, values), alpha, *parse_domain(domain));
          py::dict d;
          d["minus_infinity"] = r.minus_infinity;
          d["value"] = r.minus_infinity ? -std::numeric_limits<double>::infinity() : r.value;
          d["argmin"] = r.argmin;
          d["boundary_active"] = r.boundary_active;
          return d;
        },
        py::arg("grid"), py::arg("values"), py::arg("alpha"), py::arg("domain") = "all_q");

  m.def("bernoulli_entropy", [](const std::vector<double>& w) { return entropy(MarkovMeasure::bernoulli(w)); },
        py::arg("weights"));
  m.def("markov_entropy",
        [](const Eigen::MatrixXd& p) { return entropy(MarkovMeasure::from_transition(p)); }, py::arg("transition"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"thermoform"};
          for (const auto& a : args) argv.push_back(a.c_str());
          py::gil_scoped_release release;
          return cli::run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"));
  m.def("run_verify_json",
        [](const std::vector<int>& ids) {
          py::gil_scoped_release release;
          return cli::run_verify({}, ids).to_json().dump();
        },
        py::arg("ids") = std::vector<int>{});
}
