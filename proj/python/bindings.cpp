#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ifp/dynamics.hpp"
#include "ifp/error.hpp"
#include "ifp/io.hpp"
#include "ifp/markov.hpp"
#include "ifp/model.hpp"
#include "ifp/solver.hpp"
#include "ifp/tail.hpp"
#include "ifp/templates.hpp"

namespace py = pybind11;

namespace {

ifp::io::RunConfig config_from_text(const std::string& text) {
  return ifp::io::config_from_json(ifp::io::parse_json(text, "<config>"));
}

}  // namespace

PYBIND11_MODULE(_ifp, m) {
  m.doc() = "Income fluctuation problem: growth conditions, time iteration, tails";

  static py::exception<ifp::Error> error(m, "IfpError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ifp::Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "rouwenhorst",
      [](std::size_t n, double mean, double rho, double sd) {
        const auto d = ifp::rouwenhorst(n, mean, rho, sd);
        return py::make_tuple(d.states, d.transition.matrix());
      },
      py::arg("n"), py::arg("mean"), py::arg("rho"), py::arg("sd"),
      "States and transition matrix of the Rouwenhorst discretization.");

  m.def("spectral_radius", &ifp::spectral_radius, py::arg("matrix"));

  m.def(
      "stationary_distribution",
      [](const Eigen::MatrixXd& p) {
        return ifp::stationary_distribution(ifp::TransitionMatrix(p));
      },
      py::arg("transition"));

  m.def(
      "growth_rate",
      [](const Eigen::MatrixXd& p, const Eigen::VectorXd& means) {
        return ifp::growth_rate(ifp::TransitionMatrix(p), means).value;
      },
      py::arg("transition"), py::arg("conditional_means"));

  m.def(
      "growth_report_json",
      [](const std::string& config) {
        const auto c = config_from_text(config);
        return ifp::io::growth_report_to_json(ifp::compute_growth_report(c.model)).dump();
      },
      py::arg("config"));

  py::class_<ifp::Policy>(m, "Policy")
      .def_property_readonly("grid",
                             [](const ifp::Policy& p) {
                               return std::vector<double>(p.grid.points().begin(),
                                                          p.grid.points().end());
                             })
      .def_readonly("consumption", &ifp::Policy::consumption)
      .def_readonly("alpha", &ifp::Policy::alpha)
      .def_readonly("a_bar", &ifp::Policy::a_bar)
      .def("__call__", &ifp::Policy::operator(), py::arg("a"), py::arg("z"));

  m.def(
      "solve",
      [](const std::string& config) {
        const auto c = config_from_text(config);
        ifp::SolveResult r;
        {
          py::gil_scoped_release release;
          r = ifp::solve(c.model, c.solver);
        }
        return py::make_tuple(r.policy, r.trace, r.converged);
      },
      py::arg("config"), "Returns (policy, rho trace, converged).");

  m.def(
      "simulate_terminal",
      [](const std::string& config, const ifp::Policy& policy, std::size_t n_paths,
         std::size_t horizon, std::size_t burn_in, std::uint64_t seed) {
        const auto c = config_from_text(config);
        ifp::SimConfig sim = c.simulation;
        sim.n_paths = n_paths;
        sim.horizon = horizon;
        sim.burn_in = burn_in;
        sim.seed = seed;
        sim.keep_paths = false;
        py::gil_scoped_release release;
        return ifp::simulate(c.model, policy, sim).terminal_assets();
      },
      py::arg("config"), py::arg("policy"), py::arg("n_paths") = 1000,
      py::arg("horizon") = 500, py::arg("burn_in") = 100, py::arg("seed") = 0);

  m.def(
      "lambda_of_s",
      [](const std::string& config, const std::vector<double>& alpha, double s) {
        return ifp::lambda_of_s(config_from_text(config).model, alpha, s);
      },
      py::arg("config"), py::arg("alpha"), py::arg("s"));

  m.def(
      "kappa",
      [](const std::string& config, const std::vector<double>& alpha, double s_max) {
        ifp::KappaSettings settings;
        settings.s_max = s_max;
        return ifp::kappa(config_from_text(config).model, alpha, settings).kappa;
      },
      py::arg("config"), py::arg("alpha"), py::arg("s_max") = 20.0);

  m.def(
      "hill",
      [](const std::vector<double>& samples, std::size_t k, std::size_t n_boot,
         std::uint64_t seed) {
        const auto h = ifp::hill_estimator(samples, k, n_boot, seed);
        return py::make_tuple(h.estimate, h.lower, h.upper);
      },
      py::arg("samples"), py::arg("k"), py::arg("n_boot") = 200, py::arg("seed") = 0,
      "Returns (estimate, 5% bootstrap quantile, 95% bootstrap quantile).");

  m.def(
      "sweep",
      [](const std::string& config, const std::string& x, const std::string& y,
         const std::string& quantity) {
        const auto c = config_from_text(config);
        if (!c.templ) {
          throw ifp::Error(ifp::ErrorKind::UnknownParameter,
                           "sweeps need a config with a 'template' section");
        }
        const auto grid = ifp::sweep(*c.templ, ifp::parse_axis(x), ifp::parse_axis(y),
                                     ifp::parse_quantity(quantity));
        Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.x.count),
                            static_cast<Eigen::Index>(grid.y.count));
        for (std::size_t i = 0; i < grid.x.count; ++i) {
          for (std::size_t j = 0; j < grid.y.count; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = grid.at(i, j);
          }
        }
        return out;
      },
      py::arg("config"), py::arg("x"), py::arg("y"), py::arg("quantity"));
}
