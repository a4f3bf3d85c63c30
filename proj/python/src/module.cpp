#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mir/error.hpp"
#include "mir/io.hpp"
#include "mir/kde.hpp"
#include "mir/modal_interval.hpp"
#include "mir/model_select.hpp"
#include "mir/pipeline.hpp"
#include "mir/rhythm.hpp"
#include "mir/simulate.hpp"

namespace py = pybind11;
using namespace mir;

namespace {

Dataset make_dataset(std::vector<double> x, std::vector<double> y) {
  Dataset d;
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

FitConfig make_config(double alpha, double lambda, int knots, int degree, int smoothness, double gamma,
                      int iterations, std::size_t cap, std::uint64_t seed, std::optional<double> bandwidth,
                      std::optional<std::pair<double, double>> domain) {
  FitConfig c;
  c.alpha = alpha;
  c.lambda = lambda;
  c.segments = knots;
  c.degree = degree;
  c.smoothness = smoothness;
  c.gamma = gamma;
  c.iterations = iterations;
  c.step1_cap = cap;
  c.seed = seed;
  c.bandwidth = bandwidth;
  c.domain = domain;
  c.validate();
  return c;
}

std::vector<double> map_band(const FittedBand& b, const std::vector<double>& xs, double (FittedBand::*f)(double) const) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((b.*f)(x));
  return out;
}

}  // namespace

PYBIND11_MODULE(_mir, m) {
  m.doc() = "Nonlinear modal interval regression";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<ModalInterval>(m, "ModalInterval")
      .def_readonly("low", &ModalInterval::low)
      .def_readonly("up", &ModalInterval::up)
      .def_readonly("alpha", &ModalInterval::alpha)
      .def_readonly("mass", &ModalInterval::mass)
      .def_property_readonly("width", &ModalInterval::width)
      .def("__repr__", [](const ModalInterval& mi) {
        return "ModalInterval(" + std::to_string(mi.low) + ", " + std::to_string(mi.up) + ")";
      });

  py::class_<FittedBand>(m, "Band")
      .def_property_readonly("knots", [](const FittedBand& b) { return b.basis.knots(); })
      .def_property_readonly("degree", [](const FittedBand& b) { return b.basis.degree(); })
      .def_property_readonly("smoothness", [](const FittedBand& b) { return b.basis.smoothness(); })
      .def_readonly("upper_coefficients", &FittedBand::upper)
      .def_readonly("lower_coefficients", &FittedBand::lower)
      .def("upper", [](const FittedBand& b, const std::vector<double>& x) { return map_band(b, x, &FittedBand::upper_at); })
      .def("lower", [](const FittedBand& b, const std::vector<double>& x) { return map_band(b, x, &FittedBand::lower_at); })
      .def("midpoint", [](const FittedBand& b, const std::vector<double>& x) {
        return map_band(b, x, &FittedBand::midpoint_at);
      })
      .def("min_gap", &FittedBand::min_gap, py::arg("points") = 1001)
      .def("continuity_violation", &FittedBand::continuity_violation);

  py::class_<FitReport>(m, "FitResult")
      .def_property_readonly("band", &FitReport::band)
      .def_property_readonly("bandwidth", [](const FitReport& r) { return r.step1.bandwidth.value(); })
      .def_property_readonly("p_low", [](const FitReport& r) { return r.step1.levels.p_low; })
      .def_property_readonly("p_up", [](const FitReport& r) { return r.step1.levels.p_up; })
      .def_property_readonly("weights", [](const FitReport& r) { return r.step1.weights; })
      .def_property_readonly("primal_residuals", [](const FitReport& r) { return r.admm.primal_residuals; })
      .def_property_readonly("dual_residuals", [](const FitReport& r) { return r.admm.dual_residuals; })
      .def_property_readonly("objective", [](const FitReport& r) { return r.admm.objective; })
      .def_property_readonly("diagnostic", [](const FitReport& r) { return r.admm.diagnostic; })
      .def_readonly("step2_seconds", &FitReport::step2_seconds)
      .def_property_readonly("step1_seconds", [](const FitReport& r) { return r.step1.seconds; })
      .def("model_json", [](const FitReport& r, double alpha, double lambda) {
        FitConfig c;
        c.alpha = alpha;
        c.lambda = lambda;
        return io::model_json(r, c).dump(2);
      }, py::arg("alpha") = 0.5, py::arg("lambda_") = 1e-2);

  m.def(
      "fit",
      [](std::vector<double> x, std::vector<double> y, double alpha, double lambda, int knots, int degree,
         int smoothness, double gamma, int iterations, std::size_t cap, std::uint64_t seed,
         std::optional<double> bandwidth, std::optional<std::pair<double, double>> domain) {
        const FitConfig c =
            make_config(alpha, lambda, knots, degree, smoothness, gamma, iterations, cap, seed, bandwidth, domain);
        const Dataset d = make_dataset(std::move(x), std::move(y));
        py::gil_scoped_release release;
        return fit_mir(d, c);
      },
      py::arg("x"), py::arg("y"), py::arg("alpha") = 0.5, py::arg("lambda_") = 1e-2, py::arg("knots") = 20,
      py::arg("degree") = 3, py::arg("smoothness") = 2, py::arg("gamma") = 1.0, py::arg("iterations") = 1000,
      py::arg("cap") = kDefaultStep1Cap, py::arg("seed") = 0, py::arg("bandwidth") = py::none(),
      py::arg("domain") = py::none());

  m.def(
      "select_lambda",
      [](std::vector<double> x, std::vector<double> y, std::vector<double> grid, int folds, double eta,
         std::uint64_t seed, double alpha, int knots) {
        FitConfig c;
        c.alpha = alpha;
        c.segments = knots;
        c.seed = seed;
        CvOptions o;
        o.grid = std::move(grid);
        o.folds = folds;
        o.eta = eta;
        o.seed = seed;
        const Dataset d = make_dataset(std::move(x), std::move(y));
        CvResult r;
        {
          py::gil_scoped_release release;
          r = select_lambda_cv(d, c, o);
        }
        py::dict out;
        out["grid"] = r.grid;
        out["mean_mcwc"] = r.mean_mcwc;
        out["selected_lambda"] = r.selected_lambda;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("grid") = std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1, 1.0},
      py::arg("folds") = 5, py::arg("eta") = kDefaultEta, py::arg("seed") = 0, py::arg("alpha") = 0.5,
      py::arg("knots") = 20);

  m.def("load_model", [](const std::string& path) { return io::load_model(path); }, py::arg("path"));
  m.def("select_bandwidth", [](const std::vector<double>& x) { return select_bandwidth(x).value(); }, py::arg("x"));
  m.def(
      "shortest_interval",
      [](const std::vector<double>& values, const std::vector<double>& weights, double alpha) {
        return shortest_interval(make_weighted_ecdf(values, weights), alpha);
      },
      py::arg("values"), py::arg("weights"), py::arg("alpha") = 0.5);
  m.def("true_mi_normal", &true_mi_normal, py::arg("mu"), py::arg("sigma"), py::arg("alpha") = 0.5);
  m.def("true_mi_lognormal", &true_mi_lognormal, py::arg("mu"), py::arg("sigma"), py::arg("alpha") = 0.5);
  m.def("mcwc", &mcwc_score, py::arg("nmmiw"), py::arg("micp"), py::arg("alpha") = 0.5, py::arg("eta") = kDefaultEta);
  m.def(
      "generate",
      [](int dist, std::size_t n, std::uint64_t seed) {
        const Dataset d = generate(distribution_from_id(dist), n, seed);
        return py::make_tuple(d.x, d.y);
      },
      py::arg("dist"), py::arg("n"), py::arg("seed"));
  m.def(
      "detect_rhythms",
      [](const std::vector<double>& x, const std::vector<double>& midpoint, double window, double mild,
         double significant) {
        const RhythmOptions o{window, mild, significant};
        py::list out;
        for (const RhythmCycle& c : detect_rhythms(x, midpoint, o)) {
          py::dict d;
          d["trough1_x"] = c.trough1_x;
          d["peak_x"] = c.peak_x;
          d["trough2_x"] = c.trough2_x;
          d["ratio1"] = c.ratio1;
          d["ratio2"] = c.ratio2;
          d["period"] = c.period();
          d["class"] = to_string(c.classification);
          d["undefined_ratio"] = c.undefined_ratio;
          out.append(d);
        }
        return out;
      },
      py::arg("x"), py::arg("midpoint"), py::arg("window") = 24.0, py::arg("mild") = 1.25,
      py::arg("significant") = 1.5);
}
