#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sflab/dirac.hpp"
#include "sflab/error.hpp"
#include "sflab/gauge.hpp"
#include "sflab/lab.hpp"
#include "sflab/spectral_flow.hpp"

namespace py = pybind11;
using namespace sflab;

namespace {

SpinStructure spin_of(const std::array<int, 3>& delta) { return SpinStructure(delta); }

std::string flow_json(int k, int n, int rank, std::array<int, 3> delta, double window, const std::string& solver,
                      std::uint64_t seed, double radius, double steepness) {
  RunConfig cfg;
  cfg.k_list = {k};
  cfg.grid = n;
  cfg.rank = rank;
  cfg.spin = spin_of(delta);
  cfg.window = window;
  cfg.solver = parse_solver_mode(solver);
  cfg.seed = seed;
  cfg.profile_radius = radius;
  cfg.profile_steepness = steepness;
  cfg.cache = false;
  cfg.validate();
  Cache cache(Cache::default_dir(), false);
  return to_json(cached_flow(cfg, cache, k, n, cfg.solver)).dump();
}

std::string matrix_flow_json(const Eigen::MatrixXcd& a0, const Eigen::MatrixXcd& x, double window, std::uint64_t seed) {
  const HermitianOperator A = HermitianOperator::dense(a0);
  const HermitianOperator X = HermitianOperator::dense(x);
  FlowControls controls;
  controls.seed = seed;
  const OperatorPath path = OperatorPath::affine(A, X, X.norm_bound());
  return to_json(spectral_flow(path, SpectralWindow(window, 1e-6), controls)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral flow of twisted Dirac operators on the flat 3-torus";
  m.attr("__version__") = SFLAB_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<CompatibilityError>(m, "CompatibilityError", PyExc_ValueError);

  m.def("convention_tag", &convention_tag);
  m.def(
      "untwisted_spectrum",
      [](int n, std::array<int, 3> delta, int rank) { return untwisted_spectrum(n, spin_of(delta), rank); },
      py::arg("n"), py::arg("delta") = std::array<int, 3>{1, 1, 1}, py::arg("rank") = 1);
  m.def(
      "degree",
      [](int k, int n, double radius, double steepness) {
        return degree(sphere_map(k, n, CollapseProfile(radius, steepness)));
      },
      py::arg("k"), py::arg("n"), py::arg("radius") = 0.45, py::arg("steepness") = 0.25);
  m.def(
      "winding_number",
      [](int k, int n, int rank, double radius, double steepness) {
        return winding_number(gauge_field(k, n, rank, CollapseProfile(radius, steepness)));
      },
      py::arg("k"), py::arg("n"), py::arg("rank") = 2, py::arg("radius") = 0.45, py::arg("steepness") = 0.25);
  m.def(
      "mapping_torus_index",
      [](int k, int n, int rank, double radius, double steepness) {
        return mapping_torus_index(gauge_field(k, n, rank, CollapseProfile(radius, steepness)));
      },
      py::arg("k"), py::arg("n"), py::arg("rank") = 2, py::arg("radius") = 0.45, py::arg("steepness") = 0.25);
  m.def(
      "dirac_matrix",
      [](int k, int n, int rank, double t, std::array<int, 3> delta) {
        const auto alpha = std::make_shared<const ConnectionForm>(
            maurer_cartan(gauge_field(k, n, rank, CollapseProfile())));
        return assemble(alpha, t, spin_of(delta), rank, Representation::dense).to_dense();
      },
      py::arg("k"), py::arg("n"), py::arg("rank") = 2, py::arg("t") = 0.0,
      py::arg("delta") = std::array<int, 3>{1, 1, 1});
  m.def(
      "conjugation_residual",
      [](int k, int n, int rank) { return conjugation_residual(k, n, rank); }, py::arg("k"), py::arg("n"),
      py::arg("rank") = 2);
  m.def(
      "circle_oracle_flow",
      [](int winding, int n_modes) {
        return spectral_flow(circle_oracle(winding, n_modes), SpectralWindow(3.0, 1e-6)).flow;
      },
      py::arg("winding"), py::arg("n_modes") = 16);
  m.def("_flow_json", &flow_json, py::arg("k"), py::arg("n"), py::arg("rank"), py::arg("delta"), py::arg("window"),
        py::arg("solver"), py::arg("seed"), py::arg("radius"), py::arg("steepness"));
  m.def("_matrix_flow_json", &matrix_flow_json, py::arg("a0"), py::arg("x"), py::arg("window"), py::arg("seed"));
  m.def(
      "_verify_json",
      [](const std::string& ini, const std::string& out_dir) {
        RunConfig cfg = config_from_ini(ini);
        cfg.out_dir = out_dir;
        VerifyOutcome r;
        {
          py::gil_scoped_release release;
          r = cmd_verify(cfg);
        }
        return r.report.dump();
      },
      py::arg("ini"), py::arg("out_dir"));
  m.def(
      "plot_svg", [](const std::string& sfl_json) { return cmd_plot(sfl_from_json(nlohmann::json::parse(sfl_json))); },
      py::arg("sfl_json"));
}
