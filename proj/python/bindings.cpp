#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flatproc/combinatorics.hpp"
#include "flatproc/errors.hpp"
#include "flatproc/geometry.hpp"
#include "flatproc/moments.hpp"
#include "flatproc/simulator.hpp"
#include "flatproc/stats.hpp"

namespace py = pybind11;
using namespace flatproc;

namespace {

ProcessParams make_params(int dim, int k, double intensity, double radius, const std::string& convention) {
  ProcessParams p{dim, k, intensity, radius, parse_convention(convention)};
  p.validate();
  return p;
}

std::vector<double> orders_1_to_m(const MomentSequence& s) {
  return {s.values.begin() + 1, s.values.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact moments, cumulants and Monte Carlo validation for Poisson k-flat processes in a ball";
  m.attr("__version__") = "0.1.0";

  py::register_exception<OrderOutOfRange>(m, "OrderOutOfRange", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<QuadratureNonConvergence>(m, "QuadratureNonConvergence", PyExc_RuntimeError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);
  py::register_exception<DegenerateVariance>(m, "DegenerateVariance", PyExc_RuntimeError);

  py::class_<ProcessParams>(m, "ProcessParams")
      .def(py::init(&make_params), py::arg("dim") = 2, py::arg("k") = 1, py::arg("intensity") = 1.0,
           py::arg("radius") = 1.0, py::arg("convention") = "invariant")
      .def_readwrite("dim", &ProcessParams::dim)
      .def_readwrite("k", &ProcessParams::k)
      .def_readwrite("intensity", &ProcessParams::intensity)
      .def_readwrite("radius", &ProcessParams::radius)
      .def_property_readonly("convention", [](const ProcessParams& p) { return std::string(to_string(p.convention)); })
      .def("__repr__", [](const ProcessParams& p) {
        return "ProcessParams(dim=" + std::to_string(p.dim) + ", k=" + std::to_string(p.k) +
               ", intensity=" + std::to_string(p.intensity) + ", radius=" + std::to_string(p.radius) +
               ", convention='" + std::string(to_string(p.convention)) + "')";
      });

  py::class_<FunctionalValue>(m, "FunctionalValue")
      .def_readonly("coefficient", &FunctionalValue::coefficient)
      .def_readonly("rho_exponent", &FunctionalValue::rho_exponent)
      .def_readonly("value", &FunctionalValue::value);

  py::class_<AsymptoticTerm>(m, "AsymptoticTerm")
      .def_readonly("rho_exponent", &AsymptoticTerm::rho_exponent)
      .def_readonly("coefficient", &AsymptoticTerm::coefficient);

  // combinatorics
  m.def("enumerate_singleton_free_partitions", [](int order) {
    const auto table = enumerate_singleton_free_partitions(order);
    std::vector<std::pair<std::vector<int>, std::uint64_t>> out;
    for (const auto& e : table.entries) out.emplace_back(e.sizes, e.count);
    return out;
  }, py::arg("m"), "List of (block sizes, set-partition count) pairs.");
  m.def("double_factorial", &double_factorial, py::arg("n"));
  m.def("cumulants_from_moments", [](const std::vector<double>& mu) {
    return orders_1_to_m(cumulants_from_moments(moment_sequence_from_orders(mu)));
  }, py::arg("central_moments"), "Central moments of orders 1..M to cumulants of orders 1..M.");
  m.def("moments_from_cumulants", [](const std::vector<double>& gamma) {
    return orders_1_to_m(moments_from_cumulants(cumulant_sequence_from_orders(gamma)));
  }, py::arg("cumulants"));

  // geometry
  m.def("unit_ball_volume", &unit_ball_volume, py::arg("n"));
  m.def("intrinsic_volume_ball", &intrinsic_volume_ball, py::arg("k"), py::arg("j"), py::arg("r"));
  m.def("functional_A_ball", &functional_A_ball, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("functional_A_quadrature", &functional_A_quadrature, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("hitting_measure", &hitting_measure, py::arg("params"));
  m.def("homogeneity_scale", &homogeneity_scale, py::arg("value"), py::arg("factor"));

  // moments
  m.def("mean_exact", &mean_exact, py::arg("params"), py::arg("j"));
  m.def("central_moment_exact", &central_moment_exact, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("cumulant_exact", &cumulant_exact, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("verify_moment_recursion", &verify_moment_recursion, py::arg("params"), py::arg("j"), py::arg("max_order"));
  m.def("asymptotic_cumulant", &asymptotic_cumulant, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("asymptotic_moment", &asymptotic_moment, py::arg("params"), py::arg("j"), py::arg("m"));
  m.def("normalized_moment_limit", &normalized_moment_limit, py::arg("m"));
  m.def("berry_esseen_bound", &berry_esseen_bound, py::arg("params"), py::arg("j"));
  m.def("covariance_matrix", &covariance_matrix, py::arg("params"));

  // simulator
  py::class_<SampleAccumulator>(m, "SampleAccumulator")
      .def(py::init<int, int, std::vector<double>>(), py::arg("components"), py::arg("max_order"),
           py::arg("shift") = std::vector<double>{})
      .def("add", [](SampleAccumulator& a, const std::vector<double>& x) { a.add(x); })
      .def("merge", [](SampleAccumulator& a, const SampleAccumulator& b) { a.merge(b); })
      .def_property_readonly("count", &SampleAccumulator::count)
      .def_property_readonly("components", &SampleAccumulator::components)
      .def_property_readonly("max_order", &SampleAccumulator::max_order)
      .def_property_readonly("shift", &SampleAccumulator::shift)
      .def("power_sum", &SampleAccumulator::power_sum, py::arg("component"), py::arg("p"))
      .def("cross_sum", &SampleAccumulator::cross_sum, py::arg("a"), py::arg("b"), py::arg("p"), py::arg("q"))
      .def(py::self == py::self);

  auto options = [](int workers, std::int64_t block_size) {
    MonteCarloOptions o;
    o.workers = workers;
    o.block_size = block_size;
    return o;
  };
  m.def("run_monte_carlo",
        [options](const ProcessParams& p, int j_max, std::int64_t n_reps, int max_order, std::uint64_t seed,
                  int workers, std::int64_t block_size) {
          py::gil_scoped_release release;
          return run_monte_carlo(p, j_max, n_reps, max_order, seed, options(workers, block_size));
        },
        py::arg("params"), py::arg("j_max"), py::arg("n_reps"), py::arg("max_order"), py::arg("seed") = 0,
        py::arg("workers") = 0, py::arg("block_size") = 1024);
  m.def("simulate_intrinsic_volumes",
        [options](const ProcessParams& p, std::int64_t n_reps, std::uint64_t seed, int workers) {
          std::vector<double> flat;
          {
            py::gil_scoped_release release;
            flat = simulate_intrinsic_volumes(p, n_reps, seed, options(workers, 1024));
          }
          const auto width = static_cast<py::ssize_t>(p.k + 1);
          py::array_t<double> out({static_cast<py::ssize_t>(n_reps), width});
          std::copy(flat.begin(), flat.end(), out.mutable_data());
          return out;
        },
        py::arg("params"), py::arg("n_reps"), py::arg("seed") = 0, py::arg("workers") = 0,
        "Array of shape (n_reps, k+1) holding V_0..V_k per replication.");

  // stats
  py::class_<MomentEstimate>(m, "MomentEstimate")
      .def_readonly("mean", &MomentEstimate::mean)
      .def_readonly("mean_standard_error", &MomentEstimate::mean_standard_error)
      .def_property_readonly("values", [](const MomentEstimate& e) { return e.values.values; })
      .def_readonly("standard_errors", &MomentEstimate::standard_errors);
  m.def("sample_central_moments", &sample_central_moments, py::arg("acc"), py::arg("component"),
        py::arg("max_order"));
  m.def("sample_cumulants", &sample_cumulants, py::arg("acc"), py::arg("component"), py::arg("max_order"));

  py::class_<CorrelationEstimate>(m, "CorrelationEstimate")
      .def_readonly("correlation", &CorrelationEstimate::correlation)
      .def_readonly("standard_errors", &CorrelationEstimate::standard_errors);
  m.def("sample_covariance_matrix", &sample_covariance_matrix, py::arg("acc"));

  m.def("kolmogorov_distance_to_normal",
        [](const std::vector<double>& samples, bool standardize) {
          return kolmogorov_distance_to_normal(samples, standardize);
        },
        py::arg("samples"), py::arg("standardize") = true);

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("rhos", &RateFit::rhos)
      .def_readonly("distances", &RateFit::distances)
      .def_readonly("bounds", &RateFit::bounds);
  m.def("clt_rate_fit",
        [options](const ProcessParams& p, int j, const std::vector<double>& rhos, std::int64_t reps,
                  std::uint64_t seed, int workers) {
          py::gil_scoped_release release;
          return clt_rate_fit(p, j, rhos, reps, seed, options(workers, 1024));
        },
        py::arg("params"), py::arg("j"), py::arg("rhos"), py::arg("reps_per_rho"), py::arg("seed") = 0,
        py::arg("workers") = 0);
}
