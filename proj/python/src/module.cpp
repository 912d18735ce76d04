// Python bindings for the main operations: kernels, structural models, filtering,
// calibration and end-to-end experiment runs.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gplfm/baselines.hpp"
#include "gplfm/calibration.hpp"
#include "gplfm/diagnostics.hpp"
#include "gplfm/errors.hpp"
#include "gplfm/harness/experiment.hpp"
#include "gplfm/kalman.hpp"

namespace py = pybind11;
using namespace gplfm;

namespace {

py::object to_python(const harness::Json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

harness::Json from_python(const py::object& obj) {
    return harness::Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

KernelSpec kernel(int p, double alpha2, double lengthscale) {
    return KernelSpec{KernelFamily::matern, p, alpha2, lengthscale};
}

StructuralSystem building(const std::vector<double>& masses, const std::vector<double>& stiffnesses, double a0,
                          double a1, const std::vector<Index>& load_floors) {
    StructuralSystem sys = build_shear_building(masses, stiffnesses, {a0, a1});
    if (load_floors.empty()) return sys;
    std::vector<Index> dofs;
    for (Index f : load_floors) dofs.push_back(f - 1);
    return with_point_loads(std::move(sys), dofs);
}

py::dict estimation_dict(const EstimationResult& r) {
    py::dict d;
    d["predicted_means"] = r.predicted_means;
    d["filtered_means"] = r.filtered_means;
    d["filtered_variances"] = r.filtered_variances;
    d["innovations"] = r.innovations;
    d["innovation_variances"] = r.innovation_variances;
    d["nll"] = r.nll;
    if (r.smoothed()) {
        d["smoothed_means"] = r.smoothed_means;
        Matrix var(r.steps(), r.smoothed_means.cols());
        for (Index k = 0; k < r.steps(); ++k) var.row(k) = r.smoothed_covariances[static_cast<std::size_t>(k)].diagonal().transpose();
        d["smoothed_variances"] = var;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_gplfm, m) {
    m.doc() = "Gaussian-process latent force models for joint input-state estimation";
    m.attr("__version__") = harness::version();

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<UnsupportedKernelError>(m, "UnsupportedKernelError", base.ptr());
    py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
    py::register_exception<ConditioningError>(m, "ConditioningError", base.ptr());
    py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
    py::register_exception<OptimizationError>(m, "OptimizationError", base.ptr());

    m.def("matern_eval",
          [](int p, double alpha2, double lengthscale, const Vector& tau) {
              const KernelSpec spec = kernel(p, alpha2, lengthscale);
              Vector out(tau.size());
              for (Index i = 0; i < tau.size(); ++i) out(i) = matern_eval(spec, tau(i));
              return out;
          },
          py::arg("p"), py::arg("alpha2"), py::arg("lengthscale"), py::arg("tau"),
          "Matérn covariance with nu = p + 1/2 at each lag.");

    m.def("kernel_to_ssm",
          [](int p, double alpha2, double lengthscale) {
              const KernelRealization r = kernel_to_ssm(kernel(p, alpha2, lengthscale));
              py::dict d;
              d["F"] = r.f;
              d["L"] = r.l;
              d["H"] = Matrix(r.h);
              d["sigma_w"] = r.sigma_w;
              d["P_inf"] = r.p_inf;
              return d;
          },
          py::arg("p"), py::arg("alpha2"), py::arg("lengthscale"));

    m.def("kernel_from_ssm",
          [](int p, double alpha2, double lengthscale, const Vector& tau) {
              const KernelRealization r = kernel_to_ssm(kernel(p, alpha2, lengthscale));
              Vector out(tau.size());
              for (Index i = 0; i < tau.size(); ++i) out(i) = kernel_from_ssm(r, tau(i));
              return out;
          },
          py::arg("p"), py::arg("alpha2"), py::arg("lengthscale"), py::arg("tau"));

    m.def("gp_regress_batch",
          [](const std::vector<double>& times, const std::vector<double>& y, int p, double alpha2, double lengthscale,
             double noise_var, double t_star) {
              const GpPosterior g = gp_regress_batch(times, y, kernel(p, alpha2, lengthscale), noise_var, t_star);
              return py::make_tuple(g.mean, g.variance);
          },
          py::arg("times"), py::arg("y"), py::arg("p"), py::arg("alpha2"), py::arg("lengthscale"), py::arg("noise_var"),
          py::arg("t_star"), "Posterior mean and variance at t_star from the dense Gram matrix.");

    m.def("matrix_exponential", &numerics::matrix_exponential, py::arg("a"), py::arg("t") = 1.0);
    m.def("solve_lyapunov", &numerics::solve_lyapunov, py::arg("f"), py::arg("q"));
    m.def("discrete_process_noise", &numerics::discrete_process_noise, py::arg("f"), py::arg("qc"), py::arg("dt"));

    m.def("shear_building",
          [](const std::vector<double>& masses, const std::vector<double>& stiffnesses, double a0, double a1) {
              const StructuralSystem s = building(masses, stiffnesses, a0, a1, {});
              py::dict d;
              d["M"] = s.mass;
              d["C"] = s.damping;
              d["K"] = s.stiffness;
              return d;
          },
          py::arg("masses"), py::arg("stiffnesses"), py::arg("a0") = 0.0, py::arg("a1") = 0.0);

    m.def("modal_analysis",
          [](const std::vector<double>& masses, const std::vector<double>& stiffnesses, double a0, double a1) {
              const ModalData md = modal_analysis(building(masses, stiffnesses, a0, a1, {}));
              return py::make_tuple(md.frequencies_hz, md.damping_ratios, md.mode_shapes);
          },
          py::arg("masses"), py::arg("stiffnesses"), py::arg("a0") = 0.0, py::arg("a1") = 0.0,
          "Frequencies [Hz], damping ratios and mass-normalized mode shapes.");

    m.def("state_space",
          [](const std::vector<double>& masses, const std::vector<double>& stiffnesses, double a0, double a1,
             const std::vector<Index>& load_floors, const std::vector<Index>& acceleration_floors) {
              SensorLayout s;
              for (Index f : acceleration_floors) s.acceleration_dofs.push_back(f - 1);
              const ContinuousStateSpace ssm = assemble_continuous_ssm(building(masses, stiffnesses, a0, a1, load_floors), s);
              py::dict d;
              d["A"] = ssm.a;
              d["B"] = ssm.b;
              d["G"] = ssm.g;
              d["J"] = ssm.j;
              return d;
          },
          py::arg("masses"), py::arg("stiffnesses"), py::arg("a0"), py::arg("a1"), py::arg("load_floors"),
          py::arg("acceleration_floors"), "Continuous-time A, B, G, J with 1-based floor numbers.");

    m.def("kalman_filter",
          [](const Matrix& f, const Matrix& h, const Matrix& q, const Matrix& r, const Vector& m0, const Matrix& p0,
             const Matrix& y, bool smooth) {
              DiscreteModel model{f, h, q, r, m0, p0, 0.0};
              EstimationResult res = kalman_filter(model, y);
              if (smooth) res = rts_smoother(model, std::move(res));
              return estimation_dict(res);
          },
          py::arg("F"), py::arg("H"), py::arg("Q"), py::arg("R"), py::arg("m0"), py::arg("P0"), py::arg("y"),
          py::arg("smooth") = true,
          "Kalman filter (and RTS smoother) over the rows of y; NaN marks a missing channel.");

    m.def("drift_metric",
          [](const std::vector<double>& estimate, const std::vector<double>& truth, double cutoff_hz, double fs) {
              return drift_metric(estimate, truth, cutoff_hz, fs);
          },
          py::arg("estimate"), py::arg("truth"), py::arg("cutoff_hz"), py::arg("fs"));

    m.def("run_experiment",
          [](const py::object& config, const std::string& verb, const std::filesystem::path& out_dir,
             const std::filesystem::path& base_dir) {
              harness::Json summary;
              if (py::isinstance<py::dict>(config)) {
                  const harness::Json doc = from_python(config);
                  py::gil_scoped_release release;
                  summary = harness::run_experiment(harness::parse_config(doc, base_dir), harness::verb_from_string(verb), out_dir);
              } else {
                  const auto path = config.cast<std::filesystem::path>();
                  py::gil_scoped_release release;
                  summary = harness::run_experiment(harness::load_config(path), harness::verb_from_string(verb), out_dir);
              }
              return to_python(summary);
          },
          py::arg("config"), py::arg("verb"), py::arg("out_dir"), py::arg("base_dir") = std::filesystem::path{},
          "Runs simulate/estimate/optimize/lcurve/diagnose on a config dict or file and returns the summary.");
}
