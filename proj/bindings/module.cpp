#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sao/beta_hermite.hpp"
#include "sao/experiment.hpp"
#include "sao/riccati.hpp"
#include "sao/scaling.hpp"
#include "sao/spectrum.hpp"
#include "sao/stats.hpp"
#include "sao/tridiag.hpp"

namespace py = pybind11;
using namespace sao;

PYBIND11_MODULE(_sao, m) {
    m.doc() = "stochastic Airy operator toolkit";

    // scaling
    m.def("length_scale", &length_scale, py::arg("beta"));
    m.def(
        "mean_explosion_time", [](double a) { return mean_explosion_time(a); }, py::arg("a"));
    m.def(
        "a_L_inverse", [](double L) { return a_L_inverse(L); }, py::arg("L"));
    m.def("a_L_asymptotic", &a_L_asymptotic, py::arg("L"));

    py::class_<ScalingParams>(m, "ScalingParams")
        .def_static("from_beta", [](double beta) { return ScalingParams::from_beta(beta); })
        .def_readonly("beta", &ScalingParams::beta)
        .def_readonly("L", &ScalingParams::L)
        .def_readonly("a_L", &ScalingParams::a_L)
        .def_readonly("c_beta", &ScalingParams::c_beta)
        .def_readonly("a_L_from_asymptotic", &ScalingParams::a_L_from_asymptotic);
    m.def("rescale_eigenvalue", &rescale_eigenvalue, py::arg("lmbda"), py::arg("params"));
    m.def(
        "convert_conventions",
        [](double mu, double psi_time, const ScalingParams& p) {
            auto c = convert_conventions(mu, psi_time, p);
            return py::make_tuple(c.lambda, c.phi_time);
        },
        py::arg("mu"), py::arg("psi_time"), py::arg("params"));

    // paths
    py::class_<BrownianPath>(m, "BrownianPath")
        .def_static("generate", [](double t0, double t1, double dt, std::uint64_t seed) {
            return BrownianPath::generate(t0, t1, dt, seed);
        })
        .def_static("zero", &BrownianPath::zero)
        .def("value", &BrownianPath::value, py::arg("t"), py::arg("snap_depth") = 16)
        .def("increment", &BrownianPath::increment, py::arg("s"), py::arg("t"))
        .def("refine", &BrownianPath::refine, py::arg("t_lo"), py::arg("t_hi"), py::arg("new_dt"))
        .def_property_readonly("t0", &BrownianPath::t0)
        .def_property_readonly("t1", &BrownianPath::t1)
        .def_property_readonly("dt", &BrownianPath::dt)
        .def_property_readonly("seed", &BrownianPath::seed);

    // riccati
    py::class_<DriftSpec>(m, "DriftSpec")
        .def(py::init([](double a, double beta) {
                 return DriftSpec{a, beta, false};
             }),
             py::arg("a"), py::arg("beta") = 0.0)
        .def_readwrite("a", &DriftSpec::a)
        .def_readwrite("beta", &DriftSpec::beta)
        .def("level", &DriftSpec::level)
        .def("well_bottom", &DriftSpec::well_bottom);

    py::class_<RiccatiTrajectory>(m, "RiccatiTrajectory")
        .def_readonly("times", &RiccatiTrajectory::times)
        .def_readonly("values", &RiccatiTrajectory::values)
        .def_readonly("explosions", &RiccatiTrajectory::explosions)
        .def_readonly("terminal_value", &RiccatiTrajectory::terminal_value)
        .def_readonly("certificate", &RiccatiTrajectory::certificate)
        .def("value_at", &RiccatiTrajectory::value_at)
        .def("explosion_count", &RiccatiTrajectory::explosion_count);

    const double inf = std::numeric_limits<double>::infinity();
    m.def(
        "integrate_forward",
        [](const BrownianPath& path, const DriftSpec& drift, double t0, double x0, double t1,
           double tol, std::size_t stride) {
            IntegratorOptions o;
            o.tol = tol;
            o.sample_stride = stride;
            return integrate_forward(path, drift, t0, x0, t1, o);
        },
        py::arg("path"), py::arg("drift"), py::arg("t0"), py::arg("x0"), py::arg("t1"),
        py::arg("tol") = 0.0, py::arg("sample_stride") = 1);
    m.def(
        "integrate_backward",
        [](const BrownianPath& path, const DriftSpec& drift, double t_end, double x_end, double t0,
           double tol, std::size_t stride) {
            IntegratorOptions o;
            o.tol = tol;
            o.sample_stride = stride;
            return integrate_backward(path, drift, t_end, x_end, t0, o);
        },
        py::arg("path"), py::arg("drift"), py::arg("t_end"), py::arg("x_end"), py::arg("t0"),
        py::arg("tol") = 0.0, py::arg("sample_stride") = 1);
    m.def(
        "hat_Z_canonical",
        [](const BrownianPath& path, double a, double beta, double horizon_T, double tol) {
            return hat_Z_canonical(path, a, beta, horizon_T, tol);
        },
        py::arg("path"), py::arg("a"), py::arg("beta"), py::arg("horizon_T"), py::arg("tol"));
    m.def(
        "coupled_sweep",
        [](const BrownianPath& path, const std::vector<double>& grid, double beta, double t0,
           double t1) { return coupled_sweep(path, grid, beta, t0, t1); },
        py::arg("path"), py::arg("a_grid"), py::arg("beta"), py::arg("t0"), py::arg("t1"));
    m.attr("PLUS_INFINITY") = inf;
    m.attr("MINUS_INFINITY") = -inf;

    // spectrum
    m.def("eigenvalue_count", &eigenvalue_count, py::arg("path"), py::arg("beta"), py::arg("T"),
          py::arg("a"), py::arg("stop_after") = static_cast<std::size_t>(-1));
    m.def(
        "eigenvalue_bisect",
        [](const BrownianPath& path, double beta, double T, std::size_t k, double tol,
           double guess) {
            auto r = eigenvalue_bisect(path, beta, T, k, tol, guess);
            return py::make_tuple(r.lambda, r.tie_warning);
        },
        py::arg("path"), py::arg("beta"), py::arg("T"), py::arg("k"), py::arg("tol"),
        py::arg("a_guess") = 0.0);
    py::class_<Eigenfunction>(m, "Eigenfunction")
        .def_readonly("lambda_", &Eigenfunction::lambda)
        .def_readonly("times", &Eigenfunction::times)
        .def_readonly("values", &Eigenfunction::values)
        .def_readonly("center", &Eigenfunction::center)
        .def_readonly("stitch_time", &Eigenfunction::stitch_time);
    m.def("reconstruct_eigenfunction", &reconstruct_eigenfunction, py::arg("path"),
          py::arg("beta"), py::arg("T"), py::arg("lambda_k"), py::arg("tol") = 1e-3);
    m.def(
        "localization_center",
        [](const std::vector<double>& ts, const std::vector<double>& vs) {
            return localization_center(ts, vs);
        },
        py::arg("times"), py::arg("values"));
    py::class_<ShapeProfiles>(m, "ShapeProfiles")
        .def_readonly("xs", &ShapeProfiles::xs)
        .def_readonly("h", &ShapeProfiles::h)
        .def_readonly("b", &ShapeProfiles::b)
        .def_readonly("h_sup_dist", &ShapeProfiles::h_sup_dist)
        .def_readonly("b_sup_dist", &ShapeProfiles::b_sup_dist);
    m.def("shape_profiles", &shape_profiles, py::arg("phi"), py::arg("path"), py::arg("U_k"),
          py::arg("a_L"), py::arg("x_max") = 6.0, py::arg("n_points") = 241);
    py::class_<CrossingEvent>(m, "CrossingEvent")
        .def_readonly("iota", &CrossingEvent::iota)
        .def_readonly("upsilon", &CrossingEvent::upsilon)
        .def_readonly("theta", &CrossingEvent::theta)
        .def_readonly("zeta", &CrossingEvent::zeta)
        .def_readonly("tanh_sup_dist", &CrossingEvent::tanh_sup_dist);
    m.def("extract_crossing", &extract_crossing, py::arg("traj"), py::arg("a_L"));

    // discrete oracle
    py::class_<TridiagonalOperator>(m, "TridiagonalOperator")
        .def_readonly("n", &TridiagonalOperator::n)
        .def_readonly("dx", &TridiagonalOperator::dx)
        .def_property_readonly("diag",
                               [](const TridiagonalOperator& op) { return op.mat.diag; })
        .def_property_readonly("off", [](const TridiagonalOperator& op) { return op.mat.off; });
    m.def("build_operator", &build_operator, py::arg("path"), py::arg("beta"), py::arg("T"),
          py::arg("n"));
    m.def(
        "sturm_count",
        [](const TridiagonalOperator& op, double a) { return sturm_count(op, a); },
        py::arg("op"), py::arg("a"));
    m.def(
        "oracle_eigenvalues",
        [](const TridiagonalOperator& op, std::size_t k, double tol) {
            return eigenvalues(op, k, tol);
        },
        py::arg("op"), py::arg("k_max"), py::arg("tol"));
    m.def(
        "oracle_eigenvector",
        [](const TridiagonalOperator& op, double lmbda, double tol) {
            return eigenvector(op, lmbda, tol);
        },
        py::arg("op"), py::arg("lmbda"), py::arg("tol"));

    // beta ensemble
    py::class_<EnsembleSample>(m, "EnsembleSample")
        .def_readonly("N", &EnsembleSample::N)
        .def_readonly("beta", &EnsembleSample::beta)
        .def_readonly("mu", &EnsembleSample::mu)
        .def_readonly("edge_rescaled", &EnsembleSample::edge_rescaled);
    m.def("sample_ensemble_edge", &sample_ensemble_edge, py::arg("N"), py::arg("beta"),
          py::arg("seed"), py::arg("k_max"), py::arg("tol") = 1e-10);
    m.def("edge_rescale", &edge_rescale, py::arg("mu_decreasing"), py::arg("N"), py::arg("k_max"));

    // stats
    py::enum_<NamedCdf>(m, "NamedCdf")
        .value("Exp1", NamedCdf::Exp1)
        .value("Gumbel", NamedCdf::Gumbel)
        .value("Uniform01", NamedCdf::Uniform01)
        .value("Normal01", NamedCdf::Normal01);
    m.def(
        "ks_statistic",
        [](std::vector<double> sample, NamedCdf cdf) {
            auto r = ks_statistic(std::move(sample), cdf);
            return py::make_tuple(r.d, r.p_value);
        },
        py::arg("sample"), py::arg("cdf"));
    m.def(
        "two_sample_ks",
        [](std::vector<double> x, std::vector<double> y) {
            auto r = two_sample_ks(std::move(x), std::move(y));
            return py::make_tuple(r.d, r.p_value);
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "ou_exit_laplace",
        [](double theta, double nu, double b, int terms) {
            return ou_exit_laplace({theta, nu, b}, terms);
        },
        py::arg("theta"), py::arg("nu"), py::arg("b"), py::arg("terms") = 80);
    m.def(
        "ou_exit_mc",
        [](double theta, double nu, double b, std::size_t n_paths, double dt, std::uint64_t seed) {
            auto r = ou_exit_mc({theta, nu, b}, n_paths, dt, seed);
            return py::make_tuple(r.estimate, r.stderr_);
        },
        py::arg("theta"), py::arg("nu"), py::arg("b"), py::arg("n_paths"), py::arg("dt"),
        py::arg("seed"));
    m.def(
        "mckean_exponential_test",
        [](const std::vector<double>& gammas, double m_a, double alpha) {
            auto v = mckean_exponential_test(gammas, m_a, alpha);
            return py::make_tuple(v.d, v.p_value, v.pass);
        },
        py::arg("gamma_samples"), py::arg("m_a"), py::arg("alpha") = 0.01);
    m.def(
        "gumbel_fit",
        [](const std::vector<double>& sample) {
            auto f = gumbel_fit(sample);
            return py::make_tuple(f.location, f.scale);
        },
        py::arg("sample"));

    // harness
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
            ExperimentReport rep = run(cfg);
            if (!cfg.out.empty()) persist(rep, cfg.out);
            return rep.to_json(true).dump();
        },
        py::arg("config_json"));
    m.def("schema_version", []() { return kSchemaVersion; });
}
