#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "btc/analysis.hpp"
#include "btc/dicke.hpp"
#include "btc/meanfield.hpp"
#include "btc/model.hpp"
#include "btc/phases.hpp"

namespace py = pybind11;
using namespace btc;

namespace {

py::array_t<double> dbl_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> bloch_array(const std::vector<Vec3>& s) {
    py::array_t<double> a({static_cast<py::ssize_t>(s.size()), py::ssize_t(3)});
    auto r = a.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        for (py::ssize_t j = 0; j < 3; ++j) r(i, j) = s[static_cast<size_t>(i)][j];
    return a;
}

meanfield::IntegrateOptions make_options(double rel_tol, double abs_tol, int samples, Mode mode,
                                         double n_sites) {
    meanfield::IntegrateOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    opt.samples = samples;
    opt.mode = mode;
    opt.n_sites = n_sites;
    return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "mean-field and exact dynamics of dissipative collective spin models";
#ifdef BTC_VERSION
    m.attr("__version__") = BTC_VERSION;
#endif

    static py::exception<Error> btc_error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(btc_error,
                          (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
        }
    });

    py::enum_<Axis>(m, "Axis")
        .value("ZPole", Axis::ZPole)
        .value("XPole", Axis::XPole);
    py::enum_<Mode>(m, "Mode")
        .value("Collective", Mode::Collective)
        .value("Local", Mode::Local);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](int p, int q, double omega_z, double omega_x, double gamma_up,
                         double gamma_down) {
                 ModelParams mp{p, q, omega_z, omega_x, gamma_up, gamma_down};
                 check_params(mp);
                 return mp;
             }),
             py::arg("p") = 1, py::arg("q") = 1, py::arg("omega_z") = 1.0,
             py::arg("omega_x") = 0.0, py::arg("gamma_up") = 0.0, py::arg("gamma_down") = 0.0)
        .def_readwrite("p", &ModelParams::p)
        .def_readwrite("q", &ModelParams::q)
        .def_readwrite("omega_z", &ModelParams::omega_z)
        .def_readwrite("omega_x", &ModelParams::omega_x)
        .def_readwrite("gamma_up", &ModelParams::gamma_up)
        .def_readwrite("gamma_down", &ModelParams::gamma_down)
        .def_property_readonly("delta_gamma", &ModelParams::delta_gamma)
        .def_property_readonly("gamma_bar", &ModelParams::gamma_bar)
        .def("__repr__", [](const ModelParams& mp) {
            return "ModelParams(p=" + std::to_string(mp.p) + ", q=" + std::to_string(mp.q) +
                   ", omega_z=" + std::to_string(mp.omega_z) +
                   ", omega_x=" + std::to_string(mp.omega_x) +
                   ", gamma_up=" + std::to_string(mp.gamma_up) +
                   ", gamma_down=" + std::to_string(mp.gamma_down) + ")";
        });

    py::class_<PolarState>(m, "PolarState")
        .def_readonly("phi", &PolarState::phi)
        .def_readonly("cos_theta", &PolarState::cos_theta)
        .def_readonly("axis", &PolarState::axis)
        .def_readonly("pole_singular", &PolarState::pole_singular);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("t", [](const Trajectory& tr) { return dbl_array(tr.t); })
        .def_property_readonly("s", [](const Trajectory& tr) { return bloch_array(tr.s); })
        .def_readonly("max_norm_drift", &Trajectory::max_norm_drift)
        .def_readonly("mode", &Trajectory::mode)
        .def_readonly("n_sites", &Trajectory::n_sites)
        .def("__len__", [](const Trajectory& tr) { return tr.t.size(); });

    py::class_<FixedPoint>(m, "FixedPoint")
        .def_property_readonly("s", [](const FixedPoint& fp) { return fp.s; })
        .def_property_readonly("exponents",
                               [](const FixedPoint& fp) {
                                   return std::vector<cplx>(fp.exponents.begin(),
                                                            fp.exponents.end());
                               })
        .def_property_readonly("cls",
                               [](const FixedPoint& fp) { return stability_name(fp.cls); })
        .def_readonly("residual", &FixedPoint::residual)
        .def("__repr__", [](const FixedPoint& fp) {
            return std::string("FixedPoint(") + stability_name(fp.cls) + " at [" +
                   std::to_string(fp.s.x()) + ", " + std::to_string(fp.s.y()) + ", " +
                   std::to_string(fp.s.z()) + "])";
        });

    py::class_<meanfield::EnvelopePoint>(m, "EnvelopePoint")
        .def(py::init<double, double>(), py::arg("t"), py::arg("amplitude"))
        .def_readwrite("t", &meanfield::EnvelopePoint::t)
        .def_readwrite("amplitude", &meanfield::EnvelopePoint::amplitude);

    m.def("bloch_from_angles", &bloch_from_angles, py::arg("theta"), py::arg("phi"),
          py::arg("axis") = Axis::ZPole);
    m.def("angles_from_bloch", &angles_from_bloch, py::arg("s"), py::arg("axis") = Axis::ZPole);

    m.def("rhs_collective", &meanfield::rhs_collective, py::arg("params"), py::arg("s"));
    m.def("rhs_local", &meanfield::rhs_local, py::arg("params"), py::arg("s"),
          py::arg("n_sites"));

    m.def(
        "integrate",
        [](const ModelParams& mp, const Vec3& s0, double t_end, double rel_tol, double abs_tol,
           int samples, Mode mode, double n_sites) {
            return meanfield::integrate(mp, s0, t_end,
                                        make_options(rel_tol, abs_tol, samples, mode, n_sites));
        },
        py::arg("params"), py::arg("s0"), py::arg("t_end"), py::arg("rel_tol") = 1e-9,
        py::arg("abs_tol") = 1e-11, py::arg("samples") = 1000,
        py::arg("mode") = Mode::Collective, py::arg("n_sites") = 0.0,
        py::call_guard<py::gil_scoped_release>());

    m.def("find_fixed_points", &meanfield::find_fixed_points, py::arg("params"),
          py::arg("mode") = Mode::Collective, py::arg("n_sites") = 0.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("classify", &meanfield::classify, py::arg("params"), py::arg("point"),
          py::arg("eps") = -1.0, py::arg("mode") = Mode::Collective, py::arg("n_sites") = 0.0,
          py::arg("fd_step") = 1e-6);
    m.def("envelope", &meanfield::envelope, py::arg("t"), py::arg("v"));
    m.def(
        "detect_orbit",
        [](const Trajectory& tr, int window_periods, Axis axis) {
            return meanfield::orbit_verdict_name(meanfield::detect_orbit(tr, window_periods, axis));
        },
        py::arg("trajectory"), py::arg("window_periods") = 20, py::arg("axis") = Axis::ZPole);

    py::class_<dicke::Operators>(m, "Operators")
        .def_readonly("n", &dicke::Operators::n)
        .def_readonly("jx", &dicke::Operators::jx)
        .def_readonly("jy", &dicke::Operators::jy)
        .def_readonly("jz", &dicke::Operators::jz)
        .def_readonly("jp", &dicke::Operators::jp)
        .def_readonly("jm", &dicke::Operators::jm);

    py::class_<dicke::ExpectationTrace>(m, "ExpectationTrace")
        .def_property_readonly("t",
                               [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.t); })
        .def_property_readonly(
            "jx", [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.jx); })
        .def_property_readonly(
            "jy", [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.jy); })
        .def_property_readonly(
            "jz", [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.jz); })
        .def_property_readonly(
            "purity", [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.purity); })
        .def_property_readonly(
            "trace_err",
            [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.trace_err); })
        .def_property_readonly(
            "min_eigval",
            [](const dicke::ExpectationTrace& tr) { return dbl_array(tr.min_eigval); })
        .def_readonly("positivity_breach", &dicke::ExpectationTrace::positivity_breach)
        .def_readonly("rho_final", &dicke::ExpectationTrace::rho_final)
        .def_readonly("n", &dicke::ExpectationTrace::n);

    py::class_<dicke::SpectrumResult>(m, "SpectrumResult")
        .def_readonly("eigenvalues", &dicke::SpectrumResult::eigenvalues)
        .def_readonly("gap", &dicke::SpectrumResult::gap)
        .def_readonly("steady_state", &dicke::SpectrumResult::steady_state)
        .def_readonly("degenerate_zero", &dicke::SpectrumResult::degenerate_zero)
        .def_readonly("liouvillian_norm", &dicke::SpectrumResult::liouvillian_norm);

    m.def("build_operators", &dicke::build_operators, py::arg("n"));
    m.def("build_hamiltonian", &dicke::build_hamiltonian, py::arg("ops"), py::arg("params"));
    m.def("lindblad_rhs", &dicke::lindblad_rhs, py::arg("ops"), py::arg("params"),
          py::arg("rho"));
    m.def("build_liouvillian", &dicke::build_liouvillian, py::arg("ops"), py::arg("params"),
          py::call_guard<py::gil_scoped_release>());
    m.def("coherent_state", &dicke::coherent_state, py::arg("n"), py::arg("theta"),
          py::arg("phi"));
    m.def(
        "evolve",
        [](const dicke::Operators& ops, const ModelParams& mp, const dicke::Mat& rho0,
           double t_end, double rel_tol, double abs_tol, int samples) {
            dicke::EvolveOptions opt;
            opt.rel_tol = rel_tol;
            opt.abs_tol = abs_tol;
            opt.samples = samples;
            return dicke::evolve(ops, mp, rho0, t_end, opt);
        },
        py::arg("ops"), py::arg("params"), py::arg("rho0"), py::arg("t_end"),
        py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-10, py::arg("samples") = 400,
        py::call_guard<py::gil_scoped_release>());
    m.def("spectrum", &dicke::spectrum, py::arg("liouvillian"), py::arg("k"),
          py::call_guard<py::gil_scoped_release>());
    m.def("steady_state", &dicke::steady_state, py::arg("liouvillian"),
          py::call_guard<py::gil_scoped_release>());
    m.def("pi_rotation_x", &dicke::pi_rotation_x, py::arg("ops"));

    py::class_<analysis::PowerFit>(m, "PowerFit")
        .def_readonly("exponent", &analysis::PowerFit::exponent)
        .def_readonly("amplitude", &analysis::PowerFit::amplitude)
        .def_readonly("residual", &analysis::PowerFit::residual)
        .def_readonly("n_used", &analysis::PowerFit::n_used);

    py::class_<analysis::ExpFit>(m, "ExpFit")
        .def_readonly("rate", &analysis::ExpFit::rate)
        .def_readonly("beta", &analysis::ExpFit::beta)
        .def_readonly("amplitude", &analysis::ExpFit::amplitude)
        .def_readonly("residual", &analysis::ExpFit::residual)
        .def_readonly("n_used", &analysis::ExpFit::n_used);

    py::class_<analysis::CollapseResult>(m, "CollapseResult")
        .def_readonly("nu_star", &analysis::CollapseResult::nu_star)
        .def_readonly("score", &analysis::CollapseResult::score)
        .def_readonly("nu_grid", &analysis::CollapseResult::nu_grid)
        .def_readonly("scores", &analysis::CollapseResult::scores);

    py::class_<analysis::SteadyStateMetrics>(m, "SteadyStateMetrics")
        .def_readonly("purity", &analysis::SteadyStateMetrics::purity)
        .def_readonly("diag_uniformity", &analysis::SteadyStateMetrics::diag_uniformity)
        .def_readonly("offdiag_mass", &analysis::SteadyStateMetrics::offdiag_mass);

    m.def("fit_power_amplitude", &analysis::fit_power_amplitude, py::arg("envelope"));
    m.def("fit_exp_amplitude", &analysis::fit_exp_amplitude, py::arg("envelope"),
          py::arg("n_s") = 1.0);
    m.def("collapse_score", &analysis::collapse_score, py::arg("envelopes"), py::arg("sizes"),
          py::arg("nu"));
    m.def("best_collapse", &analysis::best_collapse, py::arg("envelopes"), py::arg("sizes"),
          py::arg("nu_grid"));
    m.def("gap_scaling", &analysis::gap_scaling, py::arg("sizes"), py::arg("gaps"));
    m.def("dominant_frequency", &analysis::dominant_frequency, py::arg("t"), py::arg("v"));
    m.def("steadystate_metrics", &analysis::steadystate_metrics, py::arg("rho"));
    m.def("ansatz_total_spin", &analysis::ansatz_total_spin, py::arg("n"), py::arg("a"),
          py::arg("b"));
    m.def("brute_force_total_spin", &analysis::brute_force_total_spin, py::arg("n"),
          py::arg("a"), py::arg("b"), py::arg("phase") = 0.0);

    m.def(
        "classify_phase",
        [](const ModelParams& mp) { return phases::label_name(phases::classify_point(mp)); },
        py::arg("params"), py::call_guard<py::gil_scoped_release>());
}
