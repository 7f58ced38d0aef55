// btc: command line front end for the collective spin dissipation toolkit.
// Usage: btc <SUBCOMMAND> --config <path> [--out <dir>] [--threads <n>]
// BTC_THREADS is the fallback for --threads. Module failures print one
// error JSON line to stderr and exit 1; usage problems exit 2.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "btc/analysis.hpp"
#include "btc/dicke.hpp"
#include "btc/io.hpp"
#include "btc/meanfield.hpp"
#include "btc/model.hpp"
#include "btc/phases.hpp"
#include "btc/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace btc;

namespace {

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

struct Ctx {
    io::ConfigMap cfg;
    std::string digest;
    fs::path out;
    int threads{1};
};

int resolve_threads(int cli_value) {
    if (cli_value > 0) return cli_value;
    if (const char* env = std::getenv("BTC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// fixed-order work queue; slots are preallocated so results are
// independent of the thread count, and all file writes happen after join
void parallel_for(int njobs, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, njobs));
    if (threads <= 1) {
        for (int i = 0; i < njobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = next++; i < njobs; i = next++) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) throw Error(ErrorCode::DomainError, "grid needs at least one step");
    std::vector<double> g(steps);
    for (int i = 0; i < steps; ++i)
        g[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    return g;
}

Axis parse_axis(const io::ConfigMap& cfg) {
    std::string a = io::get_str(cfg, "run.axis", "z");
    if (a == "z") return Axis::ZPole;
    if (a == "x") return Axis::XPole;
    throw Error(ErrorCode::DomainError, "run.axis must be z or x");
}

int require_int(const io::ConfigMap& cfg, const std::string& key) {
    double v = io::require_num(cfg, key);
    int n = static_cast<int>(v);
    if (n != v) throw Error(ErrorCode::DomainError, key + " must be an integer");
    return n;
}

std::vector<int> parse_n_list(const io::ConfigMap& cfg) {
    std::vector<int> ns = io::get_int_list(cfg, "run.n_list", {});
    if (ns.empty()) {
        int n = io::get_int(cfg, "run.n", 0);
        if (n > 0) ns = {n};
    }
    if (ns.empty()) throw Error(ErrorCode::MissingKey, "missing required key run.n_list");
    for (size_t i = 0; i + 1 < ns.size(); ++i)
        if (ns[i] >= ns[i + 1])
            throw Error(ErrorCode::DomainError, "run.n_list must be strictly increasing");
    if (ns.front() < 1) throw Error(ErrorCode::DomainError, "run.n_list entries must be >= 1");
    return ns;
}

json model_json(const ModelParams& mp) {
    return json{{"p", mp.p},
                {"q", mp.q},
                {"omega_z", mp.omega_z},
                {"omega_x", mp.omega_x},
                {"gamma_up", mp.gamma_up},
                {"gamma_down", mp.gamma_down}};
}

// dominant oscillation frequency in cycles and as an angular frequency, the
// latter for direct comparison with Liouvillian eigenvalue imaginary parts
void attach_frequency(json& sum, const std::vector<double>& t, const std::vector<double>& v) {
    try {
        double f = analysis::dominant_frequency(t, v);
        sum["frequency"] = {{"cycles", f}, {"angular", 2.0 * M_PI * f}};
    } catch (const Error& e) {
        sum["frequency"] = nullptr;
        sum["frequency_error"] = e.what();
    }
}

void write_summary(const Ctx& c, const json& sum) {
    io::write_text(c.out / "summary.json", sum.dump(2) + "\n");
}

svg::Marker marker_for(Stability s) {
    switch (s) {
        case Stability::Attractor: return svg::Marker::CircleSolid;
        case Stability::Repeller: return svg::Marker::CircleDashed;
        case Stability::Marginal: return svg::Marker::SquareSolid;
        case Stability::Saddle: return svg::Marker::SquareDashed;
    }
    return svg::Marker::None;
}

const char* color_for(Stability s) {
    switch (s) {
        case Stability::Attractor: return "#2ca02c";
        case Stability::Repeller: return "#d62728";
        case Stability::Marginal: return "#1f77b4";
        case Stability::Saddle: return "#ff7f0e";
    }
    return "#000000";
}

// one polyline per continuous arc: the phi coordinate wraps at +-pi and a
// single series would draw a spurious horizontal jump across the chart
void add_polar_arcs(std::vector<svg::Series>& out, const Trajectory& tr, Axis axis,
                    const std::string& color) {
    svg::Series cur;
    cur.color = color;
    double prev = 0;
    bool have_prev = false;
    for (const Vec3& s : tr.s) {
        PolarState ps = angles_from_bloch(s, axis);
        if (have_prev && std::abs(ps.phi - prev) > 3.2) {
            if (cur.pts.size() > 1) out.push_back(cur);
            cur.pts.clear();
        }
        cur.pts.push_back({ps.phi, ps.cos_theta});
        prev = ps.phi;
        have_prev = true;
    }
    if (cur.pts.size() > 1) out.push_back(std::move(cur));
}

meanfield::IntegrateOptions integrate_options(const io::ConfigMap& cfg, int default_samples) {
    meanfield::IntegrateOptions opt;
    opt.samples = io::get_int(cfg, "run.samples", default_samples);
    opt.rel_tol = io::get_num(cfg, "run.rel_tol", opt.rel_tol);
    opt.abs_tol = io::get_num(cfg, "run.abs_tol", opt.abs_tol);
    std::string mode = io::get_str(cfg, "run.mode", "collective");
    if (mode == "local") {
        opt.mode = Mode::Local;
        opt.n_sites = io::require_num(cfg, "run.n_sites");
    } else if (mode != "collective") {
        throw Error(ErrorCode::DomainError, "run.mode must be collective or local");
    }
    return opt;
}

dicke::EvolveOptions evolve_options(const io::ConfigMap& cfg) {
    dicke::EvolveOptions opt;
    opt.rel_tol = io::get_num(cfg, "run.rel_tol", opt.rel_tol);
    opt.abs_tol = io::get_num(cfg, "run.abs_tol", opt.abs_tol);
    opt.samples = io::get_int(cfg, "run.samples", opt.samples);
    return opt;
}

int cmd_meanfield(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    Axis axis = parse_axis(c.cfg);
    double theta = io::require_num(c.cfg, "run.theta");
    double phi = io::require_num(c.cfg, "run.phi");
    double t_end = io::require_num(c.cfg, "run.t_end");
    meanfield::IntegrateOptions opt = integrate_options(c.cfg, 2000);

    Vec3 s0 = bloch_from_angles(theta, phi, axis);
    Trajectory tr = meanfield::integrate(mp, s0, t_end, opt);
    io::write_text(c.out / "trajectory.csv", io::trajectory_csv(tr, c.digest));

    svg::Figure fig;
    fig.title = "bloch components vs time";
    fig.xlabel = "t";
    fig.ylabel = "X (blue), Y (red), Z (green)";
    for (int k = 0; k < 3; ++k) {
        svg::Series se;
        se.color = kPalette[k];
        se.pts.reserve(tr.t.size());
        for (size_t i = 0; i < tr.t.size(); ++i) se.pts.push_back({tr.t[i], tr.s[i][k]});
        fig.series.push_back(std::move(se));
    }
    io::write_text(c.out / "trajectory.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "MEANFIELD";
    sum["model"] = model_json(mp);
    sum["mode"] = opt.mode == Mode::Local ? "local" : "collective";
    if (opt.mode == Mode::Local) sum["n_sites"] = opt.n_sites;
    sum["seed"] = {{"theta", theta}, {"phi", phi}, {"axis", axis == Axis::ZPole ? "z" : "x"}};
    sum["t_end"] = t_end;
    sum["samples"] = opt.samples;
    sum["final_state"] = {tr.s.back().x(), tr.s.back().y(), tr.s.back().z()};
    sum["max_norm_drift"] = tr.max_norm_drift;
    try {
        sum["orbit"] = meanfield::orbit_verdict_name(meanfield::detect_orbit(tr, 20, axis));
    } catch (const Error& e) {
        sum["orbit"] = nullptr;
        sum["orbit_error"] = e.what();
    }
    std::vector<double> comp(tr.t.size());
    for (size_t i = 0; i < tr.t.size(); ++i)
        comp[i] = axis == Axis::ZPole ? tr.s[i].z() : tr.s[i].x();
    attach_frequency(sum, tr.t, comp);
    write_summary(c, sum);
    return 0;
}

int cmd_portrait(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    Axis axis = parse_axis(c.cfg);
    int grid_phi = io::get_int(c.cfg, "run.grid_phi", 12);
    int grid_ct = io::get_int(c.cfg, "run.grid_ct", 6);
    double t_end = io::get_num(c.cfg, "run.t_end", 40.0);
    meanfield::IntegrateOptions opt = integrate_options(c.cfg, 1200);

    meanfield::PortraitResult pr =
        meanfield::phase_portrait(mp, grid_phi, grid_ct, t_end, axis, opt);

    std::ostringstream csv;
    csv << "# digest=" << c.digest << "\n";
    csv << "# t,X,Y,Z,phi,cos_theta\n";
    for (size_t k = 0; k < pr.trajectories.size(); ++k) {
        csv << "# trajectory " << k << "\n";
        const Trajectory& tr = pr.trajectories[k];
        for (size_t i = 0; i < tr.t.size(); ++i) {
            const Vec3& s = tr.s[i];
            PolarState ps = angles_from_bloch(s, axis);
            csv << io::fmt(tr.t[i]) << ',' << io::fmt(s.x()) << ',' << io::fmt(s.y()) << ','
                << io::fmt(s.z()) << ',' << io::fmt(ps.phi) << ',' << io::fmt(ps.cos_theta)
                << "\n";
        }
    }
    io::write_text(c.out / "portrait.csv", csv.str());
    io::write_text(c.out / "fixed_points.json", io::fixed_points_json(pr.fixed_points, c.digest));

    svg::Figure fig;
    fig.title = "phase portrait";
    fig.xlabel = "phi";
    fig.ylabel = "cos(theta)";
    fig.xmin = -M_PI;
    fig.xmax = M_PI;
    fig.ymin = -1;
    fig.ymax = 1;
    for (const Trajectory& tr : pr.trajectories) add_polar_arcs(fig.series, tr, axis, "#9aa7b4");
    for (const FixedPoint& fp : pr.fixed_points) {
        PolarState ps = angles_from_bloch(fp.s, axis);
        svg::Series se;
        se.line = false;
        se.marker = marker_for(fp.cls);
        se.marker_size = 5.0;
        se.color = color_for(fp.cls);
        se.pts.push_back({ps.phi, ps.cos_theta});
        fig.series.push_back(std::move(se));
    }
    io::write_text(c.out / "portrait.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "PORTRAIT";
    sum["model"] = model_json(mp);
    sum["axis"] = axis == Axis::ZPole ? "z" : "x";
    sum["t_end"] = t_end;
    sum["trajectories"] = pr.trajectories.size();
    json fps = json::array();
    for (const FixedPoint& fp : pr.fixed_points)
        fps.push_back({{"location", {fp.s.x(), fp.s.y(), fp.s.z()}},
                       {"class", stability_name(fp.cls)}});
    sum["fixed_points"] = fps;
    write_summary(c, sum);
    return 0;
}

int cmd_evolve(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    std::vector<int> ns = parse_n_list(c.cfg);
    double theta = io::require_num(c.cfg, "run.theta");
    double phi = io::require_num(c.cfg, "run.phi");
    double t_end = io::require_num(c.cfg, "run.t_end");
    dicke::EvolveOptions opt = evolve_options(c.cfg);

    std::vector<dicke::ExpectationTrace> traces(ns.size());
    parallel_for(static_cast<int>(ns.size()), c.threads, [&](int i) {
        dicke::Operators ops = dicke::build_operators(ns[i]);
        dicke::Cvec psi = dicke::coherent_state(ns[i], theta, phi);
        dicke::Mat rho0 = psi * psi.adjoint();
        traces[i] = dicke::evolve(ops, mp, rho0, t_end, opt);
    });

    svg::Figure fig;
    fig.title = "exact spin-z expectation vs time";
    fig.xlabel = "t";
    fig.ylabel = "<J_z>";
    json runs = json::array();
    for (size_t i = 0; i < ns.size(); ++i) {
        const dicke::ExpectationTrace& tr = traces[i];
        io::write_text(c.out / ("expectations_n" + std::to_string(ns[i]) + ".csv"),
                       io::expectations_csv(tr, c.digest));
        svg::Series se;
        se.color = kPalette[i % 6];
        se.pts.reserve(tr.t.size());
        for (size_t k = 0; k < tr.t.size(); ++k) se.pts.push_back({tr.t[k], tr.jz[k]});
        fig.series.push_back(std::move(se));

        json r;
        r["n"] = ns[i];
        r["final_purity"] = tr.purity.back();
        r["max_trace_err"] = *std::max_element(tr.trace_err.begin(), tr.trace_err.end());
        r["positivity_breach"] = tr.positivity_breach;
        attach_frequency(r, tr.t, tr.jz);
        runs.push_back(std::move(r));
    }
    io::write_text(c.out / "evolve.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "EVOLVE";
    sum["model"] = model_json(mp);
    sum["seed"] = {{"theta", theta}, {"phi", phi}};
    sum["t_end"] = t_end;
    sum["runs"] = runs;
    write_summary(c, sum);
    return 0;
}

int cmd_spectrum(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    int n = require_int(c.cfg, "run.n");
    dicke::Operators ops = dicke::build_operators(n);
    dicke::Mat L = dicke::build_liouvillian(ops, mp);
    int dim = static_cast<int>(L.rows());
    int k = io::get_int(c.cfg, "run.k", 0);
    if (k <= 0 || k > dim) k = dim;

    dicke::SpectrumResult res = dicke::spectrum(L, k);
    io::write_text(c.out / "spectrum.csv", io::spectrum_csv(res.eigenvalues, c.digest));

    svg::Figure fig;
    fig.title = "liouvillian spectrum";
    fig.xlabel = "Re";
    fig.ylabel = "Im";
    svg::Series se;
    se.line = false;
    se.marker = svg::Marker::CircleSolid;
    se.marker_size = 2.5;
    for (const cplx& ev : res.eigenvalues) se.pts.push_back({ev.real(), ev.imag()});
    fig.series.push_back(std::move(se));
    io::write_text(c.out / "spectrum.svg", svg::render(fig, "digest=" + c.digest));

    // eigenvalues arrive sorted by descending real part, so the first one
    // with a nonzero imaginary part is the slowest-decaying complex mode
    json slowest = nullptr;
    for (const cplx& ev : res.eigenvalues)
        if (std::abs(ev.imag()) > 1e-6) {
            slowest = {{"re", ev.real()}, {"im", std::abs(ev.imag())}};
            break;
        }

    analysis::SteadyStateMetrics m = analysis::steadystate_metrics(res.steady_state);
    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "SPECTRUM";
    sum["model"] = model_json(mp);
    sum["n"] = n;
    sum["k"] = k;
    sum["gap"] = res.gap;
    sum["degenerate_zero"] = res.degenerate_zero;
    sum["liouvillian_norm"] = res.liouvillian_norm;
    sum["slowest_complex"] = slowest;
    sum["steady_state"] = {{"purity", m.purity},
                           {"diag_uniformity", m.diag_uniformity},
                           {"offdiag_mass", m.offdiag_mass}};
    write_summary(c, sum);
    return 0;
}

int cmd_steadystate(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    int n = require_int(c.cfg, "run.n");
    dicke::Operators ops = dicke::build_operators(n);
    dicke::Mat L = dicke::build_liouvillian(ops, mp);
    dicke::Mat rho = dicke::steady_state(L);
    analysis::SteadyStateMetrics m = analysis::steadystate_metrics(rho);

    io::write_text(c.out / "rho.json", io::density_matrix_json(rho, c.digest));

    std::ostringstream csv;
    csv << "# digest=" << c.digest << "\n";
    csv << "# m,population\n";
    for (int i = 0; i <= n; ++i)
        csv << io::fmt(n / 2.0 - i) << ',' << io::fmt(rho(i, i).real()) << "\n";
    io::write_text(c.out / "populations.csv", csv.str());

    svg::Figure fig;
    fig.title = "steady state populations";
    fig.xlabel = "m";
    fig.ylabel = "population";
    svg::Series se;
    se.marker = svg::Marker::CircleSolid;
    se.marker_size = 2.5;
    for (int i = 0; i <= n; ++i) se.pts.push_back({n / 2.0 - i, rho(i, i).real()});
    fig.series.push_back(std::move(se));
    io::write_text(c.out / "steadystate.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "STEADYSTATE";
    sum["model"] = model_json(mp);
    sum["n"] = n;
    sum["dim"] = n + 1;
    sum["purity"] = m.purity;
    sum["diag_uniformity"] = m.diag_uniformity;
    sum["offdiag_mass"] = m.offdiag_mass;
    sum["trace_err"] = std::abs(rho.trace().real() - 1.0);
    write_summary(c, sum);
    return 0;
}

int scaling_collapse(const Ctx& c, const ModelParams& mp, const std::vector<int>& ns) {
    double theta = io::require_num(c.cfg, "run.theta");
    double phi = io::require_num(c.cfg, "run.phi");
    double t_end = io::require_num(c.cfg, "run.t_end");
    dicke::EvolveOptions opt = evolve_options(c.cfg);
    double nu_min = io::get_num(c.cfg, "run.nu_min", 0.0);
    double nu_max = io::get_num(c.cfg, "run.nu_max", 1.0);
    int nu_steps = io::get_int(c.cfg, "run.nu_steps", 41);

    std::vector<std::vector<analysis::EnvelopePoint>> envs(ns.size());
    parallel_for(static_cast<int>(ns.size()), c.threads, [&](int i) {
        dicke::Operators ops = dicke::build_operators(ns[i]);
        dicke::Cvec psi = dicke::coherent_state(ns[i], theta, phi);
        dicke::Mat rho0 = psi * psi.adjoint();
        dicke::ExpectationTrace tr = dicke::evolve(ops, mp, rho0, t_end, opt);
        envs[i] = meanfield::envelope(tr.t, tr.jz);
    });

    std::vector<double> sizes(ns.begin(), ns.end());
    analysis::CollapseResult col =
        analysis::best_collapse(envs, sizes, linspace(nu_min, nu_max, nu_steps));

    for (size_t i = 0; i < ns.size(); ++i)
        io::write_text(c.out / ("envelope_n" + std::to_string(ns[i]) + ".csv"),
                       io::envelope_csv(envs[i], c.digest));
    io::write_text(c.out / "collapse.csv", io::collapse_csv(envs, sizes, col.nu_star, c.digest));

    svg::Figure fig;
    fig.title = "envelope collapse";
    fig.xlabel = "t / N^nu";
    fig.ylabel = "amplitude";
    for (size_t i = 0; i < ns.size(); ++i) {
        svg::Series se;
        se.color = kPalette[i % 6];
        se.marker = svg::Marker::CircleSolid;
        se.marker_size = 2.0;
        double scale = std::pow(sizes[i], -col.nu_star);
        for (const auto& e : envs[i]) se.pts.push_back({e.t * scale, e.amplitude});
        fig.series.push_back(std::move(se));
    }
    io::write_text(c.out / "collapse.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "SCALING";
    sum["kind"] = "collapse";
    sum["model"] = model_json(mp);
    sum["n_list"] = ns;
    sum["nu_star"] = col.nu_star;
    sum["score"] = col.score;
    sum["nu_grid"] = col.nu_grid;
    sum["scores"] = col.scores;
    write_summary(c, sum);
    return 0;
}

int scaling_gap(const Ctx& c, const ModelParams& mp, const std::vector<int>& ns) {
    int k = io::get_int(c.cfg, "run.k", 6);
    std::vector<double> gaps(ns.size());
    std::vector<cplx> slow(ns.size(), cplx(NAN, NAN));
    parallel_for(static_cast<int>(ns.size()), c.threads, [&](int i) {
        dicke::Operators ops = dicke::build_operators(ns[i]);
        dicke::Mat L = dicke::build_liouvillian(ops, mp);
        int dim = static_cast<int>(L.rows());
        dicke::SpectrumResult res = dicke::spectrum(L, std::min(k, dim));
        gaps[i] = res.gap;
        for (const cplx& ev : res.eigenvalues)
            if (std::abs(ev.imag()) > 1e-6) {
                slow[i] = cplx(ev.real(), std::abs(ev.imag()));
                break;
            }
    });

    std::vector<double> sizes(ns.begin(), ns.end());
    double slope = analysis::gap_scaling(sizes, gaps);

    std::ostringstream csv;
    csv << "# digest=" << c.digest << "\n";
    csv << "# n,gap,slowest_complex_re,slowest_complex_im\n";
    for (size_t i = 0; i < ns.size(); ++i)
        csv << ns[i] << ',' << io::fmt(gaps[i]) << ',' << io::fmt(slow[i].real()) << ','
            << io::fmt(slow[i].imag()) << "\n";
    io::write_text(c.out / "gaps.csv", csv.str());

    svg::Figure fig;
    fig.title = "liouvillian gap scaling";
    fig.xlabel = "log10 N";
    fig.ylabel = "log10 gap";
    svg::Series se;
    se.marker = svg::Marker::CircleSolid;
    se.marker_size = 3.0;
    for (size_t i = 0; i < ns.size(); ++i)
        se.pts.push_back({std::log10(sizes[i]), std::log10(gaps[i])});
    fig.series.push_back(std::move(se));
    io::write_text(c.out / "gaps.svg", svg::render(fig, "digest=" + c.digest));

    json rows = json::array();
    for (size_t i = 0; i < ns.size(); ++i) {
        json r;
        r["n"] = ns[i];
        r["gap"] = gaps[i];
        if (std::isfinite(slow[i].real()))
            r["slowest_complex"] = {{"re", slow[i].real()}, {"im", slow[i].imag()}};
        else
            r["slowest_complex"] = nullptr;
        rows.push_back(std::move(r));
    }
    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "SCALING";
    sum["kind"] = "gap";
    sum["model"] = model_json(mp);
    sum["slope"] = slope;
    sum["rows"] = rows;
    write_summary(c, sum);
    return 0;
}

int cmd_scaling(const Ctx& c) {
    ModelParams mp = validate_params(c.cfg, "model.");
    std::vector<int> ns = parse_n_list(c.cfg);
    std::string kind = io::get_str(c.cfg, "run.kind", "collapse");
    if (kind == "collapse") return scaling_collapse(c, mp, ns);
    if (kind == "gap") return scaling_gap(c, mp, ns);
    throw Error(ErrorCode::DomainError, "run.kind must be collapse or gap");
}

int cmd_phasediagram(const Ctx& c) {
    int p = require_int(c.cfg, "model.p");
    int q = require_int(c.cfg, "model.q");
    std::vector<double> wx = linspace(io::get_num(c.cfg, "run.wx_min", 0.0),
                                      io::get_num(c.cfg, "run.wx_max", 4.0),
                                      io::get_int(c.cfg, "run.wx_steps", 21));
    std::vector<double> dg = linspace(io::get_num(c.cfg, "run.dg_min", 0.0),
                                      io::get_num(c.cfg, "run.dg_max", 1.4),
                                      io::get_int(c.cfg, "run.dg_steps", 15));

    phases::Diagram d = phases::sweep(p, q, wx, dg, c.threads);

    std::ostringstream csv;
    csv << "# digest=" << c.digest << "\n";
    csv << "# omega_x,delta_gamma,label,ferro_root,para_root\n";
    for (const phases::Cell& cell : d.cells)
        csv << io::fmt(cell.omega_x) << ',' << io::fmt(cell.delta_gamma) << ','
            << phases::label_name(cell.label) << ',' << (cell.ferro_root ? 1 : 0) << ','
            << (cell.para_root ? 1 : 0) << "\n";
    io::write_text(c.out / "phasediagram.csv", csv.str());

    svg::Figure fig;
    fig.title = "phase diagram";
    fig.xlabel = "omega_x / omega_z";
    fig.ylabel = "delta_gamma / omega_z";
    const phases::Label order[4] = {phases::Label::None, phases::Label::Ferro,
                                    phases::Label::Btc, phases::Label::FerroBtc};
    const char* colors[4] = {"#c7c7c7", "#d62728", "#1f77b4", "#9467bd"};
    int counts[4] = {0, 0, 0, 0};
    for (int li = 0; li < 4; ++li) {
        svg::Series se;
        se.line = false;
        se.marker = svg::Marker::SquareSolid;
        se.marker_size = 3.5;
        se.color = colors[li];
        for (const phases::Cell& cell : d.cells)
            if (cell.label == order[li]) {
                se.pts.push_back({cell.omega_x, cell.delta_gamma});
                ++counts[li];
            }
        if (!se.pts.empty()) fig.series.push_back(std::move(se));
    }
    io::write_text(c.out / "phasediagram.svg", svg::render(fig, "digest=" + c.digest));

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "PHASEDIAGRAM";
    sum["p"] = p;
    sum["q"] = q;
    sum["grid"] = {{"omega_x", {{"min", wx.front()}, {"max", wx.back()}, {"steps", wx.size()}}},
                   {"delta_gamma",
                    {{"min", dg.front()}, {"max", dg.back()}, {"steps", dg.size()}}}};
    sum["counts"] = {{"none", counts[0]},
                     {"F", counts[1]},
                     {"BTC", counts[2]},
                     {"F+BTC", counts[3]}};
    write_summary(c, sum);
    return 0;
}

int cmd_ansatz_check(const Ctx& c) {
    int n = io::get_int(c.cfg, "run.n", 8);
    int a_steps = io::get_int(c.cfg, "run.a_steps", 9);
    int b_steps = io::get_int(c.cfg, "run.b_steps", 7);
    double phase = io::get_num(c.cfg, "run.phase", 0.4);
    if (a_steps < 1 || b_steps < 1)
        throw Error(ErrorCode::DomainError, "run.a_steps and run.b_steps must be >= 1");

    std::ostringstream csv;
    csv << "# digest=" << c.digest << "\n";
    csv << "# a,b,closed_form,brute_force,abs_diff\n";
    double max_diff = 0;
    for (int i = 0; i < a_steps; ++i) {
        double a = (i + 1.0) / (a_steps + 1.0);
        double bmax = std::sqrt(a * (1.0 - a));
        for (int j = 0; j < b_steps; ++j) {
            double b = b_steps == 1 ? 0.0 : bmax * j / (b_steps - 1.0);
            double closed = analysis::ansatz_total_spin(n, a, b);
            double brute = analysis::brute_force_total_spin(n, a, b, phase);
            double diff = std::abs(closed - brute);
            max_diff = std::max(max_diff, diff);
            csv << io::fmt(a) << ',' << io::fmt(b) << ',' << io::fmt(closed) << ','
                << io::fmt(brute) << ',' << io::fmt(diff) << "\n";
        }
    }
    io::write_text(c.out / "ansatz.csv", csv.str());

    json sum;
    sum["digest"] = c.digest;
    sum["command"] = "ANSATZ-CHECK";
    sum["n"] = n;
    sum["phase"] = phase;
    sum["a_steps"] = a_steps;
    sum["b_steps"] = b_steps;
    sum["max_diff"] = max_diff;
    sum["within_tolerance"] = max_diff <= 1e-10;
    write_summary(c, sum);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collective spin dissipation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;

    struct SubSpec {
        const char* name;
        const char* alias;
        const char* desc;
        int (*fn)(const Ctx&);
    };
    const SubSpec specs[] = {
        {"MEANFIELD", "meanfield", "integrate one semiclassical trajectory", cmd_meanfield},
        {"PORTRAIT", "portrait", "seed-grid phase portrait with classified fixed points",
         cmd_portrait},
        {"EVOLVE", "evolve", "exact master-equation evolution over an N list", cmd_evolve},
        {"SPECTRUM", "spectrum", "dense Liouvillian eigenvalues and gap", cmd_spectrum},
        {"STEADYSTATE", "steadystate", "steady state density matrix and metrics",
         cmd_steadystate},
        {"SCALING", "scaling", "finite-size envelope collapse or gap scaling", cmd_scaling},
        {"PHASEDIAGRAM", "phasediagram", "dynamical phase labels over a parameter grid",
         cmd_phasediagram},
        {"ANSATZ-CHECK", "ansatz-check", "total-spin identity vs brute-force product space",
         cmd_ansatz_check},
    };

    std::vector<std::pair<CLI::App*, int (*)(const Ctx&)>> handlers;
    for (const SubSpec& s : specs) {
        CLI::App* sc = app.add_subcommand(s.name, s.desc);
        sc->alias(s.alias);
        sc->add_option("--config", config_path, "configuration file")->required();
        sc->add_option("--out", out_dir, "output directory (default: out)");
        sc->add_option("--threads", threads, "worker threads (default: BTC_THREADS or all cores)");
        handlers.emplace_back(sc, s.fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Ctx ctx;
    try {
        ctx.cfg = io::parse_config_file(config_path);
    } catch (const Error& e) {
        std::cerr << io::error_json(error_code_name(e.code()), e.what());
        return 1;
    }
    if (ctx.cfg.empty()) {
        std::cerr << "usage error: config file has no keys: " << config_path << "\n";
        return 2;
    }
    ctx.digest = io::digest_hex(io::config_digest(ctx.cfg));
    ctx.out = out_dir;
    ctx.threads = resolve_threads(threads);

    for (const auto& [sc, fn] : handlers)
        if (sc->parsed()) {
            try {
                return fn(ctx);
            } catch (const Error& e) {
                std::cerr << io::error_json(error_code_name(e.code()), e.what());
                return 1;
            } catch (const std::exception& e) {
                std::cerr << io::error_json("Internal", e.what());
                return 1;
            }
        }
    return 2;
}
