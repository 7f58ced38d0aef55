#include "btc/phases.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace btc {
namespace phases {

const char* label_name(Label l) {
    switch (l) {
        case Label::None: return "none";
        case Label::Ferro: return "F";
        case Label::Btc: return "BTC";
        case Label::FerroBtc: return "F+BTC";
    }
    return "?";
}

bool has_ferro_attractor(const std::vector<FixedPoint>& fps) {
    for (const FixedPoint& fp : fps)
        if (fp.cls == Stability::Attractor && std::abs(fp.s.z()) > 1e-3) return true;
    return false;
}

namespace {

// probe a marginal point: displace by 0.3 in cos theta (in a chart whose pole
// is away from the point) and ask whether the orbit stays closed
bool closed_orbit_near(const ModelParams& mp, const FixedPoint& fp) {
    Axis axis = std::abs(fp.s.z()) <= 0.9 ? Axis::ZPole : Axis::XPole;
    PolarState ps = angles_from_bloch(fp.s, axis);
    double ct = ps.cos_theta + (ps.cos_theta <= 0 ? 0.3 : -0.3);
    Vec3 seed = bloch_from_angles(std::acos(std::clamp(ct, -1.0, 1.0)), ps.phi, axis);

    // period guess from the marginal pair; fall back to the bare frequencies
    double w = 0;
    for (const cplx& e : fp.exponents) w = std::max(w, std::abs(e.imag()));
    if (!(w > 0)) w = 2 * std::max(mp.omega_z, std::max(mp.omega_x, std::abs(mp.delta_gamma())));
    if (!(w > 0)) return false;
    double period = 2 * M_PI / w;

    meanfield::IntegrateOptions opt;
    opt.samples = 4000;
    opt.rel_tol = 1e-9;
    Trajectory tr = meanfield::integrate(mp, seed, 30.0 * period, opt);
    try {
        return meanfield::detect_orbit(tr, 12, axis) == meanfield::OrbitVerdict::Closed;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

bool btc_verdict(const ModelParams& mp, const std::vector<FixedPoint>& fps) {
    for (const FixedPoint& fp : fps)
        if (fp.cls == Stability::Marginal && closed_orbit_near(mp, fp)) return true;
    return false;
}

Label classify_point(const ModelParams& mp) {
    std::vector<FixedPoint> fps = meanfield::find_fixed_points(mp);
    bool f = has_ferro_attractor(fps);
    bool b = btc_verdict(mp, fps);
    if (f && b) return Label::FerroBtc;
    if (b) return Label::Btc;
    if (f) return Label::Ferro;
    return Label::None;
}

const Cell& Diagram::at(int ix, int ig) const {
    return cells[static_cast<size_t>(ig) * omega_x_grid.size() + static_cast<size_t>(ix)];
}

Diagram sweep(int p, int q, const std::vector<double>& omega_x_grid,
              const std::vector<double>& delta_gamma_grid, int threads) {
    if (omega_x_grid.empty() || delta_gamma_grid.empty())
        throw Error(ErrorCode::EmptyDataset, "empty sweep grid");
    Diagram d;
    d.p = p;
    d.q = q;
    d.omega_x_grid = omega_x_grid;
    d.delta_gamma_grid = delta_gamma_grid;
    d.cells.resize(omega_x_grid.size() * delta_gamma_grid.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= d.cells.size()) return;
            size_t ix = i % omega_x_grid.size();
            size_t ig = i / omega_x_grid.size();
            ModelParams mp;
            mp.p = p;
            mp.q = q;
            mp.omega_z = 1.0;
            mp.omega_x = omega_x_grid[ix];
            mp.gamma_up = delta_gamma_grid[ig];
            mp.gamma_down = 0.0;
            Cell& c = d.cells[i];
            c.omega_x = mp.omega_x;
            c.delta_gamma = mp.delta_gamma();
            std::vector<FixedPoint> fps = meanfield::find_fixed_points(mp);
            for (const FixedPoint& fp : fps)
                (std::abs(fp.s.z()) > 1e-3 ? c.ferro_root : c.para_root) = true;
            bool f = has_ferro_attractor(fps);
            bool b = btc_verdict(mp, fps);
            c.label = f && b ? Label::FerroBtc : b ? Label::Btc : f ? Label::Ferro : Label::None;
        }
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    return d;
}

int boundary_column(const Diagram& d, int ig, bool Cell::* member) {
    const int nx = static_cast<int>(d.omega_x_grid.size());
    bool first = d.at(0, ig).*member;
    for (int ix = 1; ix < nx; ++ix)
        if (d.at(ix, ig).*member != first) return ix;
    return -1;
}

}  // namespace phases
}  // namespace btc
