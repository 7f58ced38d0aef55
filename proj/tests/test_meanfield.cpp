#include <doctest.h>

#include <cmath>
#include <random>

#include "btc/meanfield.hpp"

using namespace btc;
using namespace btc::meanfield;

namespace {

ModelParams make(int p, int q, double wz, double wx, double gup, double gdn = 0.0) {
    ModelParams mp;
    mp.p = p;
    mp.q = q;
    mp.omega_z = wz;
    mp.omega_x = wx;
    mp.gamma_up = gup;
    mp.gamma_down = gdn;
    return mp;
}

Vec3 random_unit(std::mt19937& rng) {
    std::normal_distribution<double> g;
    Vec3 v(g(rng), g(rng), g(rng));
    while (v.norm() < 1e-3) v = Vec3(g(rng), g(rng), g(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("flow vanishes on the paramagnetic point") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    Vec3 pminus(-std::sqrt(0.96), 0.2, 0.0);
    CHECK(rhs_collective(mp, pminus).norm() < 1e-12);
}

TEST_CASE("pole acceleration is purely azimuthal for p=2, q=1") {
    ModelParams mp = make(2, 1, 1.0, 3.0, 0.2);
    Vec3 d = rhs_collective(mp, Vec3(0, 0, 1));
    CHECK(d.x() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.y() == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(d.z() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("finite-size dissipation: hand-checked value and stationary pole") {
    // q = 2 so the transverse drive vanishes on the z axis and the 1/n_sites
    // terms are the only contribution beyond the collective pump
    ModelParams mp = make(2, 2, 1.0, 1.0, 0.2);
    Vec3 d = rhs_local(mp, Vec3(0, 0, 0.5), 10.0);
    CHECK(d.x() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.y() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.z() == doctest::Approx(0.32).epsilon(1e-13));

    CHECK(rhs_local(mp, Vec3(0, 0, 1), 10.0).norm() < 1e-14);
}

TEST_CASE("finite-size flow converges to the collective flow") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2, 0.05);
    Vec3 s(0.3, -0.4, std::sqrt(1 - 0.25));
    CHECK((rhs_local(mp, s, 1e9) - rhs_collective(mp, s)).norm() < 1e-8);

    std::mt19937 rng(7);
    std::uniform_int_distribution<int> upq(1, 4);
    std::uniform_real_distribution<double> uw(0.0, 3.0);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        ModelParams r = make(upq(rng), upq(rng), uw(rng), uw(rng), uw(rng) * 0.3,
                             uw(rng) * 0.3);
        Vec3 p = random_unit(rng);
        worst = std::max(worst, (rhs_local(r, p, 1e8) - rhs_collective(r, p)).norm());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("collective flow is tangent to the unit sphere") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> upq(1, 5);
    std::uniform_real_distribution<double> uw(0.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        ModelParams mp = make(upq(rng), upq(rng), uw(rng), uw(rng), uw(rng), uw(rng));
        Vec3 s = random_unit(rng);
        CHECK(std::abs(s.dot(rhs_collective(mp, s))) < 1e-12);
    }
}

TEST_CASE("analytic jacobian matches finite differences") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> upq(1, 4);
    std::uniform_real_distribution<double> uw(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        ModelParams mp = make(upq(rng), upq(rng), uw(rng), uw(rng), uw(rng), uw(rng));
        Vec3 s = random_unit(rng) * 1.1;
        Eigen::Matrix3d J = rhs_jacobian(mp, s);
        const double h = 1e-6;
        for (int c = 0; c < 3; ++c) {
            Vec3 dp = s, dm = s;
            dp[c] += h;
            dm[c] -= h;
            Vec3 col = (rhs_collective(mp, dp) - rhs_collective(mp, dm)) / (2 * h);
            CHECK((J.col(c) - col).norm() < 1e-6);
        }
    }
}

TEST_CASE("mirror symmetry: even p, flipped pump-loss imbalance") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uw(0.1, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        for (int p : {2, 4}) {
            ModelParams mp = make(p, 1, uw(rng), uw(rng), uw(rng), uw(rng));
            ModelParams flip = mp;
            std::swap(flip.gamma_up, flip.gamma_down);
            Vec3 s = random_unit(rng);
            Vec3 ts(s.x(), -s.y(), -s.z());
            Vec3 a = rhs_collective(flip, ts);
            Vec3 b = rhs_collective(mp, s);
            Vec3 tb(b.x(), -b.y(), -b.z());
            CHECK((a - tb).norm() < 1e-12);
        }
    }
}

TEST_CASE("polar form of the flow agrees with the chain rule at p=2, q=1") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> uc(-0.95, 0.95);
    std::uniform_real_distribution<double> uph(-M_PI, M_PI);
    ModelParams mp = make(2, 1, 1.0, 1.3, 0.25, 0.05);
    const double wz = mp.omega_z, wx = mp.omega_x, dG = mp.delta_gamma();
    for (int i = 0; i < 100; ++i) {
        double c = uc(rng), phi = uph(rng);
        double st = std::sqrt(1 - c * c);

        // chain rule applied to the Cartesian flow
        Vec3 s = bloch_from_angles(std::acos(c), phi);
        Vec3 d = rhs_collective(mp, s);
        double phidot_chain = (s.x() * d.y() - s.y() * d.x()) / (st * st);
        double cdot_chain = d.z();

        // analytic polar equations for p=2, q=1 (dissipative term carries the
        // sign the Cartesian flow dictates)
        double phidot = -4.0 * wz * c + 2.0 * wx * c * std::cos(phi) / st;
        double cdot = -2.0 * wx * st * std::sin(phi) + 2.0 * dG * (1 - c * c);

        CHECK(std::abs(phidot_chain - phidot) < 1e-8);
        CHECK(std::abs(cdot_chain - cdot) < 1e-8);

        auto [pd, cd] = polar_rhs_collective(mp, phi, c);
        CHECK(std::abs(pd - phidot) < 1e-8);
        CHECK(std::abs(cd - cdot) < 1e-8);
    }
}

TEST_CASE("integration oracle: free precession with pump, closed form") {
    // p=q=1, wx=0: Z(t) = tanh(2 dG t + atanh Z0), transverse spins rotate at
    // 2 wz and the magnitude follows cosh(u0)/cosh(u).
    ModelParams mp = make(1, 1, 1.0, 0.0, 0.2);
    Vec3 s0(0.6, 0.0, 0.8);
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-13;
    opt.samples = 501;
    Trajectory tr = integrate(mp, s0, 5.0, opt);

    double u0 = std::atanh(0.8);
    for (size_t i : {125u, 250u, 500u}) {
        double t = tr.t[i];
        double u = 2 * 0.2 * t + u0;
        double z = std::tanh(u);
        double w = 0.6 * std::cosh(u0) / std::cosh(u);
        double x = w * std::cos(2 * t);
        double y = -w * std::sin(2 * t);
        CHECK(std::abs(tr.s[i].z() - z) < 1e-8);
        CHECK(std::abs(tr.s[i].x() - x) < 1e-8);
        CHECK(std::abs(tr.s[i].y() - y) < 1e-8);
    }
    CHECK(tr.max_norm_drift < 1e-8);
}

TEST_CASE("norm conservation across random models") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> upq(1, 4);
    std::uniform_real_distribution<double> uw(0.0, 2.0);
    IntegrateOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-12;
    opt.samples = 200;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        ModelParams mp = make(upq(rng), upq(rng), uw(rng), uw(rng), 0.5 * uw(rng),
                              0.5 * uw(rng));
        Trajectory tr = integrate(mp, random_unit(rng), 20.0, opt);
        worst = std::max(worst, tr.max_norm_drift);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("frozen magnetization when both drive and imbalance vanish") {
    ModelParams mp = make(3, 2, 1.7, 0.0, 0.15, 0.15);
    IntegrateOptions opt;
    opt.samples = 400;
    Trajectory tr = integrate(mp, Vec3(0.48, -0.6, 0.64).normalized(), 30.0, opt);
    double z0 = tr.s.front().z();
    for (const Vec3& s : tr.s) CHECK(std::abs(s.z() - z0) < 1e-9);
}

TEST_CASE("persistent orbit keeps its amplitude over 500 time units") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    Vec3 s0 = bloch_from_angles(1.47, 3.10);
    IntegrateOptions opt;
    opt.samples = 20000;
    Trajectory tr = integrate(mp, s0, 500.0, opt);

    std::vector<double> z(tr.s.size());
    for (size_t i = 0; i < tr.s.size(); ++i) z[i] = tr.s[i].z();
    auto env = envelope(tr.t, z);
    REQUIRE(env.size() > 50);
    double first = env[1].amplitude, last = env[env.size() - 2].amplitude;
    CHECK(std::abs(last - first) / first < 0.01);
    CHECK(detect_orbit(tr) == OrbitVerdict::Closed);
}

TEST_CASE("cubic drive damps the paramagnetic oscillations") {
    ModelParams mp = make(3, 1, 1.0, 1.0, 0.2);
    Vec3 s0 = bloch_from_angles(1.47, 0.10);
    IntegrateOptions opt;
    opt.samples = 8000;
    Trajectory tr = integrate(mp, s0, 200.0, opt);
    std::vector<double> z(tr.s.size());
    for (size_t i = 0; i < tr.s.size(); ++i) z[i] = tr.s[i].z();
    auto env = envelope(tr.t, z);
    REQUIRE(env.size() > 20);
    // the damping here is algebraic (the linearization is marginal), so the
    // decay over 200 time units is moderate
    CHECK(env[env.size() - 2].amplitude < 0.7 * env[1].amplitude);
    CHECK(detect_orbit(tr) == OrbitVerdict::SpiralIn);
}

TEST_CASE("step-size underflow is reported") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    IntegrateOptions opt;
    try {
        integrate(mp, Vec3(0, 0.6, 0.8), 1e14, opt);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepSizeUnderflow);
    }
}

TEST_CASE("stationary points of the quadratic-drive model") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    auto fps = find_fixed_points(mp);
    REQUIRE(fps.size() == 4);

    int n_att = 0, n_rep = 0, n_marg = 0, n_sad = 0;
    for (const auto& fp : fps) {
        CHECK(rhs_collective(mp, fp.s).norm() < 1e-10);
        CHECK(std::abs(fp.s.norm() - 1.0) < 1e-9);
        switch (fp.cls) {
            case Stability::Attractor: {
                ++n_att;
                CHECK(fp.s.x() == doctest::Approx(0.49505).epsilon(2e-5));
                CHECK(fp.s.y() == doctest::Approx(0.049505).epsilon(2e-5));
                CHECK(fp.s.z() == doctest::Approx(0.86745).epsilon(2e-5));
                break;
            }
            case Stability::Repeller: {
                ++n_rep;
                CHECK(fp.s.z() == doctest::Approx(-0.86745).epsilon(2e-5));
                break;
            }
            case Stability::Marginal: {
                ++n_marg;
                CHECK(fp.s.x() == doctest::Approx(-0.97980).epsilon(2e-5));
                CHECK(fp.s.y() == doctest::Approx(0.2).epsilon(2e-5));
                CHECK(std::abs(fp.s.z()) < 1e-8);
                break;
            }
            case Stability::Saddle: {
                ++n_sad;
                CHECK(fp.s.x() == doctest::Approx(0.97980).epsilon(2e-5));
                break;
            }
        }
    }
    CHECK(n_att == 1);
    CHECK(n_rep == 1);
    CHECK(n_marg == 1);
    CHECK(n_sad == 1);
}

TEST_CASE("free spins with pure z field only pin the poles") {
    ModelParams mp = make(1, 1, 1.0, 0.0, 0.2);
    auto fps = find_fixed_points(mp);
    REQUIRE(fps.size() == 2);
    CHECK(fps[0].s.isApprox(Vec3(0, 0, 1), 1e-9));
    CHECK(fps[1].s.isApprox(Vec3(0, 0, -1), 1e-9));
    CHECK(fps[0].cls == Stability::Attractor);
    CHECK(fps[1].cls == Stability::Repeller);
}

TEST_CASE("strong transverse drive removes the ferromagnetic pair") {
    // wx = 3 pushes both equatorial points into the rotating regime, so the
    // whole stationary set is two centers
    ModelParams mp = make(2, 1, 1.0, 3.0, 0.2);
    auto fps = find_fixed_points(mp);
    REQUIRE(fps.size() == 2);
    for (const auto& fp : fps) {
        CHECK(std::abs(fp.s.z()) < 1e-8);
        CHECK(fp.cls == Stability::Marginal);
    }

    // at moderate drive one of the pair is instead a saddle
    ModelParams weak = make(2, 1, 1.0, 1.0, 0.2);
    int n_sad = 0;
    for (const auto& fp : find_fixed_points(weak))
        if (fp.cls == Stability::Saddle) ++n_sad;
    CHECK(n_sad == 1);
}

TEST_CASE("quadratic transverse drive: two stable x-ferromagnets, no center") {
    ModelParams mp = make(1, 2, 1.0, 1.0, 0.2);
    auto fps = find_fixed_points(mp);
    REQUIRE(fps.size() == 4);
    int n_att = 0, n_marg = 0;
    for (const auto& fp : fps) {
        if (fp.cls == Stability::Attractor) {
            ++n_att;
            CHECK(fp.s.z() == doctest::Approx(0.5051013).epsilon(1e-5));
            CHECK(std::abs(fp.s.x()) == doctest::Approx(0.8586905).epsilon(1e-5));
        }
        if (fp.cls == Stability::Marginal) ++n_marg;
    }
    CHECK(n_att == 2);
    CHECK(n_marg == 0);
}

TEST_CASE("classify rejects a point off the flow's zero set") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    try {
        classify(mp, Vec3(0, 0.6, 0.8));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAFixedPoint);
    }
}

TEST_CASE("classification is stable under halving the stencil step") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    for (const auto& fp : find_fixed_points(mp)) {
        FixedPoint a = classify(mp, fp.s, -1, Mode::Collective, 0, 1e-6);
        FixedPoint b = classify(mp, fp.s, -1, Mode::Collective, 0, 5e-7);
        CHECK(a.cls == b.cls);
    }
}

TEST_CASE("pole points classify in the rotated chart") {
    ModelParams mp = make(1, 1, 1.0, 0.0, 0.2);
    FixedPoint north = classify(mp, Vec3(0, 0, 1));
    CHECK(north.cls == Stability::Attractor);
    // tangent exponents -2 dG +- 2 i wz
    CHECK(north.exponents[0].real() == doctest::Approx(-0.4).epsilon(1e-4));
    CHECK(std::abs(north.exponents[0].imag()) == doctest::Approx(2.0).epsilon(1e-4));
    FixedPoint south = classify(mp, Vec3(0, 0, -1));
    CHECK(south.cls == Stability::Repeller);
}

TEST_CASE("orbit verdicts across drive families") {
    IntegrateOptions opt;
    opt.samples = 6000;

    SUBCASE("quartic drive keeps closed orbits") {
        ModelParams mp = make(4, 1, 1.0, 1.0, 0.2);
        Trajectory tr = integrate(mp, bloch_from_angles(1.47, 0.10), 120.0, opt);
        CHECK(detect_orbit(tr) == OrbitVerdict::Closed);
    }
    SUBCASE("quadratic transverse drive spirals out of the south pole") {
        ModelParams mp = make(1, 2, 1.0, 1.0, 0.2);
        Vec3 s0 = Vec3(0.01, 0.0, -1.0).normalized();
        Trajectory tr = integrate(mp, s0, 12.0, opt);
        CHECK(detect_orbit(tr, 5, Axis::XPole) == OrbitVerdict::SpiralOut);
    }
    SUBCASE("too short to judge") {
        ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
        Trajectory tr = integrate(mp, bloch_from_angles(1.47, 3.10), 8.0, opt);
        CHECK_THROWS_AS(detect_orbit(tr, 20), Error);
    }
}

TEST_CASE("envelope of a pure tone") {
    std::vector<double> t, v;
    for (int i = 0; i < 1000; ++i) {
        t.push_back(i * 0.01);
        v.push_back(std::sin(2 * M_PI * t.back()));
    }
    auto env = envelope(t, v);
    CHECK(env.size() == 10);
    for (const auto& e : env) CHECK(std::abs(e.amplitude - 1.0) < 1e-3);
}

TEST_CASE("envelope of an exponentially damped tone tracks exp(-t)") {
    std::vector<double> t, v;
    for (int i = 0; i < 1000; ++i) {
        t.push_back(i * 0.01);
        v.push_back(std::exp(-t.back()) * std::sin(2 * M_PI * t.back()));
    }
    auto env = envelope(t, v);
    REQUIRE(env.size() >= 9);
    for (size_t k = 1; k + 1 < env.size(); ++k) {
        double expect = std::exp(-env[k].t);
        CHECK(std::abs(env[k].amplitude - expect) / expect < 0.01);
    }
}

TEST_CASE("constant series has no envelope") {
    std::vector<double> t(100), v(100, 0.7);
    for (int i = 0; i < 100; ++i) t[static_cast<size_t>(i)] = i * 0.1;
    CHECK(envelope(t, v).empty());
}

TEST_CASE("portrait gathers trajectories and the stationary set") {
    ModelParams mp = make(2, 1, 1.0, 1.0, 0.2);
    IntegrateOptions opt;
    opt.samples = 300;
    auto pr = phase_portrait(mp, 4, 3, 30.0, Axis::ZPole, opt);
    CHECK(pr.trajectories.size() == 12);
    CHECK(pr.fixed_points.size() == 4);

    ModelParams heavy = make(2, 1, 1.0, 0.5, 2.0);
    auto pr2 = phase_portrait(heavy, 2, 2, 20.0, Axis::ZPole, opt);
    for (const auto& fp : pr2.fixed_points) CHECK(fp.cls != Stability::Marginal);
}
