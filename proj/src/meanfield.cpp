#include "btc/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btc/rk45.hpp"

namespace btc {
namespace meanfield {

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

Vec3 rhs_collective(const ModelParams& mp, const Vec3& s) {
    const double X = s.x(), Y = s.y(), Z = s.z();
    const double dG = mp.delta_gamma();
    const double zp1 = ipow(Z, mp.p - 1);
    const double xq1 = ipow(X, mp.q - 1);
    const double cz = 2.0 * mp.p * mp.omega_z * zp1;
    const double cx = 2.0 * mp.q * mp.omega_x * xq1;
    return {cz * Y - 2.0 * dG * Z * X,
            cx * Z - cz * X - 2.0 * dG * Z * Y,
            -cx * Y + 2.0 * dG * (1.0 - Z * Z)};
}

Vec3 rhs_local(const ModelParams& mp, const Vec3& s, double n_sites) {
    if (!(n_sites >= 1))
        throw Error(ErrorCode::DomainError, "local dissipation needs n_sites >= 1");
    const double gb = mp.gamma_bar() / n_sites;
    Vec3 d = rhs_collective(mp, s);
    d.x() -= 2.0 * gb * s.x();
    d.y() -= 2.0 * gb * s.y();
    d.z() += 2.0 * mp.delta_gamma() / n_sites - 2.0 * gb * s.z();
    return d;
}

Eigen::Matrix3d rhs_jacobian(const ModelParams& mp, const Vec3& s) {
    const double X = s.x(), Y = s.y(), Z = s.z();
    const double dG = mp.delta_gamma();
    const int p = mp.p, q = mp.q;
    const double zp1 = ipow(Z, p - 1);
    const double xq1 = ipow(X, q - 1);
    const double dzp1 = p >= 2 ? (p - 1) * ipow(Z, p - 2) : 0.0;
    const double dxq1 = q >= 2 ? (q - 1) * ipow(X, q - 2) : 0.0;
    const double cz = 2.0 * p * mp.omega_z;
    const double cx = 2.0 * q * mp.omega_x;
    Eigen::Matrix3d J;
    J(0, 0) = -2.0 * dG * Z;
    J(0, 1) = cz * zp1;
    J(0, 2) = cz * dzp1 * Y - 2.0 * dG * X;
    J(1, 0) = cx * Z * dxq1 - cz * zp1;
    J(1, 1) = -2.0 * dG * Z;
    J(1, 2) = cx * xq1 - cz * X * dzp1 - 2.0 * dG * Y;
    J(2, 0) = -cx * Y * dxq1;
    J(2, 1) = -cx * xq1;
    J(2, 2) = -4.0 * dG * Z;
    return J;
}

Eigen::Matrix3d rhs_local_jacobian(const ModelParams& mp, const Vec3& s, double n_sites) {
    if (!(n_sites >= 1))
        throw Error(ErrorCode::DomainError, "local dissipation needs n_sites >= 1");
    Eigen::Matrix3d J = rhs_jacobian(mp, s);
    J.diagonal().array() -= 2.0 * mp.gamma_bar() / n_sites;
    return J;
}

std::pair<double, double> polar_rhs_collective(const ModelParams& mp, double phi,
                                               double cos_theta) {
    if (!(std::abs(cos_theta) < 1.0))
        throw Error(ErrorCode::DomainError, "polar form needs |cos_theta| < 1");
    const double c = cos_theta;
    const double st = std::sqrt(1.0 - c * c);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double dG = mp.delta_gamma();
    double phidot = -2.0 * mp.p * mp.omega_z * ipow(c, mp.p - 1) +
                    2.0 * mp.q * mp.omega_x * c * std::pow(st, mp.q - 2) * ipow(cp, mp.q);
    double cdot = -2.0 * mp.q * mp.omega_x * ipow(st, mp.q) * ipow(cp, mp.q - 1) * sp +
                  2.0 * dG * (1.0 - c * c);
    return {phidot, cdot};
}

Trajectory integrate(const ModelParams& mp, const Vec3& s0, double t_end,
                     const IntegrateOptions& opt) {
    check_params(mp);
    if (!(t_end > 0) || !std::isfinite(t_end))
        throw Error(ErrorCode::DomainError, "t_end must be positive and finite");
    if (!s0.allFinite()) throw Error(ErrorCode::DomainError, "initial state must be finite");
    if (opt.samples < 2) throw Error(ErrorCode::DomainError, "need at least 2 sample points");
    if (opt.mode == Mode::Local && !(opt.n_sites >= 1))
        throw Error(ErrorCode::DomainError, "local dissipation needs n_sites >= 1");

    Trajectory traj;
    traj.params = mp;
    traj.mode = opt.mode;
    traj.n_sites = opt.mode == Mode::Local ? opt.n_sites : 0.0;
    traj.t = linspace(0.0, t_end, opt.samples);
    traj.s.resize(traj.t.size());

    auto f = [&](const Vec3& s) {
        return opt.mode == Mode::Collective ? rhs_collective(mp, s)
                                            : rhs_local(mp, s, opt.n_sites);
    };
    double drift = 0.0;
    rk45_integrate(
        f, Vec3(s0), 0.0, t_end, opt.rel_tol, opt.abs_tol, traj.t,
        [&](size_t i, double, const Vec3& s) {
            traj.s[i] = s;
            if (opt.mode == Mode::Collective) drift = std::max(drift, std::abs(s.norm() - 1.0));
        });
    traj.max_norm_drift = opt.mode == Mode::Collective ? drift : 0.0;
    return traj;
}

namespace {

// orthonormal basis of the tangent plane at unit vector s
void tangent_basis(const Vec3& s, Vec3& e1, Vec3& e2) {
    Vec3 aux = std::abs(s.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    e1 = aux.cross(s).normalized();
    e2 = s.cross(e1);
}

// Newton on the sphere: solves the tangent projection of the RHS
std::optional<Vec3> newton_on_sphere(const ModelParams& mp, Vec3 s) {
    s.normalize();
    double res = rhs_collective(mp, s).norm();
    for (int it = 0; it < 80; ++it) {
        if (res < 1e-13 * std::max(1.0, mp.scale())) break;
        Vec3 e1, e2;
        tangent_basis(s, e1, e2);
        Vec3 f = rhs_collective(mp, s);
        Eigen::Matrix3d A = rhs_jacobian(mp, s);
        Eigen::Matrix2d J;
        J << e1.dot(A * e1), e1.dot(A * e2), e2.dot(A * e1), e2.dot(A * e2);
        Eigen::Vector2d g(e1.dot(f), e2.dot(f));
        double det = J.determinant();
        if (std::abs(det) < 1e-14 * std::max(1.0, mp.scale() * mp.scale())) return std::nullopt;
        Eigen::Vector2d d = -J.inverse() * g;
        double lam = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Vec3 cand = (s + lam * (d.x() * e1 + d.y() * e2)).normalized();
            double cres = rhs_collective(mp, cand).norm();
            if (cres < res) {
                s = cand;
                res = cres;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!moved) break;
    }
    if (res < 1e-10) return s;
    return std::nullopt;
}

std::optional<Vec3> newton_in_ball(const ModelParams& mp, Vec3 s, double n_sites) {
    double res = rhs_local(mp, s, n_sites).norm();
    for (int it = 0; it < 80; ++it) {
        if (res < 1e-13 * std::max(1.0, mp.scale())) break;
        Eigen::Matrix3d J = rhs_local_jacobian(mp, s, n_sites);
        Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
        if (!lu.isInvertible()) return std::nullopt;
        Vec3 d = -lu.solve(rhs_local(mp, s, n_sites));
        double lam = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Vec3 cand = s + lam * d;
            double cres = rhs_local(mp, cand, n_sites).norm();
            if (cres < res) {
                s = cand;
                res = cres;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!moved) break;
    }
    if (res < 1e-10 && s.norm() < 3.0) return s;
    return std::nullopt;
}

void push_unique(std::vector<Vec3>& pts, const Vec3& s) {
    for (const Vec3& r : pts)
        if ((r - s).norm() < 1e-6) return;
    pts.push_back(s);
}

// closed-form stationary points for the model families solved in the text
std::vector<Vec3> closed_form_points(const ModelParams& mp) {
    std::vector<Vec3> out;
    const double wz = mp.omega_z, wx = mp.omega_x, dG = mp.delta_gamma();
    const int p = mp.p, q = mp.q;

    auto add = [&](double x, double y, double z) {
        Vec3 s(x, y, z);
        if (s.allFinite()) push_unique(out, s);
    };

    if (q == 1 && p == 1) {
        if (wx == 0) {
            add(0, 0, 1);
            add(0, 0, -1);
        } else if (wz == 0) {
            if (std::abs(dG) <= wx) {
                double y = dG / wx;
                double x = std::sqrt(std::max(0.0, 1.0 - y * y));
                add(x, y, 0);
                add(-x, y, 0);
            }
            if (dG != 0 && std::abs(dG) >= wx) {
                double y = wx / dG;
                double z = std::sqrt(std::max(0.0, 1.0 - y * y));
                add(0, y, z);
                add(0, y, -z);
            }
        } else {
            // dG^2 u^2 + (wx^2 + wz^2 - dG^2) u - wz^2 = 0, u = Z^2
            double B = wx * wx + wz * wz - dG * dG;
            double u;
            if (dG == 0) {
                u = wz * wz / (wx * wx + wz * wz);
            } else {
                u = (-B + std::sqrt(B * B + 4.0 * dG * dG * wz * wz)) / (2.0 * dG * dG);
            }
            if (u > 0 && u <= 1.0) {
                for (double sgn : {1.0, -1.0}) {
                    double z = sgn * std::sqrt(u);
                    add(wz * (1.0 - u) / (wx * z), dG * (1.0 - u) / wx, z);
                }
            }
        }
    }

    if (q == 1 && p >= 2) {
        // paramagnetic pair, independent of p
        if (wx > 0 && std::abs(dG) <= wx) {
            double y = dG / wx;
            double x = std::sqrt(std::max(0.0, 1.0 - y * y));
            add(x, y, 0);
            add(-x, y, 0);
        }
    }
    if (q == 1 && p == 2) {
        double den = 4.0 * wz * wz + dG * dG;
        if (den > 0) {
            double z2 = 1.0 - wx * wx / den;
            if (z2 >= 0) {
                double z = std::sqrt(z2);
                add(2.0 * wx * wz / den, dG * wx / den, z);
                add(2.0 * wx * wz / den, dG * wx / den, -z);
            }
        }
    }

    if (q == 2 && p == 1) {
        add(0, 0, 1);
        add(0, 0, -1);
        if (wx > 0 && wz > 0) {
            double z0;
            bool ok = false;
            if (dG == 0) {
                z0 = wz / (2.0 * wx);
                ok = z0 <= 1.0;
            } else {
                double disc = wx * wx - dG * dG;
                if (disc >= 0) {
                    z0 = wz * (wx - std::sqrt(disc)) / (dG * dG);
                    ok = z0 > 0 && z0 < 1.0;
                }
            }
            if (ok) {
                double x2 = wz * (1.0 - z0 * z0) / (2.0 * wx * z0);
                if (x2 >= 0 && x2 <= 1.0) {
                    double x = std::sqrt(x2);
                    add(x, dG * z0 * x / wz, z0);
                    add(-x, -dG * z0 * x / wz, z0);
                }
            }
        } else if (wx > 0 && wz == 0 && dG != 0) {
            double k = dG / (2.0 * wx);
            if (std::abs(k) <= 0.5) {
                double disc = std::sqrt(std::max(0.0, 1.0 - 4.0 * k * k));
                for (double sgn : {1.0, -1.0}) {
                    double x2 = 0.5 * (1.0 + sgn * disc);
                    if (x2 > 0) {
                        double x = std::sqrt(x2);
                        add(x, k / x, 0);
                        add(-x, -k / x, 0);
                    }
                }
            }
        }
    }
    return out;
}

cplx eig_pair_to_cplx(double tr, double det, int which) {
    double disc = tr * tr - 4.0 * det;
    if (disc >= 0) {
        double r = std::sqrt(disc);
        return cplx(0.5 * (tr + (which == 0 ? r : -r)), 0.0);
    }
    double im = 0.5 * std::sqrt(-disc);
    return cplx(0.5 * tr, which == 0 ? im : -im);
}

Stability classify_eigs(const std::vector<cplx>& eigs, double eps) {
    bool all_neg = true, all_pos = true, all_small = true, any_im = false;
    for (const cplx& l : eigs) {
        if (!(l.real() < -eps)) all_neg = false;
        if (!(l.real() > eps)) all_pos = false;
        if (std::abs(l.real()) > eps) all_small = false;
        if (std::abs(l.imag()) > 0) any_im = true;
    }
    if (all_neg) return Stability::Attractor;
    if (all_pos) return Stability::Repeller;
    if (all_small && any_im) return Stability::Marginal;
    return Stability::Saddle;
}

// chart coordinates (u1,u2,u3) with the pole on the chart's third axis
Vec3 to_chart(const Vec3& s, Axis ax) {
    return ax == Axis::ZPole ? s : Vec3(-s.z(), s.y(), s.x());
}

}  // namespace

FixedPoint classify(const ModelParams& mp, const Vec3& point, double eps, Mode mode,
                    double n_sites, double fd_step) {
    check_params(mp);
    Vec3 f0 = mode == Mode::Collective ? rhs_collective(mp, point)
                                       : rhs_local(mp, point, n_sites);
    if (f0.norm() > 1e-8)
        throw Error(ErrorCode::NotAFixedPoint,
                    "RHS norm " + std::to_string(f0.norm()) + " exceeds 1e-8 at the point");
    if (eps <= 0) eps = 1e-6 * std::max(mp.scale(), 1e-6);

    FixedPoint fp;
    fp.s = point;
    fp.residual = f0.norm();

    if (mode == Mode::Local) {
        Eigen::Matrix3d J = rhs_local_jacobian(mp, point, n_sites);
        Eigen::EigenSolver<Eigen::Matrix3d> es(J);
        std::vector<cplx> eigs;
        for (int i = 0; i < 3; ++i) {
            fp.exponents[static_cast<size_t>(i)] = es.eigenvalues()(i);
            eigs.push_back(es.eigenvalues()(i));
        }
        fp.cls = classify_eigs(eigs, eps);
        return fp;
    }

    // chart whose pole is well away from the point
    Axis ax = std::abs(point.z()) <= 0.9 ? Axis::ZPole : Axis::XPole;
    Vec3 pc = to_chart(point.normalized(), ax);
    double c0 = std::clamp(pc.z(), -1.0, 1.0);
    double phi0 = std::atan2(pc.y(), pc.x());

    auto polar_vel = [&](double phi, double c) -> Eigen::Vector2d {
        Vec3 s = bloch_from_angles(std::acos(std::clamp(c, -1.0, 1.0)), phi, ax);
        Vec3 ds = rhs_collective(mp, s);
        Vec3 sc = to_chart(s, ax);
        Vec3 dc = to_chart(ds, ax);
        double r2 = sc.x() * sc.x() + sc.y() * sc.y();
        return {(sc.x() * dc.y() - sc.y() * dc.x()) / r2, dc.z()};
    };

    if (!(fd_step > 0) || fd_step > 1e-2)
        throw Error(ErrorCode::DomainError, "fd_step must be in (0, 1e-2]");
    const double h = fd_step;
    Eigen::Matrix2d J;
    J.col(0) = (polar_vel(phi0 + h, c0) - polar_vel(phi0 - h, c0)) / (2 * h);
    J.col(1) = (polar_vel(phi0, c0 + h) - polar_vel(phi0, c0 - h)) / (2 * h);

    cplx l1 = eig_pair_to_cplx(J.trace(), J.determinant(), 0);
    cplx l2 = eig_pair_to_cplx(J.trace(), J.determinant(), 1);
    fp.exponents = {l1, l2, cplx(-4.0 * mp.delta_gamma() * point.z(), 0.0)};
    fp.cls = classify_eigs({l1, l2}, eps);
    return fp;
}

std::vector<FixedPoint> find_fixed_points(const ModelParams& mp, Mode mode, double n_sites) {
    check_params(mp);
    if (mp.scale() == 0)
        throw Error(ErrorCode::DomainError,
                    "all frequencies vanish: every state is stationary");

    std::vector<Vec3> roots;
    if (mode == Mode::Collective) {
        for (const Vec3& s : closed_form_points(mp)) {
            if (auto r = newton_on_sphere(mp, s)) push_unique(roots, *r);
            // closed forms are exact; keep them even if polishing stalls
            else if (rhs_collective(mp, s).norm() < 1e-10) push_unique(roots, s);
        }
    }

    const int nphi = 24, nct = 12;
    for (int i = 0; i < nphi; ++i) {
        double phi = 2.0 * M_PI * (i + 0.5) / nphi - M_PI;
        for (int j = 0; j < nct; ++j) {
            double ct = -1.0 + 2.0 * (j + 0.5) / nct;
            Vec3 seed = bloch_from_angles(std::acos(ct), phi);
            if (mode == Mode::Collective) {
                if (auto r = newton_on_sphere(mp, seed)) push_unique(roots, *r);
            } else {
                for (double rad : {1.0, 0.7, 0.35}) {
                    if (auto r = newton_in_ball(mp, rad * seed, n_sites)) push_unique(roots, *r);
                }
            }
        }
    }

    std::sort(roots.begin(), roots.end(), [](const Vec3& a, const Vec3& b) {
        if (std::abs(a.z() - b.z()) > 1e-9) return a.z() > b.z();
        if (std::abs(a.x() - b.x()) > 1e-9) return a.x() > b.x();
        return a.y() > b.y();
    });

    std::vector<FixedPoint> out;
    out.reserve(roots.size());
    for (const Vec3& r : roots) out.push_back(classify(mp, r, -1, mode, n_sites));
    return out;
}

std::vector<EnvelopePoint> envelope(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "t and v sizes differ");
    const size_t n = t.size();
    std::vector<EnvelopePoint> out;
    if (n < 3) return out;

    struct Extremum {
        double t, v;
    };
    std::vector<Extremum> maxima, minima;
    auto refine = [&](size_t i) -> std::optional<Extremum> {
        // parabola through (t[i-1..i+1], v[i-1..i+1])
        double t0 = t[i - 1], t1 = t[i], t2 = t[i + 1];
        double d01 = (v[i] - v[i - 1]) / (t1 - t0);
        double d12 = (v[i + 1] - v[i]) / (t2 - t1);
        double a2 = (d12 - d01) / (t2 - t0);  // half the 2nd derivative
        if (a2 == 0) return std::nullopt;
        // vertex of p(x) = v0 + d01 (x - t0) + a2 (x - t0)(x - t1)
        double tv = 0.5 * (t0 + t1 - d01 / a2);
        if (tv < t0 || tv > t2) tv = t1;
        double vv = v[i - 1] + d01 * (tv - t0) + a2 * (tv - t0) * (tv - t1);
        return Extremum{tv, vv};
    };
    for (size_t i = 1; i + 1 < n; ++i) {
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
            if (auto e = refine(i)) maxima.push_back(*e);
        } else if (v[i] < v[i - 1] && v[i] <= v[i + 1]) {
            if (auto e = refine(i)) minima.push_back(*e);
        }
    }
    if (maxima.empty() || minima.empty()) return out;

    // raw swing amplitude per maximum, midline solved from the neighbours
    struct Peak {
        double t;
        double a_raw;
        int edge;  // -1 missing left min, +1 missing right min, 0 interior
    };
    std::vector<Peak> peaks;
    for (const Extremum& mx : maxima) {
        const Extremum* left = nullptr;
        const Extremum* right = nullptr;
        for (const Extremum& mn : minima) {
            if (mn.t < mx.t) left = &mn;
            if (mn.t > mx.t) {
                right = &mn;
                break;
            }
        }
        if (left && right) {
            double den = 2.0 * mx.v - left->v - right->v;
            if (std::abs(den) < 1e-300) continue;
            double c = (mx.v * mx.v - left->v * right->v) / den;
            double a = mx.v - c;
            if (a > 0) peaks.push_back({mx.t, a, 0});
        } else if (left || right) {
            const Extremum* mn = left ? left : right;
            double a = 0.5 * (mx.v - mn->v);
            if (a > 0) peaks.push_back({mx.t, a, left ? +1 : -1});
        }
    }
    if (peaks.empty()) return out;

    // per-period log drift, estimated from interior peaks only
    double period = 0;
    if (maxima.size() >= 2) {
        std::vector<double> gaps;
        for (size_t i = 1; i < maxima.size(); ++i) gaps.push_back(maxima[i].t - maxima[i - 1].t);
        std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
        period = gaps[gaps.size() / 2];
    }
    std::vector<double> drift(peaks.size(), 0.0);
    std::vector<size_t> interior;
    for (size_t i = 0; i < peaks.size(); ++i)
        if (peaks[i].edge == 0) interior.push_back(i);
    if (interior.size() >= 2 && period > 0) {
        for (size_t k = 0; k < interior.size(); ++k) {
            size_t lo = interior[k > 0 ? k - 1 : k];
            size_t hi = interior[k + 1 < interior.size() ? k + 1 : k];
            if (hi == lo) continue;
            drift[interior[k]] = (std::log(peaks[hi].a_raw) - std::log(peaks[lo].a_raw)) /
                                 (peaks[hi].t - peaks[lo].t) * period;
        }
        for (size_t i = 0; i < peaks.size(); ++i) {
            if (peaks[i].edge == 0) continue;
            size_t nearest = interior.front();
            for (size_t j : interior)
                if (std::abs(peaks[j].t - peaks[i].t) < std::abs(peaks[nearest].t - peaks[i].t))
                    nearest = j;
            drift[i] = drift[nearest];
        }
    }

    for (size_t i = 0; i < peaks.size(); ++i) {
        double d = drift[i];
        double a = peaks[i].a_raw * std::sqrt(1.0 + (d / (2.0 * M_PI)) * (d / (2.0 * M_PI)));
        if (peaks[i].edge == +1) a *= 2.0 / (1.0 + std::exp(-0.5 * d));
        if (peaks[i].edge == -1) a *= 2.0 / (1.0 + std::exp(+0.5 * d));
        if (a > 0) out.push_back({peaks[i].t, a});
    }
    std::sort(out.begin(), out.end(),
              [](const EnvelopePoint& a, const EnvelopePoint& b) { return a.t < b.t; });
    return out;
}

const char* orbit_verdict_name(OrbitVerdict v) {
    switch (v) {
        case OrbitVerdict::Closed: return "CLOSED";
        case OrbitVerdict::SpiralIn: return "SPIRAL_IN";
        case OrbitVerdict::SpiralOut: return "SPIRAL_OUT";
        case OrbitVerdict::Relaxed: return "RELAXED";
    }
    return "?";
}

OrbitVerdict detect_orbit(const Trajectory& traj, int window_periods, Axis axis) {
    if (window_periods < 2)
        throw Error(ErrorCode::DomainError, "window_periods must be >= 2");
    std::vector<double> v(traj.s.size());
    for (size_t i = 0; i < traj.s.size(); ++i)
        v[i] = axis == Axis::ZPole ? traj.s[i].z() : traj.s[i].x();

    auto env = envelope(traj.t, v);
    if (env.size() < 3)
        throw Error(ErrorCode::TooShort, "fewer than 3 envelope peaks in the trajectory");

    double period = env[1].t - env[0].t;
    double span = traj.t.back() - traj.t.front();
    if (!(period > 0) || span < window_periods * period)
        throw Error(ErrorCode::TooShort, "trajectory spans fewer periods than the window");

    double w_start = traj.t.back() - window_periods * period;
    std::vector<EnvelopePoint> win;
    for (const auto& e : env)
        if (e.t >= w_start) win.push_back(e);

    if (!win.empty()) {
        bool all_tiny = true;
        for (const auto& e : win) all_tiny = all_tiny && e.amplitude < 1e-6;
        if (all_tiny) return OrbitVerdict::Relaxed;
    }
    if (win.size() < 2) {
        if (env.back().amplitude < 1e-6) return OrbitVerdict::Relaxed;
        throw Error(ErrorCode::TooShort, "fewer than 2 envelope peaks inside the drift window");
    }

    // least-squares slope of log amplitude vs time, in periods
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (const auto& e : win) {
        double x = e.t / period;
        double y = std::log(e.amplitude);
        st += x;
        sl += y;
        stt += x * x;
        stl += x * y;
    }
    double m = static_cast<double>(win.size());
    double denom = m * stt - st * st;
    double d = denom != 0 ? (m * stl - st * sl) / denom : 0.0;

    if (d < -1e-3) return OrbitVerdict::SpiralIn;
    if (d > 1e-3) return OrbitVerdict::SpiralOut;
    return OrbitVerdict::Closed;
}

PortraitResult phase_portrait(const ModelParams& mp, int grid_phi, int grid_ct, double t_end,
                              Axis axis, const IntegrateOptions& opt) {
    if (grid_phi < 1 || grid_ct < 1)
        throw Error(ErrorCode::DomainError, "portrait grid must be at least 1x1");
    PortraitResult pr;
    pr.fixed_points = find_fixed_points(mp, opt.mode, opt.n_sites);
    for (int i = 0; i < grid_phi; ++i) {
        double phi = 2.0 * M_PI * (i + 0.5) / grid_phi - M_PI;
        for (int j = 0; j < grid_ct; ++j) {
            double ct = -1.0 + 2.0 * (j + 0.5) / grid_ct;
            Vec3 s0 = bloch_from_angles(std::acos(ct), phi, axis);
            pr.trajectories.push_back(integrate(mp, s0, t_end, opt));
        }
    }
    return pr;
}

}  // namespace meanfield
}  // namespace btc
