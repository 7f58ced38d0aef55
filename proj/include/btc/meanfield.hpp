#pragma once

#include <optional>

#include "btc/model.hpp"

namespace btc {
namespace meanfield {

// integer power with the polynomial convention 0^0 = 1, so the p,q = 1
// special cases of the equations of motion need no branching
double ipow(double x, int n);

// Semiclassical flow of the collective dissipation model:
//   dX = 2 p wz Z^{p-1} Y - 2 dG Z X
//   dY = 2 q wx Z X^{q-1} - 2 p wz X Z^{p-1} - 2 dG Z Y
//   dZ = -2 q wx Y X^{q-1} + 2 dG (1 - Z^2)
// with dG = gamma_up - gamma_down. Conserves |s| on the unit sphere.
Vec3 rhs_collective(const ModelParams& mp, const Vec3& s);

// Same model with per-site dissipation under the homogeneous ansatz; the
// coherent part is unchanged and the 1/n_sites terms break norm conservation:
//   dX = [collective dX] - (2 gbar / n_sites) X
//   dY = [collective dY] - (2 gbar / n_sites) Y
//   dZ = -2 q wx Y X^{q-1} + 2 dG (1 - Z^2 + 1/n_sites) - (2 gbar / n_sites) Z
// Recovers rhs_collective as n_sites -> infinity.
Vec3 rhs_local(const ModelParams& mp, const Vec3& s, double n_sites);

Eigen::Matrix3d rhs_jacobian(const ModelParams& mp, const Vec3& s);
Eigen::Matrix3d rhs_local_jacobian(const ModelParams& mp, const Vec3& s, double n_sites);

// (phi_dot, d cos(theta)/dt) of the collective flow in the ZPole chart,
// derived from the Cartesian RHS by the chain rule. |cos_theta| must be < 1.
std::pair<double, double> polar_rhs_collective(const ModelParams& mp, double phi,
                                               double cos_theta);

struct IntegrateOptions {
    double rel_tol{1e-9};
    double abs_tol{1e-11};
    int samples{1000};
    Mode mode{Mode::Collective};
    double n_sites{0};  // required when mode == Local
};

Trajectory integrate(const ModelParams& mp, const Vec3& s0, double t_end,
                     const IntegrateOptions& opt = {});

// All stationary points of the flow: closed forms where the model admits them
// ((p,q) in {(1,1),(2,1),(1,2)} plus the generic paramagnetic family for
// q = 1, p >= 2), merged with damped-Newton roots seeded on a 24 x 12
// (phi, cos theta) grid. Collective roots live on the unit sphere; Local ones
// are searched in the full ball. Every returned point is classified and has
// |RHS| < 1e-10.
std::vector<FixedPoint> find_fixed_points(const ModelParams& mp, Mode mode = Mode::Collective,
                                          double n_sites = 0);

// Linear stability at a stationary point. The Jacobian is taken in the
// sphere's tangent plane, by central differences with step fd_step in a
// (phi, cos theta) chart whose pole is far from the point. eps <= 0 selects
// the default threshold 1e-6 * max(wz, wx, |dG|). Throws NotAFixedPoint when
// |RHS| > 1e-8 at the point.
FixedPoint classify(const ModelParams& mp, const Vec3& point, double eps = -1,
                    Mode mode = Mode::Collective, double n_sites = 0,
                    double fd_step = 1e-6);

struct EnvelopePoint {
    double t;
    double amplitude;
};

// Oscillation envelope of a sampled series: one point per local maximum of
// the centred signal, peak position and value refined by 3-point quadratic
// interpolation. The local midline is solved from each maximum and its two
// neighbouring minima (exact for a constant offset plus exponentially
// enveloped oscillation), and amplitudes carry the standard first-order
// correction for the bias an exponential envelope puts on raw extrema.
// Only strictly positive amplitudes are returned.
std::vector<EnvelopePoint> envelope(const std::vector<double>& t, const std::vector<double>& v);

enum class OrbitVerdict { Closed, SpiralIn, SpiralOut, Relaxed };
const char* orbit_verdict_name(OrbitVerdict v);

// Periodicity check on the polar-axis component (Z for ZPole, X for XPole):
// least-squares relative amplitude drift per period over the trailing
// window_periods oscillation periods. |drift| <= 1e-3 reads Closed; decaying
// below 1e-6 absolute amplitude reads Relaxed. Throws TooShort if fewer than
// 3 envelope peaks exist or the trajectory spans fewer than window_periods
// periods (estimated from the first two peaks).
OrbitVerdict detect_orbit(const Trajectory& traj, int window_periods = 20,
                          Axis axis = Axis::ZPole);

struct PortraitResult {
    std::vector<Trajectory> trajectories;
    std::vector<FixedPoint> fixed_points;
};

// Integrates a (phi, cos theta) seed grid and classifies all fixed points.
PortraitResult phase_portrait(const ModelParams& mp, int grid_phi, int grid_ct, double t_end,
                              Axis axis = Axis::ZPole, const IntegrateOptions& opt = {});

}  // namespace meanfield
}  // namespace btc
