#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace btc {

using Vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;

enum class ErrorCode {
    MissingKey,
    DomainError,
    StepSizeUnderflow,
    NotAFixedPoint,
    TooShort,
    InsufficientRange,
    InsufficientData,
    NoPeak,
    SizeLimit,
    DimensionMismatch,
    SolverFailure,
    EmptyDataset,
    ParseError,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what) : std::runtime_error(what), code_(c) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode c);

// Collective-spin model: H = -N (w_z Jz^p + w_x Jx^q) with raising/lowering
// dissipation at rates N*gamma_up, N*gamma_down.
struct ModelParams {
    int p{1};
    int q{1};
    double omega_z{1.0};
    double omega_x{0.0};
    double gamma_up{0.0};
    double gamma_down{0.0};

    double delta_gamma() const { return gamma_up - gamma_down; }
    double gamma_bar() const { return gamma_up + gamma_down; }

    // largest frequency scale, used for relative tolerances
    double scale() const;
};

// Throws Error(DomainError) unless p,q >= 1 and both rates >= 0 and all
// magnitudes are finite.
void check_params(const ModelParams& mp);

// Builds ModelParams from raw text key-value pairs (keys: p, q, omega_z,
// omega_x, gamma_up, gamma_down; omega_z defaults to 1, rates to 0).
// Throws Error(MissingKey) / Error(DomainError).
ModelParams validate_params(const std::map<std::string, std::string>& raw,
                            const std::string& prefix = "");

// Chart used for polar coordinates on the Bloch sphere. ZPole is the usual
// (phi, cos theta) chart about +z. XPole is the same chart rotated so the
// pole sits on +x: s = (cos th, sin th sin ph, -sin th cos ph).
enum class Axis { ZPole, XPole };

enum class Mode { Collective, Local };

struct PolarState {
    double phi{0};
    double cos_theta{1};
    Axis axis{Axis::ZPole};
    bool pole_singular{false};  // phi undefined, reported as 0
};

Vec3 bloch_from_angles(double theta, double phi, Axis axis = Axis::ZPole);
PolarState angles_from_bloch(const Vec3& s, Axis axis = Axis::ZPole);

struct Trajectory {
    ModelParams params;
    Mode mode{Mode::Collective};
    double n_sites{0};  // only meaningful in Local mode
    std::vector<double> t;
    std::vector<Vec3> s;
    double max_norm_drift{0};  // max |norm(s)-1| seen at sample points
};

enum class Stability { Attractor, Repeller, Marginal, Saddle };

const char* stability_name(Stability s);

struct FixedPoint {
    Vec3 s{0, 0, 1};
    // Lyapunov exponents: two from the sphere-tangent plane (these decide
    // the class) plus the radial one, -4*dGamma*Z.
    std::array<cplx, 3> exponents{};
    Stability cls{Stability::Marginal};
    double residual{0};
};

}  // namespace btc
