#pragma once

#include "btc/model.hpp"

namespace btc {
namespace dicke {

using Mat = Eigen::MatrixXcd;
using Cvec = Eigen::VectorXcd;

// Collective spin operators in the maximal (S = N/2) sector, normalized so
// that J_alpha = (2/N) S_alpha. Basis states |S, m> are ordered by
// decreasing m, index i <-> m = N/2 - i, so jz = diag(1, 1-2/N, ..., -1).
// jp/jm are the combinations jx +- i jy.
struct Operators {
    int n{0};
    Mat jx, jy, jz, jp, jm;
};

// SizeLimit unless 1 <= n <= 4096.
Operators build_operators(int n);

// H = -n (wz jz^p + wx jx^q)
Mat build_hamiltonian(const Operators& ops, const ModelParams& mp);

// drho = -i[H, rho] + n*gamma_up D[jp](rho) + n*gamma_down D[jm](rho)
// with D[A](rho) = A rho A^dag - (A^dag A rho + rho A^dag A)/2.
Mat lindblad_rhs(const Operators& ops, const ModelParams& mp, const Mat& rho);

// Column-stacking superoperator matrix of lindblad_rhs, dimension (n+1)^2.
// SizeLimit for n > 40.
Mat build_liouvillian(const Operators& ops, const ModelParams& mp);

// Spin coherent state along (theta, phi) in the ZPole convention:
// amplitudes sqrt(C(n,k)) cos(theta/2)^k sin(theta/2)^(n-k) e^{-i k phi}
// at the basis index holding m = k - n/2.
Cvec coherent_state(int n, double theta, double phi);

struct EvolveOptions {
    double rel_tol{1e-8};
    double abs_tol{1e-10};
    int samples{400};
};

struct ExpectationTrace {
    ModelParams params;
    int n{0};
    std::vector<double> t;
    std::vector<double> jx, jy, jz, purity;
    std::vector<double> trace_err;   // |tr rho - 1| at samples
    std::vector<double> min_eigval;  // smallest eigenvalue of rho at samples
    bool positivity_breach{false};   // any min_eigval < -1e-6
    Mat rho_final;

    Vec3 bloch(size_t i) const { return {jx[i], jy[i], jz[i]}; }
};

// Integrates the master equation with the adaptive RK pair, recording
// expectation values at the requested number of sample times. SizeLimit for
// n > 300.
ExpectationTrace evolve(const Operators& ops, const ModelParams& mp, const Mat& rho0,
                        double t_end, const EvolveOptions& opt = {});

struct SpectrumResult {
    std::vector<cplx> eigenvalues;  // k of them, descending real part
    double gap{0};                  // |Re lambda_1|
    Mat steady_state;               // null-space state; empty if none found
    bool degenerate_zero{false};    // more than one eigenvalue within 1e-8*|L|
    double liouvillian_norm{0};     // Frobenius norm used for the thresholds
};

// Dense eigendecomposition of the Liouvillian; k largest-real-part
// eigenvalues. SizeLimit if k exceeds the dimension.
SpectrumResult spectrum(const Mat& liouvillian, int k);

// Steady state via the SVD null vector of the Liouvillian, Hermitized and
// trace-normalized.
Mat steady_state(const Mat& liouvillian);

// Collective pi-rotation about x (matrix exponential of -i pi S_x), the
// symmetry that swaps the two dissipation channels.
Mat pi_rotation_x(const Operators& ops);

}  // namespace dicke
}  // namespace btc
