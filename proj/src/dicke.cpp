#include "btc/dicke.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "btc/rk45.hpp"

namespace btc {
namespace dicke {

Operators build_operators(int n) {
    if (n < 1 || n > 4096)
        throw Error(ErrorCode::SizeLimit, "operator build supports 1 <= n <= 4096");
    const int d = n + 1;
    const double S = n / 2.0;
    Operators ops;
    ops.n = n;
    ops.jz = Mat::Zero(d, d);
    ops.jp = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        double m = S - i;
        ops.jz(i, i) = 2.0 * m / n;
        if (i > 0) {
            // raising m -> m+1 lands one index earlier
            double mlow = S - i;
            ops.jp(i - 1, i) = (2.0 / n) * std::sqrt(S * (S + 1) - mlow * (mlow + 1));
        }
    }
    ops.jm = ops.jp.adjoint();
    ops.jx = 0.5 * (ops.jp + ops.jm);
    ops.jy = cplx(0, -0.5) * (ops.jp - ops.jm);
    return ops;
}

Mat build_hamiltonian(const Operators& ops, const ModelParams& mp) {
    check_params(mp);
    const int d = ops.n + 1;
    // jz powers stay diagonal; jx powers need the full product
    Mat hz = Mat::Identity(d, d);
    for (int i = 0; i < mp.p; ++i) hz = hz * ops.jz;
    Mat hx = Mat::Identity(d, d);
    for (int i = 0; i < mp.q; ++i) hx = hx * ops.jx;
    return -static_cast<double>(ops.n) * (mp.omega_z * hz + mp.omega_x * hx);
}

Mat lindblad_rhs(const Operators& ops, const ModelParams& mp, const Mat& rho) {
    Mat H = build_hamiltonian(ops, mp);
    Mat out = cplx(0, -1) * (H * rho - rho * H);
    auto dissipator = [&](const Mat& A, double g) {
        if (g == 0) return;
        Mat AdA = A.adjoint() * A;
        out += g * (A * rho * A.adjoint() - 0.5 * (AdA * rho + rho * AdA));
    };
    dissipator(ops.jp, ops.n * mp.gamma_up);
    dissipator(ops.jm, ops.n * mp.gamma_down);
    return out;
}

namespace {

// column-stacking identities: vec(A rho B) = (B^T kron A) vec(rho)
Mat kron(const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace

Mat build_liouvillian(const Operators& ops, const ModelParams& mp) {
    if (ops.n > 40)
        throw Error(ErrorCode::SizeLimit, "dense superoperator limited to n <= 40");
    const int d = ops.n + 1;
    Mat I = Mat::Identity(d, d);
    Mat H = build_hamiltonian(ops, mp);
    Mat L = cplx(0, -1) * (kron(I, H) - kron(H.transpose(), I));
    auto dissipator = [&](const Mat& A, double g) {
        if (g == 0) return;
        Mat AdA = A.adjoint() * A;
        L += g * (kron(A.conjugate(), A) - 0.5 * kron(I, AdA) -
                  0.5 * kron(AdA.transpose(), I));
    };
    dissipator(ops.jp, ops.n * mp.gamma_up);
    dissipator(ops.jm, ops.n * mp.gamma_down);
    return L;
}

Cvec coherent_state(int n, double theta, double phi) {
    if (n < 1 || n > 4096)
        throw Error(ErrorCode::SizeLimit, "coherent state supports 1 <= n <= 4096");
    const int d = n + 1;
    Cvec c(d);
    double cs = std::cos(theta / 2), sn = std::sin(theta / 2);
    double lc = std::log(std::abs(cs)), ls = std::log(std::abs(sn));
    for (int i = 0; i < d; ++i) {
        int k = n - i;  // number of up spins; m = k - n/2 lives at index i
        if ((k > 0 && cs == 0) || (k < n && sn == 0)) {
            c(i) = 0;
            continue;
        }
        double lbin = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        double mag = 0.5 * lbin + (k > 0 ? k * lc : 0.0) + (k < n ? (n - k) * ls : 0.0);
        double sign = (k % 2 == 1 && cs < 0 ? -1.0 : 1.0) *
                      ((n - k) % 2 == 1 && sn < 0 ? -1.0 : 1.0);
        c(i) = sign * std::exp(mag) * std::exp(cplx(0, -phi * k));
    }
    c.normalize();
    return c;
}

namespace {

// O(d^2) master-equation RHS. The Hamiltonian splits into a diagonal part plus
// a band of width q, and both jump operators are single off-diagonals with
// diagonal A^dag A, so no dense matmul is needed.
struct FastRhs {
    int d{0}, bw{0};
    Mat coef;               // -i(hd_i - hd_j) - avec_i - avec_j, constant
    Eigen::MatrixXd hband;  // H minus its diagonal (H is real symmetric)
    Eigen::VectorXd w;      // jp(k, k+1), k = 0..d-2
    Cvec wc;                // same, complex-typed for the scaled-copy products
    double gup{0}, gdn{0};

    FastRhs(const Operators& ops, const ModelParams& mp) {
        d = ops.n + 1;
        Mat H = build_hamiltonian(ops, mp);
        Eigen::VectorXd hdiag = H.diagonal().real();
        hband = H.real();
        hband.diagonal().setZero();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (hband(i, j) != 0) bw = std::max(bw, std::abs(i - j));
        w.resize(d - 1);
        for (int k = 0; k + 1 < d; ++k) w(k) = ops.jp(k, k + 1).real();
        wc = w.cast<cplx>();
        gup = ops.n * mp.gamma_up;
        gdn = ops.n * mp.gamma_down;
        Eigen::VectorXd avec = Eigen::VectorXd::Zero(d);
        for (int j = 1; j < d; ++j) avec(j) += 0.5 * gup * w(j - 1) * w(j - 1);
        for (int j = 0; j + 1 < d; ++j) avec(j) += 0.5 * gdn * w(j) * w(j);
        coef.resize(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i)
                coef(i, j) = cplx(-avec(i) - avec(j), -(hdiag(i) - hdiag(j)));
    }

    Mat operator()(const Mat& rho) const {
        // diagonal Hamiltonian part of the commutator merged with the
        // anticommutator of the diagonal A^dag A pieces
        Mat out = coef.cwiseProduct(rho);
        const cplx mi(0, -1);
        // banded part of -i (H rho - rho H)
        for (int i = 0; i < d; ++i)
            for (int k = std::max(0, i - bw); k <= std::min(d - 1, i + bw); ++k)
                if (hband(i, k) != 0) out.row(i) += (mi * hband(i, k)) * rho.row(k);
        for (int j = 0; j < d; ++j)
            for (int k = std::max(0, j - bw); k <= std::min(d - 1, j + bw); ++k)
                if (hband(k, j) != 0) out.col(j) -= (mi * hband(k, j)) * rho.col(k);
        // jump terms: A rho A^dag with single-off-diagonal A is a shifted,
        // weighted copy
        if (gup > 0)
            out.topLeftCorner(d - 1, d - 1) +=
                gup * (wc.asDiagonal() * rho.bottomRightCorner(d - 1, d - 1) * wc.asDiagonal());
        if (gdn > 0)
            out.bottomRightCorner(d - 1, d - 1) +=
                gdn * (wc.asDiagonal() * rho.topLeftCorner(d - 1, d - 1) * wc.asDiagonal());
        return out;
    }
};

}  // namespace

ExpectationTrace evolve(const Operators& ops, const ModelParams& mp, const Mat& rho0,
                        double t_end, const EvolveOptions& opt) {
    if (ops.n > 300)
        throw Error(ErrorCode::SizeLimit, "density-matrix evolution limited to n <= 300");
    const int d = ops.n + 1;
    if (rho0.rows() != d || rho0.cols() != d)
        throw Error(ErrorCode::DimensionMismatch, "initial state dimension mismatch");
    if (!(t_end > 0) || !std::isfinite(t_end))
        throw Error(ErrorCode::DomainError, "t_end must be positive and finite");
    if (opt.samples < 2) throw Error(ErrorCode::DomainError, "need at least 2 sample points");
    if (std::abs(rho0.trace().real() - 1.0) > 1e-9 || std::abs(rho0.trace().imag()) > 1e-9)
        throw Error(ErrorCode::DomainError, "initial state must have unit trace");

    ExpectationTrace tr;
    tr.params = mp;
    tr.n = ops.n;
    tr.t = linspace(0.0, t_end, opt.samples);
    const size_t m = tr.t.size();
    tr.jx.resize(m);
    tr.jy.resize(m);
    tr.jz.resize(m);
    tr.purity.resize(m);
    tr.trace_err.resize(m);
    tr.min_eigval.resize(m);

    Eigen::SelfAdjointEigenSolver<Mat> es;
    auto record = [&](size_t i, double, const Mat& rho) {
        Mat herm = 0.5 * (rho + rho.adjoint());
        tr.jx[i] = (ops.jx * herm).trace().real();
        tr.jy[i] = (ops.jy * herm).trace().real();
        tr.jz[i] = (ops.jz * herm).trace().real();
        tr.purity[i] = (herm * herm).trace().real();
        tr.trace_err[i] = std::abs(rho.trace() - cplx(1, 0));
        es.compute(herm, Eigen::EigenvaluesOnly);
        tr.min_eigval[i] = es.eigenvalues().minCoeff();
        if (tr.min_eigval[i] < -1e-6) tr.positivity_breach = true;
        if (i + 1 == m) tr.rho_final = herm;
    };
    FastRhs rhs(ops, mp);
    rk45_integrate(rhs, Mat(rho0), 0.0, t_end, opt.rel_tol, opt.abs_tol, tr.t, record);
    return tr;
}

SpectrumResult spectrum(const Mat& liouvillian, int k) {
    if (liouvillian.rows() != liouvillian.cols())
        throw Error(ErrorCode::DimensionMismatch, "superoperator must be square");
    const Eigen::Index dim = liouvillian.rows();
    if (k < 1 || k > dim)
        throw Error(ErrorCode::SizeLimit, "requested more eigenvalues than the dimension");

    // eigenvalues only: skipping the Schur basis and the eigenvector
    // back-substitution is a large saving at Liouvillian dimensions
    Eigen::ComplexSchur<Mat> schur(liouvillian, false);
    if (schur.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "dense eigendecomposition failed");
    Cvec evals = schur.matrixT().diagonal();

    std::vector<Eigen::Index> order(static_cast<size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        double ra = evals(a).real(), rb = evals(b).real();
        if (ra != rb) return ra > rb;
        return std::abs(evals(a).imag()) < std::abs(evals(b).imag());
    });

    SpectrumResult sr;
    sr.liouvillian_norm = liouvillian.norm();
    const double zero_tol = 1e-8 * std::max(sr.liouvillian_norm, 1.0);
    for (int i = 0; i < k; ++i)
        sr.eigenvalues.push_back(evals(order[static_cast<size_t>(i)]));

    int n_zero = 0;
    for (Eigen::Index i = 0; i < dim; ++i)
        if (std::abs(evals(i)) < zero_tol) ++n_zero;
    sr.degenerate_zero = n_zero > 1;

    // gap: first eigenvalue beyond the zero cluster
    for (const cplx& l : sr.eigenvalues) {
        if (std::abs(l) < zero_tol) continue;
        sr.gap = std::abs(l.real());
        break;
    }

    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (static_cast<Eigen::Index>(d) * d == dim && n_zero >= 1) {
        try {
            sr.steady_state = steady_state(liouvillian);
        } catch (const Error&) {
            // leave empty when the null space is not a usable state
        }
    }
    return sr;
}

Mat steady_state(const Mat& liouvillian) {
    if (liouvillian.rows() != liouvillian.cols())
        throw Error(ErrorCode::DimensionMismatch, "superoperator must be square");
    const Eigen::Index dim = liouvillian.rows();
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (static_cast<Eigen::Index>(d) * d != dim)
        throw Error(ErrorCode::DimensionMismatch, "superoperator dimension is not a square");

    Eigen::BDCSVD<Mat> svd(liouvillian, Eigen::ComputeThinV);
    double smin = svd.singularValues()(dim - 1);
    if (smin > 1e-6 * std::max(1.0, svd.singularValues()(0)))
        throw Error(ErrorCode::SolverFailure, "no null vector: smallest singular value " +
                                                  std::to_string(smin));
    Cvec v = svd.matrixV().col(dim - 1);
    Mat rho = Eigen::Map<const Mat>(v.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    cplx t = rho.trace();
    if (std::abs(t) < 1e-12)
        throw Error(ErrorCode::SolverFailure, "null vector is traceless, not a state");
    rho /= t;
    return rho;
}

Mat pi_rotation_x(const Operators& ops) {
    // exp(-i pi Sx) via the eigenbasis of Sx = (n/2) jx
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * ops.n * ops.jx);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "x-rotation eigenbasis failed");
    Cvec phase(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phase.size(); ++i)
        phase(i) = std::exp(cplx(0, -M_PI * es.eigenvalues()(i)));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace dicke
}  // namespace btc
