#include "petrosem/weighted.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "petrosem/matfun.hpp"

namespace petrosem {

namespace {

// Hermitian part residuals of a candidate certificate.
void fill_residuals(EKCertificate& cert, const ComplexMatrix& P) {
    int m = int(P.rows());
    ComplexMatrix I = ComplexMatrix::Identity(m, m);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eb(cert.B);
    cert.residual_min_eig = eb.eigenvalues().minCoeff() - 1.0;
    ComplexMatrix L = cert.B * P + P.adjoint() * cert.B - 2.0 * cert.omega1 * cert.B;
    ComplexMatrix Lh = 0.5 * (L + L.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> el(Lh);
    cert.residual_lyapunov = el.eigenvalues().maxCoeff();
    (void)I;
}

// integral fallback: B0 = int_0^inf e^{sA*} e^{sA} ds for Hurwitz A,
// by composite Gauss--Legendre over [0, S] with doubling in both the
// horizon and the panel count.
ComplexMatrix lyapunov_integral(const ComplexMatrix& A) {
    static const double kGLX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
    static const double kGLW[5] = {0.2369268850561891, 0.4786286704993665,
                                   0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
    int m = int(A.rows());
    double decay = -eigenvalues(A).abscissa();  // > 0 by the feasibility check
    double horizon = std::max(40.0 / decay, 1.0);

    auto quadrature = [&](int panels) {
        ComplexMatrix acc = ComplexMatrix::Zero(m, m);
        double h = horizon / panels;
        for (int p = 0; p < panels; ++p) {
            double mid = (p + 0.5) * h;
            for (int q = 0; q < 5; ++q) {
                double s = mid + 0.5 * h * kGLX[q];
                ComplexMatrix E = exp_reference(A, s).dense();
                acc += (0.5 * h * kGLW[q]) * (E.adjoint() * E);
            }
        }
        return acc;
    };
    ComplexMatrix prev = quadrature(64);
    for (int panels = 128; panels <= 1024; panels *= 2) {
        ComplexMatrix next = quadrature(panels);
        if ((next - prev).norm() <= 1e-12 * std::max(next.norm(), 1e-300))
            return next;
        prev = std::move(next);
    }
    return prev;
}

}  // namespace

EKCertificate ek_certificate(const OperatorSpec& op, const RealVector& xi,
                             double omega1) {
    ComplexMatrix P = eval_symbol(op, xi);
    int m = int(P.rows());
    double abscissa = eigenvalues(P).abscissa();
    if (!(omega1 > abscissa + 1e-6))
        throw InputError(
            "ek_certificate: omega1 must exceed the spectral abscissa by at "
            "least 1e-6 (infeasible weight)");

    ComplexMatrix A = P - omega1 * ComplexMatrix::Identity(m, m);
    ComplexMatrix B0;
    bool solved = false;
    // closed form through the eigendecomposition when the eigenvector
    // basis is well conditioned: Y_ij = -(V* V)_ij / (conj(d_i) + d_j)
    Eigen::ComplexEigenSolver<ComplexMatrix> es(A, /*computeEigenvectors=*/true);
    if (es.info() == Eigen::Success) {
        ComplexMatrix V = es.eigenvectors();
        Eigen::JacobiSVD<ComplexMatrix> svd(V);
        double cond = svd.singularValues()(0) /
                      std::max(svd.singularValues()(m - 1), 1e-300);
        if (cond <= 1e8) {
            ComplexVector d = es.eigenvalues();
            ComplexMatrix G = V.adjoint() * V;
            ComplexMatrix Y(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    Y(i, j) = -G(i, j) / (std::conj(d(i)) + d(j));
            ComplexMatrix Vinv = V.inverse();
            B0 = Vinv.adjoint() * Y * Vinv;
            solved = true;
        }
    }
    if (!solved) B0 = lyapunov_integral(A);
    B0 = 0.5 * (B0 + B0.adjoint());  // enforce exact hermiticity

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eb(B0);
    double min_eig = eb.eigenvalues().minCoeff();
    if (!(min_eig > 0.0))
        throw NumericalError(
            "ek_certificate: Lyapunov solution not positive definite");

    EKCertificate cert;
    cert.xi = xi;
    cert.omega1 = omega1;
    cert.B = B0 / min_eig;

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> ebb(cert.B);
    ComplexMatrix sqrt_diag =
        ebb.eigenvalues().cwiseSqrt().cast<Complex>().asDiagonal();
    cert.Nsqrt = ebb.eigenvectors() * sqrt_diag * ebb.eigenvectors().adjoint();
    cert.Nsqrt = 0.5 * (cert.Nsqrt + cert.Nsqrt.adjoint());
    fill_residuals(cert, P);
    return cert;
}

double verify_ek_decay(const EKCertificate& cert, const OperatorSpec& op,
                       const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw InputError("verify_ek_decay: empty t grid");
    ComplexMatrix P = eval_symbol(op, cert.xi);
    ComplexMatrix Ninv = cert.Nsqrt.inverse();
    double max_slope = -std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        if (!(t > 0.0)) throw InputError("verify_ek_decay: times must be positive");
        ScaledMatrix E = exp_reference(P, t);
        double log_weighted =
            std::log(std::max(operator_norm(cert.Nsqrt * E.value * Ninv), 1e-300)) +
            E.log_scale;
        if (log_weighted > cert.omega1 * t + std::log1p(1e-9) + 1e-12)
            throw ContractError(
                "verify_ek_decay: weighted norm exceeds e^{omega1 t}; certificate "
                "invalid");
        max_slope = std::max(max_slope, log_weighted / t);
    }
    return max_slope;
}

double weighted_seminorm(const ModeCoefficients& coeffs, const WeightMap& weights,
                         double p, double cell_volume) {
    if (p < 1.0) throw InputError("weighted_seminorm: p must be >= 1");
    if (!(cell_volume > 0.0))
        throw InputError("weighted_seminorm: cell volume must be positive");
    double total = 0.0;
    for (const auto& [xi, v] : coeffs) {
        auto it = weights.find(xi);
        if (it == weights.end())
            throw InputError("weighted_seminorm: missing weight for a mode");
        total += std::pow((it->second * v).norm(), p) * cell_volume;
    }
    return std::pow(total, 1.0 / p);
}

}  // namespace petrosem
