#pragma once

#include <map>
#include <vector>

#include "petrosem/operator_spec.hpp"

namespace petrosem {

/// Pointwise Eidelman--Krein weight certificate at one frequency:
/// hermitian B >= I with B P~ + P~* B <= 2 omega1 B, and its hermitian
/// positive-definite square root N.
struct EKCertificate {
    RealVector xi;
    ComplexMatrix B;
    ComplexMatrix Nsqrt;
    double omega1 = 0.0;
    double residual_min_eig = 0.0;   // min eig(B) - 1 (>= 0 up to roundoff)
    double residual_lyapunov = 0.0;  // max eig(B P~ + P~* B - 2 omega1 B)
};

/// Solves (P~ - omega1)* B0 + B0 (P~ - omega1) = -I (eigendecomposition
/// closed form, integral quadrature fallback for ill-conditioned
/// eigenvector bases) and rescales by the min eigenvalue so B >= I.
/// Throws InputError when omega1 is not above the spectral abscissa.
EKCertificate ek_certificate(const OperatorSpec& op, const RealVector& xi,
                             double omega1);

/// Checks ||N e^{tP~} N^{-1}|| <= e^{omega1 t} on the grid and returns
/// the max of (1/t) log of the weighted norm.
double verify_ek_decay(const EKCertificate& cert, const OperatorSpec& op,
                       const std::vector<double>& t_grid);

/// (sum_k ||N(xi_k) v_k||^p dxi)^{1/p}, dxi the mode cell volume.
using WeightMap = std::map<std::vector<double>, ComplexMatrix>;
double weighted_seminorm(const ModeCoefficients& coeffs, const WeightMap& weights,
                         double p, double cell_volume);

}  // namespace petrosem
