#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "petrosem/operator_spec.hpp"

namespace petrosem {

using Complex = std::complex<double>;

/// A spectrum presented as distinct nodes with multiplicities.
struct NodeSet {
    struct Node {
        Complex value;
        int multiplicity;
    };
    std::vector<Node> nodes;

    int total() const;
    /// Max pairwise distance between distinct nodes (0 for a single node).
    double spread() const;
    /// Max real part over nodes.
    double abscissa() const;
    /// Centroid of the node sequence (multiplicity-weighted mean).
    Complex mean() const;
    /// Node sequence with each node repeated per its multiplicity,
    /// distinct values in Leja order (greedy max product of distances),
    /// repetitions adjacent.
    std::vector<Complex> sequence() const;
    /// Min distance between distinct nodes (+inf for a single node).
    double min_separation() const;

    bool approx_equal(const NodeSet& other, double tol) const;
};

/// Clustering tolerance used when collapsing near-identical eigenvalues.
double cluster_tolerance(double spread);

/// Groups raw values closer than cluster_tolerance into nodes with summed
/// multiplicity (node value = cluster mean).
NodeSet cluster_values(std::vector<Complex> values);

/// All eigenvalues of M with algebraic multiplicity, clustered.
NodeSet eigenvalues(const ComplexMatrix& M);

/// Matrix exponential carried as value * exp(log_scale) so that large
/// spectral abscissas never overflow the floating range.
struct ScaledMatrix {
    ComplexMatrix value;
    double log_scale = 0.0;

    /// Materialize; throws NumericalError if exp(log_scale) overflows.
    ComplexMatrix dense() const;
    /// log of the operator 2-norm of the represented matrix.
    double log_norm() const;
};

/// Relative Frobenius distance between two scaled matrices, computed in
/// a common scale so that underflowing factors are harmless.
double scaled_rel_error(const ScaledMatrix& a, const ScaledMatrix& b);

/// e^{tM} by scaling (halve until ||tM|| <= 1/2), truncated Taylor
/// summation, and repeated squaring. The series oracle for every other
/// exponential path. Shifts by the spectral abscissa when the result
/// would overflow, carrying the offset in log_scale.
ScaledMatrix exp_reference(const ComplexMatrix& M, double t);

/// Interpolation polynomial for z -> e^{tz} at the given nodes.
struct InterpPoly {
    NodeSet nodes;
    /// Node sequence actually used for the Newton basis.
    std::vector<Complex> node_sequence;
    std::vector<Complex> newton_coeffs;
    std::optional<std::vector<Complex>> power_coeffs;
    double t = 0.0;

    Complex eval_newton(Complex z) const;
    Complex eval_power(Complex z) const;
};

/// Newton coefficients c_k by confluent divided differences of e^{tz}
/// over the node sequence (repeated nodes use derivative values
/// t^k e^{t lambda}).
InterpPoly newton_interp_exp(const NodeSet& nodes, double t);

/// Expand the Newton form into power-basis coefficients a_0..a_{m-1}.
std::vector<Complex> newton_to_power(const InterpPoly& p);

/// Circular quadrature contour.
struct ContourSpec {
    Complex center;
    double radius = 0.0;
    int node_count = 256;

    /// Circle centered at the node mean, radius 1.5 x max distance to any
    /// node + 1; 256 quadrature nodes.
    static ContourSpec default_for(const NodeSet& nodes);
    bool encloses(const NodeSet& nodes) const;
};

/// Power-basis coefficients a_k of the interpolation polynomial for
/// e^{tz} via trapezoid quadrature of the elementary-symmetric contour
/// integrals; node_count doubles until the coefficients are stable.
std::vector<Complex> power_coeffs_contour(const NodeSet& nodes, double t,
                                          ContourSpec contour);

/// p(M) evaluated in Newton form by nested products (M - lambda_k I).
/// Requires the poly's nodes to match eigenvalues(M) up to the
/// clustering tolerance.
ComplexMatrix eval_poly_at_matrix(const InterpPoly& p, const ComplexMatrix& M);

/// e^{omega t} (1 + sum_{k=1}^{m-1} (2t)^k/k! ||M||^k), omega the
/// spectral abscissa; an upper bound for ||e^{tM}||.
double gelfand_shilov_bound(const ComplexMatrix& M, double t);
/// log of the same bound (never overflows).
double gelfand_shilov_log_bound(const ComplexMatrix& M, double t);

/// Scalar coefficients of e^{tP~(xi)} = sum_{k=0}^{2m} p_k P~(xi)^k,
/// carried with a log offset t * abscissa.
struct Decomposition {
    std::vector<Complex> p;  // size 2m + 1
    double log_offset = 0.0;
    Complex z0;
};

/// Default decomposition shift: spectral abscissa + 1 + spectral spread.
Complex default_decomposition_z0(const NodeSet& nodes);

/// Decomposition coefficients by contour quadrature around each distinct
/// eigenvalue (contour kept inside {Re z < Re z0}) followed by the
/// binomial expansion of (P~ - z0)^{m+1} (sum a_k P~^k).
Decomposition propagator_decomposition(const OperatorSpec& op, double t,
                                       const RealVector& xi, Complex z0);
Decomposition propagator_decomposition(const OperatorSpec& op, double t,
                                       const RealVector& xi);

/// Reassemble sum p_k M^k as a scaled matrix.
ScaledMatrix reassemble_decomposition(const Decomposition& dec,
                                      const ComplexMatrix& M);

}  // namespace petrosem
