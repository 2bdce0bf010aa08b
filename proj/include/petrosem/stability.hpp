#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "petrosem/matfun.hpp"
#include "petrosem/operator_spec.hpp"

namespace petrosem {

/// One frequency sample: xi, the spectrum of P~(xi), and the local
/// spectral abscissa h(xi) = max Re sigma(P~(xi)).
struct SpectrumSample {
    RealVector xi;
    NodeSet eigenvalues;
    double abscissa = 0.0;
};

SpectrumSample spectral_abscissa(const OperatorSpec& op, const RealVector& xi);

/// Fit of the constrained abscissa envelope Lambda(r) ~ A r^alpha.
struct GardingFit {
    double A = 0.0;
    double alpha = 0.0;
    double residual = 0.0;        // RMS of the log-log fit
    double alpha_stderr = 0.0;
    bool snapped = false;         // alpha snapped to a rational p/q, q <= 2d
    std::vector<double> radii;
    std::vector<double> lambda_values;  // nondecreasing (cumulative max)
};

/// Lambda(r) = cumulative max over shell samples of h(xi), |xi| <= r.
/// Plateau (last-decade slope < 0.01) or Lambda(r_max) <= 0 reports
/// alpha = 0 with A the plateau value; otherwise least squares on the
/// top two decades with rational snapping within 2 standard errors.
GardingFit garding_fit(const OperatorSpec& op, const std::vector<double>& radii,
                       int directions_per_shell = 16, std::uint64_t seed = 1);
GardingFit fit_lambda_curve(std::vector<double> radii,
                            std::vector<double> lambda, int degree);

enum class Verdict { Correct, Incorrect, Inconclusive };
std::string to_string(Verdict v);

struct LogGrowthResult {
    double C = 0.0;
    bool passes = false;
};

/// Smallest C >= 0 with h(xi) <= C + C log(1 + |xi|) over the samples;
/// passes when the per-decade maxima of h/(1 + log(1+|xi|)) are
/// non-increasing over the last two decades.
LogGrowthResult log_growth_test(const std::vector<SpectrumSample>& samples);

struct StabilityReport {
    double omega0_estimate = 0.0;
    bool unbounded = false;
    Verdict verdict = Verdict::Inconclusive;
    GardingFit fit;
    std::vector<SpectrumSample> evidence;
    double log_growth_constant = 0.0;
    std::uint64_t seed = 0;
    // Constant k0 = n((dm-1)(2n+1)+2) of the sup-norm estimate.
    long long k0 = 0;
};

long long k0_constant(int m, int n, int d);

/// Sample h(xi) on log-spaced radial shells with low-discrepancy
/// directions, polish the best sample coordinate-wise, and decide the
/// verdict from the log-growth test and the Garding fit.
StabilityReport estimate_stability_index(const OperatorSpec& op, int budget,
                                         double r_max,
                                         std::uint64_t seed = 1);

/// Sup-ratio report for the growth conditions on e^{tP~(xi)}.
struct GrowthReport {
    std::vector<double> epsilons;
    std::vector<double> sups;          // per epsilon, coarse grid
    std::vector<double> sups_refined;  // per epsilon, refined grid
    bool stabilized = false;
    long long k = 0;
};

/// sup over the grid of e^{-(omega+eps)t} (1+|xi|)^{-k} ||e^{tP~(xi)}||
/// with k = (m-1)d, for eps in {0.1, 0.5, 1.0}; refined once (t midpoints
/// and doubled |xi| range) to check stabilization.
GrowthReport verify_growth_bound(const OperatorSpec& op, double omega,
                                  const std::vector<double>& t_grid,
                                  const std::vector<RealVector>& xi_samples);

/// (d/dxi)^alpha e^{tP~(xi)} by the Duhamel recursion
/// U_alpha = int_0^t U_0(t-tau) V_alpha(tau) dtau.
ComplexMatrix symbol_exp_derivative(const OperatorSpec& op,
                                    const MultiIndex& alpha, double t,
                                    const RealVector& xi);

/// Same derivative by central finite differences with Richardson
/// extrapolation (the independent cross-check).
ComplexMatrix symbol_exp_derivative_fd(const OperatorSpec& op,
                                       const MultiIndex& alpha, double t,
                                       const RealVector& xi);

struct DerivativeGrowthReport {
    GrowthReport growth;             // with k = k_alpha = (md-1)(|alpha|+1)
    double max_fd_disagreement = 0;  // relative, over spot checks
};

/// Growth condition for the xi-derivatives, k_alpha = (md-1)(|alpha|+1),
/// cross-checked against finite differences (|alpha| <= 3).
DerivativeGrowthReport verify_derivative_growth_bound(
    const OperatorSpec& op, double omega, const MultiIndex& alpha,
    const std::vector<double>& t_grid,
    const std::vector<RealVector>& xi_samples);

}  // namespace petrosem
