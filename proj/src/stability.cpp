#include "petrosem/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "petrosem/parallel.hpp"

namespace petrosem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Halton sequence, bases 2, 3, 5, 7, 11, ...
double halton(long long index, int base) {
    double f = 1.0, r = 0.0;
    long long i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

int nth_prime(int k) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                 23, 29, 31, 37, 41, 43, 47, 53};
    if (k < 16) return primes[k];
    throw InputError("direction sampling supports at most 16 dimensions");
}

// Acklam's rational approximation of the standard normal quantile.
double probit(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    double q, r;
    if (p < 0.02425) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - 0.02425) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Low-discrepancy unit direction: Halton point mapped coordinate-wise to
// a Gaussian and normalized. n = 1 alternates between +1 and -1.
RealVector direction(long long index, int n) {
    RealVector dir(n);
    if (n == 1) {
        dir(0) = (index % 2 == 0) ? 1.0 : -1.0;
        return dir;
    }
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        dir(i) = probit(halton(index + 1, nth_prime(i)));
        norm2 += dir(i) * dir(i);
    }
    if (norm2 < 1e-20) {
        dir.setZero();
        dir(0) = 1.0;
        return dir;
    }
    return dir / std::sqrt(norm2);
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, slope_stderr = 0.0, rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    f.slope_stderr =
        (n > 2 && sxx > 0) ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace

SpectrumSample spectral_abscissa(const OperatorSpec& op, const RealVector& xi) {
    SpectrumSample s;
    s.xi = xi;
    s.eigenvalues = eigenvalues(eval_symbol(op, xi));
    s.abscissa = s.eigenvalues.abscissa();
    return s;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

long long k0_constant(int m, int n, int d) {
    return 1LL * n * ((1LL * d * m - 1) * (2LL * n + 1) + 2);
}

GardingFit fit_lambda_curve(std::vector<double> radii, std::vector<double> lambda,
                            int degree) {
    if (radii.size() != lambda.size() || radii.size() < 4)
        throw InputError("fit_lambda_curve: need matching radii/lambda, >= 4 points");
    // cumulative max: Lambda(r) is nondecreasing by definition
    for (size_t i = 1; i < lambda.size(); ++i)
        lambda[i] = std::max(lambda[i], lambda[i - 1]);

    GardingFit fit;
    fit.radii = radii;
    fit.lambda_values = lambda;
    double r_max = radii.back();

    if (lambda.back() <= 0.0) {
        fit.A = lambda.back();
        return fit;  // alpha = 0: envelope never exceeds zero
    }

    // plateau check over the last decade
    size_t lo = 0;
    while (lo < radii.size() && radii[lo] < r_max / 10.0) ++lo;
    if (lo > 0) --lo;
    if (lambda[lo] > 0.0) {
        double slope = (std::log(lambda.back()) - std::log(lambda[lo])) /
                       (std::log(r_max) - std::log(radii[lo]));
        if (slope < 0.01) {
            fit.A = lambda.back();
            return fit;  // alpha = 0 plateau
        }
    }

    // power-law fit over the top two decades
    std::vector<double> x, y;
    for (size_t i = 0; i < radii.size(); ++i)
        if (radii[i] >= r_max / 100.0 && lambda[i] > 0.0) {
            x.push_back(std::log(radii[i]));
            y.push_back(std::log(lambda[i]));
        }
    if (x.size() < 4) {
        fit.alpha = 0.0;
        fit.A = lambda.back();
        fit.residual = kInf;
        return fit;
    }
    LineFit lf = least_squares(x, y);
    fit.alpha = lf.slope;
    fit.A = std::exp(lf.intercept);
    fit.alpha_stderr = lf.slope_stderr;
    fit.residual = lf.rms;

    // snap to the nearest rational p/q with q <= 2 * degree
    int qmax = std::max(1, 2 * degree);
    double best_diff = kInf, best_val = fit.alpha;
    for (int q = 1; q <= qmax; ++q) {
        int p = int(std::lround(fit.alpha * q));
        double val = double(p) / q;
        if (std::abs(val - fit.alpha) < best_diff) {
            best_diff = std::abs(val - fit.alpha);
            best_val = val;
        }
    }
    if (best_diff <= std::max(2.0 * lf.slope_stderr, 1e-8)) {
        fit.alpha = best_val;
        fit.snapped = true;
        double log_a = 0.0;
        for (size_t i = 0; i < x.size(); ++i) log_a += y[i] - fit.alpha * x[i];
        fit.A = std::exp(log_a / x.size());
        double ss = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - (std::log(fit.A) + fit.alpha * x[i]);
            ss += r * r;
        }
        fit.residual = std::sqrt(ss / x.size());
    }
    return fit;
}

GardingFit garding_fit(const OperatorSpec& op, const std::vector<double>& radii,
                       int directions_per_shell, std::uint64_t seed) {
    if (directions_per_shell < 1)
        throw InputError("garding_fit: directions_per_shell must be >= 1");
    int n = op.n();
    int dirs = (n == 1) ? std::min(directions_per_shell, 2) : directions_per_shell;
    std::vector<double> lambda(radii.size(), -kInf);
    parallel_for((long long)radii.size(), [&](long long s) {
        double best = -kInf;
        for (int j = 0; j < dirs; ++j) {
            long long idx = ((long long)seed % 4096) + s * dirs + j;
            RealVector xi = radii[s] * direction(idx, n);
            best = std::max(best, spectral_abscissa(op, xi).abscissa);
        }
        lambda[s] = best;
    });
    return fit_lambda_curve(radii, std::move(lambda), std::max(op.d(), 1));
}

LogGrowthResult log_growth_test(const std::vector<SpectrumSample>& samples) {
    if (samples.empty()) throw InputError("log_growth_test: no samples");
    LogGrowthResult res;
    // per-decade maxima of h(xi) / (1 + log(1 + |xi|))
    std::map<int, double> decade_max;
    double c = 0.0;
    for (const auto& s : samples) {
        double r = s.xi.norm();
        double ratio = s.abscissa / (1.0 + std::log1p(r));
        c = std::max(c, ratio);
        if (r > 0.0) {
            int dec = int(std::floor(std::log10(r)));
            auto it = decade_max.find(dec);
            if (it == decade_max.end())
                decade_max[dec] = ratio;
            else
                it->second = std::max(it->second, ratio);
        }
    }
    res.C = c;
    std::vector<double> maxima;
    for (const auto& [dec, v] : decade_max) maxima.push_back(v);
    res.passes = true;
    size_t nd = maxima.size();
    auto nonincreasing = [&](size_t i) {
        double tol = 1e-6 * (1.0 + std::abs(maxima[i - 1]));
        return maxima[i] <= maxima[i - 1] + tol;
    };
    if (nd >= 2 && !nonincreasing(nd - 1)) res.passes = false;
    if (nd >= 3 && !nonincreasing(nd - 2)) res.passes = false;
    return res;
}

StabilityReport estimate_stability_index(const OperatorSpec& op, int budget,
                                         double r_max, std::uint64_t seed) {
    if (budget < 64) throw InputError("estimate_stability_index: budget must be >= 64");
    if (r_max <= 1.0) throw InputError("estimate_stability_index: r_max must exceed 1");
    int n = op.n();

    StabilityReport report;
    report.seed = seed;
    report.k0 = k0_constant(op.m(), op.n(), op.d());

    int polish_budget = budget * 3 / 10;
    int shell_budget = budget - polish_budget - 1;
    int dirs = (n == 1) ? 2 : std::clamp(4 * n, 8, 64);
    int shells = std::max(8, shell_budget / dirs);

    std::vector<double> radii(shells);
    double lr0 = std::log(1e-2), lr1 = std::log(r_max);
    for (int s = 0; s < shells; ++s)
        radii[s] = std::exp(lr0 + (lr1 - lr0) * s / double(shells - 1));

    std::vector<SpectrumSample> evidence(size_t(shells) * dirs + 1);
    evidence[0] = spectral_abscissa(op, RealVector::Zero(n));
    parallel_for((long long)shells * dirs, [&](long long i) {
        long long s = i / dirs, j = i % dirs;
        long long idx = ((long long)seed % 4096) + s * dirs + j;
        RealVector xi = radii[s] * direction(idx, n);
        evidence[size_t(i) + 1] = spectral_abscissa(op, xi);
    });

    std::vector<double> lambda(shells, -kInf);
    for (int s = 0; s < shells; ++s)
        for (int j = 0; j < dirs; ++j)
            lambda[s] = std::max(lambda[s],
                                 evidence[size_t(s) * dirs + j + 1].abscissa);

    double omega0 = evidence[0].abscissa;
    RealVector best_xi = evidence[0].xi;
    for (const auto& s : evidence)
        if (s.abscissa > omega0) {
            omega0 = s.abscissa;
            best_xi = s.xi;
        }

    // coordinate-wise golden-section polish of the best sample
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    int evals_per_line = 24;
    int rounds = std::max(1, polish_budget / std::max(1, evals_per_line * n));
    rounds = std::min(rounds, 8);
    RealVector xi = best_xi;
    auto h_at = [&](const RealVector& p) {
        SpectrumSample s = spectral_abscissa(op, p);
        evidence.push_back(s);
        if (s.abscissa > omega0) omega0 = s.abscissa;
        return s.abscissa;
    };
    for (int round = 0; round < rounds; ++round) {
        for (int i = 0; i < n; ++i) {
            double delta = 0.5 * (1.0 + std::abs(xi(i)));
            double a = xi(i) - delta, b = xi(i) + delta;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            RealVector p = xi;
            p(i) = x1;
            double f1 = h_at(p);
            p(i) = x2;
            double f2 = h_at(p);
            for (int it = 0; it < evals_per_line - 2; ++it) {
                if (f1 < f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    p(i) = x2;
                    f2 = h_at(p);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    p(i) = x1;
                    f1 = h_at(p);
                }
            }
            xi(i) = (f1 > f2) ? x1 : x2;
        }
    }

    report.fit = fit_lambda_curve(radii, lambda, std::max(op.d(), 1));
    LogGrowthResult lg = log_growth_test(evidence);
    report.log_growth_constant = lg.C;
    report.omega0_estimate = omega0;
    report.evidence = std::move(evidence);

    bool plateau = report.fit.alpha == 0.0;
    if (plateau && lg.passes) {
        report.verdict = Verdict::Correct;
    } else if (report.fit.alpha > 0.05 && report.fit.residual < 0.1) {
        report.verdict = Verdict::Incorrect;
        report.unbounded = true;
    } else {
        report.verdict = Verdict::Inconclusive;
    }
    return report;
}

// --------------------------------------------------- growth conditions

namespace {

// log of the ratio e^{-(omega+eps) t} (1 + |xi|)^{-k} ||e^{t P~(xi)}||
double log_growth_ratio(const OperatorSpec& op, double omega_eps, long long k,
                        double t, const RealVector& xi) {
    ComplexMatrix P = eval_symbol(op, xi);
    ScaledMatrix E = exp_reference(P, t);
    return E.log_norm() - omega_eps * t - double(k) * std::log1p(xi.norm());
}

GrowthReport growth_sup(const OperatorSpec& op, double omega, long long k,
                        const std::vector<double>& t_grid,
                        const std::vector<RealVector>& xi_samples,
                        const std::function<double(double, const RealVector&,
                                                   double)>& log_ratio) {
    if (t_grid.empty() || xi_samples.empty())
        throw InputError("growth condition: empty evaluation grid");
    GrowthReport rep;
    rep.k = k;
    rep.epsilons = {0.1, 0.5, 1.0};

    // refinement: t midpoints plus a doubled |xi| range
    std::vector<double> t_fine = t_grid;
    for (size_t i = 0; i + 1 < t_grid.size(); ++i)
        t_fine.push_back(0.5 * (t_grid[i] + t_grid[i + 1]));
    std::vector<RealVector> xi_fine = xi_samples;
    for (const auto& xi : xi_samples) xi_fine.push_back(2.0 * xi);

    auto sup_over = [&](const std::vector<double>& ts,
                        const std::vector<RealVector>& xis, double eps) {
        std::vector<double> vals(ts.size() * xis.size());
        parallel_for((long long)vals.size(), [&](long long i) {
            size_t it = size_t(i) / xis.size(), ix = size_t(i) % xis.size();
            double v;
            try {
                v = log_ratio(ts[it], xis[ix], omega + eps);
            } catch (const NumericalError&) {
                v = kInf;  // ratio beyond the floating range
            }
            vals[size_t(i)] = v;
        });
        double s = -kInf;
        for (double v : vals) s = std::max(s, v);
        return std::exp(s);
    };

    rep.stabilized = true;
    for (double eps : rep.epsilons) {
        double coarse = sup_over(t_grid, xi_samples, eps);
        double fine = sup_over(t_fine, xi_fine, eps);
        rep.sups.push_back(coarse);
        rep.sups_refined.push_back(fine);
        if (!(fine <= 2.0 * coarse + 1e-12)) rep.stabilized = false;
    }
    return rep;
}

}  // namespace

GrowthReport verify_growth_bound(const OperatorSpec& op, double omega,
                                  const std::vector<double>& t_grid,
                                  const std::vector<RealVector>& xi_samples) {
    long long k = 1LL * (op.m() - 1) * op.d();
    return growth_sup(op, omega, k, t_grid, xi_samples,
                      [&](double t, const RealVector& xi, double omega_eps) {
                          return log_growth_ratio(op, omega_eps, k, t, xi);
                      });
}

// --------------------------------------------- derivative of the kernel

namespace {

// 5-point Gauss--Legendre nodes/weights on [-1, 1]
constexpr double kGLX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                            0.5384693101056831, 0.9061798459386640};
constexpr double kGLW[5] = {0.2369268850561891, 0.4786286704993665,
                            0.5688888888888889, 0.4786286704993665,
                            0.2369268850561891};

struct DuhamelContext {
    ComplexMatrix Q;                          // P~(xi)
    std::map<MultiIndex, ComplexMatrix> D;    // d^gamma P~ at xi, |gamma| >= 1
    std::vector<MultiIndex> betas;            // all gamma <= alpha, graded order
    int panels = 4;

    ComplexMatrix U0(double s) const { return exp_reference(Q, s).dense(); }

    ComplexMatrix V(const MultiIndex& beta, double tau) const {
        int dim = int(Q.rows());
        ComplexMatrix v = ComplexMatrix::Zero(dim, dim);
        for (const auto& gamma : betas) {
            if (gamma.order() >= beta.order() || !beta.dominates(gamma)) continue;
            MultiIndex diff = beta.minus(gamma);
            auto it = D.find(diff);
            if (it == D.end()) continue;
            v += binomial(beta, gamma) * it->second * U(gamma, tau);
        }
        return v;
    }

    ComplexMatrix U(const MultiIndex& beta, double s) const {
        if (beta.order() == 0) return U0(s);
        int dim = int(Q.rows());
        ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
        if (s == 0.0) return acc;
        double h = s / panels;
        for (int p = 0; p < panels; ++p) {
            double mid = (p + 0.5) * h;
            for (int q = 0; q < 5; ++q) {
                double tau = mid + 0.5 * h * kGLX[q];
                acc += (0.5 * h * kGLW[q]) * (U0(s - tau) * V(beta, tau));
            }
        }
        return acc;
    }
};

DuhamelContext make_context(const OperatorSpec& op, const MultiIndex& alpha,
                            const RealVector& xi) {
    if (alpha.size() != op.n())
        throw InputError("symbol_exp_derivative: alpha dimension mismatch");
    DuhamelContext ctx;
    ctx.Q = eval_symbol(op, xi);
    for (const auto& gamma : multi_indices_up_to(op.n(), alpha.order())) {
        if (!alpha.dominates(gamma)) continue;
        ctx.betas.push_back(gamma);
        if (gamma.order() >= 1)
            ctx.D.emplace(gamma, eval_symbol(symbol_derivative(op, gamma), xi));
    }
    return ctx;
}

}  // namespace

ComplexMatrix symbol_exp_derivative(const OperatorSpec& op,
                                    const MultiIndex& alpha, double t,
                                    const RealVector& xi) {
    if (t < 0) throw InputError("symbol_exp_derivative: t must be >= 0");
    DuhamelContext ctx = make_context(op, alpha, xi);
    if (alpha.order() == 0) return ctx.U0(t);
    ctx.panels = 2;
    ComplexMatrix prev = ctx.U(alpha, t);
    for (int round = 0; round < 5; ++round) {
        ctx.panels *= 2;
        ComplexMatrix next = ctx.U(alpha, t);
        double denom = std::max(next.norm(), 1e-300);
        if ((next - prev).norm() / denom <= 1e-9) return next;
        prev = std::move(next);
    }
    throw NumericalError(
        "symbol_exp_derivative: quadrature did not converge after refining the "
        "panel count to 64");
}

ComplexMatrix symbol_exp_derivative_fd(const OperatorSpec& op,
                                       const MultiIndex& alpha, double t,
                                       const RealVector& xi) {
    std::function<ComplexMatrix(const MultiIndex&, const RealVector&, double)>
        stencil = [&](const MultiIndex& beta, const RealVector& p,
                      double h) -> ComplexMatrix {
        if (beta.order() == 0) return exp_reference(eval_symbol(op, p), t).dense();
        for (int i = 0; i < beta.size(); ++i) {
            if (beta[i] == 0) continue;
            std::vector<int> e = beta.entries();
            e[i] -= 1;
            MultiIndex next(std::move(e));
            RealVector plus = p, minus = p;
            plus(i) += h;
            minus(i) -= h;
            return (stencil(next, plus, h) - stencil(next, minus, h)) / (2.0 * h);
        }
        return exp_reference(eval_symbol(op, p), t).dense();
    };
    double h = 0.01;
    ComplexMatrix coarse = stencil(alpha, xi, h);
    ComplexMatrix fine = stencil(alpha, xi, h / 2.0);
    return (4.0 * fine - coarse) / 3.0;  // Richardson, O(h^4)
}

DerivativeGrowthReport verify_derivative_growth_bound(
    const OperatorSpec& op, double omega, const MultiIndex& alpha,
    const std::vector<double>& t_grid,
    const std::vector<RealVector>& xi_samples) {
    if (alpha.order() < 1 || alpha.order() > 3)
        throw InputError("verify_derivative_growth_bound: |alpha| must be between 1 and 3");
    long long k = (1LL * op.m() * op.d() - 1) * (alpha.order() + 1);

    DerivativeGrowthReport rep;
    rep.growth = growth_sup(
        op, omega, k, t_grid, xi_samples,
        [&](double t, const RealVector& xi, double omega_eps) {
            // derivative of the shifted kernel: d^alpha e^{t(P~ - c)} =
            // e^{-ct} d^alpha e^{tP~}, so the ratio needs no extra factor
            OperatorSpec shifted = op.shifted(Complex(-omega_eps, 0.0));
            ComplexMatrix U = symbol_exp_derivative(shifted, alpha, t, xi);
            return std::log(std::max(operator_norm(U), 1e-300)) -
                   double(k) * std::log1p(xi.norm());
        });

    // spot-check against finite differences at moderate arguments
    std::vector<std::pair<double, RealVector>> spots;
    for (double t : t_grid) {
        if (t <= 0.0 || t > 2.0) continue;
        for (const auto& xi : xi_samples) {
            if (xi.norm() > 4.0) continue;
            spots.emplace_back(t, xi);
            if (spots.size() >= 5) break;
        }
        if (spots.size() >= 5) break;
    }
    if (spots.empty() && !t_grid.empty())
        spots.emplace_back(t_grid.front() > 0 ? t_grid.front() : 0.5,
                           xi_samples.front());

    double worst = 0.0;
    for (const auto& [t, xi] : spots) {
        ComplexMatrix du = symbol_exp_derivative(op, alpha, t, xi);
        ComplexMatrix fd = symbol_exp_derivative_fd(op, alpha, t, xi);
        double denom = std::max({du.norm(), fd.norm(), 1e-12});
        worst = std::max(worst, (du - fd).norm() / denom);
    }
    rep.max_fd_disagreement = worst;
    if (worst > 1e-4)
        throw NumericalError(
            "verify_derivative_growth_bound: quadrature and finite-difference derivatives "
            "disagree beyond 1e-4");
    return rep;
}

}  // namespace petrosem
