#include "petrosem/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace petrosem {

namespace {
constexpr double kPi = std::numbers::pi;
// exp() arguments beyond this are treated as overflow and shifted out.
constexpr double kLogOverflow = 690.0;
}  // namespace

// ------------------------------------------------------------- NodeSet

int NodeSet::total() const {
    int t = 0;
    for (const auto& nd : nodes) t += nd.multiplicity;
    return t;
}

double NodeSet::spread() const {
    double s = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j)
            s = std::max(s, std::abs(nodes[i].value - nodes[j].value));
    return s;
}

double NodeSet::abscissa() const {
    double a = -std::numeric_limits<double>::infinity();
    for (const auto& nd : nodes) a = std::max(a, nd.value.real());
    return a;
}

Complex NodeSet::mean() const {
    Complex s = 0.0;
    int t = total();
    for (const auto& nd : nodes) s += double(nd.multiplicity) * nd.value;
    return t > 0 ? s / double(t) : s;
}

double NodeSet::min_separation() const {
    double s = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j)
            s = std::min(s, std::abs(nodes[i].value - nodes[j].value));
    return s;
}

std::vector<Complex> NodeSet::sequence() const {
    // Leja order on the distinct values, repetitions kept adjacent.
    std::vector<int> remaining(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) remaining[i] = int(i);
    std::vector<int> order;
    Complex c = mean();
    while (!remaining.empty()) {
        size_t best = 0;
        double best_score = -1.0;
        for (size_t r = 0; r < remaining.size(); ++r) {
            int idx = remaining[r];
            double score;
            if (order.empty()) {
                score = std::abs(nodes[idx].value - c);
            } else {
                score = 0.0;
                for (int o : order)
                    score += std::log(std::max(std::abs(nodes[idx].value - nodes[o].value),
                                               1e-300));
            }
            if (score > best_score) {
                best_score = score;
                best = r;
            }
        }
        order.push_back(remaining[best]);
        remaining.erase(remaining.begin() + best);
    }
    std::vector<Complex> seq;
    for (int idx : order)
        for (int k = 0; k < nodes[idx].multiplicity; ++k)
            seq.push_back(nodes[idx].value);
    return seq;
}

bool NodeSet::approx_equal(const NodeSet& other, double tol) const {
    if (total() != other.total()) return false;
    std::vector<Node> a = nodes, b = other.nodes;
    auto cmp = [](const Node& x, const Node& y) {
        if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
        return x.value.imag() < y.value.imag();
    };
    std::sort(a.begin(), a.end(), cmp);
    std::sort(b.begin(), b.end(), cmp);
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].multiplicity != b[i].multiplicity) return false;
        if (std::abs(a[i].value - b[i].value) > tol) return false;
    }
    return true;
}

double cluster_tolerance(double spread) { return 1e-8 * (1.0 + spread); }

NodeSet cluster_values(std::vector<Complex> values) {
    double spread = 0.0;
    for (size_t i = 0; i < values.size(); ++i)
        for (size_t j = i + 1; j < values.size(); ++j)
            spread = std::max(spread, std::abs(values[i] - values[j]));
    double tol = cluster_tolerance(spread);
    std::sort(values.begin(), values.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    NodeSet out;
    std::vector<bool> used(values.size(), false);
    for (size_t i = 0; i < values.size(); ++i) {
        if (used[i]) continue;
        Complex sum = values[i];
        int count = 1;
        used[i] = true;
        for (size_t j = i + 1; j < values.size(); ++j) {
            if (used[j]) continue;
            if (std::abs(values[j] - sum / double(count)) <= tol) {
                sum += values[j];
                ++count;
                used[j] = true;
            }
        }
        out.nodes.push_back({sum / double(count), count});
    }
    return out;
}

NodeSet eigenvalues(const ComplexMatrix& M) {
    if (!is_finite(M)) throw InputError("eigenvalues: non-finite entries");
    if (M.rows() != M.cols()) throw InputError("eigenvalues: matrix not square");
    if (M.rows() == 1) return cluster_values({M(0, 0)});
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigenvalues: QR iteration did not converge (m=" +
                             std::to_string(M.rows()) + ")");
    std::vector<Complex> vals(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + M.rows());
    return cluster_values(std::move(vals));
}

// ------------------------------------------------------- ScaledMatrix

ComplexMatrix ScaledMatrix::dense() const {
    double peak = value.cwiseAbs().maxCoeff();
    if (log_scale + std::log(std::max(peak, 1e-300)) > kLogOverflow)
        throw NumericalError("ScaledMatrix::dense: exponent exceeds floating range");
    return std::exp(log_scale) * value;
}

double ScaledMatrix::log_norm() const {
    double nrm = operator_norm(value);
    return log_scale + std::log(std::max(nrm, 1e-300));
}

double scaled_rel_error(const ScaledMatrix& a, const ScaledMatrix& b) {
    double common = std::max(a.log_scale, b.log_scale);
    ComplexMatrix av = std::exp(a.log_scale - common) * a.value;
    ComplexMatrix bv = std::exp(b.log_scale - common) * b.value;
    double denom = bv.norm();
    if (denom == 0.0) return av.norm();
    return (av - bv).norm() / denom;
}

// ------------------------------------------------------ exp_reference

namespace {

// Taylor + scaling-and-squaring core on a matrix with moderate norm.
ComplexMatrix exp_taylor_squaring(const ComplexMatrix& A) {
    int dim = int(A.rows());
    double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm bound
    int squarings = 0;
    double scaled = nrm;
    while (scaled > 0.5) {
        scaled *= 0.5;
        ++squarings;
    }
    ComplexMatrix B = A / std::pow(2.0, squarings);
    ComplexMatrix term = ComplexMatrix::Identity(dim, dim);
    ComplexMatrix sum = term;
    for (int k = 1; k <= 64; ++k) {
        term = (B * term) / double(k);
        sum += term;
        if (term.norm() <= 1e-18 * sum.norm()) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

}  // namespace

ScaledMatrix exp_reference(const ComplexMatrix& M, double t) {
    if (!is_finite(M)) throw InputError("exp_reference: non-finite entries");
    int dim = int(M.rows());
    if (t == 0.0) return {ComplexMatrix::Identity(dim, dim), 0.0};
    // Predict the result magnitude from the Gelfand--Shilov bound and
    // shift by the spectral abscissa when it would overflow.
    double log_bound = gelfand_shilov_log_bound(M, std::abs(t));
    double shift = 0.0;
    if (log_bound > kLogOverflow || std::abs(t) * operator_norm(M) > kLogOverflow) {
        shift = eigenvalues(M).abscissa();
    }
    ComplexMatrix A = t * (M - shift * ComplexMatrix::Identity(dim, dim));
    return {exp_taylor_squaring(A), shift * t};
}

// --------------------------------------------------- Newton interpolation

Complex InterpPoly::eval_newton(Complex z) const {
    Complex acc = 0.0;
    for (int k = int(newton_coeffs.size()) - 1; k >= 0; --k) {
        if (k < int(newton_coeffs.size()) - 1) acc *= z - node_sequence[k];
        acc += newton_coeffs[k];
    }
    return acc;
}

Complex InterpPoly::eval_power(Complex z) const {
    if (!power_coeffs) throw InputError("InterpPoly: power coefficients absent");
    Complex acc = 0.0;
    for (int k = int(power_coeffs->size()) - 1; k >= 0; --k)
        acc = acc * z + (*power_coeffs)[k];
    return acc;
}

InterpPoly newton_interp_exp(const NodeSet& nodes, double t) {
    if (nodes.nodes.empty()) throw InputError("newton_interp_exp: empty node set");
    double tol = cluster_tolerance(nodes.spread());
    if (nodes.min_separation() < tol)
        throw NumericalError(
            "newton_interp_exp: node separation below the clustering tolerance; "
            "re-cluster the spectrum before interpolating");

    std::vector<Complex> seq = nodes.sequence();
    int k = int(seq.size());
    // Divided differences of e^{tz} are the first row of exp(t J) for the
    // bidiagonal J with the nodes on the diagonal and ones above it
    // (Opitz). Shift by the mean real part to keep magnitudes tame.
    double sigma = nodes.mean().real();
    ComplexMatrix J = ComplexMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        J(i, i) = seq[i] - sigma;
        if (i + 1 < k) J(i, i + 1) = 1.0;
    }
    ComplexMatrix E = exp_taylor_squaring(t * J);
    double factor_log = sigma * t;
    if (std::abs(factor_log) > kLogOverflow)
        throw NumericalError("newton_interp_exp: coefficients overflow the floating range");
    double factor = std::exp(factor_log);

    InterpPoly p;
    p.nodes = nodes;
    p.node_sequence = seq;
    p.t = t;
    p.newton_coeffs.resize(k);
    for (int i = 0; i < k; ++i) p.newton_coeffs[i] = factor * E(0, i);
    return p;
}

std::vector<Complex> newton_to_power(const InterpPoly& p) {
    // accumulate prod (z - lambda_j) coefficients while adding c_k terms
    std::vector<Complex> power(p.newton_coeffs.size(), 0.0);
    std::vector<Complex> basis{1.0};  // coefficients of the running product
    for (size_t k = 0; k < p.newton_coeffs.size(); ++k) {
        for (size_t i = 0; i < basis.size(); ++i)
            power[i] += p.newton_coeffs[k] * basis[i];
        // multiply basis by (z - lambda_k)
        basis.push_back(0.0);
        for (size_t i = basis.size() - 1; i > 0; --i)
            basis[i] = basis[i - 1] - p.node_sequence[k] * basis[i];
        basis[0] *= -p.node_sequence[k];
    }
    return power;
}

// ------------------------------------------------------ contour forms

ContourSpec ContourSpec::default_for(const NodeSet& nodes) {
    ContourSpec c;
    c.center = nodes.mean();
    double maxdist = 0.0;
    for (const auto& nd : nodes.nodes)
        maxdist = std::max(maxdist, std::abs(nd.value - c.center));
    c.radius = 1.5 * maxdist + 1.0;
    c.node_count = 256;
    return c;
}

bool ContourSpec::encloses(const NodeSet& nodes) const {
    for (const auto& nd : nodes.nodes)
        if (std::abs(nd.value - center) > radius - radius / 4.0) return false;
    return true;
}

namespace {

// Elementary symmetric polynomials tau_1..tau_m of the arguments xs,
// by the product recurrence over (1 + x_j y).
std::vector<Complex> elementary_symmetric(const std::vector<Complex>& xs) {
    std::vector<Complex> e(xs.size() + 1, 0.0);
    e[0] = 1.0;
    size_t filled = 0;
    for (Complex x : xs) {
        ++filled;
        for (size_t mu = filled; mu >= 1; --mu) e[mu] += x * e[mu - 1];
    }
    return e;  // e[mu] = tau_mu
}

// One trapezoid pass over a circle: accumulates, for each (k, l) with
// k + l <= m_total - 1, the integral I_{k+l+1}^{l} of
// f(z) (-z)^l tau_{k+l+1}(1/(z - lambda_j)). f is supplied by value at
// the quadrature points. Returns a (m x m) table indexed [l][mu-1].
std::vector<std::vector<Complex>> contour_integrals(
    const std::vector<Complex>& seq, Complex center, double radius, int count,
    const std::function<Complex(Complex)>& f) {
    int m_total = int(seq.size());
    std::vector<std::vector<Complex>> I(m_total,
                                        std::vector<Complex>(m_total, 0.0));
    for (int q = 0; q < count; ++q) {
        double theta = 2.0 * kPi * q / count;
        Complex z = center + radius * Complex(std::cos(theta), std::sin(theta));
        std::vector<Complex> xs(m_total);
        for (int j = 0; j < m_total; ++j) xs[j] = 1.0 / (z - seq[j]);
        std::vector<Complex> tau = elementary_symmetric(xs);
        Complex fz = f(z);
        // (1/2pi i) \oint g dz ~ (1/count) sum g(z_q) (z_q - center)
        Complex weight = (z - center) / double(count);
        Complex zl = 1.0;  // (-z)^l
        for (int l = 0; l < m_total; ++l) {
            for (int mu = l + 1; mu <= m_total; ++mu)
                I[l][mu - 1] += fz * zl * tau[mu] * weight;
            zl *= -z;
        }
    }
    return I;
}

std::vector<Complex> coeffs_from_integrals(
    const std::vector<std::vector<Complex>>& I, int m_total) {
    std::vector<Complex> a(m_total, 0.0);
    for (int k = 0; k < m_total; ++k)
        for (int l = 0; l <= m_total - k - 1; ++l)
            a[k] += binomial(k + l, k) * I[l][k + l];  // I_{k+l+1}^{l}
    return a;
}

double coeff_change(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace

std::vector<Complex> power_coeffs_contour(const NodeSet& nodes, double t,
                                          ContourSpec contour) {
    if (contour.node_count < 64 || contour.node_count % 2 != 0)
        throw InputError("power_coeffs_contour: node_count must be even and >= 64");
    if (!contour.encloses(nodes))
        throw InputError("power_coeffs_contour: contour does not enclose the nodes "
                         "with radius/4 clearance");
    std::vector<Complex> seq = nodes.sequence();
    int m_total = int(seq.size());
    auto f = [t](Complex z) { return std::exp(t * z); };

    auto run = [&](int count) {
        return coeffs_from_integrals(
            contour_integrals(seq, contour.center, contour.radius, count, f),
            m_total);
    };
    std::vector<Complex> prev = run(contour.node_count);
    for (int doubling = 0; doubling < 3; ++doubling) {
        std::vector<Complex> next = run(contour.node_count << (doubling + 1));
        if (coeff_change(prev, next) <= 1e-10) return next;
        prev = std::move(next);
    }
    throw NumericalError(
        "power_coeffs_contour: quadrature did not stabilize after doubling the "
        "contour resolution twice; enlarge node_count or re-center the contour");
}

ComplexMatrix eval_poly_at_matrix(const InterpPoly& p, const ComplexMatrix& M) {
    if (p.nodes.total() != M.rows())
        throw ContractError(
            "eval_poly_at_matrix: node count does not match the matrix dimension");
    // Computed eigenvalues of a defective matrix scatter like eps^{1/mult}
    // around the true value, so the node check has to allow that radius.
    int max_mult = 1;
    double max_abs = 0.0;
    for (const auto& nd : p.nodes.nodes) {
        max_mult = std::max(max_mult, nd.multiplicity);
        max_abs = std::max(max_abs, std::abs(nd.value));
    }
    double tol = 10.0 * cluster_tolerance(p.nodes.spread()) +
                 20.0 * (1.0 + max_abs) * std::pow(1e-16, 1.0 / max_mult);
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(M, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eval_poly_at_matrix: eigenvalue iteration failed");
    for (int i = 0; i < M.rows(); ++i) {
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& nd : p.nodes.nodes)
            dist = std::min(dist, std::abs(solver.eigenvalues()(i) - nd.value));
        if (dist > tol)
            throw ContractError(
                "eval_poly_at_matrix: polynomial nodes do not match the spectrum "
                "of M");
    }
    int dim = int(M.rows());
    ComplexMatrix I = ComplexMatrix::Identity(dim, dim);
    ComplexMatrix acc = p.newton_coeffs.back() * I;
    for (int k = int(p.newton_coeffs.size()) - 2; k >= 0; --k)
        acc = acc * (M - p.node_sequence[k] * I) + p.newton_coeffs[k] * I;
    return acc;
}

// ------------------------------------------------- Gelfand--Shilov bound

double gelfand_shilov_log_bound(const ComplexMatrix& M, double t) {
    if (t < 0) throw InputError("gelfand_shilov_bound: t must be >= 0");
    double omega = eigenvalues(M).abscissa();
    double nrm = operator_norm(M);
    int dim = int(M.rows());
    // log(1 + sum_{k=1}^{m-1} (2t ||M||)^k / k!) evaluated stably
    double log_terms = 0.0;  // log of the parenthesis
    if (dim > 1) {
        double x = 2.0 * t * nrm;
        double log_max = -std::numeric_limits<double>::infinity();
        std::vector<double> logs;
        logs.push_back(0.0);  // the leading 1
        double log_term = 0.0;
        for (int k = 1; k <= dim - 1; ++k) {
            log_term += std::log(std::max(x, 1e-300)) - std::log(double(k));
            logs.push_back(log_term);
        }
        for (double lv : logs) log_max = std::max(log_max, lv);
        double s = 0.0;
        for (double lv : logs) s += std::exp(lv - log_max);
        log_terms = log_max + std::log(s);
        if (x == 0.0) log_terms = 0.0;
    }
    return omega * t + log_terms;
}

double gelfand_shilov_bound(const ComplexMatrix& M, double t) {
    return std::exp(gelfand_shilov_log_bound(M, t));
}

// ------------------------------------------------------- decomposition

Complex default_decomposition_z0(const NodeSet& nodes) {
    return Complex(nodes.abscissa() + 1.0 + nodes.spread(), 0.0);
}

Decomposition propagator_decomposition(const OperatorSpec& op, double t,
                                       const RealVector& xi) {
    NodeSet nodes = eigenvalues(eval_symbol(op, xi));
    return propagator_decomposition(op, t, xi, default_decomposition_z0(nodes));
}

Decomposition propagator_decomposition(const OperatorSpec& op, double t,
                                       const RealVector& xi, Complex z0) {
    if (t < 0) throw InputError("propagator_decomposition: t must be >= 0");
    ComplexMatrix P = eval_symbol(op, xi);
    NodeSet nodes = eigenvalues(P);
    int m = op.m();
    double absc = nodes.abscissa();
    if (z0.real() <= absc + 1e-6)
        throw InputError(
            "propagator_decomposition: Re z0 must exceed the spectral abscissa");
    double dist_z0 = std::numeric_limits<double>::infinity();
    for (const auto& nd : nodes.nodes)
        dist_z0 = std::min(dist_z0, std::abs(z0 - nd.value));
    if (dist_z0 <= 1e-6)
        throw InputError("propagator_decomposition: z0 too close to the spectrum");

    // The integrand is meromorphic with poles only at the eigenvalues, so
    // the contour is a union of small circles, one per distinct node; each
    // stays well inside {Re z < Re z0}. e^{t abscissa} is factored out of
    // the integrand and carried as the log offset.
    std::vector<Complex> seq = nodes.sequence();
    double sigma = absc;
    auto f = [&](Complex z) {
        return std::exp(t * (z - sigma)) * std::pow(z - z0, -double(m + 1));
    };

    auto run = [&](int count) {
        std::vector<std::vector<Complex>> total(m, std::vector<Complex>(m, 0.0));
        for (const auto& nd : nodes.nodes) {
            double r = 0.45 * std::min({nodes.min_separation(),
                                        std::abs(z0 - nd.value),
                                        2.0 * (z0.real() - nd.value.real())});
            r = std::min(r, 1.0);
            auto I = contour_integrals(seq, nd.value, r, count, f);
            for (int l = 0; l < m; ++l)
                for (int mu = 0; mu < m; ++mu) total[l][mu] += I[l][mu];
        }
        return coeffs_from_integrals(total, m);
    };

    std::vector<Complex> a = run(256);
    bool stable = false;
    for (int doubling = 1; doubling <= 3 && !stable; ++doubling) {
        std::vector<Complex> next = run(256 << doubling);
        stable = coeff_change(a, next) <= 1e-10;
        a = std::move(next);
    }
    if (!stable)
        throw NumericalError(
            "propagator_decomposition: contour quadrature did not stabilize");

    // (P - z0)^{m+1} (sum_k a_k P^k) expanded into powers P^0..P^{2m}
    Decomposition dec;
    dec.z0 = z0;
    dec.log_offset = sigma * t;
    dec.p.assign(2 * m + 1, 0.0);
    std::vector<Complex> neg_z0_pow(m + 2, 1.0);
    for (int j = 1; j <= m + 1; ++j) neg_z0_pow[j] = neg_z0_pow[j - 1] * (-z0);
    for (int j = 0; j <= m + 1; ++j) {
        Complex binom_term = binomial(m + 1, j) * neg_z0_pow[m + 1 - j];
        for (int k = 0; k < m; ++k) {
            if (j + k <= 2 * m) dec.p[j + k] += binom_term * a[k];
        }
    }
    return dec;
}

ScaledMatrix reassemble_decomposition(const Decomposition& dec,
                                      const ComplexMatrix& M) {
    int dim = int(M.rows());
    ComplexMatrix acc = dec.p.back() * ComplexMatrix::Identity(dim, dim);
    for (int k = int(dec.p.size()) - 2; k >= 0; --k)
        acc = acc * M + dec.p[k] * ComplexMatrix::Identity(dim, dim);
    return {acc, dec.log_offset};
}

}  // namespace petrosem
