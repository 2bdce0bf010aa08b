#include "petrosem/operator_spec.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>

namespace petrosem {

std::vector<MultiIndex> multi_indices_up_to(int n, int max_order) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(n, 0);
    // depth-first enumeration, then sort into graded-lex
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == n) {
            out.emplace_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[pos] = v;
            rec(pos + 1, remaining - v);
        }
        cur[pos] = 0;
    };
    rec(0, max_order);
    std::sort(out.begin(), out.end());
    return out;
}

double operator_norm(const ComplexMatrix& M) {
    if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    return svd.singularValues()(0);
}

bool is_finite(const ComplexMatrix& M) {
    return M.allFinite();
}

OperatorSpec::OperatorSpec(int m, int n, int d,
                           std::map<MultiIndex, ComplexMatrix> terms)
    : m_(m), n_(n), d_(d), terms_(std::move(terms)) {
    if (m < 1 || n < 1 || d < 0)
        throw InputError("OperatorSpec: m, n must be >= 1 and d >= 0");
    bool has_top = false;
    for (const auto& [alpha, A] : terms_) {
        if (alpha.size() != n)
            throw InputError("OperatorSpec: multi-index length != n");
        if (alpha.order() > d)
            throw InputError("OperatorSpec: term order exceeds declared degree d");
        if (A.rows() != m || A.cols() != m)
            throw InputError("OperatorSpec: coefficient matrix is not m x m");
        if (!is_finite(A))
            throw InputError("OperatorSpec: non-finite coefficient entry");
        if (alpha.order() == d && A.cwiseAbs().maxCoeff() > 0.0) has_top = true;
    }
    if (!has_top)
        throw InputError("OperatorSpec: no nonzero term of order d (degree not tight)");
}

OperatorSpec OperatorSpec::unchecked(int m, int n, int d,
                                     std::map<MultiIndex, ComplexMatrix> terms) {
    OperatorSpec op;
    op.m_ = m;
    op.n_ = n;
    op.d_ = d;
    op.terms_ = std::move(terms);
    if (op.terms_.empty())
        op.terms_.emplace(MultiIndex::zero(n), ComplexMatrix::Zero(m, m));
    return op;
}

OperatorSpec OperatorSpec::operator+(const OperatorSpec& other) const {
    if (m_ != other.m_ || n_ != other.n_)
        throw InputError("OperatorSpec: dimension mismatch in sum");
    auto terms = terms_;
    for (const auto& [alpha, A] : other.terms_) {
        auto [it, inserted] = terms.emplace(alpha, A);
        if (!inserted) it->second += A;
    }
    return unchecked(m_, n_, std::max(d_, other.d_), std::move(terms));
}

OperatorSpec OperatorSpec::shifted(std::complex<double> c) const {
    auto terms = terms_;
    MultiIndex zero = MultiIndex::zero(n_);
    ComplexMatrix shift = c * ComplexMatrix::Identity(m_, m_);
    auto [it, inserted] = terms.emplace(zero, shift);
    if (!inserted) it->second += shift;
    return unchecked(m_, n_, d_, std::move(terms));
}

namespace {

// i^k for integer k >= 0, exact.
std::complex<double> i_power(int k) {
    switch (k & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// xi^alpha by repeated multiplication (exact for integer exponents).
double monomial(const RealVector& xi, const MultiIndex& alpha) {
    double r = 1.0;
    for (int i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha[i]; ++k) r *= xi(i);
    return r;
}

}  // namespace

ComplexMatrix eval_symbol(const OperatorSpec& op, const RealVector& xi) {
    if (xi.size() != op.n())
        throw InputError("eval_symbol: xi length does not match op.n");
    if (!xi.allFinite()) throw InputError("eval_symbol: non-finite xi");
    ComplexMatrix result = ComplexMatrix::Zero(op.m(), op.m());
    for (const auto& [alpha, A] : op.terms())
        result += (i_power(alpha.order()) * monomial(xi, alpha)) * A;
    return result;
}

OperatorSpec symbol_derivative(const OperatorSpec& op, const MultiIndex& alpha) {
    if (alpha.size() != op.n())
        throw InputError("symbol_derivative: alpha length does not match op.n");
    if (alpha.order() == 0) return op;
    std::map<MultiIndex, ComplexMatrix> terms;
    for (const auto& [beta, A] : op.terms()) {
        if (!beta.dominates(alpha)) continue;
        MultiIndex gamma = beta.minus(alpha);
        // d^alpha xi^beta = prod_i beta_i!/(beta_i - alpha_i)! xi^gamma
        double falling = 1.0;
        for (int i = 0; i < alpha.size(); ++i)
            for (int k = 0; k < alpha[i]; ++k) falling *= beta[i] - k;
        // stored in symbol convention: i^|beta| A = i^|gamma| A', so the
        // derivative coefficient picks up i^|alpha|
        ComplexMatrix Ad = i_power(alpha.order()) * falling * A;
        auto [it, inserted] = terms.emplace(gamma, Ad);
        if (!inserted) it->second += Ad;
    }
    int d = std::max(0, op.d() - alpha.order());
    return OperatorSpec::unchecked(op.m(), op.n(), d, std::move(terms));
}

ModeCoefficients apply_operator_modes(const OperatorSpec& op,
                                      const ModeCoefficients& coeffs) {
    ModeCoefficients out;
    for (const auto& [freq, v] : coeffs) {
        if (static_cast<int>(freq.size()) != op.n())
            throw InputError("apply_operator_modes: frequency length != n");
        if (!v.allFinite())
            throw InputError("apply_operator_modes: non-finite coefficient");
        RealVector xi = Eigen::Map<const RealVector>(freq.data(), freq.size());
        out.emplace(freq, eval_symbol(op, xi) * v);
    }
    return out;
}

}  // namespace petrosem
