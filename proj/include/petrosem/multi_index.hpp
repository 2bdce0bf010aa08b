#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <vector>

#include "petrosem/errors.hpp"

namespace petrosem {

/// Multi-index alpha = (alpha_1,...,alpha_n) of non-negative integers.
/// Ordered graded-lexicographically so that maps keyed by MultiIndex
/// iterate in a fixed, reproducible order.
class MultiIndex {
  public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : e_(std::move(entries)) {
        for (int v : e_)
            if (v < 0) throw InputError("MultiIndex: negative entry");
    }
    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

    int size() const { return static_cast<int>(e_.size()); }
    int operator[](int i) const { return e_[i]; }
    const std::vector<int>& entries() const { return e_; }

    /// |alpha| = alpha_1 + ... + alpha_n
    int order() const { return std::accumulate(e_.begin(), e_.end(), 0); }

    bool operator==(const MultiIndex& o) const { return e_ == o.e_; }

    /// Graded-lex: compare |alpha| first, then lexicographic on entries.
    std::strong_ordering operator<=>(const MultiIndex& o) const {
        if (auto c = order() <=> o.order(); c != 0) return c;
        return e_ <=> o.e_;
    }

    /// Componentwise beta <= alpha.
    bool dominates(const MultiIndex& beta) const {
        if (beta.size() != size()) return false;
        for (int i = 0; i < size(); ++i)
            if (beta[i] > e_[i]) return false;
        return true;
    }

    MultiIndex minus(const MultiIndex& beta) const {
        std::vector<int> r(e_);
        for (int i = 0; i < size(); ++i) r[i] -= beta[i];
        return MultiIndex(std::move(r));
    }

  private:
    std::vector<int> e_;
};

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Product of per-coordinate binomials C(alpha_i, beta_i).
inline double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
    double r = 1.0;
    for (int i = 0; i < alpha.size(); ++i) r *= binomial(alpha[i], beta[i]);
    return r;
}

/// All multi-indices of size n with order <= max_order, in graded-lex order.
std::vector<MultiIndex> multi_indices_up_to(int n, int max_order);

}  // namespace petrosem
