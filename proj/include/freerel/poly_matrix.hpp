#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/polynomial.hpp"

namespace freerel {

/// Dense rows x cols matrix of polynomials over a single field.
template <Field F>
class PolyMatrix {
public:
    using Poly = Polynomial<F>;
    using Element = typename F::Element;

    PolyMatrix(F field, std::size_t rows, std::size_t cols)
        : field_(std::move(field)), rows_(rows), cols_(cols), entries_(rows * cols, Poly(field_)) {
        if (rows == 0 || cols == 0) throw DomainError("matrix dimensions must be positive");
    }

    static PolyMatrix identity(const F& field, std::size_t n) {
        PolyMatrix m(field, n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Poly::constant(field, field.one());
        return m;
    }

    /// e_{i,j} with 1-based indices.
    static PolyMatrix elementary(const F& field, std::size_t n, std::size_t i, std::size_t j) {
        if (i < 1 || j < 1 || i > n || j > n) throw DomainError("elementary matrix index out of range");
        PolyMatrix m(field, n, n);
        m(i - 1, j - 1) = Poly::constant(field, field.one());
        return m;
    }

    /// The generic matrix X_k (no q) or Y_{k,q}.
    static PolyMatrix generic(const F& field, VarKind kind, std::uint32_t k, std::optional<std::uint32_t> q, std::size_t n) {
        if (n < 1) throw DomainError("generic matrix size must be >= 1");
        if (kind == VarKind::X && q) throw DomainError("x-matrices take no derivation index");
        if (kind == VarKind::Y && (!q || *q < 1)) throw DomainError("y-matrices need a derivation index q >= 1");
        if (kind == VarKind::Lambda) throw DomainError("lambda is reserved");
        PolyMatrix m(field, n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                auto r = static_cast<std::uint32_t>(i + 1);
                auto c = static_cast<std::uint32_t>(j + 1);
                Variable v = kind == VarKind::X ? Variable::x(k, r, c) : Variable::y(k, *q, r, c);
                m(i, j) = Poly::variable(field, v);
            }
        }
        return m;
    }

    /// Rectangular generic matrix in x-variables of slot k.
    static PolyMatrix generic_rect(const F& field, std::uint32_t k, std::size_t rows, std::size_t cols) {
        PolyMatrix m(field, rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                m(i, j) = Poly::variable(field, Variable::x(k, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1)));
        return m;
    }

    const F& field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    Poly& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const Poly& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
        return a.field_ == b.field_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

    friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw DomainError("shape mismatch in product: " + a.shape() + " times " + b.shape());
        }
        PolyMatrix r(a.field_, a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Poly& aik = a(i, k);
                if (aik.is_zero()) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    const Poly& bkj = b(k, j);
                    if (bkj.is_zero()) continue;
                    r(i, j) += aik * bkj;
                }
            }
        }
        return r;
    }

    friend PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b) {
        a.require_same_shape(b);
        PolyMatrix r = a;
        for (std::size_t t = 0; t < r.entries_.size(); ++t) r.entries_[t] += b.entries_[t];
        return r;
    }

    friend PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b) {
        a.require_same_shape(b);
        PolyMatrix r = a;
        for (std::size_t t = 0; t < r.entries_.size(); ++t) r.entries_[t] -= b.entries_[t];
        return r;
    }

    PolyMatrix scaled(const Poly& s) const {
        PolyMatrix r = *this;
        for (auto& e : r.entries_) e = e * s;
        return r;
    }

    PolyMatrix transpose() const {
        PolyMatrix r(field_, cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    /// A* = -J A^T J with J = [[0, E], [-E, 0]]. Entrywise this is
    /// A*_{ij} = -s_i t_j A_{s(j), s(i)}, where s swaps the two halves,
    /// s_i = +1 on the top half and t_j = +1 on the right half.
    PolyMatrix symplectic_transpose() const {
        if (!is_square() || rows_ % 2 != 0) {
            throw DomainError("symplectic transpose needs a square matrix of even size, got " + shape());
        }
        const std::size_t d = rows_ / 2;
        auto swap_half = [d](std::size_t i) { return i < d ? i + d : i - d; };
        PolyMatrix r(field_, rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                const Poly& src = (*this)(swap_half(j), swap_half(i));
                bool negate = (i < d) == (j >= d);  // -(s_i * t_j) == -1 exactly when s_i == t_j
                r(i, j) = negate ? -src : src;
            }
        }
        return r;
    }

    Poly trace() const {
        require_square("trace");
        Poly s(field_);
        for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
        return s;
    }

    /// A^(p): every entry raised to the p-th power. Needs characteristic p.
    PolyMatrix entrywise_p_power(std::uint64_t p) const {
        if (field_.characteristic() != p) {
            throw DomainError("entrywise p-power with p=" + std::to_string(p) + " over " + field_.name());
        }
        PolyMatrix r = *this;
        for (auto& e : r.entries_) e = e.pow(p);
        return r;
    }

    /// Entrywise derivation d_q.
    PolyMatrix derive(std::uint32_t q) const {
        PolyMatrix r = *this;
        for (auto& e : r.entries_) e = derive_polynomial(e, q);
        return r;
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    /// Row-major: one row per line, entries separated by "; ".
    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < rows_; ++i) {
            s += "[";
            for (std::size_t j = 0; j < cols_; ++j) {
                if (j) s += "; ";
                s += (*this)(i, j).str();
            }
            s += "]\n";
        }
        return s;
    }

    void require_square(const char* what) const {
        if (!is_square()) throw DomainError(std::string(what) + " needs a square matrix, got " + shape());
    }

private:
    void require_same_shape(const PolyMatrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_) throw DomainError("shape mismatch: " + shape() + " vs " + b.shape());
    }

    F field_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Poly> entries_;
};

/// Product of a nonempty chain of matrices.
template <Field F>
PolyMatrix<F> mat_product(const std::vector<PolyMatrix<F>>& chain) {
    if (chain.empty()) throw DomainError("mat_product of an empty list");
    PolyMatrix<F> r = chain.front();
    for (std::size_t i = 1; i < chain.size(); ++i) r = r * chain[i];
    return r;
}

namespace detail {

struct SignedPermutation {
    std::vector<std::size_t> image;
    bool odd;
};

/// Sign from the cycle decomposition: a cycle of length L contributes L-1
/// transpositions.
inline bool permutation_is_odd(const std::vector<std::size_t>& perm) {
    std::vector<bool> seen(perm.size(), false);
    std::size_t transpositions = 0;
    for (std::size_t s = 0; s < perm.size(); ++s) {
        if (seen[s]) continue;
        std::size_t len = 0;
        for (std::size_t c = s; !seen[c]; c = perm[c]) {
            seen[c] = true;
            ++len;
        }
        transpositions += len - 1;
    }
    return transpositions % 2 == 1;
}

/// All permutations of {0..t-1} in lexicographic order.
inline const std::vector<SignedPermutation>& permutations(std::size_t t) {
    static thread_local std::vector<std::vector<SignedPermutation>> cache;
    if (cache.size() <= t) cache.resize(t + 1);
    auto& slot = cache[t];
    if (slot.empty()) {
        std::vector<std::size_t> p(t);
        std::iota(p.begin(), p.end(), 0);
        do {
            slot.push_back({p, permutation_is_odd(p)});
        } while (std::next_permutation(p.begin(), p.end()));
    }
    return slot;
}

}  // namespace detail

/// sigma_t(A): sum over t-element row subsets of the principal minor
/// determinants, each expanded over S_t. sigma_0 = 1.
template <Field F>
Polynomial<F> sigma_t(const PolyMatrix<F>& a, long long t) {
    a.require_square("sigma_t");
    const std::size_t n = a.rows();
    if (t < 0 || static_cast<std::size_t>(t) > n) {
        throw DomainError("sigma_t needs 0 <= t <= n; got t=" + std::to_string(t) + ", n=" + std::to_string(n));
    }
    const F& field = a.field();
    if (t == 0) return Polynomial<F>::constant(field, field.one());
    const auto tt = static_cast<std::size_t>(t);
    const auto& perms = detail::permutations(tt);

    Polynomial<F> total(field);
    std::vector<std::size_t> rows(tt);
    std::iota(rows.begin(), rows.end(), 0);
    while (true) {
        for (const auto& perm : perms) {
            Polynomial<F> prod = Polynomial<F>::constant(field, field.one());
            for (std::size_t r = 0; r < tt && !prod.is_zero(); ++r) prod = prod * a(rows[r], rows[perm.image[r]]);
            if (prod.is_zero()) continue;
            total = perm.odd ? total - prod : total + prod;
        }
        // next t-subset in lexicographic order
        std::size_t pos = tt;
        while (pos > 0 && rows[pos - 1] == n - tt + pos - 1) --pos;
        if (pos == 0) break;
        ++rows[pos - 1];
        for (std::size_t r = pos; r < tt; ++r) rows[r] = rows[r - 1] + 1;
    }
    return total;
}

/// Coefficients sigma_0..sigma_n read off det(A + lambda E), with the
/// determinant expanded by the Leibniz formula over S_n. Independent of
/// sigma_t's minor expansion.
template <Field F>
std::vector<Polynomial<F>> char_poly_sigma(const PolyMatrix<F>& a) {
    a.require_square("char_poly_sigma");
    const std::size_t n = a.rows();
    const F& field = a.field();
    const Variable lam = Variable::lambda();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j).variables().count(lam)) throw DomainError("input matrix uses the reserved variable lambda");

    PolyMatrix<F> shifted = a;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += Polynomial<F>::variable(field, lam);

    Polynomial<F> det(field);
    for (const auto& perm : detail::permutations(n)) {
        Polynomial<F> prod = Polynomial<F>::constant(field, field.one());
        for (std::size_t r = 0; r < n && !prod.is_zero(); ++r) prod = prod * shifted(r, perm.image[r]);
        det = perm.odd ? det - prod : det + prod;
    }

    std::vector<std::vector<typename Polynomial<F>::Term>> buckets(n + 1);
    for (const auto& term : det.terms()) {
        std::uint32_t e = term.mono.exponent(lam);
        std::vector<Monomial::Factor> rest;
        for (const auto& fac : term.mono.factors())
            if (fac.first != lam) rest.push_back(fac);
        buckets[n - e].push_back({Monomial(std::move(rest)), term.coeff});
    }
    std::vector<Polynomial<F>> sigmas;
    sigmas.reserve(n + 1);
    for (auto& b : buckets) sigmas.push_back(Polynomial<F>::from_terms(field, std::move(b)));
    return sigmas;
}

}  // namespace freerel
