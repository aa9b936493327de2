#pragma once

// Exact linear algebra over the coefficient fields: small dense matrices of
// field elements (used for group samples and concrete substitutions) and
// incremental exact rank of sparse row sets (used by the certificates).

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/field.hpp"
#include "freerel/poly_matrix.hpp"

namespace freerel {

template <Field F>
class DenseMatrix {
public:
    using Element = typename F::Element;

    DenseMatrix(F field, std::size_t rows, std::size_t cols)
        : field_(std::move(field)), rows_(rows), cols_(cols), data_(rows * cols, field_.zero()) {}

    static DenseMatrix identity(const F& field, std::size_t n) {
        DenseMatrix m(field, n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = field.one();
        return m;
    }

    const F& field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Element& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Element& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            if (!a.field_.is_zero(a.field_.sub(a.data_[i], b.data_[i]))) return false;
        return true;
    }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
        if (a.cols_ != b.rows_) throw DomainError("dense product shape mismatch");
        DenseMatrix r(a.field_, a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a.field_.is_zero(a(i, k))) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) = a.field_.add(r(i, j), a.field_.mul(a(i, k), b(k, j)));
            }
        return r;
    }

    DenseMatrix transpose() const {
        DenseMatrix r(field_, cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    /// A* = -J A^T J, via the same entrywise rule as PolyMatrix.
    DenseMatrix symplectic_transpose() const {
        if (rows_ != cols_ || rows_ % 2 != 0) throw DomainError("symplectic transpose needs an even square matrix");
        const std::size_t h = rows_ / 2;
        DenseMatrix r(field_, rows_, cols_);
        auto swap_half = [h](std::size_t i) { return i < h ? i + h : i - h; };
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                const Element& v = (*this)(swap_half(j), swap_half(i));
                r(i, j) = ((i < h) == (j >= h)) ? field_.neg(v) : v;
            }
        return r;
    }

    bool is_identity() const { return rows_ == cols_ && *this == identity(field_, rows_); }

    /// Gauss-Jordan inverse; throws DomainError on a singular input.
    DenseMatrix inverse() const {
        if (rows_ != cols_) throw DomainError("inverse of a non-square matrix");
        const std::size_t n = rows_;
        DenseMatrix a = *this;
        DenseMatrix inv = identity(field_, n);
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            while (piv < n && field_.is_zero(a(piv, c))) ++piv;
            if (piv == n) throw DomainError("matrix is singular");
            if (piv != c)
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(a(piv, j), a(c, j));
                    std::swap(inv(piv, j), inv(c, j));
                }
            const Element s = field_.inv(a(c, c));
            for (std::size_t j = 0; j < n; ++j) {
                a(c, j) = field_.mul(a(c, j), s);
                inv(c, j) = field_.mul(inv(c, j), s);
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == c || field_.is_zero(a(r, c))) continue;
                const Element m = a(r, c);
                for (std::size_t j = 0; j < n; ++j) {
                    a(r, j) = field_.sub(a(r, j), field_.mul(m, a(c, j)));
                    inv(r, j) = field_.sub(inv(r, j), field_.mul(m, inv(c, j)));
                }
            }
        }
        return inv;
    }

    bool is_invertible() const {
        try {
            (void)inverse();
            return true;
        } catch (const DomainError&) {
            return false;
        }
    }

    PolyMatrix<F> to_poly() const {
        PolyMatrix<F> m(field_, rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(i, j) = Polynomial<F>::constant(field_, (*this)(i, j));
        return m;
    }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < rows_; ++i) {
            s += "[";
            for (std::size_t j = 0; j < cols_; ++j) s += (j ? " " : "") + field_.format((*this)(i, j));
            s += "]\n";
        }
        return s;
    }

private:
    F field_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Element> data_;
};

// ---------------------------------------------------------------------------
// Exact rank

namespace detail {

/// Sparse row as (column, value) pairs sorted by column.
template <class E>
using SparseRow = std::vector<std::pair<std::size_t, E>>;

}  // namespace detail

/// Incremental row-echelon rank over F_p. Pivot rows are kept monic and keyed
/// by their leading column; a new row is reduced at its leading entry until
/// it either vanishes or opens a new pivot.
class PrimeRankAccumulator {
public:
    using Row = detail::SparseRow<std::uint64_t>;

    explicit PrimeRankAccumulator(PrimeField field) : field_(field) {}

    /// Returns true when the row increased the rank.
    bool add(Row row) {
        normalize_row(row);
        while (!row.empty()) {
            auto it = pivots_.find(row.front().first);
            if (it == pivots_.end()) {
                const auto s = field_.inv(row.front().second);
                for (auto& e : row) e.second = field_.mul(e.second, s);
                nonzeros_ += row.size();
                pivots_.emplace(row.front().first, std::move(row));
                return true;
            }
            row = axpy(row, it->second, field_.neg(row.front().second));
        }
        return false;
    }

    std::size_t rank() const noexcept { return pivots_.size(); }
    std::size_t nonzeros() const noexcept { return nonzeros_; }

private:
    void normalize_row(Row& row) const {
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::erase_if(row, [](const auto& e) { return e.second == 0; });
    }

    /// row + c * pivot
    Row axpy(const Row& row, const Row& pivot, std::uint64_t c) const {
        Row out;
        out.reserve(row.size() + pivot.size());
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < row.size() || j < pivot.size()) {
            if (j == pivot.size() || (i < row.size() && row[i].first < pivot[j].first)) {
                out.push_back(row[i++]);
            } else if (i == row.size() || pivot[j].first < row[i].first) {
                out.emplace_back(pivot[j].first, field_.mul(c, pivot[j].second));
                ++j;
            } else {
                auto v = field_.add(row[i].second, field_.mul(c, pivot[j].second));
                if (v != 0) out.emplace_back(row[i].first, v);
                ++i;
                ++j;
            }
        }
        return out;
    }

    PrimeField field_;
    std::map<std::size_t, Row> pivots_;
    std::size_t nonzeros_ = 0;
};

/// Incremental rank over Q, fraction-free: rows are scaled to primitive
/// integer vectors and eliminated by r <- lead(p) r - lead(r) p, followed by
/// division by the content. No rational arithmetic happens inside the loop.
class RationalRankAccumulator {
public:
    using Row = detail::SparseRow<mpz_class>;

    bool add(const detail::SparseRow<mpq_class>& qrow) {
        mpz_class den = 1;
        for (const auto& [c, v] : qrow) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
        Row row;
        row.reserve(qrow.size());
        for (const auto& [c, v] : qrow) {
            if (sgn(v) == 0) continue;
            mpz_class z = v.get_num() * (den / v.get_den());
            row.emplace_back(c, std::move(z));
        }
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return add_integer(std::move(row));
    }

    bool add_integer(Row row) {
        make_primitive(row);
        while (!row.empty()) {
            auto it = pivots_.find(row.front().first);
            if (it == pivots_.end()) {
                nonzeros_ += row.size();
                pivots_.emplace(row.front().first, std::move(row));
                return true;
            }
            row = eliminate(row, it->second);
            make_primitive(row);
        }
        return false;
    }

    std::size_t rank() const noexcept { return pivots_.size(); }
    std::size_t nonzeros() const noexcept { return nonzeros_; }

private:
    static void make_primitive(Row& row) {
        if (row.empty()) return;
        mpz_class g = 0;
        for (const auto& e : row) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.second.get_mpz_t());
            if (g == 1) break;
        }
        if (row.front().second < 0) g = -g;
        if (g != 1)
            for (auto& e : row) mpz_divexact(e.second.get_mpz_t(), e.second.get_mpz_t(), g.get_mpz_t());
    }

    /// lead(p) * row - lead(row) * p; the leading column cancels.
    static Row eliminate(const Row& row, const Row& p) {
        const mpz_class a = p.front().second;
        const mpz_class b = row.front().second;
        Row out;
        out.reserve(row.size() + p.size());
        std::size_t i = 1;
        std::size_t j = 1;
        while (i < row.size() || j < p.size()) {
            if (j == p.size() || (i < row.size() && row[i].first < p[j].first)) {
                out.emplace_back(row[i].first, a * row[i].second);
                ++i;
            } else if (i == row.size() || p[j].first < row[i].first) {
                out.emplace_back(p[j].first, -b * p[j].second);
                ++j;
            } else {
                mpz_class v = a * row[i].second - b * p[j].second;
                if (v != 0) out.emplace_back(row[i].first, std::move(v));
                ++i;
                ++j;
            }
        }
        return out;
    }

    std::map<std::size_t, Row> pivots_;
    std::size_t nonzeros_ = 0;
};

/// Dense Bareiss elimination on an integer matrix; every division is exact.
inline std::size_t bareiss_rank(std::vector<std::vector<mpz_class>> m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size();
    const std::size_t cols = m.front().size();
    mpz_class prev = 1;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                mpz_class v = m[rank][c] * m[r][j] - m[r][c] * m[rank][j];
                mpz_divexact(m[r][j].get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        ++rank;
    }
    return rank;
}

/// Field-dispatched rank accumulator.
template <Field F>
class RankAccumulator;

template <>
class RankAccumulator<PrimeField> {
public:
    explicit RankAccumulator(const PrimeField& f) : acc_(f) {}
    bool add(detail::SparseRow<std::uint64_t> row) { return acc_.add(std::move(row)); }
    std::size_t rank() const noexcept { return acc_.rank(); }
    std::size_t nonzeros() const noexcept { return acc_.nonzeros(); }

private:
    PrimeRankAccumulator acc_;
};

template <>
class RankAccumulator<RationalField> {
public:
    explicit RankAccumulator(const RationalField&) {}
    bool add(const detail::SparseRow<mpq_class>& row) { return acc_.add(row); }
    std::size_t rank() const noexcept { return acc_.rank(); }
    std::size_t nonzeros() const noexcept { return acc_.nonzeros(); }

private:
    RationalRankAccumulator acc_;
};

}  // namespace freerel
