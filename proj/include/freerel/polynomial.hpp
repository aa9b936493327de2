#pragma once

// Sparse multivariate polynomials over an exact field, in the coordinate
// rings generated by x_{ij}(k) and y_{ij}(k,q).
//
// Terms are stored in descending graded-lexicographic order, with variables
// ordered by (kind, k, q, i, j). Printing walks the stored order, so output is
// byte-deterministic.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/field.hpp"

namespace freerel {

enum class VarKind : std::uint8_t { X = 0, Y = 1, Lambda = 2 };

/// A single indeterminate, packed into one 64-bit key whose integer order is
/// the documented variable order.
class Variable {
public:
    static constexpr std::uint32_t kMaxSlot = 0xFFFF;
    static constexpr std::uint32_t kMaxIndex = 0xFFF;

    static Variable x(std::uint32_t k, std::uint32_t i, std::uint32_t j) { return make(VarKind::X, k, 0, i, j); }
    static Variable y(std::uint32_t k, std::uint32_t q, std::uint32_t i, std::uint32_t j) {
        if (q == 0) throw DomainError("y-variable needs a derivation index q >= 1");
        return make(VarKind::Y, k, q, i, j);
    }
    /// Reserved auxiliary variable; the parser has no syntax for it.
    static Variable lambda() { return Variable(static_cast<std::uint64_t>(VarKind::Lambda) << 56U); }

    VarKind kind() const noexcept { return static_cast<VarKind>(key_ >> 56U); }
    std::uint32_t slot() const noexcept { return static_cast<std::uint32_t>((key_ >> 40U) & 0xFFFFU); }
    std::uint32_t deriv() const noexcept { return static_cast<std::uint32_t>((key_ >> 24U) & 0xFFFFU); }
    std::uint32_t row() const noexcept { return static_cast<std::uint32_t>((key_ >> 12U) & 0xFFFU); }
    std::uint32_t col() const noexcept { return static_cast<std::uint32_t>(key_ & 0xFFFU); }
    std::uint64_t key() const noexcept { return key_; }

    std::string str() const {
        std::ostringstream os;
        switch (kind()) {
            case VarKind::X: os << "x[" << row() << ',' << col() << "](" << slot() << ')'; break;
            case VarKind::Y: os << "y[" << row() << ',' << col() << "](" << slot() << ',' << deriv() << ')'; break;
            case VarKind::Lambda: os << "lambda"; break;
        }
        return os.str();
    }

    friend auto operator<=>(const Variable&, const Variable&) = default;
    friend bool operator==(const Variable&, const Variable&) = default;

private:
    explicit Variable(std::uint64_t key) : key_(key) {}

    static Variable make(VarKind kind, std::uint32_t k, std::uint32_t q, std::uint32_t i, std::uint32_t j) {
        if (k < 1 || k > kMaxSlot || q > kMaxSlot || i < 1 || j < 1 || i > kMaxIndex || j > kMaxIndex) {
            throw DomainError("variable index out of range");
        }
        return Variable((static_cast<std::uint64_t>(kind) << 56U) | (static_cast<std::uint64_t>(k) << 40U) |
                        (static_cast<std::uint64_t>(q) << 24U) | (static_cast<std::uint64_t>(i) << 12U) | j);
    }

    std::uint64_t key_;
};

/// Exponent vector: (variable, positive exponent) pairs sorted by variable.
class Monomial {
public:
    using Factor = std::pair<Variable, std::uint32_t>;

    Monomial() = default;
    explicit Monomial(Variable v, std::uint32_t e = 1) {
        if (e != 0) factors_.emplace_back(v, e);
    }
    /// Takes arbitrary (unsorted, repeated, zero) pairs and normalizes.
    explicit Monomial(std::vector<Factor> factors) : factors_(std::move(factors)) { normalize(); }

    const std::vector<Factor>& factors() const noexcept { return factors_; }
    bool is_one() const noexcept { return factors_.empty(); }

    std::uint64_t degree() const noexcept {
        std::uint64_t d = 0;
        for (const auto& f : factors_) d += f.second;
        return d;
    }

    std::uint32_t exponent(Variable v) const noexcept {
        auto it = std::lower_bound(factors_.begin(), factors_.end(), v,
                                   [](const Factor& f, Variable key) { return f.first < key; });
        return (it != factors_.end() && it->first == v) ? it->second : 0;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial r;
        r.factors_.reserve(a.factors_.size() + b.factors_.size());
        auto i = a.factors_.begin();
        auto j = b.factors_.begin();
        while (i != a.factors_.end() && j != b.factors_.end()) {
            if (i->first < j->first) {
                r.factors_.push_back(*i++);
            } else if (j->first < i->first) {
                r.factors_.push_back(*j++);
            } else {
                r.factors_.emplace_back(i->first, i->second + j->second);
                ++i;
                ++j;
            }
        }
        r.factors_.insert(r.factors_.end(), i, a.factors_.end());
        r.factors_.insert(r.factors_.end(), j, b.factors_.end());
        return r;
    }

    /// Graded lexicographic comparison: total degree first, then the monomial
    /// with the larger exponent on the earliest differing variable is larger.
    friend std::strong_ordering grlex(const Monomial& a, const Monomial& b) {
        if (auto c = a.degree() <=> b.degree(); c != 0) return c;
        std::size_t n = std::min(a.factors_.size(), b.factors_.size());
        for (std::size_t t = 0; t < n; ++t) {
            const auto& fa = a.factors_[t];
            const auto& fb = b.factors_[t];
            if (fa.first != fb.first) return fa.first < fb.first ? std::strong_ordering::greater : std::strong_ordering::less;
            if (fa.second != fb.second) return fa.second <=> fb.second;
        }
        return a.factors_.size() <=> b.factors_.size();
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;

    std::size_t hash() const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (const auto& f : factors_) {
            h ^= f.first.key() + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U);
            h ^= f.second + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U);
        }
        return static_cast<std::size_t>(h);
    }

    std::string str() const {
        std::string s;
        for (const auto& f : factors_) {
            if (!s.empty()) s += " * ";
            s += f.first.str();
            if (f.second != 1) s += "^" + std::to_string(f.second);
        }
        return s.empty() ? "1" : s;
    }

private:
    void normalize() {
        std::sort(factors_.begin(), factors_.end(), [](const Factor& a, const Factor& b) { return a.first < b.first; });
        std::vector<Factor> merged;
        for (const auto& f : factors_) {
            if (!merged.empty() && merged.back().first == f.first) {
                merged.back().second += f.second;
            } else {
                merged.push_back(f);
            }
        }
        std::erase_if(merged, [](const Factor& f) { return f.second == 0; });
        factors_ = std::move(merged);
    }

    std::vector<Factor> factors_;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const noexcept { return m.hash(); }
};

template <Field F>
class Polynomial {
public:
    using Element = typename F::Element;
    struct Term {
        Monomial mono;
        Element coeff;
    };

    explicit Polynomial(F field) : field_(std::move(field)) {}

    static Polynomial constant(const F& field, const Element& c) {
        Polynomial p(field);
        if (!field.is_zero(c)) p.terms_.push_back({Monomial{}, c});
        return p;
    }
    static Polynomial constant(const F& field, long long c) { return constant(field, field.from_int(c)); }
    static Polynomial variable(const F& field, Variable v) {
        Polynomial p(field);
        p.terms_.push_back({Monomial(v), field.one()});
        return p;
    }
    static Polynomial monomial(const F& field, Monomial m, const Element& c) {
        Polynomial p(field);
        if (!field.is_zero(c)) p.terms_.push_back({std::move(m), c});
        return p;
    }
    /// Sums arbitrary (monomial, coefficient) pairs.
    static Polynomial from_terms(const F& field, std::vector<Term> terms) {
        Accumulator acc;
        for (auto& t : terms) accumulate(field, acc, std::move(t.mono), t.coeff);
        return from_accumulator(field, std::move(acc));
    }

    const F& field() const noexcept { return field_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    bool is_constant() const noexcept { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one()); }
    Element constant_value() const {
        if (!is_constant()) throw DomainError("polynomial is not constant: " + str());
        return terms_.empty() ? field_.zero() : terms_[0].coeff;
    }

    std::uint64_t total_degree() const noexcept { return terms_.empty() ? 0 : terms_.front().mono.degree(); }

    /// All variables occurring in some term, ascending.
    std::set<Variable> variables() const {
        std::set<Variable> vs;
        for (const auto& t : terms_)
            for (const auto& f : t.mono.factors()) vs.insert(f.first);
        return vs;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        if (!(a.field_ == b.field_) || a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i) {
            if (!(a.terms_[i].mono == b.terms_[i].mono)) return false;
            if (!a.field_.is_zero(a.field_.sub(a.terms_[i].coeff, b.terms_[i].coeff))) return false;
        }
        return true;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) { return merge(a, b, false); }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return merge(a, b, true); }
    Polynomial operator-() const {
        Polynomial r(field_);
        r.terms_ = terms_;
        for (auto& t : r.terms_) t.coeff = field_.neg(t.coeff);
        return r;
    }
    Polynomial& operator+=(const Polynomial& b) { return *this = *this + b; }
    Polynomial& operator-=(const Polynomial& b) { return *this = *this - b; }
    Polynomial& operator*=(const Polynomial& b) { return *this = *this * b; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        check_same_field(a, b);
        if (a.is_zero() || b.is_zero()) return Polynomial(a.field_);
        if (a.is_constant()) return b.scaled(a.terms_[0].coeff);
        if (b.is_constant()) return a.scaled(b.terms_[0].coeff);
        Accumulator acc;
        acc.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) accumulate(a.field_, acc, ta.mono * tb.mono, a.field_.mul(ta.coeff, tb.coeff));
        return from_accumulator(a.field_, std::move(acc));
    }

    Polynomial scaled(const Element& c) const {
        Polynomial r(field_);
        if (field_.is_zero(c)) return r;
        r.terms_.reserve(terms_.size());
        for (const auto& t : terms_) {
            Element v = field_.mul(t.coeff, c);
            if (!field_.is_zero(v)) r.terms_.push_back({t.mono, v});
        }
        return r;
    }

    Polynomial pow(std::uint64_t e) const {
        Polynomial result = constant(field_, field_.one());
        Polynomial base = *this;
        while (e != 0) {
            if (e & 1U) result = result * base;
            e >>= 1U;
            if (e != 0) base = base * base;
        }
        return result;
    }

    /// Canonical text: `c * x[i,j](k)^e * ... + ...`, "0" for zero.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& t : terms_) {
            bool neg = field_.is_negative(t.coeff);
            Element mag = neg ? field_.neg(t.coeff) : t.coeff;
            if (first) {
                if (neg) s += "-";
            } else {
                s += neg ? " - " : " + ";
            }
            first = false;
            bool unit = field_.is_zero(field_.sub(mag, field_.one()));
            if (t.mono.is_one()) {
                s += field_.format(mag);
            } else if (unit) {
                s += t.mono.str();
            } else {
                s += field_.format(mag) + " * " + t.mono.str();
            }
        }
        return s;
    }

private:
    using Accumulator = std::unordered_map<Monomial, Element, MonomialHash>;

    static void accumulate(const F& field, Accumulator& acc, Monomial m, const Element& c) {
        auto [it, inserted] = acc.try_emplace(std::move(m), c);
        if (!inserted) it->second = field.add(it->second, c);
    }

    static Polynomial from_accumulator(const F& field, Accumulator acc) {
        Polynomial p(field);
        p.terms_.reserve(acc.size());
        for (auto& [m, c] : acc)
            if (!field.is_zero(c)) p.terms_.push_back({m, c});
        std::sort(p.terms_.begin(), p.terms_.end(), [](const Term& a, const Term& b) { return grlex(a.mono, b.mono) > 0; });
        return p;
    }

    static void check_same_field(const Polynomial& a, const Polynomial& b) {
        if (!(a.field_ == b.field_)) throw DomainError("field mismatch: " + a.field_.name() + " vs " + b.field_.name());
    }

    static Polynomial merge(const Polynomial& a, const Polynomial& b, bool subtract) {
        check_same_field(a, b);
        const F& field = a.field_;
        Polynomial r(field);
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < a.terms_.size() || j < b.terms_.size()) {
            std::strong_ordering c = std::strong_ordering::equal;
            if (i == a.terms_.size()) {
                c = std::strong_ordering::less;
            } else if (j == b.terms_.size()) {
                c = std::strong_ordering::greater;
            } else {
                c = grlex(a.terms_[i].mono, b.terms_[j].mono);
            }
            if (c > 0) {
                r.terms_.push_back(a.terms_[i++]);
            } else if (c < 0) {
                const Term& t = b.terms_[j++];
                r.terms_.push_back({t.mono, subtract ? field.neg(t.coeff) : t.coeff});
            } else {
                Element v = subtract ? field.sub(a.terms_[i].coeff, b.terms_[j].coeff)
                                     : field.add(a.terms_[i].coeff, b.terms_[j].coeff);
                if (!field.is_zero(v)) r.terms_.push_back({a.terms_[i].mono, v});
                ++i;
                ++j;
            }
        }
        return r;
    }

    F field_;
    std::vector<Term> terms_;
};

/// Formal partial derivative; the integer exponent is mapped into the field.
template <Field F>
Polynomial<F> partial_derivative(const Polynomial<F>& f, Variable v) {
    const F& field = f.field();
    std::vector<typename Polynomial<F>::Term> out;
    for (const auto& t : f.terms()) {
        std::uint32_t e = t.mono.exponent(v);
        if (e == 0) continue;
        auto c = field.mul(t.coeff, field.from_int(e));
        if (field.is_zero(c)) continue;
        std::vector<Monomial::Factor> fs = t.mono.factors();
        for (auto& fac : fs)
            if (fac.first == v) --fac.second;
        out.push_back({Monomial(std::move(fs)), c});
    }
    return Polynomial<F>::from_terms(field, std::move(out));
}

/// Simultaneous substitution; unmapped variables stay put.
template <Field F>
Polynomial<F> substitute(const Polynomial<F>& f, const std::map<Variable, Polynomial<F>>& images) {
    const F& field = f.field();
    if (images.empty()) return f;
    for (const auto& [v, img] : images)
        if (!(img.field() == field)) throw DomainError("field mismatch in substitution image");

    std::map<std::pair<Variable, std::uint32_t>, Polynomial<F>> power_cache;
    auto image_power = [&](Variable v, std::uint32_t e) -> const Polynomial<F>& {
        auto key = std::make_pair(v, e);
        auto it = power_cache.find(key);
        if (it == power_cache.end()) it = power_cache.emplace(key, images.at(v).pow(e)).first;
        return it->second;
    };

    Polynomial<F> result(field);
    for (const auto& t : f.terms()) {
        std::vector<Monomial::Factor> kept;
        std::vector<std::pair<Variable, std::uint32_t>> replaced;
        for (const auto& fac : t.mono.factors()) {
            if (images.count(fac.first))
                replaced.push_back(fac);
            else
                kept.push_back(fac);
        }
        Polynomial<F> term = Polynomial<F>::monomial(field, Monomial(std::move(kept)), t.coeff);
        for (const auto& [v, e] : replaced) {
            term = term * image_power(v, e);
            if (term.is_zero()) break;
        }
        result += term;
    }
    return result;
}

/// Divides every exponent of the listed variables by p. Each such exponent
/// must already be a multiple of p.
template <Field F>
Polynomial<F> frobenius_contract(const Polynomial<F>& f, const std::set<Variable>& vars, std::uint64_t p) {
    if (p < 2) throw DomainError("frobenius_contract needs p >= 2");
    std::vector<typename Polynomial<F>::Term> out;
    for (const auto& t : f.terms()) {
        std::vector<Monomial::Factor> fs = t.mono.factors();
        for (auto& fac : fs) {
            if (!vars.count(fac.first)) continue;
            if (fac.second % p != 0) {
                throw DomainError("exponent of " + fac.first.str() + " in monomial " + t.mono.str() +
                                  " is not divisible by " + std::to_string(p));
            }
            fac.second = static_cast<std::uint32_t>(fac.second / p);
        }
        out.push_back({Monomial(std::move(fs)), t.coeff});
    }
    return Polynomial<F>::from_terms(f.field(), std::move(out));
}

/// The derivation d_q on the extended ring: sum over x_{ij}(k) of
/// (df/dx_{ij}(k)) * y_{ij}(k,q). y-variables are constants for d_q.
template <Field F>
Polynomial<F> derive_polynomial(const Polynomial<F>& f, std::uint32_t q) {
    if (q < 1) throw DomainError("derivation index q must be >= 1");
    const F& field = f.field();
    std::vector<typename Polynomial<F>::Term> out;
    for (const auto& t : f.terms()) {
        const auto& fs = t.mono.factors();
        for (std::size_t idx = 0; idx < fs.size(); ++idx) {
            Variable v = fs[idx].first;
            if (v.kind() != VarKind::X) continue;
            auto c = field.mul(t.coeff, field.from_int(fs[idx].second));
            if (field.is_zero(c)) continue;
            std::vector<Monomial::Factor> nf = fs;
            --nf[idx].second;
            nf.emplace_back(Variable::y(v.slot(), q, v.row(), v.col()), 1);
            out.push_back({Monomial(std::move(nf)), c});
        }
    }
    return Polynomial<F>::from_terms(field, std::move(out));
}

}  // namespace freerel
