#pragma once

// Exact coefficient fields. Every algebraic container in the library is a
// template over one of these policies; a field object travels with each
// value so that mixing F_3 and F_5 data is caught at run time.

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "freerel/error.hpp"

namespace freerel {

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e != 0) {
        if (e & 1U) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1U;
    }
    return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin; the witness set is exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % small == 0) return n == small;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = detail::powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = detail::mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// F_p for a word-sized prime p. Elements are least nonnegative residues.
class PrimeField {
public:
    using Element = std::uint64_t;

    explicit PrimeField(std::uint64_t p) : p_(p) {
        if (!is_prime(p)) throw DomainError("F_p requires a prime p, got " + std::to_string(p));
    }

    std::uint64_t characteristic() const noexcept { return p_; }
    std::string name() const { return "F_" + std::to_string(p_); }

    Element zero() const noexcept { return 0; }
    Element one() const noexcept { return 1 % p_; }

    Element from_int(long long v) const {
        long long r = v % static_cast<long long>(p_);
        if (r < 0) r += static_cast<long long>(p_);
        return static_cast<Element>(r);
    }

    Element from_integer(const mpz_class& v) const {
        mpz_class r;
        mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), p_);
        return r.get_ui();
    }

    Element from_rational(const mpz_class& num, const mpz_class& den) const {
        Element d = from_integer(den);
        if (d == 0) throw DomainError("denominator " + den.get_str() + " vanishes in " + name());
        return mul(from_integer(num), inv(d));
    }

    Element add(Element a, Element b) const noexcept {
        Element s = a + b;
        return (s >= p_ || s < a) ? s - p_ : s;
    }
    Element sub(Element a, Element b) const noexcept { return a >= b ? a - b : a + (p_ - b); }
    Element neg(Element a) const noexcept { return a == 0 ? 0 : p_ - a; }
    Element mul(Element a, Element b) const noexcept { return detail::mulmod(a, b, p_); }
    Element pow(Element a, std::uint64_t e) const noexcept { return detail::powmod(a, e, p_); }

    Element inv(Element a) const {
        if (a == 0) throw DomainError("division by zero in " + name());
        return detail::powmod(a, p_ - 2, p_);
    }

    bool is_zero(Element a) const noexcept { return a == 0; }
    bool is_negative(Element) const noexcept { return false; }
    std::string format(Element a) const { return std::to_string(a); }

    template <class Rng>
    Element random(Rng& rng, long long /*bound*/ = 0) const {
        std::uniform_int_distribution<std::uint64_t> dist(0, p_ - 1);
        return dist(rng);
    }

    friend bool operator==(const PrimeField& a, const PrimeField& b) noexcept { return a.p_ == b.p_; }

private:
    std::uint64_t p_;
};

/// The rationals with GMP arbitrary-precision numerators and denominators.
class RationalField {
public:
    using Element = mpq_class;

    std::uint64_t characteristic() const noexcept { return 0; }
    std::string name() const { return "Q"; }

    Element zero() const { return Element(0); }
    Element one() const { return Element(1); }
    Element from_int(long long v) const { return Element(static_cast<long>(v)); }
    Element from_integer(const mpz_class& v) const { return Element(v); }
    Element from_rational(const mpz_class& num, const mpz_class& den) const {
        if (den == 0) throw DomainError("zero denominator");
        Element r(num, den);
        r.canonicalize();
        return r;
    }

    Element add(const Element& a, const Element& b) const { return a + b; }
    Element sub(const Element& a, const Element& b) const { return a - b; }
    Element neg(const Element& a) const { return -a; }
    Element mul(const Element& a, const Element& b) const { return a * b; }
    Element pow(const Element& a, std::uint64_t e) const {
        Element r(1);
        Element b = a;
        while (e != 0) {
            if (e & 1U) r *= b;
            b *= b;
            e >>= 1U;
        }
        return r;
    }
    Element inv(const Element& a) const {
        if (a == 0) throw DomainError("division by zero in Q");
        return Element(1) / a;
    }

    bool is_zero(const Element& a) const { return sgn(a) == 0; }
    bool is_negative(const Element& a) const { return sgn(a) < 0; }
    std::string format(const Element& a) const { return a.get_str(); }

    /// Uniform integer in [-bound, bound].
    template <class Rng>
    Element random(Rng& rng, long long bound = 5) const {
        std::uniform_int_distribution<long long> dist(-bound, bound);
        return from_int(dist(rng));
    }

    friend bool operator==(const RationalField&, const RationalField&) noexcept { return true; }
};

template <class F>
concept Field = requires(const F& f, typename F::Element a) {
    { f.characteristic() } -> std::convertible_to<std::uint64_t>;
    { f.add(a, a) } -> std::convertible_to<typename F::Element>;
    { f.mul(a, a) } -> std::convertible_to<typename F::Element>;
    { f.is_zero(a) } -> std::convertible_to<bool>;
};

/// Run-time choice of field, as parsed from `f<p>` or `q`.
using FieldSpec = std::variant<PrimeField, RationalField>;

inline FieldSpec parse_field(const std::string& text) {
    if (text == "q" || text == "Q") return RationalField{};
    if (text.size() >= 2 && (text[0] == 'f' || text[0] == 'F')) {
        std::uint64_t p = 0;
        for (std::size_t i = 1; i < text.size(); ++i) {
            char c = text[i];
            if (c < '0' || c > '9') throw DomainError("bad field '" + text + "': expected f<prime> or q");
            p = p * 10 + static_cast<std::uint64_t>(c - '0');
            if (p > (1ULL << 62)) throw DomainError("prime in '" + text + "' exceeds machine-word range");
        }
        return PrimeField(p);
    }
    throw DomainError("bad field '" + text + "': expected f<prime> or q");
}

template <class Fn>
decltype(auto) with_field(const FieldSpec& spec, Fn&& fn) {
    return std::visit([&](const auto& f) -> decltype(auto) { return fn(f); }, spec);
}

}  // namespace freerel
