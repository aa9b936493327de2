#pragma once

// The free commutative ring on symbols sigma_t(a), a ranging over ~-classes
// of primitive words, together with the formal derivations d_q and the
// reduction steps that take an arbitrary element to a multilinear one.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/field.hpp"
#include "freerel/words.hpp"

namespace freerel {

/// sigma_t(a) with t >= 1; sigma_0 = 1 is never stored.
struct SigmaFactor {
    std::uint32_t t = 1;
    WordClass cls;

    std::size_t degree() const noexcept { return t * cls.length(); }
    std::size_t degree_in(LetterBase b) const { return t * freerel::degree_in(cls.canonical, b); }

    friend std::strong_ordering operator<=>(const SigmaFactor& a, const SigmaFactor& b) {
        if (auto c = a.cls <=> b.cls; c != 0) return c;
        return a.t <=> b.t;
    }
    friend bool operator==(const SigmaFactor& a, const SigmaFactor& b) { return a.t == b.t && a.cls == b.cls; }

    std::string str() const {
        if (t == 1) return "tr(" + word_str(cls.canonical) + ")";
        return "sigma(" + std::to_string(t) + ", " + word_str(cls.canonical) + ")";
    }
};

/// sigma_t of a primitive word, keyed by the word's class.
inline SigmaFactor make_factor(std::uint32_t t, const Word& a) {
    if (t < 1) throw DomainError("sigma_t needs t >= 1 (sigma_0 is the constant 1)");
    CanonicalForm cf = canonicalize(a);
    if (cf.power != 1) throw DomainError("word " + word_str(a) + " is not primitive");
    return SigmaFactor{t, std::move(cf.root)};
}

/// Commutative monomial: factors sorted ascending with positive multiplicities.
class SigmaMonomial {
public:
    using Entry = std::pair<SigmaFactor, std::uint32_t>;

    SigmaMonomial() = default;
    explicit SigmaMonomial(SigmaFactor f, std::uint32_t mult = 1) {
        if (mult) entries_.emplace_back(std::move(f), mult);
    }
    explicit SigmaMonomial(std::vector<Entry> entries) : entries_(std::move(entries)) { normalize(); }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool is_one() const noexcept { return entries_.empty(); }

    std::size_t degree() const noexcept {
        std::size_t d = 0;
        for (const auto& [f, m] : entries_) d += m * f.degree();
        return d;
    }
    std::size_t degree_in(LetterBase b) const {
        std::size_t d = 0;
        for (const auto& [f, m] : entries_) d += m * f.degree_in(b);
        return d;
    }
    /// Every letter base that occurs, mapped to its degree.
    std::map<LetterBase, std::size_t> letter_degrees() const {
        std::map<LetterBase, std::size_t> out;
        for (const auto& [f, m] : entries_)
            for (const auto& l : f.cls.canonical) out[l.base()] += m * f.t;
        return out;
    }

    friend SigmaMonomial operator*(const SigmaMonomial& a, const SigmaMonomial& b) {
        std::vector<Entry> e = a.entries_;
        e.insert(e.end(), b.entries_.begin(), b.entries_.end());
        return SigmaMonomial(std::move(e));
    }

    /// Degree first, then lexicographic over the factor list.
    friend std::strong_ordering operator<=>(const SigmaMonomial& a, const SigmaMonomial& b) {
        if (auto c = a.degree() <=> b.degree(); c != 0) return c;
        std::size_t n = std::min(a.entries_.size(), b.entries_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (auto c = a.entries_[i].first <=> b.entries_[i].first; c != 0) return c;
            if (auto c = b.entries_[i].second <=> a.entries_[i].second; c != 0) return c;
        }
        return a.entries_.size() <=> b.entries_.size();
    }
    friend bool operator==(const SigmaMonomial& a, const SigmaMonomial& b) { return a.entries_ == b.entries_; }

    /// Factors joined by '*', repeated per multiplicity; "1" when empty.
    std::string str() const {
        std::string s;
        for (const auto& [f, m] : entries_) {
            for (std::uint32_t i = 0; i < m; ++i) {
                if (!s.empty()) s += "*";
                s += f.str();
            }
        }
        return s.empty() ? "1" : s;
    }

private:
    void normalize() {
        std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
        std::vector<Entry> merged;
        for (auto& e : entries_) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(std::move(e));
        }
        std::erase_if(merged, [](const Entry& e) { return e.second == 0; });
        entries_ = std::move(merged);
    }

    std::vector<Entry> entries_;
};

template <Field F>
class SigmaPoly {
public:
    using Element = typename F::Element;
    using TermMap = std::map<SigmaMonomial, Element>;

    explicit SigmaPoly(F field) : field_(std::move(field)) {}

    static SigmaPoly constant(const F& field, const Element& c) { return monomial(field, SigmaMonomial{}, c); }
    static SigmaPoly monomial(const F& field, SigmaMonomial m, const Element& c) {
        SigmaPoly p(field);
        if (!field.is_zero(c)) p.terms_.emplace(std::move(m), c);
        return p;
    }
    static SigmaPoly generator(const F& field, SigmaFactor f) { return monomial(field, SigmaMonomial(std::move(f)), field.one()); }

    const F& field() const noexcept { return field_; }
    const TermMap& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    void add_term(const SigmaMonomial& m, const Element& c) {
        if (field_.is_zero(c)) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second = field_.add(it->second, c);
            if (field_.is_zero(it->second)) terms_.erase(it);
        }
    }

    friend bool operator==(const SigmaPoly& a, const SigmaPoly& b) {
        if (!(a.field_ == b.field_) || a.terms_.size() != b.terms_.size()) return false;
        auto i = a.terms_.begin();
        for (auto j = b.terms_.begin(); j != b.terms_.end(); ++i, ++j) {
            if (!(i->first == j->first) || !a.field_.is_zero(a.field_.sub(i->second, j->second))) return false;
        }
        return true;
    }

    friend SigmaPoly operator+(const SigmaPoly& a, const SigmaPoly& b) {
        check(a, b);
        SigmaPoly r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, c);
        return r;
    }
    friend SigmaPoly operator-(const SigmaPoly& a, const SigmaPoly& b) {
        check(a, b);
        SigmaPoly r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, a.field_.neg(c));
        return r;
    }
    friend SigmaPoly operator*(const SigmaPoly& a, const SigmaPoly& b) {
        check(a, b);
        SigmaPoly r(a.field_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, a.field_.mul(ca, cb));
        return r;
    }
    SigmaPoly operator-() const { return scaled(field_.neg(field_.one())); }
    SigmaPoly& operator+=(const SigmaPoly& b) { return *this = *this + b; }
    SigmaPoly& operator-=(const SigmaPoly& b) { return *this = *this - b; }

    SigmaPoly scaled(const Element& c) const {
        SigmaPoly r(field_);
        for (const auto& [m, v] : terms_) r.add_term(m, field_.mul(v, c));
        return r;
    }

    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }

    /// Canonical text in the sigma-expression grammar.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            bool neg = field_.is_negative(c);
            Element mag = neg ? field_.neg(c) : c;
            if (first)
                s += neg ? "-" : "";
            else
                s += neg ? " - " : " + ";
            first = false;
            bool unit = field_.is_zero(field_.sub(mag, field_.one()));
            if (m.is_one())
                s += field_.format(mag);
            else if (unit)
                s += m.str();
            else
                s += field_.format(mag) + "*" + m.str();
        }
        return s;
    }

private:
    static void check(const SigmaPoly& a, const SigmaPoly& b) {
        if (!(a.field_ == b.field_)) throw DomainError("field mismatch: " + a.field_.name() + " vs " + b.field_.name());
    }

    F field_;
    TermMap terms_;
};

// ---------------------------------------------------------------------------
// Degrees and the p-power split

/// m = plus * minus where plus collects, per factor, the largest multiple of
/// p in its multiplicity. For p = 0 the plus part is 1.
inline std::pair<SigmaMonomial, SigmaMonomial> split_p_parts(const SigmaMonomial& m, std::uint64_t p) {
    if (p == 0) return {SigmaMonomial{}, m};
    std::vector<SigmaMonomial::Entry> plus;
    std::vector<SigmaMonomial::Entry> minus;
    for (const auto& [f, mult] : m.entries()) {
        auto u = static_cast<std::uint32_t>(mult / p);
        auto v = static_cast<std::uint32_t>(mult % p);
        if (u) plus.emplace_back(f, static_cast<std::uint32_t>(u * p));
        if (v) minus.emplace_back(f, v);
    }
    return {SigmaMonomial(std::move(plus)), SigmaMonomial(std::move(minus))};
}

inline std::size_t x_degree(const SigmaMonomial& m) {
    std::size_t d = 0;
    for (const auto& [b, deg] : m.letter_degrees())
        if (b.is_x()) d += deg;
    return d;
}

struct SigmaDegrees {
    std::size_t deg = 0;
    std::size_t deg_plus = 0;
    std::size_t deg_minus = 0;
    std::map<LetterBase, std::size_t> deg_in_letter;  // max over monomials
};

template <Field F>
SigmaDegrees degrees(const SigmaPoly<F>& f) {
    const std::uint64_t p = f.field().characteristic();
    SigmaDegrees out;
    for (const auto& [m, c] : f.terms()) {
        auto [plus, minus] = split_p_parts(m, p);
        out.deg = std::max(out.deg, m.degree());
        out.deg_plus = std::max(out.deg_plus, plus.degree());
        out.deg_minus = std::max(out.deg_minus, x_degree(minus));
        for (const auto& [b, d] : m.letter_degrees()) out.deg_in_letter[b] = std::max(out.deg_in_letter[b], d);
    }
    return out;
}

template <Field F>
std::size_t degree_in_letter(const SigmaPoly<F>& f, LetterBase b) {
    std::size_t d = 0;
    for (const auto& [m, c] : f.terms()) d = std::max(d, m.degree_in(b));
    return d;
}

template <Field F>
bool is_multilinear(const SigmaPoly<F>& f) {
    for (const auto& [m, c] : f.terms())
        for (const auto& [b, d] : m.letter_degrees())
            if (d > 1) return false;
    return true;
}

/// The smallest qualifying letter set I, if any: every letter of a plus part
/// must be in I; letters in I must not occur in minus parts; letters outside
/// I have degree <= 1 in every minus part.
template <Field F>
std::optional<std::set<LetterBase>> is_p_multilinear(const SigmaPoly<F>& f) {
    const std::uint64_t p = f.field().characteristic();
    std::set<LetterBase> in_plus;
    std::vector<std::map<LetterBase, std::size_t>> minus_degrees;
    for (const auto& [m, c] : f.terms()) {
        auto [plus, minus] = split_p_parts(m, p);
        for (const auto& [b, d] : plus.letter_degrees()) in_plus.insert(b);
        minus_degrees.push_back(minus.letter_degrees());
    }
    for (const auto& md : minus_degrees) {
        for (const auto& [b, d] : md) {
            if (in_plus.count(b)) return std::nullopt;
            if (d > 1) return std::nullopt;
        }
    }
    return in_plus;
}

// ---------------------------------------------------------------------------
// Derivations

struct DeriveOptions {
    /// Permit y-letters whose index is >= q in the input. The letter rule
    /// still sends them to 0; every produced trace word must be primitive.
    bool allow_index_reuse = false;
};

namespace detail {

/// The linear part d_q(a) as a list of words (one per x-letter of a).
inline std::vector<Word> derive_word(const Word& a, std::uint32_t q) {
    std::vector<Word> out;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!a[j].base().is_x()) continue;
        Word w = a;
        w[j] = Letter::y(a[j].k, q, a[j].transposed);
        out.push_back(std::move(w));
    }
    return out;
}

inline void check_derivable(const Word& a, std::uint32_t q, const DeriveOptions& opt) {
    if (opt.allow_index_reuse) return;
    for (const auto& l : a) {
        if (l.q >= q) {
            throw DomainError("d_" + std::to_string(q) + " applied to an element containing " + l.base().str() +
                              "; inputs must only use y-letters with index < q");
        }
    }
}

}  // namespace detail

/// d_q(sigma_t(a)) = sum_{i<t} (-1)^i tr(a^i d_q(a)) sigma_{t-i-1}(a), for
/// any representative word a of the class.
template <Field F>
SigmaPoly<F> derive_sigma_word(const F& field, std::uint32_t t, const Word& a, std::uint32_t q,
                               const DeriveOptions& opt = {}) {
    if (q < 1) throw DomainError("derivation index q must be >= 1");
    if (t < 1) throw DomainError("sigma_t needs t >= 1");
    detail::check_derivable(a, q, opt);
    const std::vector<Word> da = detail::derive_word(a, q);
    SigmaPoly<F> out(field);
    if (da.empty()) return out;
    const SigmaFactor base = make_factor(1, a);
    for (std::uint32_t i = 0; i < t; ++i) {
        const Word prefix = word_power(a, i);
        const auto sign = (i % 2 == 0) ? field.one() : field.neg(field.one());
        SigmaMonomial rest;
        if (t - i - 1 > 0) rest = SigmaMonomial(SigmaFactor{t - i - 1, base.cls});
        for (const Word& term : da) {
            Word w = concat(prefix, term);
            CanonicalForm cf = canonicalize(w);
            if (cf.power != 1) {
                throw InvariantViolation("derivative produced the non-primitive trace word " + word_str(w) +
                                         " (from sigma_" + std::to_string(t) + "(" + word_str(a) + "))");
            }
            out.add_term(SigmaMonomial(SigmaFactor{1, std::move(cf.root)}) * rest, sign);
        }
    }
    return out;
}

/// Formal derivation d_q, extended to products by the Leibniz rule.
template <Field F>
SigmaPoly<F> derive(const SigmaPoly<F>& f, std::uint32_t q, const DeriveOptions& opt = {}) {
    const F& field = f.field();
    std::map<SigmaFactor, SigmaPoly<F>> cache;
    SigmaPoly<F> out(field);
    for (const auto& [m, c] : f.terms()) {
        for (std::size_t idx = 0; idx < m.entries().size(); ++idx) {
            const auto& [fac, mult] = m.entries()[idx];
            auto coeff = field.mul(c, field.from_int(mult));
            if (field.is_zero(coeff)) {
                detail::check_derivable(fac.cls.canonical, q, opt);
                continue;
            }
            auto it = cache.find(fac);
            if (it == cache.end()) it = cache.emplace(fac, derive_sigma_word(field, fac.t, fac.cls.canonical, q, opt)).first;
            if (it->second.is_zero()) continue;
            std::vector<SigmaMonomial::Entry> rest = m.entries();
            --rest[idx].second;
            SigmaMonomial rest_mono(std::move(rest));
            for (const auto& [dm, dc] : it->second.terms()) out.add_term(rest_mono * dm, field.mul(coeff, dc));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reduction to p-multilinear and multilinear form

template <Field F>
bool uses_y_letters(const SigmaPoly<F>& f) {
    for (const auto& [m, c] : f.terms())
        for (const auto& [fac, mult] : m.entries())
            for (const auto& l : fac.cls.canonical)
                if (!l.base().is_x()) return true;
    return false;
}

template <Field F>
struct MultilinearizeResult {
    SigmaPoly<F> g;
    std::uint32_t steps = 0;
    std::vector<std::size_t> deg_minus_trace;  // deg- before each step, then final
    std::set<LetterBase> witness;
    std::vector<SigmaPoly<F>> chain;  // d_1 f, d_2 d_1 f, ...
};

/// Applies d_1, d_2, ... until the element is p-multilinear. Each step must
/// keep it nonzero and strictly lower deg-; a failure of either is reported
/// as an InvariantViolation.
template <Field F>
MultilinearizeResult<F> p_multilinearize(const SigmaPoly<F>& f, bool allow_char2 = false) {
    if (f.is_zero()) throw DomainError("p_multilinearize needs a nonzero element");
    if (f.field().characteristic() == 2 && !allow_char2) {
        throw DomainError("p_multilinearize requires characteristic != 2 (use exploratory mode to override)");
    }
    if (uses_y_letters(f)) throw DomainError("p_multilinearize expects an element without y-letters");

    MultilinearizeResult<F> r{f, 0, {}, {}, {}};
    while (true) {
        const std::size_t dm = degrees(r.g).deg_minus;
        r.deg_minus_trace.push_back(dm);
        if (auto witness = is_p_multilinear(r.g)) {
            r.witness = *witness;
            return r;
        }
        SigmaPoly<F> next = derive(r.g, r.steps + 1);
        if (next.is_zero()) {
            throw InvariantViolation("d_" + std::to_string(r.steps + 1) + " annihilated " + r.g.str());
        }
        const std::size_t next_dm = degrees(next).deg_minus;
        if (next_dm >= dm) {
            throw InvariantViolation("deg- did not decrease (" + std::to_string(dm) + " -> " + std::to_string(next_dm) +
                                     ") at step " + std::to_string(r.steps + 1));
        }
        r.chain.push_back(next);
        r.g = std::move(next);
        ++r.steps;
    }
}

/// Applies an injective letter map to every factor and re-canonicalizes.
template <Field F>
SigmaPoly<F> map_letters(const SigmaPoly<F>& f, const std::function<Letter(const Letter&)>& phi) {
    SigmaPoly<F> out(f.field());
    for (const auto& [m, c] : f.terms()) {
        std::vector<SigmaMonomial::Entry> entries;
        for (const auto& [fac, mult] : m.entries()) {
            Word w;
            for (const auto& l : fac.cls.canonical) w.push_back(phi(l));
            CanonicalForm cf = canonicalize(w);
            if (cf.power != 1) throw InvariantViolation("letter map produced a non-primitive word " + word_str(w));
            entries.emplace_back(SigmaFactor{fac.t, std::move(cf.root)}, mult);
        }
        out.add_term(SigmaMonomial(std::move(entries)), c);
    }
    return out;
}

/// Replaces each y-letter base by a fresh x-slot <= d. A slot counts as
/// occupied when any letter x_k or y_{k,q} with that k occurs; free slots
/// are handed out in increasing order to the y-bases in increasing order.
template <Field F>
SigmaPoly<F> rename_y_to_x(const SigmaPoly<F>& f, std::uint32_t d) {
    std::set<std::uint32_t> occupied;
    std::set<LetterBase> ys;
    for (const auto& [m, c] : f.terms()) {
        for (const auto& [fac, mult] : m.entries()) {
            for (const auto& l : fac.cls.canonical) {
                occupied.insert(l.k);
                if (!l.base().is_x()) ys.insert(l.base());
            }
        }
    }
    if (ys.empty()) return f;
    std::map<LetterBase, std::uint32_t> phi;
    std::uint32_t slot = 1;
    for (const auto& b : ys) {
        while (occupied.count(slot)) ++slot;
        phi[b] = slot++;
    }
    std::uint32_t needed = slot - 1;
    if (needed > d) {
        throw DomainError("renaming " + std::to_string(ys.size()) + " y-letters into free x-slots needs d >= " +
                          std::to_string(needed) + ", got d = " + std::to_string(d));
    }
    return map_letters(f, [&](const Letter& l) {
        if (l.base().is_x()) return l;
        return Letter::x(phi.at(l.base()), l.transposed);
    });
}

/// For p-multilinear f, replaces each monomial h_w^p f_w^- by h_w f_w^-.
template <Field F>
SigmaPoly<F> strip_p_powers(const SigmaPoly<F>& f) {
    const std::uint64_t p = f.field().characteristic();
    if (p == 0) throw DomainError("strip_p_powers needs positive characteristic");
    if (!is_p_multilinear(f)) throw DomainError("strip_p_powers needs a p-multilinear element: " + f.str());
    SigmaPoly<F> out(f.field());
    for (const auto& [m, c] : f.terms()) {
        auto [plus, minus] = split_p_parts(m, p);
        std::vector<SigmaMonomial::Entry> root;
        for (const auto& [fac, mult] : plus.entries()) {
            if (mult % p != 0) throw DomainError("plus part is not a perfect p-th power in " + m.str());
            root.emplace_back(fac, static_cast<std::uint32_t>(mult / p));
        }
        out.add_term(SigmaMonomial(std::move(root)) * minus, c);
    }
    if (!is_multilinear(f)) {
        if (degrees(out).deg_plus >= degrees(f).deg_plus) {
            throw InvariantViolation("stripping p-th powers did not lower deg+ of " + f.str());
        }
    }
    if (out.is_zero() != f.is_zero()) throw InvariantViolation("stripping p-th powers changed zeroness");
    return out;
}

template <Field F>
struct ReductionRound {
    MultilinearizeResult<F> derivation;
    std::uint32_t slots = 0;  // x-slot budget used for renaming
    SigmaPoly<F> renamed;
    std::optional<SigmaPoly<F>> stripped;  // absent when renaming already gave a multilinear element
};

template <Field F>
struct ReductionResult {
    std::vector<ReductionRound<F>> rounds;
    SigmaPoly<F> result;
};

/// Slots that renaming may use: the given budget, or enough for every
/// occupied slot plus one fresh slot per y-letter base.
template <Field F>
std::uint32_t default_rename_budget(const SigmaPoly<F>& g) {
    std::uint32_t top = 0;
    std::set<LetterBase> ys;
    for (const auto& [m, c] : g.terms())
        for (const auto& [fac, mult] : m.entries())
            for (const auto& l : fac.cls.canonical) {
                top = std::max(top, l.k);
                if (!l.base().is_x()) ys.insert(l.base());
            }
    return top + static_cast<std::uint32_t>(ys.size());
}

/// Repeats: derive until p-multilinear, rename y-letters into free x-slots,
/// strip p-th powers; stops once the element is multilinear. The result is
/// nonzero whenever f is (each stage asserts it).
template <Field F>
ReductionResult<F> reduce_to_multilinear(const SigmaPoly<F>& f, std::optional<std::uint32_t> slots = std::nullopt,
                                         bool allow_char2 = false) {
    if (f.is_zero()) throw DomainError("the reduction needs a nonzero element");
    ReductionResult<F> out{{}, f};
    while (!is_multilinear(out.result)) {
        ReductionRound<F> round{p_multilinearize(out.result, allow_char2), 0, SigmaPoly<F>(f.field()), std::nullopt};
        round.slots = slots ? *slots : default_rename_budget(round.derivation.g);
        round.renamed = rename_y_to_x(round.derivation.g, round.slots);
        out.result = round.renamed;
        if (!is_multilinear(out.result)) {
            round.stripped = strip_p_powers(out.result);
            out.result = *round.stripped;
        }
        if (out.result.is_zero()) throw InvariantViolation("the reduction produced zero from " + f.str());
        out.rounds.push_back(std::move(round));
    }
    return out;
}

}  // namespace freerel
