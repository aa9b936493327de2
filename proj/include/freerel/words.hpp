#pragma once

// Words in the letters x_k, x_k^T, y_{k,q}, y_{k,q}^T with the involution
// (a_1...a_r)^T = a_r^T ... a_1^T, cyclic equivalence, primitivity, and the
// constructive decompositions used by the linear-independence arguments.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freerel/error.hpp"

namespace freerel {

/// Letter identity without the transpose flag: x_k is (k, 0), y_{k,q} is (k, q).
struct LetterBase {
    std::uint32_t k = 1;
    std::uint32_t q = 0;

    friend auto operator<=>(const LetterBase&, const LetterBase&) = default;

    bool is_x() const noexcept { return q == 0; }
    std::string str() const { return q == 0 ? "x" + std::to_string(k) : "y" + std::to_string(k) + "_" + std::to_string(q); }
};

/// Ordered by (k, q, transposed).
struct Letter {
    std::uint32_t k = 1;
    std::uint32_t q = 0;
    bool transposed = false;

    friend auto operator<=>(const Letter&, const Letter&) = default;

    static Letter x(std::uint32_t k, bool t = false) { return {k, 0, t}; }
    static Letter y(std::uint32_t k, std::uint32_t q, bool t = false) { return {k, q, t}; }

    LetterBase base() const noexcept { return {k, q}; }
    Letter transpose() const noexcept { return {k, q, !transposed}; }

    std::string str() const {
        std::string b = base().str();
        return transposed ? "T(" + b + ")" : b;
    }
};

using Word = std::vector<Letter>;

inline std::string word_str(const Word& w) {
    std::string s;
    for (const auto& l : w) {
        if (!s.empty()) s += "*";
        s += l.str();
    }
    return s;
}

inline Word involution(const Word& a) {
    Word r(a.rbegin(), a.rend());
    for (auto& l : r) l = l.transpose();
    return r;
}

inline Word concat(const Word& a, const Word& b) {
    Word r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

inline Word word_power(const Word& a, std::size_t m) {
    Word r;
    r.reserve(a.size() * m);
    for (std::size_t i = 0; i < m; ++i) r.insert(r.end(), a.begin(), a.end());
    return r;
}

/// Rotation starting at position s: a_{s+1} ... a_r a_1 ... a_s.
inline Word rotate(const Word& a, std::size_t s) {
    Word r;
    r.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[(s + i) % a.size()]);
    return r;
}

namespace detail {

inline bool rotation_matches(const Word& a, std::size_t s, const Word& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[(s + i) % a.size()] != b[i]) return false;
    return true;
}

}  // namespace detail

inline bool is_cyclic_equivalent(const Word& a, const Word& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (detail::rotation_matches(a, s, b)) return true;
    return a.empty();
}

inline bool is_equivalent(const Word& a, const Word& b) {
    return is_cyclic_equivalent(a, b) || is_cyclic_equivalent(a, involution(b));
}

/// Length of the shortest e with a = e^m.
inline std::size_t primitive_period(const Word& a) {
    const std::size_t n = a.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool periodic = true;
        for (std::size_t i = p; i < n && periodic; ++i) periodic = a[i] == a[i - p];
        if (periodic) return p;
    }
    return n;
}

inline bool is_primitive(const Word& a) { return !a.empty() && primitive_period(a) == a.size(); }

/// Degree of a in a letter base: occurrences of b and b^T.
inline std::size_t degree_in(const Word& a, LetterBase b) {
    std::size_t n = 0;
    for (const auto& l : a)
        if (l.base() == b) ++n;
    return n;
}

/// A ~-class of primitive words, named by its least member over all
/// rotations of the word and of its involution.
struct WordClass {
    Word canonical;
    bool symmetric = false;  // a ~c a^T

    std::size_t length() const noexcept { return canonical.size(); }

    /// Shorter words first, then lexicographic.
    friend std::strong_ordering operator<=>(const WordClass& a, const WordClass& b) {
        if (auto c = a.canonical.size() <=> b.canonical.size(); c != 0) return c;
        return std::lexicographical_compare_three_way(a.canonical.begin(), a.canonical.end(), b.canonical.begin(),
                                                      b.canonical.end());
    }
    friend bool operator==(const WordClass& a, const WordClass& b) { return a.canonical == b.canonical; }
};

struct CanonicalForm {
    WordClass root;
    std::size_t power = 1;

    friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

/// Least rotation of a or a^T. Quadratic in the length.
inline Word least_representative(const Word& a) {
    if (a.empty()) throw DomainError("cannot canonicalize the empty word");
    Word best = a;
    const Word t = involution(a);
    for (const Word* src : {&a, &t}) {
        for (std::size_t s = 0; s < a.size(); ++s) {
            Word cand = rotate(*src, s);
            if (cand < best) best = std::move(cand);
        }
    }
    return best;
}

/// a = r^power with r primitive; root is r's class.
inline CanonicalForm canonicalize(const Word& a) {
    if (a.empty()) throw DomainError("cannot canonicalize the empty word");
    const std::size_t period = primitive_period(a);
    Word root(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(period));
    CanonicalForm out;
    out.power = a.size() / period;
    out.root.symmetric = is_cyclic_equivalent(root, involution(root));
    out.root.canonical = least_representative(root);
    return out;
}

enum class SubwordMode { Plain, Transposed };

/// |i|_m: the representative of i mod m in 1..m.
inline long long residue_1_based(long long i, long long m) {
    long long r = ((i - 1) % m + m) % m;
    return r + 1;
}

/// Plain: a_i = b_{|l+i-1|_s}. Transposed: a_i = (b_{|l-i+1|_s})^T.
inline bool subword_check(const Word& a, const Word& b, long long l, SubwordMode mode) {
    if (l < 1) throw DomainError("subword offset l must be >= 1");
    if (b.empty()) return a.empty();
    const auto s = static_cast<long long>(b.size());
    for (long long i = 1; i <= static_cast<long long>(a.size()); ++i) {
        const Letter& ai = a[static_cast<std::size_t>(i - 1)];
        if (mode == SubwordMode::Plain) {
            if (ai != b[static_cast<std::size_t>(residue_1_based(l + i - 1, s) - 1)]) return false;
        } else {
            if (ai != b[static_cast<std::size_t>(residue_1_based(l - i + 1, s) - 1)].transpose()) return false;
        }
    }
    return true;
}

struct CommutingRoot {
    Word e;
    std::size_t i = 0;
    std::size_t j = 0;
};

/// If bc = cb, finds e with b = e^i and c = e^j by repeatedly peeling the
/// shorter word off the front of the longer one.
inline std::optional<CommutingRoot> commuting_root(const Word& b, const Word& c) {
    if (b.empty() || c.empty()) throw DomainError("commuting_root needs nonempty words");
    if (concat(b, c) != concat(c, b)) return std::nullopt;

    Word u = b;
    Word v = c;
    while (u.size() != v.size()) {
        if (u.size() < v.size()) std::swap(u, v);
        // u = v u1 with u1 v = v u1
        if (!std::equal(v.begin(), v.end(), u.begin())) {
            throw InvariantViolation("commuting words failed to share a prefix: " + word_str(u) + ", " + word_str(v));
        }
        u.erase(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(v.size()));
    }
    if (u != v) throw InvariantViolation("peeling ended with distinct equal-length words");
    CommutingRoot out{u, b.size() / u.size(), c.size() / u.size()};
    if (word_power(out.e, out.i) != b || word_power(out.e, out.j) != c) {
        throw InvariantViolation("commuting root does not reproduce its inputs");
    }
    return out;
}

/// If b = b^T, returns c with b = c c^T: peel a letter y from the front,
/// which forces y^T at the back, and recurse on the middle.
inline std::optional<Word> palindrome_decompose(const Word& b) {
    if (b.empty()) throw DomainError("palindrome_decompose needs a nonempty word");
    if (b != involution(b)) return std::nullopt;
    Word c;
    std::size_t lo = 0;
    std::size_t hi = b.size();
    while (lo < hi) {
        if (hi - lo == 1) throw InvariantViolation("a single letter never equals its own transpose");
        const Letter y = b[lo];
        if (b[hi - 1] != y.transpose()) throw InvariantViolation("self-transposed word lost its mirror letter");
        c.push_back(y);
        ++lo;
        --hi;
    }
    return c;
}

/// Letters x_1..x_d, followed by their transposes when requested.
inline std::vector<Letter> x_alphabet(std::uint32_t d, bool with_transposes) {
    std::vector<Letter> out;
    for (std::uint32_t k = 1; k <= d; ++k) {
        out.push_back(Letter::x(k));
        if (with_transposes) out.push_back(Letter::x(k, true));
    }
    return out;
}

/// Every word of the given length over the alphabet, in lexicographic order
/// of alphabet positions.
inline std::vector<Word> all_words(const std::vector<Letter>& alphabet, std::size_t length) {
    std::vector<Word> out;
    if (alphabet.empty() || length == 0) return out;
    std::vector<std::size_t> idx(length, 0);
    while (true) {
        Word w;
        w.reserve(length);
        for (auto i : idx) w.push_back(alphabet[i]);
        out.push_back(std::move(w));
        std::size_t pos = length;
        while (pos > 0 && idx[pos - 1] + 1 == alphabet.size()) idx[--pos] = 0;
        if (pos == 0) break;
        ++idx[pos - 1];
    }
    return out;
}

/// One class per ~-class of primitive words with length <= max_len, sorted.
inline std::vector<WordClass> primitive_classes(const std::vector<Letter>& alphabet, std::size_t max_len) {
    std::vector<WordClass> out;
    for (std::size_t len = 1; len <= max_len; ++len) {
        for (const Word& w : all_words(alphabet, len)) {
            if (!is_primitive(w)) continue;
            CanonicalForm cf = canonicalize(w);
            if (cf.root.canonical == w) out.push_back(std::move(cf.root));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace freerel
