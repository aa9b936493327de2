#pragma once

// Evaluation of symbolic elements at generic matrices (Psi_n and its
// extension to y-letters), relation scanners, the linear-independence
// certificate, group sampling and invariance checks, the elementary-matrix
// certificate for multilinear elements, and the derivation diagram check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/field.hpp"
#include "freerel/linalg.hpp"
#include "freerel/poly_matrix.hpp"
#include "freerel/polynomial.hpp"
#include "freerel/rng.hpp"
#include "freerel/sigma.hpp"
#include "freerel/words.hpp"

namespace freerel {

// ---------------------------------------------------------------------------
// Groups

enum class GroupKind { GL, O, Sp };

inline std::string group_name(GroupKind k) {
    switch (k) {
        case GroupKind::GL: return "GL";
        case GroupKind::O: return "O";
        case GroupKind::Sp: return "Sp";
    }
    return "?";
}

inline GroupKind parse_group(const std::string& s) {
    if (s == "GL" || s == "gl") return GroupKind::GL;
    if (s == "O" || s == "o") return GroupKind::O;
    if (s == "Sp" || s == "sp" || s == "SP") return GroupKind::Sp;
    throw DomainError("unknown group '" + s + "': expected GL, O or Sp");
}

struct GroupSpec {
    GroupKind kind = GroupKind::GL;
    std::size_t n = 1;
    bool exploratory = false;

    std::string str() const { return group_name(kind) + "(" + std::to_string(n) + ")"; }
};

/// Rejects Sp with odd n always, and O in characteristic 2 unless the
/// request is explicitly exploratory.
inline void validate_group(const GroupSpec& g, std::uint64_t characteristic) {
    if (g.n < 1) throw DomainError("matrix size n must be >= 1");
    if (g.kind == GroupKind::Sp && g.n % 2 != 0) {
        throw DomainError("Sp(n) needs even n, got n = " + std::to_string(g.n));
    }
    if (g.kind == GroupKind::O && characteristic == 2 && !g.exploratory) {
        throw DomainError("O(n) in characteristic 2 is outside the supported hypotheses (p != 2); "
                          "pass --exploratory to run it anyway");
    }
}

/// The generic matrix of a letter: X_k or Y_{k,q}, transposed per group.
template <Field F>
PolyMatrix<F> letter_matrix(const F& field, const Letter& b, const GroupSpec& g) {
    PolyMatrix<F> m = b.base().is_x() ? PolyMatrix<F>::generic(field, VarKind::X, b.k, std::nullopt, g.n)
                                      : PolyMatrix<F>::generic(field, VarKind::Y, b.k, b.q, g.n);
    if (!b.transposed) return m;
    switch (g.kind) {
        case GroupKind::GL:
            throw DomainError("transposed letter " + b.str() + " is not in the GL alphabet");
        case GroupKind::O: return m.transpose();
        case GroupKind::Sp: return m.symplectic_transpose();
    }
    return m;
}

/// Applies the group's transpose (A^T for O, A* for Sp) to a concrete matrix.
template <Field F>
DenseMatrix<F> group_transpose(const DenseMatrix<F>& a, GroupKind kind) {
    switch (kind) {
        case GroupKind::GL: throw DomainError("GL has no transpose letters");
        case GroupKind::O: return a.transpose();
        case GroupKind::Sp: return a.symplectic_transpose();
    }
    return a;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Evaluates sigma-polynomials through a letter -> matrix provider, caching
/// letter, word and factor images. sigma_t of a k x k product is 0 for t > k.
template <Field F>
class Evaluator {
public:
    using Provider = std::function<PolyMatrix<F>(const Letter&)>;

    Evaluator(F field, Provider provider) : field_(std::move(field)), provider_(std::move(provider)) {}

    const F& field() const noexcept { return field_; }

    const PolyMatrix<F>& letter(const Letter& l) {
        auto it = letters_.find(l);
        if (it == letters_.end()) it = letters_.emplace(l, provider_(l)).first;
        return it->second;
    }

    const PolyMatrix<F>& word_matrix(const Word& w) {
        if (w.empty()) throw DomainError("cannot evaluate the empty word");
        auto it = words_.find(w);
        if (it != words_.end()) return it->second;
        PolyMatrix<F> m = letter(w.front());
        for (std::size_t i = 1; i < w.size(); ++i) m = m * letter(w[i]);
        return words_.emplace(w, std::move(m)).first->second;
    }

    const Polynomial<F>& factor_image(const SigmaFactor& f) {
        auto it = factors_.find(f);
        if (it != factors_.end()) return it->second;
        const PolyMatrix<F>& m = word_matrix(f.cls.canonical);
        if (!m.is_square()) {
            throw DomainError("word " + word_str(f.cls.canonical) + " evaluates to a " + m.shape() +
                              " matrix; sigma_t needs a closed (square) product");
        }
        Polynomial<F> img = f.t <= m.rows() ? sigma_t(m, f.t) : Polynomial<F>(field_);
        return factors_.emplace(f, std::move(img)).first->second;
    }

    Polynomial<F> monomial_image(const SigmaMonomial& m) {
        Polynomial<F> r = Polynomial<F>::constant(field_, field_.one());
        for (const auto& [fac, mult] : m.entries()) {
            const Polynomial<F>& img = factor_image(fac);
            if (img.is_zero()) return Polynomial<F>(field_);
            r = r * img.pow(mult);
        }
        return r;
    }

    Polynomial<F> operator()(const SigmaPoly<F>& f) {
        if (!(f.field() == field_)) throw DomainError("field mismatch in evaluation");
        Polynomial<F> r(field_);
        for (const auto& [m, c] : f.terms()) r += monomial_image(m).scaled(c);
        return r;
    }

private:
    F field_;
    Provider provider_;
    std::map<Letter, PolyMatrix<F>> letters_;
    std::map<Word, PolyMatrix<F>> words_;
    std::map<SigmaFactor, Polynomial<F>> factors_;
};

template <Field F>
Evaluator<F> generic_evaluator(const F& field, const GroupSpec& g) {
    validate_group(g, field.characteristic());
    return Evaluator<F>(field, [field, g](const Letter& l) { return letter_matrix(field, l, g); });
}

/// Psi_n: sigma_t(a) -> sigma_t(X_a) for t <= n and 0 otherwise.
template <Field F>
Polynomial<F> psi_n(const SigmaPoly<F>& f, const GroupSpec& g) {
    auto ev = generic_evaluator(f.field(), g);
    return ev(f);
}

template <Field F>
bool is_relation(const SigmaPoly<F>& f, const GroupSpec& g) {
    return psi_n(f, g).is_zero();
}

struct RelationReport {
    std::vector<std::pair<std::size_t, bool>> per_n;
    std::optional<std::size_t> fails_at;  // smallest tested n where it is not a relation

    bool relation_at_all_tested_n() const { return !fails_at.has_value(); }
};

/// Evaluates f at every n in [n_min, n_max] (even n only for Sp).
template <Field F>
RelationReport free_scan(const SigmaPoly<F>& f, GroupKind kind, std::size_t n_min, std::size_t n_max,
                         bool exploratory = false) {
    RelationReport r;
    for (std::size_t n = std::max<std::size_t>(n_min, 1); n <= n_max; ++n) {
        if (kind == GroupKind::Sp && n % 2 != 0) continue;
        bool rel = is_relation(f, GroupSpec{kind, n, exploratory});
        r.per_n.emplace_back(n, rel);
        if (!rel && !r.fails_at) r.fails_at = n;
    }
    if (r.per_n.empty()) {
        throw DomainError("empty n-range [" + std::to_string(n_min) + ", " + std::to_string(n_max) + "] for " +
                          group_name(kind));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bases and the independence certificate

/// sigma_t(a) for every class a over the alphabet and every t with
/// t * |a| <= max_degree, sorted by degree and then by factor order.
inline std::vector<SigmaFactor> sigma_generators(const std::vector<Letter>& alphabet, std::size_t max_degree) {
    std::vector<SigmaFactor> gens;
    for (const auto& cls : primitive_classes(alphabet, max_degree)) {
        for (std::uint32_t t = 1; t * cls.length() <= max_degree; ++t) gens.push_back(SigmaFactor{t, cls});
    }
    std::stable_sort(gens.begin(), gens.end(), [](const SigmaFactor& a, const SigmaFactor& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        return a < b;
    });
    return gens;
}

/// Every product of generators with total degree in [min_degree, max_degree].
inline std::vector<SigmaMonomial> monomial_basis(const std::vector<SigmaFactor>& gens, std::size_t max_degree,
                                                 std::size_t min_degree = 1, std::size_t cap = 20000) {
    std::vector<SigmaMonomial> out;
    std::vector<SigmaMonomial::Entry> current;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t deg) {
        if (deg >= min_degree && !current.empty()) {
            out.emplace_back(current);
            if (out.size() > cap) {
                throw ResourceLimit("monomial basis exceeds the cap of " + std::to_string(cap) +
                                    " elements; lower the degree or the number of letters");
            }
        }
        for (std::size_t i = start; i < gens.size(); ++i) {
            const std::size_t gd = gens[i].degree();
            if (deg + gd > max_degree) continue;
            if (!current.empty() && current.back().first == gens[i]) {
                ++current.back().second;
                rec(i, deg + gd);
                --current.back().second;
            } else {
                current.emplace_back(gens[i], 1);
                rec(i, deg + gd);
                current.pop_back();
            }
        }
    };
    rec(0, 0);
    std::sort(out.begin(), out.end());
    return out;
}

struct CertificateLimits {
    std::size_t basis_cap = 20000;
    std::size_t nonzero_cap = 10'000'000;
};

struct CertificateReport {
    std::size_t basis_size = 0;
    std::size_t rank = 0;
    std::size_t blocks = 0;
    std::size_t nonzeros = 0;
    std::vector<SigmaMonomial> dependent;  // rows that did not raise the rank

    bool independent() const { return rank == basis_size; }
};

/// Multidegree of a monomial in the letter bases (x and y slots alike);
/// evaluation maps preserve it, so rank splits into these blocks.
inline std::vector<std::pair<LetterBase, std::size_t>> multidegree(const SigmaMonomial& m) {
    auto d = m.letter_degrees();
    return {d.begin(), d.end()};
}

/// Exact rank of the images of the basis, computed blockwise by multidegree.
template <Field F>
CertificateReport certify_basis(Evaluator<F>& ev, const std::vector<SigmaMonomial>& basis,
                                const CertificateLimits& limits = {}) {
    if (basis.size() > limits.basis_cap) {
        throw ResourceLimit("basis of " + std::to_string(basis.size()) + " monomials exceeds the cap of " +
                            std::to_string(limits.basis_cap));
    }
    std::map<std::vector<std::pair<LetterBase, std::size_t>>, std::vector<const SigmaMonomial*>> blocks;
    for (const auto& m : basis) blocks[multidegree(m)].push_back(&m);

    CertificateReport r;
    r.basis_size = basis.size();
    r.blocks = blocks.size();
    const F& field = ev.field();
    for (const auto& [key, members] : blocks) {
        std::unordered_map<Monomial, std::size_t, MonomialHash> columns;
        RankAccumulator<F> acc(field);
        for (const SigmaMonomial* m : members) {
            Polynomial<F> img = ev.monomial_image(*m);
            detail::SparseRow<typename F::Element> row;
            row.reserve(img.size());
            for (const auto& t : img.terms()) {
                auto [it, inserted] = columns.try_emplace(t.mono, columns.size());
                row.emplace_back(it->second, t.coeff);
            }
            if (!acc.add(std::move(row))) r.dependent.push_back(*m);
            if (r.nonzeros + acc.nonzeros() > limits.nonzero_cap) {
                throw ResourceLimit("elimination exceeded " + std::to_string(limits.nonzero_cap) +
                                    " stored nonzeros; lower the degree or n");
            }
        }
        r.rank += acc.rank();
        r.nonzeros += acc.nonzeros();
    }
    return r;
}

/// Letters available to a group: GL has no transposes.
inline std::vector<Letter> group_alphabet(GroupKind kind, std::uint32_t d) {
    return x_alphabet(d, kind != GroupKind::GL);
}

/// Rank of Psi_n on all monomials of degree 1..D in d letters.
template <Field F>
CertificateReport independence_certificate(const F& field, std::uint32_t d, std::size_t max_degree,
                                           const GroupSpec& g, const CertificateLimits& limits = {}) {
    if (max_degree < 1) throw DomainError("certificate degree must be >= 1");
    if (d < 1) throw DomainError("need at least one letter");
    auto basis = monomial_basis(sigma_generators(group_alphabet(g.kind, d), max_degree), max_degree, 1,
                                limits.basis_cap);
    auto ev = generic_evaluator(field, g);
    return certify_basis(ev, basis, limits);
}

// ---------------------------------------------------------------------------
// Group samples and invariance

namespace detail {

template <Field F>
DenseMatrix<F> random_invertible(const F& field, std::size_t n, Rng& rng) {
    while (true) {
        DenseMatrix<F> m(field, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = field.random(rng, 3);
        if (m.is_invertible()) return m;
    }
}

template <Field F>
DenseMatrix<F> signed_permutation(const F& field, std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseMatrix<F> m(field, n, n);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < n; ++i) m(i, perm[i]) = coin(rng) ? field.one() : field.neg(field.one());
    return m;
}

/// Pairs (a, b) with a^2 + b^2 = 1 and b != 0.
template <Field F>
std::vector<std::pair<typename F::Element, typename F::Element>> rotation_pairs(const F& field) {
    std::vector<std::pair<typename F::Element, typename F::Element>> out;
    if constexpr (std::is_same_v<F, RationalField>) {
        for (auto [a, b, c] : {std::tuple{3, 4, 5}, std::tuple{5, 12, 13}, std::tuple{8, 15, 17}}) {
            out.emplace_back(field.from_rational(a, c), field.from_rational(b, c));
            out.emplace_back(field.from_rational(b, c), field.from_rational(-a, c));
        }
    } else {
        const std::uint64_t p = field.characteristic();
        const std::uint64_t limit = std::min<std::uint64_t>(p, 512);
        for (std::uint64_t a = 0; a < limit; ++a)
            for (std::uint64_t b = 1; b < limit; ++b) {
                auto s = field.add(field.mul(a, a), field.mul(b, b));
                if (s == field.one()) out.emplace_back(a, b);
            }
    }
    return out;
}

template <Field F>
DenseMatrix<F> orthogonal_sample(const F& field, std::size_t n, Rng& rng) {
    DenseMatrix<F> m = signed_permutation(field, n, rng);
    const auto pairs = rotation_pairs(field);
    if (n < 2 || pairs.empty()) return m;
    std::uniform_int_distribution<int> count(0, 2);
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    for (int r = count(rng); r > 0; --r) {
        std::size_t i = idx(rng);
        std::size_t j = idx(rng);
        if (i == j) continue;
        auto [a, b] = pairs[pick(rng)];
        DenseMatrix<F> rot = DenseMatrix<F>::identity(field, n);
        rot(i, i) = a;
        rot(i, j) = b;
        rot(j, i) = field.neg(b);
        rot(j, j) = a;
        m = m * rot;
    }
    return m;
}

template <Field F>
DenseMatrix<F> symplectic_sample(const F& field, std::size_t n, Rng& rng) {
    const std::size_t h = n / 2;
    DenseMatrix<F> m = DenseMatrix<F>::identity(field, n);
    std::uniform_int_distribution<int> kind(0, 2);
    for (int step = 0; step < 3; ++step) {
        DenseMatrix<F> gen = DenseMatrix<F>::identity(field, n);
        int k = kind(rng);
        if (k < 2) {
            // [[E, B], [0, E]] or [[E, 0], [B, E]] with B symmetric
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = i; j < h; ++j) {
                    auto v = field.random(rng, 3);
                    if (k == 0) {
                        gen(i, h + j) = v;
                        gen(j, h + i) = v;
                    } else {
                        gen(h + i, j) = v;
                        gen(h + j, i) = v;
                    }
                }
        } else {
            // [[A, 0], [0, A^{-T}]]
            DenseMatrix<F> a = random_invertible(field, h, rng);
            DenseMatrix<F> ait = a.inverse().transpose();
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < h; ++j) {
                    gen(i, j) = a(i, j);
                    gen(h + i, h + j) = ait(i, j);
                }
        }
        m = m * gen;
    }
    return m;
}

}  // namespace detail

/// Verifies the defining equation of the group for a concrete matrix.
template <Field F>
bool in_group(const DenseMatrix<F>& a, GroupKind kind) {
    switch (kind) {
        case GroupKind::GL: return a.is_invertible();
        case GroupKind::O: return (a * a.transpose()).is_identity();
        case GroupKind::Sp: return (a * a.symplectic_transpose()).is_identity();
    }
    return false;
}

/// Seeded concrete elements of G; each one is checked against its
/// defining equation before being returned.
template <Field F>
std::vector<DenseMatrix<F>> group_sample(const F& field, const GroupSpec& g, std::size_t count, std::uint64_t seed) {
    validate_group(g, field.characteristic());
    Rng rng = make_rng(seed, "group-sample/" + group_name(g.kind) + "/" + std::to_string(g.n));
    std::vector<DenseMatrix<F>> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        DenseMatrix<F> m = [&] {
            switch (g.kind) {
                case GroupKind::GL: return detail::random_invertible(field, g.n, rng);
                case GroupKind::O: return detail::orthogonal_sample(field, g.n, rng);
                case GroupKind::Sp: return detail::symplectic_sample(field, g.n, rng);
            }
            throw InvariantViolation("unknown group kind");
        }();
        if (!in_group(m, g.kind)) {
            throw InvariantViolation("sampled matrix is not in " + g.str() + ":\n" + m.str());
        }
        out.push_back(std::move(m));
    }
    return out;
}

/// Entries of g^{-1} M g for the generic matrix M of one slot.
template <Field F>
void add_conjugated_images(std::map<Variable, Polynomial<F>>& images, const DenseMatrix<F>& g,
                           const DenseMatrix<F>& ginv, VarKind kind, std::uint32_t k, std::uint32_t q) {
    const F& field = g.field();
    const std::size_t n = g.rows();
    auto var = [&](std::size_t i, std::size_t j) {
        auto r = static_cast<std::uint32_t>(i + 1);
        auto c = static_cast<std::uint32_t>(j + 1);
        return kind == VarKind::X ? Variable::x(k, r, c) : Variable::y(k, q, r, c);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<typename Polynomial<F>::Term> terms;
            for (std::size_t a = 0; a < n; ++a) {
                if (field.is_zero(ginv(i, a))) continue;
                for (std::size_t b = 0; b < n; ++b) {
                    auto c = field.mul(ginv(i, a), g(b, j));
                    if (!field.is_zero(c)) terms.push_back({Monomial(var(a, b)), c});
                }
            }
            images.insert_or_assign(var(i, j), Polynomial<F>::from_terms(field, std::move(terms)));
        }
}

struct InvarianceReport {
    bool invariant = true;
    std::size_t samples_checked = 0;
    std::optional<std::size_t> failing_sample;
};

/// Substitutes X_k -> g^{-1} X_k g (and likewise for every Y_{k,q}) and
/// compares exactly. A finite sample: agreement is a necessary condition.
template <Field F>
InvarianceReport invariance_check_polynomial(const Polynomial<F>& p, const std::vector<DenseMatrix<F>>& samples) {
    std::set<std::tuple<VarKind, std::uint32_t, std::uint32_t>> slots;
    for (const Variable& v : p.variables()) {
        if (v.kind() == VarKind::Lambda) throw DomainError("invariance check on a polynomial containing lambda");
        slots.emplace(v.kind(), v.slot(), v.deriv());
    }
    InvarianceReport r;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const DenseMatrix<F>& g = samples[s];
        const DenseMatrix<F> ginv = g.inverse();
        std::map<Variable, Polynomial<F>> images;
        for (const auto& [kind, k, q] : slots) add_conjugated_images(images, g, ginv, kind, k, q);
        ++r.samples_checked;
        if (!(substitute(p, images) == p)) {
            r.invariant = false;
            r.failing_sample = s;
            return r;
        }
    }
    return r;
}

template <Field F>
InvarianceReport invariance_check(const SigmaPoly<F>& f, const GroupSpec& g, std::size_t samples, std::uint64_t seed) {
    return invariance_check_polynomial(psi_n(f, g), group_sample(f.field(), g, samples, seed));
}

// ---------------------------------------------------------------------------
// Elementary-matrix certificate for multilinear elements

/// Slots 1..d each occur exactly once (as x_k or x_k^T), no y-letters, and
/// only traces appear.
inline bool is_multilinear_full(const SigmaMonomial& m, std::uint32_t d) {
    std::vector<int> seen(d + 1, 0);
    for (const auto& [fac, mult] : m.entries()) {
        if (fac.t != 1) return false;
        for (const auto& l : fac.cls.canonical) {
            if (!l.base().is_x() || l.k < 1 || l.k > d) return false;
            seen[l.k] += static_cast<int>(mult);
        }
    }
    for (std::uint32_t k = 1; k <= d; ++k)
        if (seen[k] != 1) return false;
    return true;
}

inline std::uint32_t max_slot(const SigmaMonomial& m) {
    std::uint32_t d = 0;
    for (const auto& [fac, mult] : m.entries())
        for (const auto& l : fac.cls.canonical) d = std::max(d, l.k);
    return d;
}

/// Matrix size used by the certificate: n = d for GL and O, n = 2d for Sp.
inline std::size_t certificate_size(GroupKind kind, std::uint32_t d) {
    return kind == GroupKind::Sp ? 2 * static_cast<std::size_t>(d) : d;
}

/// For u = tr(a_1)...tr(a_r) with letters z_1..z_d read in order, the cycle
/// of each a_j gets Z_i = e_{i,i+1} inside its block and e_{last,first} at
/// its end. Letter z_i = x_k sets X_k = Z_i; z_i = x_k^T sets X_k to the
/// group transpose of Z_i, so that the letter itself evaluates to Z_i.
template <Field F>
std::map<std::uint32_t, DenseMatrix<F>> isolation_assignment(const F& field, const SigmaMonomial& u, GroupKind kind,
                                                             std::uint32_t d) {
    if (!is_multilinear_full(u, d)) {
        throw DomainError("monomial " + u.str() + " is not multilinear of degree 1 in each of x1..x" + std::to_string(d));
    }
    const std::size_t n = certificate_size(kind, d);
    std::map<std::uint32_t, DenseMatrix<F>> out;
    std::size_t pos = 0;  // 0-based index of the next letter
    for (const auto& [fac, mult] : u.entries()) {
        const Word& a = fac.cls.canonical;
        const std::size_t start = pos;
        for (std::size_t i = 0; i < a.size(); ++i, ++pos) {
            const std::size_t next = (i + 1 == a.size()) ? start : pos + 1;
            DenseMatrix<F> z(field, n, n);
            z(pos, next) = field.one();
            const Letter& l = a[i];
            out.insert_or_assign(l.k, l.transposed ? group_transpose(z, kind) : z);
        }
    }
    return out;
}

/// Value of a trace monomial at concrete matrices X_k.
template <Field F>
typename F::Element evaluate_trace_monomial(const F& field, const SigmaMonomial& w,
                                            const std::map<std::uint32_t, DenseMatrix<F>>& xs, GroupKind kind) {
    auto value = field.one();
    for (const auto& [fac, mult] : w.entries()) {
        if (fac.t != 1) throw DomainError("concrete evaluation supports traces only, got " + fac.str());
        std::optional<DenseMatrix<F>> prod;
        for (const auto& l : fac.cls.canonical) {
            auto it = xs.find(l.k);
            if (it == xs.end() || !l.base().is_x()) throw DomainError("no matrix assigned to " + l.str());
            DenseMatrix<F> m = l.transposed ? group_transpose(it->second, kind) : it->second;
            prod = prod ? (*prod * m) : m;
        }
        auto tr = field.zero();
        for (std::size_t i = 0; i < prod->rows(); ++i) tr = field.add(tr, (*prod)(i, i));
        value = field.mul(value, field.pow(tr, mult));
    }
    return value;
}

struct IsolationFailure {
    SigmaMonomial assignment_from;
    SigmaMonomial evaluated;
    std::string value;
};

/// Checks that the assignment built from each u evaluates to 1 on u and to 0
/// on every other monomial of the list.
template <Field F>
std::vector<IsolationFailure> isolation_check(const F& field, const std::vector<SigmaMonomial>& monomials,
                                              GroupKind kind, std::uint32_t d) {
    std::vector<IsolationFailure> failures;
    for (const auto& u : monomials) {
        auto xs = isolation_assignment(field, u, kind, d);
        for (const auto& w : monomials) {
            auto v = evaluate_trace_monomial(field, w, xs, kind);
            auto expected = (u == w) ? field.one() : field.zero();
            if (!field.is_zero(field.sub(v, expected))) failures.push_back({u, w, field.format(v)});
        }
    }
    return failures;
}

template <Field F>
struct MultilinearCertificate {
    bool vanishes = true;
    std::uint32_t d = 0;
    std::size_t n = 0;
    std::optional<std::pair<SigmaMonomial, typename F::Element>> witness;
    /// Per monomial of f: the value f takes at that monomial's assignment.
    std::vector<std::pair<SigmaMonomial, typename F::Element>> values;
};

/// For f multilinear and multihomogeneous in x_1..x_d, evaluates f at each
/// monomial's isolating assignment; the value must equal that monomial's
/// coefficient. An InvariantViolation reports a failed isolation.
template <Field F>
MultilinearCertificate<F> multilinear_certificate(const SigmaPoly<F>& f, GroupKind kind) {
    const F& field = f.field();
    MultilinearCertificate<F> cert;
    for (const auto& [m, c] : f.terms()) cert.d = std::max(cert.d, max_slot(m));
    cert.n = certificate_size(kind, cert.d);
    std::vector<SigmaMonomial> monomials;
    for (const auto& [m, c] : f.terms()) {
        if (!is_multilinear_full(m, cert.d)) {
            throw DomainError("multilinear certificate needs every monomial to contain each of x1..x" +
                              std::to_string(cert.d) + " exactly once and only traces; offending monomial " + m.str());
        }
        if (kind == GroupKind::GL)
            for (const auto& [fac, mult] : m.entries())
                for (const auto& l : fac.cls.canonical)
                    if (l.transposed) throw DomainError("transposed letters are not in the GL alphabet");
        monomials.push_back(m);
    }
    for (const auto& [u, cu] : f.terms()) {
        auto xs = isolation_assignment(field, u, kind, cert.d);
        auto total = field.zero();
        for (const auto& [w, cw] : f.terms())
            total = field.add(total, field.mul(cw, evaluate_trace_monomial(field, w, xs, kind)));
        if (!field.is_zero(field.sub(total, cu))) {
            throw InvariantViolation("isolating assignment for " + u.str() + " gave " + field.format(total) +
                                     " instead of its coefficient " + field.format(cu));
        }
        cert.values.emplace_back(u, total);
    }
    cert.vanishes = f.is_zero();
    if (!f.is_zero()) cert.witness = *f.terms().begin();
    return cert;
}

/// All multilinear trace monomials in which each of x_1..x_d occurs once.
inline std::vector<SigmaMonomial> multilinear_basis(std::uint32_t d, GroupKind kind) {
    const auto alphabet = group_alphabet(kind, d);
    std::vector<WordClass> classes;
    for (const auto& cls : primitive_classes(alphabet, d)) {
        std::set<std::uint32_t> slots;
        bool distinct = true;
        for (const auto& l : cls.canonical) distinct = distinct && slots.insert(l.k).second;
        if (distinct) classes.push_back(cls);
    }
    std::vector<SigmaMonomial> out;
    std::vector<SigmaMonomial::Entry> current;
    std::vector<bool> used(d + 1, false);
    std::function<void()> rec = [&] {
        std::uint32_t first = 1;
        while (first <= d && used[first]) ++first;
        if (first > d) {
            out.emplace_back(current);
            return;
        }
        for (const auto& cls : classes) {
            bool ok = false;
            bool clash = false;
            for (const auto& l : cls.canonical) {
                ok = ok || l.k == first;
                clash = clash || used[l.k];
            }
            if (!ok || clash) continue;
            for (const auto& l : cls.canonical) used[l.k] = true;
            current.emplace_back(SigmaFactor{1, cls}, 1);
            rec();
            current.pop_back();
            for (const auto& l : cls.canonical) used[l.k] = false;
        }
    };
    rec();
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Derivation diagram

template <Field F>
struct DiagramResult {
    Polynomial<F> symbolic_side;  // Psi(d_q f)
    Polynomial<F> matrix_side;    // d_q Psi(f)
    bool commutes = false;
};

template <Field F>
DiagramResult<F> diagram_check(const SigmaPoly<F>& f, std::uint32_t q, const GroupSpec& g,
                               const DeriveOptions& opt = {}) {
    auto ev = generic_evaluator(f.field(), g);
    DiagramResult<F> r{ev(derive(f, q, opt)), derive_polynomial(ev(f), q), false};
    r.commutes = r.symbolic_side == r.matrix_side;
    return r;
}

// ---------------------------------------------------------------------------
// Characteristic-2 symplectic scan

struct ConjectureRow {
    WordClass cls;
    std::uint32_t t = 1;
    std::size_t n = 0;
    bool relation = false;
    bool trivial = false;  // t > n, so the image is 0 by definition
    bool odd_t() const { return t % 2 == 1; }
};

/// For every symmetric class a (a ~c a^T) of length <= max_len over d
/// letters and every t <= max(n_list), records whether sigma_t(a) is a
/// relation at each n. Reports evidence only.
template <Field F>
std::vector<ConjectureRow> conjecture_scan(const F& field, std::uint32_t d, std::size_t max_len,
                                           const std::vector<std::size_t>& n_list) {
    if (field.characteristic() != 2) throw DomainError("the characteristic-2 scan needs the field F_2");
    if (n_list.empty()) throw DomainError("the characteristic-2 scan needs at least one n");
    for (auto n : n_list) validate_group(GroupSpec{GroupKind::Sp, n}, 2);
    const std::size_t t_max = *std::max_element(n_list.begin(), n_list.end());
    std::vector<ConjectureRow> rows;
    std::map<std::size_t, Evaluator<F>> evs;
    for (auto n : n_list) evs.emplace(n, generic_evaluator(field, GroupSpec{GroupKind::Sp, n}));
    for (const auto& cls : primitive_classes(x_alphabet(d, true), max_len)) {
        if (!cls.symmetric) continue;
        for (std::uint32_t t = 1; t <= t_max; ++t) {
            for (auto n : n_list) {
                ConjectureRow row{cls, t, n, true, t > n};
                if (!row.trivial) row.relation = evs.at(n).factor_image(SigmaFactor{t, cls}).is_zero();
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace freerel
