#pragma once

// Mixed quiver representations: quivers with a fixed-point-free vertex
// involution, their double quivers, closed-path enumeration up to rotation
// and involution, the generators sigma_t(X_a) of the invariant ring, their
// evaluation, and invariance under the restricted base-change group.
//
// Arrow number k of the base quiver is the letter x_k; its reversed copy in
// the double quiver is x_k^T. Paths are words read left to right, and a
// path a_1 a_2 is composable when tail(a_1) = head(a_2).

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/eval.hpp"
#include "freerel/field.hpp"
#include "freerel/linalg.hpp"
#include "freerel/poly_matrix.hpp"
#include "freerel/rng.hpp"
#include "freerel/sigma.hpp"
#include "freerel/words.hpp"

namespace freerel {

struct QuiverArrow {
    std::string name;
    std::size_t head = 0;  // a'
    std::size_t tail = 0;  // a''
    Letter letter;
};

struct Quiver {
    std::vector<std::string> vertices;
    std::vector<QuiverArrow> arrows;

    std::size_t vertex_index(const std::string& name) const {
        auto it = std::find(vertices.begin(), vertices.end(), name);
        if (it == vertices.end()) throw DomainError("unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - vertices.begin());
    }

    /// Adds arrow number arrows.size()+1, i.e. the letter x_k with k its index.
    void add_arrow(const std::string& name, std::size_t head, std::size_t tail) {
        if (head >= vertices.size() || tail >= vertices.size()) throw DomainError("arrow '" + name + "' references a missing vertex");
        arrows.push_back({name, head, tail, Letter::x(static_cast<std::uint32_t>(arrows.size() + 1))});
    }

    const QuiverArrow& arrow_of(const Letter& l) const {
        for (const auto& a : arrows)
            if (a.letter == l) return a;
        throw DomainError("letter " + l.str() + " is not an arrow of this quiver");
    }
};

struct MixedSetup {
    Quiver quiver;
    std::vector<std::size_t> dims;   // n_v
    std::vector<std::size_t> invol;  // i(v)

    void validate() const {
        const std::size_t nv = quiver.vertices.size();
        if (dims.size() != nv || invol.size() != nv) throw DomainError("dimension or involution data missing for some vertex");
        for (std::size_t v = 0; v < nv; ++v) {
            if (dims[v] < 1) throw DomainError("vertex '" + quiver.vertices[v] + "' needs a positive dimension");
            if (invol[v] >= nv) throw DomainError("involution image out of range at '" + quiver.vertices[v] + "'");
            if (invol[v] == v) throw DomainError("the involution fixes vertex '" + quiver.vertices[v] + "'");
            if (invol[invol[v]] != v) throw DomainError("the vertex map is not an involution at '" + quiver.vertices[v] + "'");
            if (dims[invol[v]] != dims[v]) {
                throw DomainError("vertices '" + quiver.vertices[v] + "' and '" + quiver.vertices[invol[v]] +
                                  "' are swapped by the involution but have different dimensions");
            }
        }
        for (const auto& a : quiver.arrows)
            if (a.head >= nv || a.tail >= nv) throw DomainError("arrow '" + a.name + "' references a missing vertex");
    }

    /// Same dimension at every vertex.
    MixedSetup with_uniform_dim(std::size_t m) const {
        MixedSetup s = *this;
        std::fill(s.dims.begin(), s.dims.end(), m);
        return s;
    }
};

/// Q^D: every arrow a plus a^T with head i(a'') and tail i(a').
inline Quiver double_quiver(const MixedSetup& s) {
    s.validate();
    Quiver d;
    d.vertices = s.quiver.vertices;
    for (const auto& a : s.quiver.arrows) d.arrows.push_back(a);
    for (const auto& a : s.quiver.arrows)
        d.arrows.push_back({a.name + "^T", s.invol[a.tail], s.invol[a.head], a.letter.transpose()});
    return d;
}

/// Head of the path's first arrow (the row space of X_a).
inline std::size_t path_head(const Quiver& q, const Word& path) { return q.arrow_of(path.front()).head; }

inline bool is_closed_path(const Quiver& q, const Word& path) {
    if (path.empty()) return false;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (q.arrow_of(path[i]).tail != q.arrow_of(path[i + 1]).head) return false;
    return q.arrow_of(path.back()).tail == q.arrow_of(path.front()).head;
}

struct PathClass {
    WordClass cls;
    std::size_t power = 1;  // > 1 for non-primitive paths
};

/// One representative per ~-class of closed paths of length <= max_len,
/// found by depth-first extension from every vertex. With primitive_only,
/// powers of shorter paths are dropped. When the quiver is a double quiver
/// (transposed arrows present), no closed path may be ~c to its own
/// involution; finding one is an InvariantViolation.
inline std::vector<PathClass> closed_paths(const Quiver& q, std::size_t max_len, bool primitive_only) {
    if (max_len < 1) throw DomainError("closed-path enumeration needs max_len >= 1");
    std::set<std::pair<Word, std::size_t>> seen;
    std::vector<PathClass> out;
    bool doubled = std::any_of(q.arrows.begin(), q.arrows.end(), [](const QuiverArrow& a) { return a.letter.transposed; });
    Word path;
    std::function<void(std::size_t, std::size_t)> extend = [&](std::size_t start, std::size_t at) {
        for (const auto& a : q.arrows) {
            if (a.head != at) continue;
            path.push_back(a.letter);
            if (a.tail == start) {
                CanonicalForm cf = canonicalize(path);
                if (doubled && cf.root.symmetric) {
                    throw InvariantViolation("closed path " + word_str(path) + " is cyclically equivalent to its involution");
                }
                if ((!primitive_only || cf.power == 1) && seen.emplace(cf.root.canonical, cf.power).second) {
                    out.push_back({cf.root, cf.power});
                }
            }
            if (path.size() < max_len) extend(start, a.tail);
            path.pop_back();
        }
    };
    for (std::size_t v = 0; v < q.vertices.size(); ++v) extend(v, v);
    std::sort(out.begin(), out.end(), [](const PathClass& a, const PathClass& b) {
        if (a.cls.length() * a.power != b.cls.length() * b.power) return a.cls.length() * a.power < b.cls.length() * b.power;
        if (a.cls != b.cls) return a.cls < b.cls;
        return a.power < b.power;
    });
    return out;
}

/// Word of a non-primitive class member: root^power.
inline Word path_word(const PathClass& c) { return word_power(c.cls.canonical, c.power); }

struct QuiverGenerator {
    SigmaFactor symbol;
    std::size_t head = 0;  // a' of the representative
};

/// sigma_t(a) for every primitive closed path class a of Q^D with |a| <=
/// max_len and 1 <= t <= n_{a'} (and t <= t_max when given).
inline std::vector<QuiverGenerator> quiver_generators(const MixedSetup& s, std::size_t max_len,
                                                      std::optional<std::uint32_t> t_max = std::nullopt) {
    const Quiver d = double_quiver(s);
    std::vector<QuiverGenerator> out;
    for (const auto& pc : closed_paths(d, max_len, true)) {
        const std::size_t head = path_head(d, pc.cls.canonical);
        std::size_t limit = s.dims[head];
        if (t_max) limit = std::min<std::size_t>(limit, *t_max);
        for (std::uint32_t t = 1; t <= limit; ++t) out.push_back({SigmaFactor{t, pc.cls}, head});
    }
    return out;
}

/// X_a is the n_{a'} x n_{a''} generic matrix of slot k; X_{a^T} = X_a^T.
template <Field F>
PolyMatrix<F> arrow_matrix(const F& field, const MixedSetup& s, const Letter& l) {
    if (!l.base().is_x()) throw DomainError("quiver letters are x-letters, got " + l.str());
    if (l.k < 1 || l.k > s.quiver.arrows.size()) throw DomainError("no arrow for letter " + l.str());
    const QuiverArrow& a = s.quiver.arrows[l.k - 1];
    PolyMatrix<F> m = PolyMatrix<F>::generic_rect(field, l.k, s.dims[a.head], s.dims[a.tail]);
    return l.transposed ? m.transpose() : m;
}

template <Field F>
Evaluator<F> quiver_evaluator(const F& field, const MixedSetup& s) {
    s.validate();
    return Evaluator<F>(field, [field, s](const Letter& l) { return arrow_matrix(field, s, l); });
}

/// Upsilon_n of one generator symbol; 0 when t > n_{a'}.
template <Field F>
Polynomial<F> upsilon_n(const F& field, const SigmaFactor& sym, const MixedSetup& s) {
    const Quiver d = double_quiver(s);
    if (!is_closed_path(d, sym.cls.canonical)) {
        throw DomainError("path " + word_str(sym.cls.canonical) + " is not closed in the double quiver");
    }
    auto ev = quiver_evaluator(field, s);
    return ev.factor_image(sym);
}

/// Upsilon_n of a sigma-polynomial whose words are closed paths of Q^D.
template <Field F>
Polynomial<F> upsilon_n(const SigmaPoly<F>& f, const MixedSetup& s) {
    const Quiver d = double_quiver(s);
    for (const auto& [m, c] : f.terms())
        for (const auto& [fac, mult] : m.entries())
            if (!is_closed_path(d, fac.cls.canonical)) {
                throw DomainError("path " + word_str(fac.cls.canonical) + " is not closed in the double quiver");
            }
    auto ev = quiver_evaluator(f.field(), s);
    return ev(f);
}

/// Elements of GL(n, i): g_v free on one vertex of each i-orbit and
/// g_{i(v)} = (g_v^T)^{-1}, so g_v g_{i(v)}^T = E everywhere.
template <Field F>
std::vector<std::vector<DenseMatrix<F>>> mixed_group_sample(const F& field, const MixedSetup& s, std::size_t count,
                                                            std::uint64_t seed) {
    s.validate();
    Rng rng = make_rng(seed, "mixed-group-sample");
    std::vector<std::vector<DenseMatrix<F>>> out;
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<std::optional<DenseMatrix<F>>> g(s.quiver.vertices.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (g[v]) continue;
            DenseMatrix<F> gv = detail::random_invertible(field, s.dims[v], rng);
            g[s.invol[v]] = gv.inverse().transpose();
            g[v] = std::move(gv);
        }
        std::vector<DenseMatrix<F>> element;
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (!(*g[v] * g[s.invol[v]]->transpose()).is_identity()) {
                throw InvariantViolation("sampled base change violates g_v g_i(v)^T = E");
            }
            element.push_back(*g[v]);
        }
        out.push_back(std::move(element));
    }
    return out;
}

/// Substitutes X_a -> g_{a'} X_a g_{a''}^{-1} for every arrow and compares.
template <Field F>
InvarianceReport quiver_invariance_check(const Polynomial<F>& p, const MixedSetup& s,
                                         const std::vector<std::vector<DenseMatrix<F>>>& samples) {
    const F& field = p.field();
    InvarianceReport r;
    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        const auto& g = samples[idx];
        std::map<Variable, Polynomial<F>> images;
        for (std::size_t k = 1; k <= s.quiver.arrows.size(); ++k) {
            const QuiverArrow& a = s.quiver.arrows[k - 1];
            const auto slot = static_cast<std::uint32_t>(k);
            const PolyMatrix<F> x = PolyMatrix<F>::generic_rect(field, slot, s.dims[a.head], s.dims[a.tail]);
            const PolyMatrix<F> y = g[a.head].to_poly() * x * g[a.tail].inverse().to_poly();
            for (std::size_t i = 0; i < y.rows(); ++i)
                for (std::size_t j = 0; j < y.cols(); ++j)
                    images.insert_or_assign(
                        Variable::x(slot, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1)), y(i, j));
        }
        ++r.samples_checked;
        if (!(substitute(p, images) == p)) {
            r.invariant = false;
            r.failing_sample = idx;
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bilinear forms

/// Vertices u, v with i swapping them and both of dimension n; arrows A_1..A_r
/// from v to u (head u) and B_1..B_s from u to v (head v). A_i is slot i and
/// B_j is slot r + j.
inline MixedSetup bilinear_forms_quiver(std::size_t r, std::size_t s, std::size_t n) {
    if (n < 1) throw DomainError("bilinear-forms quiver needs n >= 1");
    MixedSetup m;
    m.quiver.vertices = {"u", "v"};
    for (std::size_t i = 1; i <= r; ++i) m.quiver.add_arrow("A" + std::to_string(i), 0, 1);
    for (std::size_t j = 1; j <= s; ++j) m.quiver.add_arrow("B" + std::to_string(j), 1, 0);
    m.dims = {n, n};
    m.invol = {1, 0};
    m.validate();
    return m;
}

/// Independent route for the bilinear-forms action: A_i -> g A_i g^T and
/// B_j -> g^{-T} B_j g^{-1} for sampled g in GL(n).
template <Field F>
InvarianceReport bilinear_action_check(const Polynomial<F>& p, std::size_t r, std::size_t s, std::size_t n,
                                       std::size_t samples, std::uint64_t seed) {
    const F& field = p.field();
    auto gs = group_sample(field, GroupSpec{GroupKind::GL, n}, samples, derive_seed(seed, "bilinear-action"));
    InvarianceReport rep;
    for (std::size_t idx = 0; idx < gs.size(); ++idx) {
        const DenseMatrix<F>& g = gs[idx];
        const DenseMatrix<F> ginv = g.inverse();
        const PolyMatrix<F> left_a = g.to_poly();
        const PolyMatrix<F> right_a = g.transpose().to_poly();
        const PolyMatrix<F> left_b = ginv.transpose().to_poly();
        const PolyMatrix<F> right_b = ginv.to_poly();
        std::map<Variable, Polynomial<F>> images;
        for (std::size_t k = 1; k <= r + s; ++k) {
            const auto slot = static_cast<std::uint32_t>(k);
            const PolyMatrix<F> x = PolyMatrix<F>::generic_rect(field, slot, n, n);
            const PolyMatrix<F> y = k <= r ? left_a * x * right_a : left_b * x * right_b;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    images.insert_or_assign(
                        Variable::x(slot, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1)), y(i, j));
        }
        ++rep.samples_checked;
        if (!(substitute(p, images) == p)) {
            rep.invariant = false;
            rep.failing_sample = idx;
            return rep;
        }
    }
    return rep;
}

/// Monomials in the quiver generators of degree 1..max_degree (degree of
/// sigma_t(a) is t|a|), evaluated at uniform dimension m; exact rank.
template <Field F>
CertificateReport quiver_independence(const F& field, const MixedSetup& s, std::size_t uniform_dim,
                                      std::size_t max_degree, const CertificateLimits& limits = {}) {
    const MixedSetup sm = s.with_uniform_dim(uniform_dim);
    std::vector<SigmaFactor> gens;
    for (const auto& g : quiver_generators(sm, max_degree))
        if (g.symbol.degree() <= max_degree) gens.push_back(g.symbol);
    std::stable_sort(gens.begin(), gens.end(), [](const SigmaFactor& a, const SigmaFactor& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        return a < b;
    });
    auto basis = monomial_basis(gens, max_degree, 1, limits.basis_cap);
    auto ev = quiver_evaluator(field, sm);
    return certify_basis(ev, basis, limits);
}

// ---------------------------------------------------------------------------
// Quiver files

/// Line format: `vertex NAME dim N`, `arrow NAME HEAD TAIL`, `invol A B`;
/// `#` starts a comment. Arrows are numbered in file order.
inline MixedSetup parse_quiver(std::istream& in) {
    MixedSetup s;
    std::vector<std::pair<std::size_t, std::size_t>> invols;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) { throw ParseError(msg, lineno, 1); };
    struct PendingArrow {
        std::string name, head, tail;
        std::size_t line;
    };
    std::vector<PendingArrow> arrows;
    std::vector<std::tuple<std::string, std::string, std::size_t>> pending_invol;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "vertex") {
            std::string name, dimkw;
            long long dim = 0;
            if (!(ls >> name >> dimkw >> dim) || dimkw != "dim") fail("expected `vertex NAME dim N`");
            if (dim < 1) fail("vertex dimension must be positive");
            if (std::find(s.quiver.vertices.begin(), s.quiver.vertices.end(), name) != s.quiver.vertices.end())
                fail("duplicate vertex '" + name + "'");
            s.quiver.vertices.push_back(name);
            s.dims.push_back(static_cast<std::size_t>(dim));
        } else if (kw == "arrow") {
            PendingArrow a{{}, {}, {}, lineno};
            if (!(ls >> a.name >> a.head >> a.tail)) fail("expected `arrow NAME HEAD TAIL`");
            arrows.push_back(a);
        } else if (kw == "invol") {
            std::string a, b;
            if (!(ls >> a >> b)) fail("expected `invol A B`");
            pending_invol.emplace_back(a, b, lineno);
        } else {
            fail("unknown directive '" + kw + "'");
        }
        std::string extra;
        if (ls >> extra) fail("unexpected trailing text '" + extra + "'");
    }
    for (const auto& a : arrows) {
        lineno = a.line;
        try {
            s.quiver.add_arrow(a.name, s.quiver.vertex_index(a.head), s.quiver.vertex_index(a.tail));
        } catch (const DomainError& e) {
            fail(e.what());
        }
    }
    const std::size_t none = static_cast<std::size_t>(-1);
    s.invol.assign(s.quiver.vertices.size(), none);
    for (const auto& [a, b, ln] : pending_invol) {
        lineno = ln;
        std::size_t ia = 0;
        std::size_t ib = 0;
        try {
            ia = s.quiver.vertex_index(a);
            ib = s.quiver.vertex_index(b);
        } catch (const DomainError& e) {
            fail(e.what());
        }
        if ((s.invol[ia] != none && s.invol[ia] != ib) || (s.invol[ib] != none && s.invol[ib] != ia))
            fail("conflicting involution for '" + a + "' / '" + b + "'");
        s.invol[ia] = ib;
        s.invol[ib] = ia;
    }
    for (std::size_t v = 0; v < s.invol.size(); ++v)
        if (s.invol[v] == none) throw DomainError("vertex '" + s.quiver.vertices[v] + "' has no involution partner");
    s.validate();
    return s;
}

inline MixedSetup parse_quiver_text(const std::string& text) {
    std::istringstream in(text);
    return parse_quiver(in);
}

/// One line per arrow: `x<k> = NAME : HEAD <- TAIL`.
inline std::string quiver_legend(const MixedSetup& s) {
    std::string out;
    for (const auto& a : s.quiver.arrows) {
        out += a.letter.str() + " = " + a.name + " : " + s.quiver.vertices[a.head] + " <- " + s.quiver.vertices[a.tail] + "\n";
    }
    return out;
}

}  // namespace freerel
