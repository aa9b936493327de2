// Acceptance run: one PASS/FAIL line per criterion, followed by indented
// detail lines. Exit status is 0 only if every criterion passes.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "freerel/cli.hpp"
#include "freerel/freerel.hpp"
#include "test_support.hpp"

namespace freerel {
namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void note(const std::string& s) { details.push_back(s); }
    void fail(const std::string& s) {
        pass = false;
        details.push_back("FAILURE: " + s);
    }
    void require(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
};

template <class F>
SigmaPoly<F> E(const std::string& s, const F& f) {
    return parse_expr(s, f);
}

// ---------------------------------------------------------------------------
// 1. Worked examples, symbolic and polynomial sides

void criterion1(Outcome& o) {
    RationalField q;
    for (std::uint32_t qi : {1u, 2u, 3u}) {
        const std::string y = "y1_" + std::to_string(qi);
        auto f = E("sigma(2, x1)", q);
        auto d = derive(f, qi);
        auto expected = E("-tr(" + y + "*x1) + tr(x1)*tr(" + y + ")", q);
        o.require(d == expected, "d_" + std::to_string(qi) + " sigma_2(x1) = " + d.str());
        for (std::size_t n : {2u, 3u}) {
            GroupSpec g{GroupKind::GL, n};
            o.require(derive_polynomial(psi_n(f, g), qi) == psi_n(expected, g),
                      "polynomial side of d_q sigma_2 at n = " + std::to_string(n));
        }
    }
    o.note("d_q sigma_2(x1) = -tr(y1_q*x1) + tr(x1)*tr(y1_q) for q = 1, 2, 3 on both sides, n = 2, 3");

    PrimeField f2(2);
    auto f = E("tr(x1)*tr(x1)*tr(x1*x2)", f2);
    auto d1 = derive(f, 1);
    auto d1_expected = E("tr(x1)*tr(x1)*tr(y1_1*x2) + tr(x1)*tr(x1)*tr(x1*y2_1)", f2);
    auto d21 = derive(d1, 2);
    auto d21_expected = E("tr(x1)*tr(x1)*tr(y1_1*y2_2) + tr(x1)*tr(x1)*tr(y1_2*y2_1)", f2);
    auto d11 = derive(d1, 1, DeriveOptions{true});
    o.require(d1 == d1_expected, "p = 2: d_1 f = " + d1.str());
    o.require(d21 == d21_expected, "p = 2: d_2 d_1 f = " + d21.str());
    o.require(d11.is_zero(), "p = 2: d_1 d_1 f = " + d11.str());
    for (std::size_t n : {2u, 3u}) {
        GroupSpec g{GroupKind::GL, n};
        const auto pf = psi_n(f, g);
        const auto pd1 = derive_polynomial(pf, 1);
        o.require(pd1 == psi_n(d1_expected, g), "p = 2: polynomial d_1 at n = " + std::to_string(n));
        o.require(derive_polynomial(pd1, 2) == psi_n(d21_expected, g),
                  "p = 2: polynomial d_2 d_1 at n = " + std::to_string(n));
        o.require(derive_polynomial(pd1, 1).is_zero(), "p = 2: polynomial d_1 d_1 at n = " + std::to_string(n));
    }
    o.note("p = 2 example: d_1, d_2 d_1 and d_1 d_1 = 0 agree symbolically and after Psi_n, n = 2, 3");
}

// ---------------------------------------------------------------------------
// 2. Commuting diagram on random elements

template <class F>
void diagram_for_field(const F& field, Outcome& o, std::size_t& checked, std::size_t& mismatches) {
    Rng rng = make_rng(2024, "acceptance-diagram/" + field.name());
    const std::vector<std::pair<GroupKind, std::size_t>> cases{
        {GroupKind::GL, 1}, {GroupKind::GL, 2}, {GroupKind::GL, 3}, {GroupKind::O, 1},
        {GroupKind::O, 2},  {GroupKind::O, 3},  {GroupKind::Sp, 2}};
    for (const auto& [kind, n] : cases) {
        for (int i = 0; i < 6; ++i) {
            std::uniform_int_distribution<std::uint32_t> dd(1, 3);
            auto f = testing::random_nonzero_sigma_poly(field, rng, 3, 4, dd(rng), kind != GroupKind::GL);
            auto r = diagram_check(f, 1, GroupSpec{kind, n});
            ++checked;
            if (!r.commutes) {
                ++mismatches;
                o.fail(field.name() + " " + GroupSpec{kind, n}.str() + ": " + f.str());
            }
        }
    }
}

void criterion2(Outcome& o) {
    std::size_t checked = 0;
    std::size_t mismatches = 0;
    diagram_for_field(PrimeField(3), o, checked, mismatches);
    diagram_for_field(PrimeField(5), o, checked, mismatches);
    diagram_for_field(RationalField{}, o, checked, mismatches);
    o.require(checked >= 100, "fewer than 100 elements checked");
    o.note(std::to_string(checked) + " random elements (degree <= 4, d <= 3), q = 1, GL/O at n = 1..3, Sp at n = 2, "
           "over F_3, F_5, Q: " + std::to_string(mismatches) + " mismatches");
}

// ---------------------------------------------------------------------------
// 3 and 4. Independence certificates

std::string cert_line(const std::string& field, const GroupSpec& g, std::size_t D, const CertificateReport& r) {
    std::ostringstream s;
    s << field << " " << g.str() << " d = 2, D = " << D << ": rank " << r.rank << " / " << r.basis_size;
    if (!r.independent()) {
        s << "; dependent rows:";
        for (const auto& m : r.dependent) s << " " << m.str();
    }
    return s.str();
}

void run_certificate(Outcome& o, const FieldSpec& fs, const GroupSpec& g, std::size_t D, bool counts) {
    with_field(fs, [&](const auto& field) {
        auto r = independence_certificate(field, 2, D, g);
        const std::string line = cert_line(field.name(), g, D, r);
        if (!counts)
            o.note("supplementary, " + line);
        else if (r.independent())
            o.note(line);
        else
            o.fail(line);
    });
}

void criterion3(Outcome& o) {
    const std::vector<FieldSpec> fields{RationalField{}, PrimeField(3), PrimeField(5)};
    for (const auto& fs : fields)
        for (std::size_t D = 1; D <= 4; ++D) {
            run_certificate(o, fs, GroupSpec{GroupKind::O, D}, D, true);
            run_certificate(o, fs, GroupSpec{GroupKind::Sp, 4}, D, true);
        }
    // Not part of the criterion: Sp at n = 2D, where the monomials of degree
    // D have room to be independent.
    for (const auto& fs : fields) run_certificate(o, fs, GroupSpec{GroupKind::Sp, 8}, 4, false);
}

void criterion4(Outcome& o) {
    const std::vector<FieldSpec> fields{PrimeField(2), PrimeField(3), PrimeField(5), RationalField{}};
    for (const auto& fs : fields)
        for (std::size_t D = 1; D <= 4; ++D) run_certificate(o, fs, GroupSpec{GroupKind::GL, D}, D, true);
}

// ---------------------------------------------------------------------------
// 5. Characteristic-2 symplectic remark

void criterion5(Outcome& o) {
    PrimeField f2(2);
    for (std::size_t n : {2u, 4u}) {
        bool rel = is_relation(E("tr(x1*T(x1))", f2), GroupSpec{GroupKind::Sp, n});
        o.require(rel, "tr(x1*T(x1)) is not a relation at n = " + std::to_string(n));
    }
    bool rel2 = is_relation(E("sigma(2, x1*T(x1))", f2), GroupSpec{GroupKind::Sp, 2});
    o.require(!rel2, "sigma(2, x1*T(x1)) is a relation at n = 2");
    o.note("F_2, Sp: tr(x1*T(x1)) is a relation at n = 2, 4; sigma(2, x1*T(x1)) is not at n = 2");
}

// ---------------------------------------------------------------------------
// 6. Frobenius twist

void criterion6(Outcome& o) {
    std::size_t products = 0, sigmas = 0, transposes = 0;
    for (std::uint64_t p : {2u, 3u, 5u}) {
        PrimeField f(p);
        Rng rng = make_rng(6, "acceptance-frobenius/" + std::to_string(p));
        for (int i = 0; i < 60; ++i) {
            const std::size_t n = 1 + static_cast<std::size_t>(i % 4);
            auto a = testing::random_linear_matrix(f, rng, n);
            auto b = testing::random_linear_matrix(f, rng, n);
            const auto ap = a.entrywise_p_power(p);
            if (!((a * b).entrywise_p_power(p) == ap * b.entrywise_p_power(p)))
                o.fail("(AB)^(p) at p = " + std::to_string(p) + ", n = " + std::to_string(n));
            ++products;
            for (std::size_t t = 1; t <= n; ++t) {
                const auto lt = static_cast<long long>(t);
                if (!(sigma_t(a, lt).pow(p) == sigma_t(ap, lt)))
                    o.fail("sigma_t(A)^p at p = " + std::to_string(p) + ", n = " + std::to_string(n));
            }
            ++sigmas;
            const std::size_t m = 2 * (1 + static_cast<std::size_t>(i % 2));
            auto c = testing::random_linear_matrix(f, rng, m);
            if (!(c.symplectic_transpose().entrywise_p_power(p) == c.entrywise_p_power(p).symplectic_transpose()))
                o.fail("(A*)^(p) at p = " + std::to_string(p) + ", n = " + std::to_string(m));
            ++transposes;
        }
    }
    o.note(std::to_string(products) + " products, " + std::to_string(sigmas) + " sigma checks (all t <= n), " +
           std::to_string(transposes) + " symplectic transposes over F_2, F_3, F_5 with n <= 4");
}

// ---------------------------------------------------------------------------
// 7. Word combinatorics, exhaustive to length 6 over x1, x2 and transposes

void criterion7(Outcome& o) {
    const auto alphabet = x_alphabet(2, true);
    std::vector<Word> words;
    for (std::size_t len = 1; len <= 6; ++len)
        for (auto& w : all_words(alphabet, len)) words.push_back(std::move(w));

    std::size_t remark = 0, roots = 0, commuting = 0, palindromes = 0, part_a = 0, part_b = 0, part_c = 0,
                part_d = 0;
    auto report = [&](bool ok, const std::string& what) {
        if (!ok && o.details.size() < 40) o.fail(what);
        if (!ok) o.pass = false;
    };
    for (const Word& a : words) {
        const auto s = static_cast<long long>(a.size());
        // Remark: every b ~ a has a as an l- or l^T-subword.
        for (bool transposed : {false, true}) {
            const Word base = transposed ? involution(a) : a;
            for (std::size_t r = 0; r < a.size(); ++r) {
                const Word b = rotate(base, r);
                bool found = false;
                for (long long l = 1; l <= s && !found; ++l)
                    found = subword_check(a, b, l, SubwordMode::Plain) || subword_check(a, b, l, SubwordMode::Transposed);
                report(found, "remark: " + word_str(a) + " in " + word_str(b));
                ++remark;
            }
        }
        // Palindromes.
        const bool self_transposed = a == involution(a);
        auto c = palindrome_decompose(a);
        report(c.has_value() == self_transposed, "palindrome existence for " + word_str(a));
        if (c) report(concat(*c, involution(*c)) == a, "palindrome reconstruction for " + word_str(a));
        ++palindromes;

        const bool prim = is_primitive(a);
        if (prim) {
            // Part a: a is an l-subword of itself iff l = 1.
            for (long long l = 1; l <= s; ++l)
                report(subword_check(a, a, l, SubwordMode::Plain) == (l == 1),
                       "part a: " + word_str(a) + ", l = " + std::to_string(l));
            ++part_a;
            const bool sym = is_cyclic_equivalent(a, involution(a));
            // Part b: if a is not ~c a^T, no l^T-subword equality holds.
            if (!sym) {
                for (long long l = 1; l <= s; ++l)
                    report(!subword_check(a, a, l, SubwordMode::Transposed),
                           "part b: " + word_str(a) + ", l = " + std::to_string(l));
                ++part_b;
            }
            // Part c: a ~c a^T iff some rotation b satisfies b = b^T.
            bool rotation = false;
            for (std::size_t r = 0; r < a.size() && !rotation; ++r) {
                const Word b = rotate(a, r);
                rotation = b == involution(b);
            }
            report(rotation == sym, "part c: " + word_str(a));
            ++part_c;
            // Part d: when a = a^T, a is an l^T-subword of itself iff l = |a|.
            if (self_transposed) {
                for (long long l = 1; l <= s; ++l)
                    report(subword_check(a, a, l, SubwordMode::Transposed) == (l == s),
                           "part d: " + word_str(a) + ", l = " + std::to_string(l));
                ++part_d;
            }
        }
    }
    // Commuting roots over every pair.
    for (const Word& b : words)
        for (const Word& cw : words) {
            auto r = commuting_root(b, cw);
            const bool commute = concat(b, cw) == concat(cw, b);
            report(r.has_value() == commute, "commuting root existence for " + word_str(b) + ", " + word_str(cw));
            if (r) {
                report(word_power(r->e, r->i) == b && word_power(r->e, r->j) == cw,
                       "commuting root reconstruction for " + word_str(b) + ", " + word_str(cw));
                ++commuting;
            }
            ++roots;
        }
    o.note(std::to_string(words.size()) + " words of length <= 6 over x1, x2, T(x1), T(x2)");
    o.note("remark pairs " + std::to_string(remark) + ", palindrome checks " + std::to_string(palindromes) +
           ", part a " + std::to_string(part_a) + ", part b " + std::to_string(part_b) + ", part c " +
           std::to_string(part_c) + ", part d " + std::to_string(part_d));
    o.note("commuting-root pairs " + std::to_string(roots) + " (" + std::to_string(commuting) +
           " commuting, each reconstructed)");
}

// ---------------------------------------------------------------------------
// 8. Multilinear isolation

void criterion8(Outcome& o) {
    for (const FieldSpec& fs : {FieldSpec(RationalField{}), FieldSpec(PrimeField(2)), FieldSpec(PrimeField(3))}) {
        with_field(fs, [&](const auto& field) {
            for (GroupKind k : {GroupKind::GL, GroupKind::O, GroupKind::Sp})
                for (std::uint32_t d = 1; d <= 4; ++d) {
                    auto basis = multilinear_basis(d, k);
                    auto failures = isolation_check(field, basis, k, d);
                    std::string line = field.name() + " " + group_name(k) + " d = " + std::to_string(d) + ": " +
                                       std::to_string(basis.size()) + " monomials, " +
                                       std::to_string(basis.size() * basis.size()) + " evaluations, " +
                                       std::to_string(failures.size()) + " failures";
                    if (failures.empty())
                        o.note(line);
                    else
                        o.fail(line + " (first: assignment of " + failures[0].assignment_from.str() + " on " +
                               failures[0].evaluated.str() + " gave " + failures[0].value + ")");
                }
        });
    }
}

// ---------------------------------------------------------------------------
// 9. Reduction pipeline

template <class F>
void pipeline_for_field(const F& field, Outcome& o, std::size_t count) {
    Rng rng = make_rng(9, "acceptance-pipeline/" + field.name());
    const std::uint64_t p = field.characteristic();
    std::size_t derivations = 0, strips = 0, bridges = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::uint32_t> dd(1, 3);
        const std::uint32_t d = dd(rng);
        SigmaPoly<F> f = testing::random_nonzero_sigma_poly(field, rng, 3, 5, d, false);
        if (i % 2 == 0) {
            // g^p * h with g in x1 only and h in x2.., so that p-th powers
            // survive the derivations and the strip step is exercised.
            auto g = testing::random_nonzero_sigma_poly(field, rng, 2, 1, 1, false);
            SigmaPoly<F> gp = g;
            for (std::uint64_t k = 1; k < p; ++k) gp = gp * g;
            SigmaPoly<F> h = SigmaPoly<F>::constant(field, testing::random_nonzero(field, rng));
            if (p < 5) {
                h = map_letters(testing::random_nonzero_sigma_poly(field, rng, 2, 5 - p, d, false),
                                [](const Letter& l) { return Letter{l.k + 1, l.q, l.transposed}; });
            }
            f = gp * h;
        }
        try {
            auto red = reduce_to_multilinear(f);
            for (const auto& round : red.rounds) {
                const auto& tr = round.derivation.deg_minus_trace;
                for (std::size_t k = 1; k < tr.size(); ++k)
                    if (tr[k] >= tr[k - 1]) o.fail("deg- did not decrease for " + f.str());
                if (round.derivation.g.is_zero()) o.fail("zero after derivation for " + f.str());
                if (!is_p_multilinear(round.derivation.g)) o.fail("not p-multilinear after derivation: " + f.str());
                derivations += round.derivation.steps;
                if (round.stripped) {
                    ++strips;
                    if (degrees(*round.stripped).deg_plus >= degrees(round.renamed).deg_plus)
                        o.fail("strip did not lower deg+ for " + round.renamed.str());
                    // Bridge: Psi_3(strip g) = frobenius_contract(Psi_3(g), I-variables, p).
                    auto witness = is_p_multilinear(round.renamed);
                    GroupSpec g3{GroupKind::GL, 3};
                    std::set<Variable> vars;
                    for (const auto& b : *witness)
                        for (std::uint32_t r = 1; r <= 3; ++r)
                            for (std::uint32_t c = 1; c <= 3; ++c) vars.insert(Variable::x(b.k, r, c));
                    if (!(psi_n(*round.stripped, g3) == frobenius_contract(psi_n(round.renamed, g3), vars, p)))
                        o.fail("bridge failed for " + round.renamed.str());
                    ++bridges;
                }
            }
            if (!is_multilinear(red.result) || red.result.is_zero()) o.fail("bad final result for " + f.str());
        } catch (const std::exception& e) {
            o.fail(f.str() + ": " + e.what());
        }
    }
    o.note(field.name() + ": " + std::to_string(count) + " elements, " + std::to_string(derivations) +
           " derivation steps, " + std::to_string(strips) + " strips, " + std::to_string(bridges) +
           " bridge checks at n = 3");
}

void criterion9(Outcome& o) {
    pipeline_for_field(PrimeField(3), o, 60);
    pipeline_for_field(PrimeField(5), o, 60);
}

// ---------------------------------------------------------------------------
// 10. Quiver module

void criterion10(Outcome& o) {
    const MixedSetup s = bilinear_forms_quiver(1, 1, 2);
    for (const FieldSpec& fs : {FieldSpec(PrimeField(5)), FieldSpec(RationalField{})}) {
        with_field(fs, [&](const auto& field) {
            auto samples = mixed_group_sample(field, s, 20, 10);
            auto gens = quiver_generators(s, 4);
            std::size_t ok = 0;
            for (const auto& g : gens) {
                auto p = upsilon_n(field, g.symbol, s);
                bool inv = quiver_invariance_check(p, s, samples).invariant;
                bool action = bilinear_action_check(p, 1, 1, 2, 20, 10).invariant;
                if (inv && action)
                    ++ok;
                else
                    o.fail(field.name() + ": " + g.symbol.str() + " not invariant");
            }
            o.note(field.name() + ": " + std::to_string(ok) + "/" + std::to_string(gens.size()) +
                   " generators (path length <= 4) invariant under 20 sampled GL(n, i) elements, both routes");
        });
    }
    for (const FieldSpec& fs : {FieldSpec(PrimeField(2)), FieldSpec(PrimeField(3)), FieldSpec(RationalField{})}) {
        with_field(fs, [&](const auto& field) {
            for (std::size_t D : {3u, 4u}) {
                auto r = quiver_independence(field, s, 4, D);
                std::string line = field.name() + " uniform dimension 4, degree <= " + std::to_string(D) + ": rank " +
                                   std::to_string(r.rank) + " / " + std::to_string(r.basis_size);
                if (r.independent())
                    o.note(line);
                else
                    o.fail(line);
            }
        });
    }
}

// ---------------------------------------------------------------------------
// 11. Round trip and determinism

std::string run_binary(const std::string& args, int& status) {
    const std::string cmd = std::string(FREEREL_CLI_PATH) + " " + args + " 2>&1";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for " + cmd);
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    status = pclose(pipe);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion11(Outcome& o) {
    std::size_t count = 0;
    auto round_trip = [&](const auto& field, std::uint64_t seed, int n) {
        Rng rng = make_rng(seed, "acceptance-round-trip");
        for (int i = 0; i < n; ++i) {
            auto f = testing::random_sigma_poly(field, rng, 4, 6, 3, true, 2);
            const std::string text = format_expr(f);
            auto g = parse_expr(text, field);
            if (!(g == f) || format_expr(g) != text) o.fail("round trip: " + text);
            ++count;
        }
    };
    round_trip(RationalField{}, 1, 4000);
    round_trip(PrimeField(3), 2, 3000);
    round_trip(PrimeField(7), 3, 3000);
    o.note(std::to_string(count) + " random elements: parse(format(f)) = f and format is stable");

    const std::string quiver = std::string(FREEREL_SAMPLES_DIR) + "/bilinear.quiver";
    const auto dir = std::filesystem::temp_directory_path();
    const std::vector<std::string> commands{
        "quiver check " + quiver + " --max-len 4 --field f5 --seed 7",
        "certify --group Sp --n 4 --d 2 --deg 3 --field f3",
        "scan-free \"tr(x1*x2) - tr(x1)*tr(x2)\" --n 1 --n-max 3",
        "pipeline \"tr(x1)*tr(x1)*tr(x1)*tr(x1*x2)\" --field f3",
        "char2-scan --d 2 --max-len 3 --n 2 --n-max 4",
    };
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::string outputs[2];
        std::string reports[2];
        int status[2] = {0, 0};
        for (int k = 0; k < 2; ++k) {
            const auto report = dir / ("freerel_acceptance_" + std::to_string(i) + "_" + std::to_string(k) + ".json");
            outputs[k] = run_binary(commands[i] + " --out " + report.string(), status[k]);
            reports[k] = slurp(report);
            std::filesystem::remove(report);
        }
        const bool same = outputs[0] == outputs[1] && reports[0] == reports[1] && status[0] == status[1];
        std::string line = "freerel " + commands[i] + ": " + std::to_string(outputs[0].size()) + " bytes of output, " +
                           std::to_string(reports[0].size()) + " bytes of report";
        if (same && !outputs[0].empty() && !reports[0].empty())
            o.note(line + ", identical across two runs");
        else
            o.fail(line + ", runs differ or are empty");
    }
}

}  // namespace
}  // namespace freerel

int main() {
    using namespace freerel;
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "worked examples", criterion1},
        {2, "commuting diagram", criterion2},
        {3, "O and Sp independence certificates (Sp at n = 4)", criterion3},
        {4, "GL independence certificates", criterion4},
        {5, "characteristic-2 symplectic relations", criterion5},
        {6, "Frobenius twist", criterion6},
        {7, "word combinatorics", criterion7},
        {8, "multilinear isolation", criterion8},
        {9, "reduction pipeline", criterion9},
        {10, "quiver invariants and independence", criterion10},
        {11, "round trip and determinism", criterion11},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << c.name << " ("
                  << std::fixed << std::setprecision(2) << secs << " s)\n";
        for (const auto& d : o.details) std::cout << "    " << d << "\n";
        std::cout.flush();
        if (!o.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
