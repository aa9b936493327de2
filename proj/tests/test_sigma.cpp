#include <gtest/gtest.h>

#include "freerel/freerel.hpp"
#include "test_support.hpp"

namespace freerel {
namespace {

template <class F>
SigmaPoly<F> E(const std::string& s, const F& f) {
    return parse_expr(s, f);
}

TEST(Sigma, FactorConstruction) {
    EXPECT_THROW(make_factor(0, {Letter::x(1)}), DomainError);
    EXPECT_THROW(make_factor(1, {Letter::x(1), Letter::x(1)}), DomainError);
    SigmaFactor f = make_factor(2, {Letter::x(2), Letter::x(1)});
    EXPECT_EQ(f.str(), "sigma(2, x1*x2)");
    EXPECT_EQ(f.degree(), 4u);
}

TEST(Sigma, MonomialOrderAndPrinting) {
    RationalField q;
    auto f = E("tr(x1*x2) + 3*tr(x1)*tr(x1) - 1/2*tr(x2) + 2", q);
    EXPECT_EQ(f.str(), "2 - 1/2*tr(x2) + 3*tr(x1)*tr(x1) + tr(x1*x2)");
    EXPECT_EQ(f.degree(), 2u);
}

TEST(Sigma, ArithmeticInCharacteristicTwo) {
    PrimeField f2(2);
    auto a = E("tr(x1)", f2);
    auto sq = (a + a);
    EXPECT_TRUE(sq.is_zero());
    EXPECT_EQ(((a + E("1", f2)) * (a + E("1", f2))).str(), "1 + tr(x1)*tr(x1)");
}

TEST(Sigma, WorkedExampleSigma2) {
    RationalField q;
    auto d = derive(E("sigma(2, x1)", q), 1);
    EXPECT_EQ(d, E("-tr(y1_1*x1) + tr(x1)*tr(y1_1)", q));
    EXPECT_EQ(derive(E("sigma(2, x1)", q), 3), E("-tr(y1_3*x1) + tr(x1)*tr(y1_3)", q));
}

TEST(Sigma, WorkedExampleCharacteristicTwo) {
    PrimeField f2(2);
    auto f = E("tr(x1)*tr(x1)*tr(x1*x2)", f2);
    auto d1 = derive(f, 1);
    EXPECT_EQ(d1, E("tr(x1)*tr(x1)*tr(y1_1*x2) + tr(x1)*tr(x1)*tr(x1*y2_1)", f2));
    EXPECT_EQ(derive(d1, 2), E("tr(x1)*tr(x1)*tr(y1_1*y2_2) + tr(x1)*tr(x1)*tr(y1_2*y2_1)", f2));
    // d_1 again needs the relaxed mode (y-letters of index 1 already present)
    EXPECT_THROW(derive(d1, 1), DomainError);
    EXPECT_TRUE(derive(d1, 1, DeriveOptions{true}).is_zero());
}

TEST(Sigma, DeriveRejectsBadIndex) {
    RationalField q;
    EXPECT_THROW(derive(E("tr(x1)", q), 0), DomainError);
    EXPECT_THROW(derive(E("tr(y1_2*x1)", q), 2), DomainError);
    EXPECT_NO_THROW(derive(E("tr(y1_2*x1)", q), 3));
}

TEST(Sigma, DeriveOfConstantIsZero) {
    RationalField q;
    EXPECT_TRUE(derive(E("7", q), 1).is_zero());
}

TEST(Sigma, SplitPParts) {
    PrimeField f3(3);
    auto f = E("tr(x1)*tr(x1)*tr(x1)*tr(x1)*tr(x2)", f3);
    const SigmaMonomial& m = f.terms().begin()->first;
    auto [plus, minus] = split_p_parts(m, 3);
    EXPECT_EQ(plus.str(), "tr(x1)*tr(x1)*tr(x1)");
    EXPECT_EQ(minus.str(), "tr(x1)*tr(x2)");
    EXPECT_EQ(plus * minus, m);
    auto [p0, m0] = split_p_parts(m, 0);
    EXPECT_TRUE(p0.is_one());
    EXPECT_EQ(m0, m);
}

TEST(Sigma, Degrees) {
    PrimeField f3(3);
    auto f = E("tr(x1)*tr(x1)*tr(x1)*tr(x2) + tr(x2*x2*x1)", f3);
    SigmaDegrees d = degrees(f);
    EXPECT_EQ(d.deg, 4u);
    EXPECT_EQ(d.deg_plus, 3u);
    EXPECT_EQ(d.deg_minus, 3u);
    EXPECT_EQ(degree_in_letter(f, LetterBase{2, 0}), 2u);
    EXPECT_FALSE(is_multilinear(f));
}

TEST(Sigma, PMultilinearWitness) {
    PrimeField f3(3);
    auto w = is_p_multilinear(E("tr(x1)*tr(x1)*tr(x1)*tr(x2)", f3));
    ASSERT_TRUE(w);
    EXPECT_EQ(*w, (std::set<LetterBase>{{1, 0}}));
    EXPECT_FALSE(is_p_multilinear(E("tr(x1)*tr(x1)", f3)));
    EXPECT_FALSE(is_p_multilinear(E("tr(x1)*tr(x1)*tr(x1)*tr(x1)", f3)));
    auto empty = is_p_multilinear(E("tr(x1*x2)", f3));
    ASSERT_TRUE(empty);
    EXPECT_TRUE(empty->empty());
}

TEST(Sigma, MultilinearizeWorkedExample) {
    PrimeField f3(3);
    auto r = p_multilinearize(E("sigma(2, x1)", f3));
    EXPECT_EQ(r.steps, 1u);
    EXPECT_EQ(r.g, E("-tr(y1_1*x1) + tr(x1)*tr(y1_1)", f3));
    EXPECT_TRUE(r.witness.empty());
    EXPECT_EQ(r.deg_minus_trace, (std::vector<std::size_t>{2, 1}));
}

TEST(Sigma, MultilinearizeGuards) {
    PrimeField f2(2);
    PrimeField f3(3);
    EXPECT_THROW(p_multilinearize(E("tr(x1)", f2)), DomainError);
    EXPECT_THROW(p_multilinearize(SigmaPoly<PrimeField>(f3)), DomainError);
    EXPECT_THROW(p_multilinearize(E("tr(y1_1)", f3)), DomainError);
}

TEST(Sigma, RenameAndStrip) {
    PrimeField f3(3);
    auto g = E("tr(x1)*tr(x1)*tr(x1)*tr(y2_1*x3)", f3);
    auto renamed = rename_y_to_x(g, 4);
    EXPECT_EQ(renamed, E("tr(x1)*tr(x1)*tr(x1)*tr(x3*x4)", f3));
    EXPECT_THROW(rename_y_to_x(g, 3), DomainError);
    EXPECT_EQ(strip_p_powers(renamed), E("tr(x1)*tr(x3*x4)", f3));
    EXPECT_THROW(strip_p_powers(E("tr(x1)*tr(x1)", f3)), DomainError);
}

// Leibniz: d(fg) = d(f) g + f d(g).
template <class F>
void leibniz(const F& field, std::uint64_t seed) {
    Rng rng = make_rng(seed, "sigma-leibniz");
    for (int i = 0; i < 100; ++i) {
        auto a = testing::random_sigma_poly(field, rng, 3, 3, 2, true);
        auto b = testing::random_sigma_poly(field, rng, 3, 3, 2, true);
        ASSERT_EQ(derive(a * b, 1), derive(a, 1) * b + a * derive(b, 1)) << a.str() << " | " << b.str();
    }
}

TEST(SigmaProperty, LeibnizF3) { leibniz(PrimeField(3), 1); }
TEST(SigmaProperty, LeibnizQ) { leibniz(RationalField{}, 2); }

TEST(SigmaProperty, DerivationBookkeeping) {
    // d_q is homogeneous: it lowers the x-degree by one and adds one y_q.
    RationalField q;
    Rng rng = make_rng(3, "derive-degrees");
    for (int i = 0; i < 200; ++i) {
        auto f = testing::random_sigma_poly(q, rng, 3, 4, 3, true);
        auto d = derive(f, 1);
        for (const auto& [m, c] : d.terms()) {
            std::size_t ys = 0;
            for (const auto& [b, deg] : m.letter_degrees())
                if (!b.is_x()) ys += deg;
            ASSERT_EQ(ys, 1u);
            ASSERT_LT(x_degree(m), f.degree());
        }
    }
}

TEST(SigmaProperty, SplitPPartsRecombines) {
    PrimeField f5(5);
    Rng rng = make_rng(4, "split");
    for (int i = 0; i < 500; ++i) {
        SigmaMonomial m = testing::random_monomial(rng, 12, 2, true);
        std::vector<SigmaMonomial::Entry> boosted;
        for (const auto& e : m.entries()) boosted.emplace_back(e.first, e.second * (1 + i % 7));
        SigmaMonomial mm(std::move(boosted));
        auto [plus, minus] = split_p_parts(mm, 5);
        ASSERT_EQ(plus * minus, mm);
        for (const auto& [f, mult] : plus.entries()) ASSERT_EQ(mult % 5, 0u);
        for (const auto& [f, mult] : minus.entries()) ASSERT_LT(mult, 5u);
    }
}

TEST(SigmaProperty, SymmetricClassDerivativeVanishesInCharTwo) {
    // For a = c c^T, d_q tr(a) = tr(dc c^T) + tr(c dc^T) = 2 tr(dc c^T) = 0 over F_2.
    PrimeField f2(2);
    Rng rng = make_rng(5, "char2-symmetric");
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        Word c = testing::random_word(rng, 1 + i % 3, 2, true);
        Word a = concat(c, involution(c));
        if (!is_primitive(a)) continue;
        auto f = SigmaPoly<PrimeField>::generator(f2, make_factor(1, a));
        ASSERT_TRUE(derive(f, 1).is_zero()) << word_str(a);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

}  // namespace
}  // namespace freerel
