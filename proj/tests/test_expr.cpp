#include <gtest/gtest.h>

#include "freerel/freerel.hpp"
#include "test_support.hpp"

namespace freerel {
namespace {

TEST(Expr, ParsesLettersAndTransposes) {
    EXPECT_EQ(parse_word("x1*T(x2*y3_1)"), (Word{Letter::x(1), Letter::y(3, 1, true), Letter::x(2, true)}));
    EXPECT_EQ(parse_word("x1'"), (Word{Letter::x(1, true)}));
    EXPECT_EQ(parse_word("T(T(x1))"), (Word{Letter::x(1)}));
}

TEST(Expr, CoefficientsAndSigns) {
    RationalField q;
    EXPECT_EQ(parse_expr("-2/4*tr(x1) + 3", q).str(), "3 - 1/2*tr(x1)");
    EXPECT_EQ(parse_expr("tr(x1) - tr(x1)", q).str(), "0");
    EXPECT_EQ(parse_expr("2*3*tr(x1)", q).str(), "6*tr(x1)");
    PrimeField f3(3);
    EXPECT_EQ(parse_expr("-tr(x1)", f3).str(), "2*tr(x1)");
    EXPECT_THROW(parse_expr("1/3*tr(x1)", f3), DomainError);
}

TEST(Expr, CanonicalizesClasses) {
    RationalField q;
    EXPECT_EQ(parse_expr("tr(x2*x1) - tr(x1*x2)", q).str(), "0");
    EXPECT_EQ(parse_expr("tr(T(x2)*T(x1)) - tr(x1*x2)", q).str(), "0");
}

TEST(Expr, Errors) {
    RationalField q;
    EXPECT_THROW(parse_expr("tr(x1", q), ParseError);
    EXPECT_THROW(parse_expr("tr(x0)", q), ParseError);
    EXPECT_THROW(parse_expr("sigma(0, x1)", q), ParseError);
    EXPECT_THROW(parse_expr("tr(x1*x1)", q), ParseError);
    EXPECT_THROW(parse_expr("tr(x1) +", q), ParseError);
    EXPECT_THROW(parse_expr("", q), ParseError);
    EXPECT_THROW(parse_expr("1/0", q), ParseError);
    try {
        parse_expr("tr(x1) + \n  foo", q);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 3u);
    }
}

template <class F>
void round_trip(const F& field, std::uint64_t seed, int count) {
    Rng rng = make_rng(seed, "round-trip");
    for (int i = 0; i < count; ++i) {
        auto f = testing::random_sigma_poly(field, rng, 4, 5, 3, true, 2);
        const std::string text = format_expr(f);
        ASSERT_EQ(parse_expr(text, field), f) << text;
        ASSERT_EQ(format_expr(parse_expr(text, field)), text);
    }
}

TEST(ExprProperty, RoundTripQ) { round_trip(RationalField{}, 1, 2000); }
TEST(ExprProperty, RoundTripF7) { round_trip(PrimeField(7), 2, 2000); }

}  // namespace
}  // namespace freerel
