#include <gtest/gtest.h>

#include "freerel/freerel.hpp"
#include "test_support.hpp"

namespace freerel {
namespace {

using MQ = PolyMatrix<RationalField>;
using M3 = PolyMatrix<PrimeField>;

TEST(PolyMatrix, ShapesAndErrors) {
    RationalField q;
    EXPECT_THROW(MQ(q, 0, 2), DomainError);
    EXPECT_THROW(MQ::elementary(q, 2, 3, 1), DomainError);
    EXPECT_THROW(MQ::generic(q, VarKind::Y, 1, std::nullopt, 2), DomainError);
    EXPECT_THROW(MQ::generic(q, VarKind::X, 1, 1, 2), DomainError);
    MQ a(q, 2, 3);
    MQ b(q, 2, 3);
    EXPECT_THROW(a * b, DomainError);
    EXPECT_THROW(a.trace(), DomainError);
    EXPECT_THROW(MQ::identity(q, 3).symplectic_transpose(), DomainError);
}

TEST(PolyMatrix, SymplecticTransposeOfElementary) {
    // e_{ij}* = e_{j+d,i+d} for i, j <= d
    RationalField q;
    const std::size_t d = 3;
    for (std::size_t i = 1; i <= d; ++i)
        for (std::size_t j = 1; j <= d; ++j)
            EXPECT_EQ(MQ::elementary(q, 2 * d, i, j).symplectic_transpose(), MQ::elementary(q, 2 * d, j + d, i + d));
}

TEST(PolyMatrix, SymplecticTransposeMatchesDefinition) {
    // A* = -J A^T J with J = [[0, E], [-E, 0]]
    RationalField q;
    const std::size_t n = 4;
    MQ j(q, n, n);
    for (std::size_t i = 0; i < 2; ++i) {
        j(i, i + 2) = Polynomial<RationalField>::constant(q, 1);
        j(i + 2, i) = Polynomial<RationalField>::constant(q, -1);
    }
    MQ x = MQ::generic(q, VarKind::X, 1, std::nullopt, n);
    MQ expected = (j * x.transpose() * j).scaled(Polynomial<RationalField>::constant(q, -1));
    EXPECT_EQ(x.symplectic_transpose(), expected);
    EXPECT_EQ(x.symplectic_transpose().symplectic_transpose(), x);
}

TEST(PolyMatrix, SigmaOfSmallMatrices) {
    PrimeField f(3);
    M3 x = M3::generic(f, VarKind::X, 1, std::nullopt, 2);
    EXPECT_EQ(sigma_t(x, 0), Polynomial<PrimeField>::constant(f, 1LL));
    EXPECT_EQ(sigma_t(x, 1), x.trace());
    EXPECT_EQ(sigma_t(x, 2).str(), "x[1,1](1) * x[2,2](1) + 2 * x[1,2](1) * x[2,1](1)");
    EXPECT_THROW(sigma_t(x, 3), DomainError);
    EXPECT_THROW(sigma_t(x, -1), DomainError);
}

TEST(PolyMatrix, SigmaAgreesWithCharacteristicPolynomial) {
    RationalField q;
    for (std::size_t n = 1; n <= 4; ++n) {
        MQ x = MQ::generic(q, VarKind::X, 1, std::nullopt, n);
        auto coeffs = char_poly_sigma(x);
        ASSERT_EQ(coeffs.size(), n + 1);
        for (std::size_t t = 0; t <= n; ++t) EXPECT_EQ(coeffs[t], sigma_t(x, static_cast<long long>(t))) << n << " " << t;
    }
}

TEST(PolyMatrix, CharPolyRejectsLambda) {
    RationalField q;
    MQ m(q, 1, 1);
    m(0, 0) = Polynomial<RationalField>::variable(q, Variable::lambda());
    EXPECT_THROW(char_poly_sigma(m), DomainError);
}

TEST(PolyMatrix, FrobeniusNeedsMatchingCharacteristic) {
    M3 x = M3::generic(PrimeField(3), VarKind::X, 1, std::nullopt, 2);
    EXPECT_THROW(x.entrywise_p_power(5), DomainError);
    EXPECT_NO_THROW(x.entrywise_p_power(3));
}

TEST(PolyMatrix, EntrywiseDeriveOfGenericIsY) {
    RationalField q;
    MQ x = MQ::generic(q, VarKind::X, 2, std::nullopt, 3);
    EXPECT_EQ(x.derive(4), MQ::generic(q, VarKind::Y, 2, 4, 3));
}

TEST(PolyMatrixProperty, SigmaRoutesAgreeOnRandomMatrices) {
    PrimeField f(5);
    Rng rng = make_rng(11, "sigma-routes");
    for (int i = 0; i < 30; ++i) {
        std::size_t n = 1 + i % 4;
        auto a = testing::random_linear_matrix(f, rng, n);
        auto coeffs = char_poly_sigma(a);
        for (std::size_t t = 0; t <= n; ++t) ASSERT_EQ(coeffs[t], sigma_t(a, static_cast<long long>(t)));
    }
}

TEST(DenseMatrix, InverseAndGroupTransposes) {
    PrimeField f(5);
    DenseMatrix<PrimeField> a(f, 2, 2);
    a(0, 0) = 1;
    a(0, 1) = 1;
    a(1, 1) = 1;
    EXPECT_TRUE((a * a.inverse()).is_identity());
    // [[1,1],[0,1]] is symplectic for n = 2
    EXPECT_TRUE((a * a.symplectic_transpose()).is_identity());
    DenseMatrix<PrimeField> z(f, 2, 2);
    EXPECT_THROW(z.inverse(), DomainError);
}

}  // namespace
}  // namespace freerel
