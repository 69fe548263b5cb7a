#include <gtest/gtest.h>

#include <nonnormal/exact_oracle.hpp>

#include "support.hpp"

using namespace nonnormal;
using namespace testing_support;

TEST(ExactCharpoly, FourByFour)
{
    const auto cp = exact_charpoly(exact_params(4, 1, {}, q(1, 4)));
    EXPECT_EQ(cp.coeffs, (std::vector<RationalComplex>{q(0), q(0), q(-1, 2), q(-1), q(1)}));
    EXPECT_EQ(cp.zero_root_count(), 2);
    EXPECT_EQ(cp.nonzero_factor(), (std::vector<RationalComplex>{q(-1, 2), q(-1), q(1)}));
}

TEST(ExactCharpoly, NilpotentWithoutDelta)
{
    const auto cp = exact_charpoly(exact_params(7, 2, {q(1)}, q(0)));
    EXPECT_EQ(cp.zero_root_count(), 7);
    EXPECT_EQ(cp.coeffs.back(), q(1));
}

TEST(ExactCharpoly, MatchesCofactorExpansionOnThreeByThree)
{
    // n=3, t=0, b=2, delta=1/2: M = [[d, 1+d, 2+d], [d, d, 1+d], [d, d, d]].
    const RationalComplex d = q(1, 2);
    const RationalComplex a = d, b = q(1) + d, c = q(2) + d;
    // det(zI - M) = z^3 - tr z^2 + (sum of principal 2-minors) z - det M
    const RationalComplex tr = q(3) * d;
    const RationalComplex minors = (a * a - b * a) + (a * a - c * a) + (a * a - b * a);
    const RationalComplex det = a * (a * a - b * a) - b * (a * a - b * a) + c * (a * a - a * a);
    const auto cp = exact_charpoly(exact_params(3, 0, {q(2)}, d));
    EXPECT_EQ(cp.coeffs, (std::vector<RationalComplex>{-det, minors, -tr, q(1)}));
}

TEST(ExactCharpoly, SizeCap)
{
    EXPECT_THROW(exact_charpoly(exact_params(13, 1, {}, q(1))), InvalidArgument);
}

TEST(RankSequence, KernelDimensionIsT)
{
    for (int t = 1; t <= 8; ++t) {
        const auto r = rank_sequence(exact_params(10, t, {q(1)}, q(1, 10)), 1);
        EXPECT_EQ(10 - r[1], t) << t;
    }
}

TEST(RankSequence, BlockSizesFromRanks)
{
    for (int n : {6, 10, 12})
        for (int t = 1; t <= n - 2; ++t)
            for (const auto& b : {q(0), q(2), RationalComplex(mpq_class(1), mpq_class(1))}) {
                const auto r = rank_sequence(exact_params(n, t, {b}, q(1)), n);
                EXPECT_EQ(block_sizes_from_ranks(r), multiplicities(n, t).block_sizes) << n << "," << t;
            }
}

TEST(RankSequence, IndexOfZeroEigenvalue)
{
    for (int t : {1, 2, 3, 5}) {
        const auto r = rank_sequence(exact_params(12, t, {q(1)}, q(1)), 12);
        int k = 0;
        while (r[k] != r[k + 1]) ++k;
        EXPECT_EQ(k, multiplicities(12, t).k0) << t;
    }
}

TEST(ChainCheck, SixByTwoBasisPasses)
{
    const auto p = exact_params(6, 2, {q(1)}, q(1));
    const auto rep = exact_chain_check(p, jordan_basis(p));
    EXPECT_TRUE(rep.ok);
    EXPECT_TRUE(rep.violations.empty());
}

TEST(ChainCheck, CorruptedZeroSumIsNamed)
{
    const auto p = exact_params(6, 2, {q(1)}, q(1));
    auto basis = jordan_basis(p);
    basis.left[1][0][0] += q(1);
    const auto rep = exact_chain_check(p, basis);
    EXPECT_FALSE(rep.ok);
    bool named = false;
    for (const auto& v : rep.violations) named = named || v == "zero-sum fails for w^(2,1)";
    EXPECT_TRUE(named);
}

TEST(ChainCheck, AllSmallCases)
{
    for (int n = 3; n <= 10; ++n)
        for (int t = 1; t <= n - 2; ++t)
            for (const auto& b : {q(0), q(1), q(-1, 3), RationalComplex(mpq_class(1), mpq_class(1))}) {
                const auto p = exact_params(n, t, {b}, q(1, 10));
                EXPECT_TRUE(exact_chain_check(p, jordan_basis(p)).ok) << n << "," << t << "," << b;
            }
}

TEST(OracleAgreement, FullSuite)
{
    for (int n = 2; n <= 12; ++n)
        for (int t = 1; t <= n - 2; ++t)
            for (const auto& b : {q(0), q(1), q(2), RationalComplex(mpq_class(1), mpq_class(1))})
                for (const auto& d : {q(1), q(1, 10)}) {
                    const auto p = exact_params(n, t, {b}, d);
                    const auto cp = exact_charpoly(p);
                    EXPECT_EQ(cp.zero_root_count(), multiplicities(n, t).a0);
                    EXPECT_EQ(cp.nonzero_factor(), char_poly(p).coeffs) << n << "," << t << "," << b << "," << d;
                }
}
