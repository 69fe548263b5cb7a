#include <gtest/gtest.h>

#include <cmath>

#include <nonnormal/exact_oracle.hpp>
#include <nonnormal/jordan.hpp>

#include "support.hpp"

using namespace nonnormal;
using namespace testing_support;

namespace {

// Left vectors as displayed rows (conj of the stored w) for n=6, t=2.
std::vector<Vec<RationalComplex>> displayed_left_rows(const RationalComplex& b)
{
    const RationalComplex one(1), d = q(3) + q(2) * b, d2 = d * d;
    return {
        {(one + b) / d, -(q(2) + b) / d, (one + b) / d, b * (one + q(2) * b) / d2, -q(2) * b * (one + b) / d2,
         -q(2) * b * (one + b) / d2},
        {q(0), q(0), q(0), (one + b) / d, -(q(2) - b * b) / d, (one - b - b * b) / d},
        {one / d, one / d, -q(2) * (one + b) / d, q(4) * b / d2, b * (one + q(2) * b) / d2, b * (one + q(2) * b) / d2},
        {q(0), q(0), q(0), one / d, (one + b) / d, -(q(2) + b) / d},
    };
}

Vec<RationalComplex> conj_vec(const Vec<RationalComplex>& v)
{
    Vec<RationalComplex> out;
    for (const auto& x : v) out.push_back(conj(x));
    return out;
}

double max_abs_diff(const Vec<Complex>& a, const Vec<Complex>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(RightEigenvectors, SimpleForm)
{
    const auto v = right_eigenvectors<RationalComplex>(6, 2);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], (Vec<RationalComplex>{q(1), q(-1), q(0), q(0), q(0), q(0)}));
    EXPECT_EQ(v[1], (Vec<RationalComplex>{q(1), q(0), q(-1), q(0), q(0), q(0)}));
    const auto m = build_matrix(exact_params(6, 2, {q(3)}, q(1, 7)));
    for (const auto& x : v) {
        EXPECT_TRUE(coordinate_sum(x).is_zero());
        for (const auto& y : m.apply(x)) EXPECT_TRUE(y.is_zero());
    }
}

TEST(ChainStep, MatchesClosedFormForSingleTermH)
{
    // v = e1 - e_{l+1}: w = (b(-1+(-b)^l)/(1+b), 0 x t, 1-(-b)^l, -(-b)^{l-1}, ..., -(-b), -1, 0 ...).
    const RationalComplex b = q(2, 3);
    const int n = 12, t = 3;
    const auto p = exact_params(n, t, {b}, q(1, 5));
    for (int l = 1; l <= t; ++l) {
        const auto v = right_eigenvectors<RationalComplex>(n, t)[l - 1];
        const auto w = chain_step(p, v);
        Vec<RationalComplex> want(n, q(0));
        RationalComplex pw(1);
        for (int k = 0; k < l; ++k) pw = pw * (-b);  // (-b)^l
        want[0] = b * (q(-1) + pw) / (q(1) + b);
        want[t + 1] = q(1) - pw;
        for (int k = l - 1; k >= 0; --k) {
            RationalComplex pkk(1);
            for (int j = 0; j < k; ++j) pkk = pkk * (-b);
            want[t + 2 + (l - 1 - k)] = -pkk;
        }
        EXPECT_EQ(w, want) << "l=" << l;
    }
}

TEST(ChainStep, ZeroBIsInverseShift)
{
    const auto p = exact_params(9, 2, {}, q(1, 4));
    const auto w = chain_step(p, right_eigenvectors<RationalComplex>(9, 2)[1]);
    EXPECT_EQ(w, (Vec<RationalComplex>{q(0), q(0), q(0), q(1), q(0), q(-1), q(0), q(0), q(0)}));
}

TEST(ChainStep, ExhaustedChainSignals)
{
    const auto p = exact_params(6, 2, {q(1)}, q(1));
    Vec<RationalComplex> v(6, q(0));
    v[0] = q(1);
    v[5] = q(-1);
    EXPECT_THROW(chain_step(p, v), ChainExhausted);
}

TEST(JordanBasis, SixByTwoRightVectors)
{
    for (const RationalComplex& b : {q(1), q(2), q(1, 3), RationalComplex(mpq_class(1), mpq_class(1))}) {
        const auto basis = jordan_basis(exact_params(6, 2, {b}, q(1, 10)));
        ASSERT_EQ(basis.block_sizes, (std::vector<int>{2, 2}));
        EXPECT_EQ(basis.right[0][1], (Vec<RationalComplex>{-b, q(0), q(0), q(1) + b, q(-1), q(0)}));
        EXPECT_EQ(basis.right[1][1], (Vec<RationalComplex>{-b + b * b, q(0), q(0), q(1) - b * b, b, q(-1)}));
    }
}

TEST(JordanBasis, SixByTwoLeftVectors)
{
    for (const RationalComplex& b : {q(1), q(2), q(1, 3), q(-1, 2), RationalComplex(mpq_class(1), mpq_class(1))}) {
        const auto basis = jordan_basis(exact_params(6, 2, {b}, q(1)));
        const auto rows = displayed_left_rows(b);
        EXPECT_EQ(conj_vec(basis.left[0][0]), rows[0]) << b;
        EXPECT_EQ(conj_vec(basis.left[0][1]), rows[1]) << b;
        EXPECT_EQ(conj_vec(basis.left[1][0]), rows[2]) << b;
        EXPECT_EQ(conj_vec(basis.left[1][1]), rows[3]) << b;
    }
}

TEST(JordanBasis, SixByTwoAtBOneDenominators)
{
    const auto basis = jordan_basis(exact_params(6, 2, {q(1)}, q(1)));
    EXPECT_EQ(conj_vec(basis.left[0][0]), (Vec<RationalComplex>{q(2, 5), q(-3, 5), q(2, 5), q(3, 25), q(-4, 25), q(-4, 25)}));
    EXPECT_EQ(conj_vec(basis.left[1][1]), (Vec<RationalComplex>{q(0), q(0), q(0), q(1, 5), q(2, 5), q(-3, 5)}));
}

TEST(JordanBasis, ChainLengthsAndSupport)
{
    const auto basis = jordan_basis(params(17, 5, {0.7}, 0.01));
    EXPECT_EQ(basis.block_sizes, (std::vector<int>{3, 3, 3, 3, 2}));
    for (std::size_t l = 0; l < basis.right.size(); ++l)
        for (std::size_t q = 0; q < basis.right[l].size(); ++q) {
            const std::size_t support = q * 6 + (l + 2);
            for (std::size_t i = support; i < 17; ++i) EXPECT_EQ(basis.right[l][q][i], Complex(0)) << l << q << i;
        }
    // top left vector of each chain vanishes on the first n-(t+1) coordinates
    for (const auto& left : basis.left)
        for (int i = 0; i < 17 - 6; ++i) EXPECT_EQ(left.back()[i], Complex(0));
}

TEST(JordanBasis, FloatingResidualsAndGram)
{
    // Chain norms reach 1e18 at b=1, t=1, so every check is scaled by the
    // norms of the vectors involved.
    for (int n : {8, 15, 30})
        for (int t : {1, 2, 4})
            for (Complex b : {Complex(0), Complex(1), Complex(-0.3, 0.4)}) {
                const auto p = params(n, t, {b}, 0.01);
                const auto basis = jordan_basis(p);
                const auto M = build_matrix(p);
                const double norm_m = spectral_norm(model_matrix(p));
                for (std::size_t l = 0; l < basis.right.size(); ++l)
                    for (std::size_t k = 0; k < basis.right[l].size(); ++k) {
                        auto r = M.apply(basis.right[l][k]);
                        if (k > 0)
                            for (int i = 0; i < n; ++i) r[i] -= basis.right[l][k - 1][i];
                        EXPECT_LE(norm2(r), 1e-10 * norm_m * norm2(basis.right[l][k]));
                        EXPECT_LE(std::abs(coordinate_sum(basis.left[l][k])), 1e-12 * norm2(basis.left[l][k]));
                    }
                for (std::size_t l = 0; l < basis.left.size(); ++l)
                    for (std::size_t a = 0; a < basis.left[l].size(); ++a)
                        for (std::size_t r = 0; r < basis.right.size(); ++r)
                            for (std::size_t c = 0; c < basis.right[r].size(); ++c) {
                                const Complex g = pairing(basis.left[l][a], basis.right[r][c]);
                                const double scale = norm2(basis.left[l][a]) * norm2(basis.right[r][c]);
                                EXPECT_LE(std::abs(g - ((l == r && a == c) ? 1.0 : 0.0)), 1e-10 * scale);
                            }
            }
}

TEST(JordanBasis, RightChainsDoNotDependOnDelta)
{
    const auto a = build_right_chains(exact_params(11, 2, {q(2)}, q(1, 3)));
    const auto b = build_right_chains(exact_params(11, 2, {q(2)}, q(-5, 7)));
    EXPECT_EQ(a.right, b.right);
}

TEST(ClosedFormB0, OmegaAndDivisibleCase)
{
    // (t+1) | n: w^(l,d) = (1/(t+1)) (0..., 1 x l, -t, 1 x (t-l)).
    const auto basis = closed_form_b0<RationalComplex>(12, 2);
    const auto& top = basis.left[0].back();
    EXPECT_EQ(conj_vec(top), (Vec<RationalComplex>{q(0), q(0), q(0), q(0), q(0), q(0), q(0), q(0), q(0), q(1, 3),
                                                   q(-2, 3), q(1, 3)}));
}

TEST(ClosedFormB0, AgreesWithConstructedChains)
{
    for (int n = 3; n <= 30; ++n)
        for (int t = 1; t <= n - 2; ++t) {
            const auto built = jordan_basis(params(n, t, {}, 0.01));
            const auto closed = closed_form_b0<Complex>(n, t);
            ASSERT_EQ(built.block_sizes, closed.block_sizes);
            for (std::size_t l = 0; l < built.right.size(); ++l)
                for (std::size_t k = 0; k < built.right[l].size(); ++k) {
                    EXPECT_LE(max_abs_diff(built.right[l][k], closed.right[l][k]), 1e-12) << n << "," << t;
                    EXPECT_LE(max_abs_diff(built.left[l][k], closed.left[l][k]), 1e-12) << n << "," << t;
                }
        }
}

TEST(ClosedFormB0, ExactAtEightByOne)
{
    const auto p = exact_params(8, 1, {}, q(1, 10));
    const auto closed = closed_form_b0<RationalComplex>(8, 1);
    EXPECT_TRUE(exact_chain_check(p, closed).ok);
    EXPECT_EQ(closed.left, jordan_basis(p).left);
}

TEST(ConditionNumbers, RankOneNormIdentity)
{
    const auto basis = jordan_basis(params(14, 3, {1.0}, 0.01));
    for (const auto& bc : basis.conditions.per_block) {
        const auto& v = basis.right[bc.block - 1].front();
        const auto& w = basis.left[bc.block - 1].back();
        Eigen::MatrixXcd outer = to_eigen(v) * to_eigen(w).adjoint();
        EXPECT_NEAR(spectral_norm(outer), bc.kappa, 1e-12 * bc.kappa);
    }
}

TEST(ConditionNumbers, BZeroXiForm)
{
    // b = 0, xi >= 2: kappa = sqrt(2 (xi-1)/xi) <= sqrt(2 (t-1)/t).
    for (int n : {23, 41, 60})
        for (int t : {3, 4, 6}) {
            const auto m = multiplicities(n, t);
            if (m.xi < 2) continue;
            const auto basis = closed_form_b0<Complex>(n, t);
            const double want = std::sqrt(2.0 * (m.xi - 1) / m.xi);
            EXPECT_NEAR(basis.conditions.kappa0, want, 1e-12) << n << "," << t;
            EXPECT_LE(basis.conditions.kappa0, std::sqrt(2.0 * (t - 1) / t) + 1e-12);
        }
}

TEST(Similarity, JordanFormOfModel)
{
    const auto p = params(12, 2, {1.0}, 1e-2);
    const auto basis = jordan_basis(p);
    const auto spec = nonzero_eigenvalues(p);
    const auto sim = assemble_similarity(p, basis, spec);
    EXPECT_LE(sim.similarity_residual, 1e-6 * sim.norm_m);
    EXPECT_LE(sim.inverse_residual, 1e-8);
    const auto m = multiplicities(12, 2);
    int col = 0;
    for (int size : m.block_sizes) {
        for (int k = 1; k < size; ++k) EXPECT_EQ(sim.expected(col + k - 1, col + k), Complex(1.0));
        if (col + size < 12) EXPECT_EQ(sim.expected(col + size - 1, col + size), Complex(0.0));
        col += size;
    }
}

TEST(Similarity, LargestTIsDiagonal)
{
    const int n = 9;
    const auto p = params(n, n - 2, {0.5}, 0.3);
    const auto sim = assemble_similarity(p, jordan_basis(p), nonzero_eigenvalues(p));
    for (int i = 0; i + 1 < n; ++i) EXPECT_EQ(sim.expected(i, i + 1), Complex(0.0));
    EXPECT_GT(std::abs(sim.expected(n - 2, n - 2)), std::abs(sim.expected(n - 1, n - 1)));
    EXPECT_LE(sim.similarity_residual, 1e-8 * sim.norm_m);
}
