#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include <nonnormal/ensemble.hpp>
#include <nonnormal/exact_oracle.hpp>
#include <nonnormal/spectrum.hpp>

#include "support.hpp"

using namespace nonnormal;
using namespace testing_support;

TEST(CharPoly, SmallBZeroByHand)
{
    // n=4, t=1: z^2 - 4 delta z - 2 delta; n=6, t=2: z^2 - 6 delta z - 3 delta.
    const auto a = char_poly(exact_params(4, 1, {}, q(1, 4)));
    EXPECT_EQ(a.coeffs, (Vec<RationalComplex>{q(-1, 2), q(-1), q(1)}));
    EXPECT_EQ(a.form, PolynomialForm::ZeroB);
    const auto b = char_poly(exact_params(6, 2, {}, q(1, 3)));
    EXPECT_EQ(b.coeffs, (Vec<RationalComplex>{q(-1), q(-2), q(1)}));
}

TEST(CharPoly, GeneralFormReducesToZeroBForm)
{
    for (int n = 3; n <= 40; ++n)
        for (int t = 0; t <= n - 2; ++t) {
            const auto p = exact_params(n, t, {}, q(3, 7));
            const auto zero_b = detail::char_poly_zero_b(p);
            const auto general = detail::char_poly_general(p);
            EXPECT_EQ(char_poly(p).form, PolynomialForm::ZeroB);
            EXPECT_EQ(zero_b.coeffs, general.coeffs) << n << "," << t;
        }
}

TEST(CharPoly, IndicatorActiveCaseMatchesDeterminant)
{
    const auto p = exact_params(10, 2, {q(1)}, q(1));
    const auto m = multiplicities(10, 2);
    ASSERT_EQ(m.p1, 3);
    ASSERT_EQ(m.p2, 2);
    EXPECT_EQ(char_poly(p).coeffs, exact_charpoly(p).nonzero_factor());
}

TEST(CharPoly, RejectsZeroDelta)
{
    try {
        char_poly(params(6, 1, {}, 0.0));
        FAIL() << "expected an error";
    } catch (const InvalidArgument& e) {
        EXPECT_STREQ(e.what(), "delta must be non-zero for the closed-form polynomial");
    }
}

TEST(CharPoly, RejectsGeneralH)
{
    EXPECT_THROW(char_poly(params(8, 1, {1.0, 1.0}, 0.1)), InvalidArgument);
}

TEST(CharPoly, DegreeIsP1PlusOne)
{
    for (int n = 2; n <= 60; n += 3)
        for (int t = 0; t <= n - 2; ++t)
            EXPECT_EQ(char_poly(params(n, t, {0.5}, 0.01)).degree(), multiplicities(n, t).p1 + 1);
}

TEST(NonzeroEigenvalues, QuadraticCase)
{
    const auto r = nonzero_eigenvalues(params(4, 1, {}, 0.25));
    ASSERT_EQ(r.eigenvalues.size(), 2u);
    EXPECT_NEAR(r.eigenvalues[0].real(), (1 + std::sqrt(3.0)) / 2, 1e-12);
    EXPECT_NEAR(r.eigenvalues[1].real(), (1 - std::sqrt(3.0)) / 2, 1e-12);
    EXPECT_NEAR(r.eigenvalues[0].imag(), 0.0, 1e-12);
}

TEST(NonzeroEigenvalues, RootCountAndTrace)
{
    for (int n : {10, 37, 120})
        for (int t : {1, 2, 5, 8})
            for (Complex b : {Complex(0), Complex(1), Complex(0.5, -0.25)}) {
                const auto p = params(n, t, {b}, Complex(0.02, 0.01));
                const auto r = nonzero_eigenvalues(p);
                EXPECT_EQ(static_cast<int>(r.eigenvalues.size()), multiplicities(n, t).p1 + 1);
                const Complex sum = std::accumulate(r.eigenvalues.begin(), r.eigenvalues.end(), Complex(0));
                EXPECT_LE(std::abs(sum - double(n) * p.delta), 1e-8 * std::abs(double(n) * p.delta));
                for (double res : r.residuals) EXPECT_LE(res, 1e-10);
                for (std::size_t k = 1; k < r.eigenvalues.size(); ++k)
                    EXPECT_GE(std::abs(r.eigenvalues[k - 1]), std::abs(r.eigenvalues[k]) - 1e-12);
            }
}

TEST(NonzeroEigenvalues, AgreeWithDenseEigensolver)
{
    const auto p = params(30, 3, {1.0}, 0.05);
    const auto r = nonzero_eigenvalues(p);
    const auto all = dense_eigensolve(model_matrix(p));
    for (auto l : r.eigenvalues) {
        double best = 1e300;
        for (auto z : all) best = std::min(best, std::abs(z - l));
        EXPECT_LE(best, 1e-8 * std::max(1.0, std::abs(l)));
    }
}

TEST(NonzeroEigenvalues, OutlierNearNDeltaPlusOnePlusB)
{
    const auto p = params(400, 3, {1.0}, 1.0);
    const auto r = nonzero_eigenvalues(p);
    EXPECT_NEAR(r.eigenvalues[r.outlier_index].real(), 400.0 + 2.0, 0.05);
}

TEST(Aberth, CubeRootsOfUnity)
{
    const auto r = aberth_roots({-1.0, 0.0, 0.0, 1.0}, 1.5);
    ASSERT_EQ(r.roots.size(), 3u);
    for (auto z : r.roots) EXPECT_NEAR(std::abs(z * z * z - 1.0), 0.0, 1e-13);
    // equal modulus: ordered by argument
    EXPECT_LT(std::arg(r.roots[0]), std::arg(r.roots[1]));
}

TEST(Aberth, NonConvergenceCarriesBestIterate)
{
    std::vector<Complex> c(31, 0.0);
    c[0] = -1.0;
    c[30] = 1.0;
    try {
        aberth_roots(c, 5.0, 1e-12, 1);
        FAIL() << "expected RootFindingFailure";
    } catch (const RootFindingFailure& e) {
        EXPECT_EQ(e.best_iterate.size(), 30u);
        EXPECT_EQ(e.residuals.size(), 30u);
    }
}

TEST(Outlier, CatalanNumbers)
{
    EXPECT_EQ(catalan(0), 1.0);
    EXPECT_EQ(catalan(1), 1.0);
    EXPECT_EQ(catalan(2), 2.0);
    EXPECT_EQ(catalan(3), 5.0);
    EXPECT_EQ(catalan(4), 14.0);
}

TEST(Outlier, LeadingTerm)
{
    const auto p = params(100, 3, {0.5}, 1.0);
    EXPECT_EQ(outlier_expansion(p, 0), Complex(101.5));
    EXPECT_THROW(outlier_expansion(params(100, 3, {}, 0.005), 0), InvalidArgument);
}

TEST(Outlier, ErrorDecreasesWithOrder)
{
    const auto p = params(100, 3, {}, 1.0);
    const Complex lambda = nonzero_eigenvalues(p).eigenvalues.front();
    double prev = std::abs(lambda - outlier_expansion(p, 0));
    for (int order = 1; order <= 4; ++order) {
        const double err = std::abs(lambda - outlier_expansion(p, order));
        EXPECT_LT(err, prev) << order;
        prev = err;
    }
}

TEST(CircularLimit, Preconditions)
{
    // n=13, t=3: p1 = 3, p2 = 2.
    EXPECT_THROW(circular_limit(params(13, 3, {}, 0.5)), InvalidArgument);
    const auto pts = circular_limit(params(20, 4, {}, 0.5));  // p1 = p2 = 3
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_NEAR(std::abs(pts[0] - Complex(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(pts[1] - Complex(-1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(pts[2] - Complex(0, -1)), 0.0, 1e-15);
    EXPECT_THROW(circular_limit(params(20, 4, {}, 0.01)), InvalidArgument);
}

TEST(CircularLimit, BOneSinglePoint)
{
    // n=7, t=3: p1 = p2 = 1.
    const auto pts = circular_limit(params(7, 3, {1.0}, 1.0));
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(std::abs(pts[0] + 2.0), 0.0, 1e-15);
}

// Largest distance from a non-outlier root to its nearest predicted point,
// or infinity if two roots share a nearest point.
static double circular_gap(const ModelParams& p)
{
    const auto pts = circular_limit(p);
    const auto r = nonzero_eigenvalues(p);
    std::vector<int> used(pts.size(), 0);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
        if (k == r.outlier_index) continue;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < pts.size(); ++j)
            if (std::abs(pts[j] - r.eigenvalues[k]) < std::abs(pts[arg] - r.eigenvalues[k])) arg = j;
        if (used[arg]++) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(pts[arg] - r.eigenvalues[k]));
    }
    return worst;
}

TEST(CircularLimit, GapShrinksAlongGrowingN)
{
    // p1 = p2 = 8, 17, 35: the roots pair off with the predicted points and
    // approach them slowly from inside the circle.
    const double g1 = circular_gap(params(90, 9, {}, 0.5));
    const double g2 = circular_gap(params(360, 19, {}, 0.5));
    const double g3 = circular_gap(params(1440, 39, {}, 0.5));
    EXPECT_LT(g2, g1);
    EXPECT_LT(g3, g2);
    EXPECT_LT(g3, 0.12);
}

TEST(Eigenvector, ResidualAndBiorthogonality)
{
    const auto p = params(20, 2, {Complex(1, 0.5)}, 0.1);
    const auto spec = nonzero_eigenvalues(p);
    const auto pairs = nonzero_eigenpairs(p, spec);
    const double norm_m = model_matrix(p).norm();
    for (const auto& a : pairs) {
        EXPECT_LE(a.residual, 1e-8 * norm_m);
        Complex sum = 0.0;
        for (auto x : a.right) sum += x;
        EXPECT_GT(std::abs(sum), 1e-8);
        for (const auto& b : pairs) {
            Complex g = 0.0;
            for (int i = 0; i < p.n; ++i) g += std::conj(a.left[i]) * b.right[i];
            EXPECT_NEAR(std::abs(g - (&a == &b ? 1.0 : 0.0)), 0.0, 1e-8);
        }
    }
}

TEST(Eigenvector, RejectsTinyEigenvalue)
{
    EXPECT_THROW(nonzero_eigenvector(params(6, 1, {}, 0.1), 1e-14), InvalidArgument);
}
