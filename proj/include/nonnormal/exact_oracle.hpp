#pragma once

#include <string>
#include <vector>

#include "jordan.hpp"
#include "model.hpp"

namespace nonnormal {

// Dense univariate polynomial over the Gaussian rationals, coefficient k
// multiplies z^k; kept trimmed (no trailing zeros).
class ExactPolynomial {
public:
    ExactPolynomial() = default;
    explicit ExactPolynomial(std::vector<RationalComplex> c) : c_(std::move(c)) { trim(); }
    static ExactPolynomial constant(const RationalComplex& a) { return ExactPolynomial({a}); }

    const std::vector<RationalComplex>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    RationalComplex coeff(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : RationalComplex(0); }

    friend ExactPolynomial operator+(const ExactPolynomial& a, const ExactPolynomial& b)
    {
        std::vector<RationalComplex> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(int(i)) + b.coeff(int(i));
        return ExactPolynomial(std::move(r));
    }
    friend ExactPolynomial operator-(const ExactPolynomial& a, const ExactPolynomial& b)
    {
        std::vector<RationalComplex> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(int(i)) - b.coeff(int(i));
        return ExactPolynomial(std::move(r));
    }
    friend ExactPolynomial operator*(const ExactPolynomial& a, const ExactPolynomial& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<RationalComplex> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                if (!b.c_[j].is_zero()) r[i + j] += a.c_[i] * b.c_[j];
        }
        return ExactPolynomial(std::move(r));
    }
    friend bool operator==(const ExactPolynomial& a, const ExactPolynomial& b) { return a.c_ == b.c_; }

    // Quotient of a division known to be exact; throws otherwise.
    ExactPolynomial divide_exact(const ExactPolynomial& d) const
    {
        if (d.is_zero()) throw NumericalFailure("polynomial division by zero");
        if (is_zero()) return {};
        if (degree() < d.degree()) throw NumericalFailure("inexact polynomial division");
        std::vector<RationalComplex> rem = c_;
        std::vector<RationalComplex> q(degree() - d.degree() + 1);
        const RationalComplex& lead = d.c_.back();
        for (int k = degree() - d.degree(); k >= 0; --k) {
            const RationalComplex f = rem[k + d.degree()] / lead;
            q[k] = f;
            if (f.is_zero()) continue;
            for (int j = 0; j <= d.degree(); ++j) rem[k + j] -= f * d.c_[j];
        }
        for (const auto& r : rem)
            if (!r.is_zero()) throw NumericalFailure("inexact polynomial division");
        return ExactPolynomial(std::move(q));
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<RationalComplex> c_;
};

struct ExactCharPoly {
    std::vector<RationalComplex> coeffs;  // det(zI - M), ascending, monic of degree n

    int zero_root_count() const
    {
        int k = 0;
        while (k < static_cast<int>(coeffs.size()) && coeffs[k].is_zero()) ++k;
        return k;
    }

    // det(zI - M) / z^{a0}.
    std::vector<RationalComplex> nonzero_factor() const
    {
        return {coeffs.begin() + zero_root_count(), coeffs.end()};
    }
};

// Fraction-free (Bareiss) determinant of zI - M with polynomial entries.
inline ExactCharPoly exact_charpoly(const ExactModelParams& p)
{
    p.validate();
    require(p.n <= 12, "exact characteristic polynomial is limited to n <= 12");
    const auto M = build_matrix(p);
    const int n = p.n;
    std::vector<std::vector<ExactPolynomial>> a(n, std::vector<ExactPolynomial>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j)
                a[i][j] = ExactPolynomial({-M(i, j), RationalComplex(1)});
            else
                a[i][j] = ExactPolynomial::constant(-M(i, j));
        }
    bool negate = false;
    ExactPolynomial prev = ExactPolynomial::constant(RationalComplex(1));
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k].is_zero()) {
            int piv = -1;
            for (int i = k + 1; i < n && piv < 0; ++i)
                if (!a[i][k].is_zero()) piv = i;
            if (piv < 0) return {std::vector<RationalComplex>(n + 1, RationalComplex(0))};
            std::swap(a[k], a[piv]);
            negate = !negate;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).divide_exact(prev);
            a[i][k] = ExactPolynomial();
        }
        prev = a[k][k];
    }
    ExactCharPoly out;
    out.coeffs.assign(n + 1, RationalComplex(0));
    for (int k = 0; k <= a[n - 1][n - 1].degree(); ++k)
        out.coeffs[k] = negate ? -a[n - 1][n - 1].coeff(k) : a[n - 1][n - 1].coeff(k);
    return out;
}

inline int exact_rank(DenseMatrix<RationalComplex> a)
{
    const std::size_t rows = a.rows(), cols = a.cols();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && a(piv, col).is_zero()) ++piv;
        if (piv == rows) continue;
        if (piv != rank)
            for (std::size_t j = 0; j < cols; ++j) std::swap(a(piv, j), a(rank, j));
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (a(i, col).is_zero()) continue;
            const RationalComplex f = a(i, col) / a(rank, col);
            for (std::size_t j = col; j < cols; ++j) a(i, j) -= f * a(rank, j);
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

// ranks of M^0 .. M^kmax.
inline std::vector<int> rank_sequence(const ExactModelParams& p, int kmax)
{
    p.validate();
    require(p.n <= 12, "exact rank sequence is limited to n <= 12");
    require(kmax >= 0, "kmax must be non-negative");
    const auto M = build_matrix(p);
    auto power = DenseMatrix<RationalComplex>::identity(p.n);
    std::vector<int> ranks{p.n};
    for (int k = 1; k <= kmax; ++k) {
        power = power * M;
        ranks.push_back(exact_rank(power));
    }
    return ranks;
}

// Jordan block sizes of the zero eigenvalue from a rank sequence that has
// stabilised: #blocks of size >= q equals r_{q-1} - r_q.
inline std::vector<int> block_sizes_from_ranks(const std::vector<int>& ranks)
{
    std::vector<int> at_least;
    for (std::size_t q = 1; q < ranks.size(); ++q) at_least.push_back(ranks[q - 1] - ranks[q]);
    std::vector<int> sizes;
    for (std::size_t q = 0; q < at_least.size(); ++q) {
        const int next = q + 1 < at_least.size() ? at_least[q + 1] : 0;
        for (int c = 0; c < at_least[q] - next; ++c) sizes.push_back(static_cast<int>(q) + 1);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

struct ChainCheckReport {
    bool ok = true;
    std::vector<std::string> violations;

    void fail(std::string msg)
    {
        ok = false;
        violations.push_back(std::move(msg));
    }
};

inline ChainCheckReport exact_chain_check(const ExactModelParams& p, const JordanBasis<RationalComplex>& basis)
{
    p.validate();
    require(p.n <= 10, "exact chain check is limited to n <= 10");
    ChainCheckReport rep;
    const auto M = build_matrix(p);
    const int n = p.n;
    auto tag = [](const char* kind, std::size_t l, std::size_t q) {
        return std::string(kind) + "^(" + std::to_string(l + 1) + "," + std::to_string(q + 1) + ")";
    };
    auto is_zero_vec = [](const Vec<RationalComplex>& v) {
        return std::all_of(v.begin(), v.end(), [](const RationalComplex& x) { return x.is_zero(); });
    };
    if (!basis.complete() || basis.n != n || basis.right.size() != basis.block_sizes.size()) {
        rep.fail("basis is incomplete or does not match the parameters");
        return rep;
    }
    for (std::size_t l = 0; l < basis.right.size(); ++l) {
        const auto& R = basis.right[l];
        const auto& L = basis.left[l];
        if (static_cast<int>(R.size()) != basis.block_sizes[l] || L.size() != R.size()) {
            rep.fail("chain " + std::to_string(l + 1) + " has the wrong length");
            continue;
        }
        for (std::size_t q = 0; q < R.size(); ++q) {
            auto mv = M.apply(R[q]);
            if (q > 0)
                for (int i = 0; i < n; ++i) mv[i] -= R[q - 1][i];
            if (!is_zero_vec(mv)) rep.fail("chain relation fails for " + tag("v", l, q));
            if (!coordinate_sum(R[q]).is_zero()) rep.fail("zero-sum fails for " + tag("v", l, q));
            if (!coordinate_sum(L[q]).is_zero()) rep.fail("zero-sum fails for " + tag("w", l, q));

            Vec<RationalComplex> row(n);
            for (int i = 0; i < n; ++i) row[i] = conj(L[q][i]);
            auto rm = M.apply_left(row);
            if (q + 1 < L.size())
                for (int i = 0; i < n; ++i) rm[i] -= conj(L[q + 1][i]);
            if (!is_zero_vec(rm)) rep.fail("left chain relation fails for " + tag("w", l, q));
        }
    }
    for (std::size_t l = 0; l < basis.left.size(); ++l)
        for (std::size_t p1 = 0; p1 < basis.left[l].size(); ++p1)
            for (std::size_t r = 0; r < basis.right.size(); ++r)
                for (std::size_t q = 0; q < basis.right[r].size(); ++q) {
                    const auto g = pairing(basis.left[l][p1], basis.right[r][q]);
                    const RationalComplex want = (l == r && p1 == q) ? RationalComplex(1) : RationalComplex(0);
                    if (g != want)
                        rep.fail("pairing <" + tag("w", l, p1) + ", " + tag("v", r, q) + "> = " + g.str());
                }
    return rep;
}

} // namespace nonnormal
