#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"
#include "spectrum.hpp"

namespace nonnormal {

class ChainExhausted : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct BlockCondition {
    int block = 0;  // 1-based block index l
    double kappa = 0.0;
};

struct ConditionNumbers {
    std::vector<BlockCondition> per_block;  // maximal blocks only
    double kappa0 = 0.0;
};

// Chains of the zero eigenvalue. right[l][q-1] is v^(l+1, q); left[l][q-1]
// is w^(l+1, q) with the pairing w^H v.
template <class T>
struct JordanBasis {
    int n = 0;
    int t = 0;
    std::vector<int> block_sizes;
    std::vector<std::vector<Vec<T>>> right;
    std::vector<std::vector<Vec<T>>> left;
    ConditionNumbers conditions;

    bool complete() const { return !right.empty() && left.size() == right.size(); }
};

template <class T>
T pairing(const Vec<T>& w, const Vec<T>& v)
{
    using std::conj;
    T s(0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!is_zero(w[i]) && !is_zero(v[i])) s += conj(w[i]) * v[i];
    return s;
}

template <class T>
T coordinate_sum(const Vec<T>& v)
{
    T s(0);
    for (const auto& x : v) s += x;
    return s;
}

template <class T>
double norm2(const Vec<T>& v)
{
    double s = 0.0;
    for (const auto& x : v) s += std::norm(to_complex(x));
    return std::sqrt(s);
}

// Coefficients of 1/(1 + h(s)) modulo s^n.
template <class T>
Vec<T> series_inverse(const Vec<T>& a)
{
    require(!a.empty() && a[0] == T(1), "series inverse expects constant term 1");
    const std::size_t n = a.size();
    Vec<T> r(n, T(0));
    r[0] = T(1);
    for (std::size_t k = 1; k < n; ++k) {
        T acc(0);
        for (std::size_t j = 1; j <= k; ++j)
            if (!is_zero(a[j])) acc += a[j] * r[k - j];
        r[k] = -acc;
    }
    return r;
}

template <class T>
std::vector<Vec<T>> right_eigenvectors(int n, int t)
{
    require(n >= 2 && t >= 1 && t <= n - 2, "right eigenvectors need 1 <= t <= n-2");
    std::vector<Vec<T>> out;
    for (int l = 1; l <= t; ++l) {
        Vec<T> v(n, T(0));
        v[0] = T(1);
        v[l] = T(-1);
        out.push_back(std::move(v));
    }
    return out;
}

namespace detail {

template <class T>
Vec<T> chain_step(const BasicModelParams<T>& p, const Vec<T>& v, const Vec<T>& hhat)
{
    const int n = p.n;
    const int s = p.t + 1;
    require(static_cast<int>(v.size()) == n, "vector length must equal n");
    for (int j = n - s; j < n; ++j)
        if (!is_zero(v[j]))
            throw ChainExhausted("chain exhausted: coordinate " + std::to_string(j + 1) +
                                 " lies in the last t+1 positions");
    Vec<T> w(n, T(0));
    T alpha(0);
    for (int i = 0; i + s < n; ++i) {
        T u(0);
        for (int k = 0; i + k < n; ++k)
            if (!is_zero(hhat[k]) && !is_zero(v[i + k])) u += hhat[k] * v[i + k];
        w[i + s] = u;
        alpha += u;
    }
    w[0] -= alpha;
    return w;
}

// Gaussian elimination with partial pivoting by modulus; any non-zero pivot
// is exact in rational mode.
template <class T>
Vec<T> solve_dense(std::vector<Vec<T>> a, Vec<T> b)
{
    const std::size_t n = b.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (const auto& x : row) scale = std::max(scale, magnitude(x));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (magnitude(a[r][col]) > magnitude(a[piv][col])) piv = r;
        const bool singular =
            is_exact_v<T> ? is_zero(a[piv][col]) : magnitude(a[piv][col]) <= 1e-13 * std::max(scale, 1.0);
        if (singular) throw NumericalFailure("singular constraint system for left chains (wrong block sizes?)");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (is_zero(a[r][col])) continue;
            const T f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec<T> x(n, T(0));
    for (std::size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

} // namespace detail

// One step w with M w = v and sum(w) = 0 (u_1 = -alpha(u_2) e_1 choice).
template <class T>
Vec<T> chain_step(const BasicModelParams<T>& p, const Vec<T>& v)
{
    p.validate();
    return detail::chain_step(p, v, series_inverse(one_plus_h(p)));
}

template <class T>
JordanBasis<T> build_right_chains(const BasicModelParams<T>& p)
{
    p.validate();
    require(p.t >= 1, "the zero eigenvalue needs t >= 1");
    const auto m = multiplicities(p.n, p.t);
    const auto hhat = series_inverse(one_plus_h(p));
    JordanBasis<T> basis;
    basis.n = p.n;
    basis.t = p.t;
    basis.block_sizes = m.block_sizes;
    auto heads = right_eigenvectors<T>(p.n, p.t);
    for (int l = 0; l < p.t; ++l) {
        std::vector<Vec<T>> chain{heads[l]};
        try {
            for (int q = 2; q <= m.block_sizes[l]; ++q) chain.push_back(detail::chain_step(p, chain.back(), hhat));
        } catch (const ChainExhausted& e) {
            throw NumericalFailure(std::string("chain shorter than the predicted block size: ") + e.what());
        }
        basis.right.push_back(std::move(chain));
    }
    return basis;
}

template <class T>
ConditionNumbers condition_numbers(const JordanBasis<T>& basis)
{
    require(basis.complete(), "condition numbers need a complete basis");
    ConditionNumbers cn;
    const int k0 = *std::max_element(basis.block_sizes.begin(), basis.block_sizes.end());
    for (std::size_t l = 0; l < basis.right.size(); ++l) {
        const int d = basis.block_sizes[l];
        if (d != k0) continue;
        const double kappa = norm2(basis.right[l].front()) * norm2(basis.left[l][d - 1]);
        cn.per_block.push_back({static_cast<int>(l) + 1, kappa});
        cn.kappa0 = std::max(cn.kappa0, kappa);
    }
    return cn;
}

// Left chains as rows r = w^H: r^(l,d) M = 0 and r^(l,p) M = r^(l,p+1),
// zero row sum, pairing with the top right vectors fixes the t+1 free
// trailing coordinates of each level.
template <class T>
JordanBasis<T> build_left_chains(const BasicModelParams<T>& p, JordanBasis<T> basis)
{
    using std::conj;
    p.validate();
    require(!basis.right.empty() && basis.n == p.n && basis.t == p.t, "left chains need the matching right chains");
    const int n = p.n;
    const int s = p.t + 1;
    const int t = p.t;
    const auto hhat = series_inverse(one_plus_h(p));

    std::vector<const Vec<T>*> tops;
    for (int r = 0; r < t; ++r) tops.push_back(&basis.right[r].back());

    std::vector<Vec<T>> a(s, Vec<T>(s, T(0)));
    for (int i = 0; i < s; ++i) a[0][i] = T(1);
    for (int r = 0; r < t; ++r)
        for (int i = 0; i < s; ++i) a[r + 1][i] = (*tops[r])[n - s + i];

    basis.left.assign(t, {});
    for (int l = 0; l < t; ++l) {
        const int d = basis.block_sizes[l];
        std::vector<Vec<T>> rows(d);
        for (int level = d; level >= 1; --level) {
            Vec<T> r(n, T(0));
            if (level < d) {
                const Vec<T>& above = rows[level];
                Vec<T> y(n, T(0));
                double ymax = 0.0;
                for (int k = 0; k < n; ++k) {
                    T acc(0);
                    for (int i = 0; i <= k; ++i)
                        if (!is_zero(above[i]) && !is_zero(hhat[k - i])) acc += above[i] * hhat[k - i];
                    y[k] = acc;
                    ymax = std::max(ymax, magnitude(acc));
                }
                for (int k = 0; k < s; ++k) {
                    const bool bad = is_exact_v<T> ? !is_zero(y[k]) : magnitude(y[k]) > 1e-8 * std::max(ymax, 1.0);
                    if (bad)
                        throw NumericalFailure("left chain " + std::to_string(l + 1) + " cannot be extended to level " +
                                               std::to_string(level));
                }
                for (int i = 0; i + s < n; ++i) r[i] = y[i + s];
            }
            Vec<T> rhs(s, T(0));
            T fixed_sum(0);
            for (int i = 0; i < n - s; ++i) fixed_sum += r[i];
            rhs[0] = -fixed_sum;
            for (int rr = 0; rr < t; ++rr) {
                T target = (rr == l && level == basis.block_sizes[rr]) ? T(1) : T(0);
                for (int i = 0; i < n - s; ++i)
                    if (!is_zero(r[i])) target -= r[i] * (*tops[rr])[i];
                rhs[rr + 1] = target;
            }
            const auto tail = detail::solve_dense(a, rhs);
            for (int i = 0; i < s; ++i) r[n - s + i] = tail[i];
            rows[level - 1] = std::move(r);
        }
        for (auto& row : rows)
            for (auto& x : row) x = conj(x);
        basis.left[l] = std::move(rows);
    }
    basis.conditions = condition_numbers(basis);
    return basis;
}

template <class T>
JordanBasis<T> jordan_basis(const BasicModelParams<T>& p)
{
    return build_left_chains(p, build_right_chains(p));
}

// Closed-form chains at b = 0 (all entries rational; left vectors real).
template <class T>
JordanBasis<T> closed_form_b0(int n, int t)
{
    require(n >= 2 && t >= 1 && t <= n - 2, "closed forms need 1 <= t <= n-2");
    const auto m = multiplicities(n, t);
    const int s = t + 1;
    const int xi = m.xi;
    JordanBasis<T> basis;
    basis.n = n;
    basis.t = t;
    basis.block_sizes = m.block_sizes;
    for (int l = 1; l <= t; ++l) {
        const int d = m.block_sizes[l - 1];
        std::vector<Vec<T>> chain;
        for (int q = 1; q <= d; ++q) {
            Vec<T> v(n, T(0));
            v[s * (q - 1)] = T(1);
            v[s * (q - 1) + l] = T(-1);
            chain.push_back(std::move(v));
        }
        basis.right.push_back(std::move(chain));

        std::vector<Vec<T>> left(d, Vec<T>(n, T(0)));
        if (xi == 0) {
            const T scale = T(1) / T(s);
            for (int q = 0; q < d; ++q) {
                Vec<T>& w = left[d - q - 1];
                const int base = n - (q + 1) * s;
                for (int i = 0; i < s; ++i) w[base + i] = scale;
                w[base + l] = T(-t) * scale;
            }
        } else {
            const T scale = T(1) / T(xi);
            const T omega = T(-(t - xi + 1)) / T(xi);
            for (int q = 0; q < d; ++q) {
                Vec<T>& w = left[d - q - 1];
                int pos;
                if (l < xi) {
                    pos = q == 0 ? n - xi : s * (d - q - 1);
                    for (int i = 0; i < l; ++i) w[pos + i] = scale;
                    w[pos + l] = T(1 - xi) * scale;
                    const int ones = q == 0 ? xi - l - 1 : t - l;
                    for (int i = 0; i < ones; ++i) w[pos + l + 1 + i] = scale;
                    pos += l + 1 + ones;
                } else {
                    pos = q == 0 ? n - t - 1 + l - xi : s * (d - q - 1) + l;
                    w[pos] = T(-xi) * scale;
                    pos += 1 + (t - l);
                    if (q == 0) {
                        for (int i = 0; i < xi; ++i) w[pos + i] = scale;
                        pos += xi;
                    } else {
                        for (int i = 0; i < s; ++i) w[pos + i] = scale;
                        pos += s;
                    }
                }
                if (q >= 1) {
                    T amp = scale;
                    for (int k = 1; k < q; ++k) {
                        amp *= omega;
                        for (int i = 0; i < s; ++i) w[pos + i] = amp;
                        pos += s;
                    }
                    amp *= omega;
                    for (int i = 0; i < xi; ++i) w[pos + i] = amp;
                    pos += xi;
                }
                if (pos != n) throw NumericalFailure("closed-form left vector has the wrong length");
            }
        }
        basis.left.push_back(std::move(left));
    }
    basis.conditions = condition_numbers(basis);
    return basis;
}

struct Similarity {
    Eigen::MatrixXcd V;         // columns: chains (l = 1..t, q = 1..d), then non-zero eigenvectors
    Eigen::MatrixXcd W;         // rows: matching left vectors conjugated, so W V = I
    Eigen::MatrixXcd expected;  // Jordan blocks (superdiagonal ones) plus diag(lambda)
    double inverse_residual = 0.0;     // ||W V - I||_2
    double similarity_residual = 0.0;  // ||W M V - expected||_2
    double norm_m = 0.0;
    double cond_v = 0.0;
    std::vector<std::string> warnings;
};

inline double spectral_norm(const Eigen::MatrixXcd& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
}

inline Similarity assemble_similarity(const ModelParams& p, const JordanBasis<Complex>& basis,
                                      const SpectrumReport& spectrum)
{
    require(basis.complete(), "similarity needs a complete Jordan basis");
    const int n = p.n;
    const auto pairs = nonzero_eigenpairs(p, spectrum);
    Similarity out;
    out.V = Eigen::MatrixXcd::Zero(n, n);
    out.W = Eigen::MatrixXcd::Zero(n, n);
    out.expected = Eigen::MatrixXcd::Zero(n, n);
    int col = 0;
    for (std::size_t l = 0; l < basis.right.size(); ++l) {
        const int d = basis.block_sizes[l];
        for (int q = 0; q < d; ++q, ++col) {
            require(col < n, "basis has more vectors than the matrix dimension");
            for (int i = 0; i < n; ++i) {
                out.V(i, col) = basis.right[l][q][i];
                out.W(col, i) = std::conj(basis.left[l][q][i]);
            }
            if (q > 0) out.expected(col - 1, col) = 1.0;
        }
    }
    for (const auto& ep : pairs) {
        require(col < n, "basis has more vectors than the matrix dimension");
        for (int i = 0; i < n; ++i) {
            out.V(i, col) = ep.right[i];
            out.W(col, i) = std::conj(ep.left[i]);
        }
        out.expected(col, col) = ep.lambda;
        ++col;
    }
    require(col == n, "Jordan chains and non-zero eigenvectors do not span C^n");
    const Eigen::MatrixXcd M = model_matrix(p);
    out.norm_m = spectral_norm(M);
    out.inverse_residual = spectral_norm(out.W * out.V - Eigen::MatrixXcd::Identity(n, n));
    out.similarity_residual = spectral_norm(out.W * M * out.V - out.expected);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(out.V);
    const auto& sv = svd.singularValues();
    out.cond_v = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
    if (out.cond_v > 1e12) out.warnings.push_back("V is ill-conditioned (cond " + std::to_string(out.cond_v) + ")");
    return out;
}

} // namespace nonnormal
