#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "scalar.hpp"

namespace nonnormal {

template <class T>
using Vec = std::vector<T>;

// Row-major square-or-rectangular matrix over any scalar (double complex or
// exact rationals). Numeric kernels convert to Eigen via to_eigen().
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec<T> apply(const Vec<T>& x) const
    {
        require(x.size() == cols_, "dimension mismatch in matrix-vector product");
        Vec<T> y(rows_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_zero((*this)(i, j))) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    // Row vector times matrix: (x^T A)_j.
    Vec<T> apply_left(const Vec<T>& x) const
    {
        require(x.size() == rows_, "dimension mismatch in vector-matrix product");
        Vec<T> y(cols_, T(0));
        for (std::size_t i = 0; i < rows_; ++i) {
            if (is_zero(x[i])) continue;
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_zero((*this)(i, j))) y[j] += x[i] * (*this)(i, j);
        }
        return y;
    }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b)
    {
        require(a.cols_ == b.rows_, "dimension mismatch in matrix product");
        DenseMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (is_zero(a(i, k))) continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    if (!is_zero(b(k, j))) c(i, j) += a(i, k) * b(k, j);
            }
        return c;
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec<T> data_;
};

template <class T>
Eigen::MatrixXcd to_eigen(const DenseMatrix<T>& m)
{
    Eigen::MatrixXcd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = to_complex(m(i, j));
    return out;
}

template <class T>
Eigen::VectorXcd to_eigen(const Vec<T>& v)
{
    Eigen::VectorXcd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = to_complex(v[i]);
    return out;
}

// One member of the family S^{t+1}(I + h(S)) + delta J with
// h(s) = sum_j b_j s^j; b_coeffs[0] is b_1.
template <class T>
struct BasicModelParams {
    int n = 2;
    int t = 0;
    Vec<T> b_coeffs;
    T delta = T(0);

    void validate() const
    {
        require(n >= 2, "n must be at least 2 (got " + std::to_string(n) + ")");
        require(t >= 0 && t <= n - 2,
                "t must lie in [0, n-2] = [0, " + std::to_string(n - 2) + "] (got " + std::to_string(t) + ")");
        require(static_cast<int>(b_coeffs.size()) <= n - 1, "at most n-1 coefficients b_j are meaningful");
    }

    // b_1 when h has the single-term form b s; zero when h = 0.
    T b() const { return b_coeffs.empty() ? T(0) : b_coeffs.front(); }

    bool single_term() const
    {
        for (std::size_t j = 1; j < b_coeffs.size(); ++j)
            if (!is_zero(b_coeffs[j])) return false;
        return true;
    }

    bool b_is_zero() const
    {
        return std::all_of(b_coeffs.begin(), b_coeffs.end(), [](const T& x) { return is_zero(x); });
    }
};

using ModelParams = BasicModelParams<Complex>;
using ExactModelParams = BasicModelParams<RationalComplex>;

inline ExactModelParams to_exact(const ModelParams& p)
{
    ExactModelParams e;
    e.n = p.n;
    e.t = p.t;
    for (const auto& b : p.b_coeffs) e.b_coeffs.push_back(RationalComplex::from_double(b.real(), b.imag()));
    e.delta = RationalComplex::from_double(p.delta.real(), p.delta.imag());
    return e;
}

inline ModelParams to_numeric(const ExactModelParams& p)
{
    ModelParams m;
    m.n = p.n;
    m.t = p.t;
    for (const auto& b : p.b_coeffs) m.b_coeffs.push_back(to_complex(b));
    m.delta = to_complex(p.delta);
    return m;
}

struct Multiplicities {
    int n = 0;
    int t = 0;
    int p1 = 0;
    int p2 = 0;
    int a0 = 0;
    int g0 = 0;
    int k0 = 0;
    int xi = 0;  // n mod (t+1)
    std::vector<int> block_sizes;
};

inline Multiplicities multiplicities(int n, int t)
{
    require(n >= 2, "n must be at least 2 (got " + std::to_string(n) + ")");
    require(t >= 0 && t <= n - 2,
            "t must lie in [0, n-2] = [0, " + std::to_string(n - 2) + "] (got " + std::to_string(t) + ")");
    Multiplicities m;
    m.n = n;
    m.t = t;
    m.p1 = (n - 1) / (t + 1);
    m.p2 = (n - 1) / (t + 2);
    m.a0 = n - m.p1 - 1;
    m.g0 = t;
    m.xi = n % (t + 1);
    // Block l (1-based) collects the coordinates l+1, l+1+(t+1), ... that the
    // chains starting at e_1 - e_{l+1} can reach.
    for (int l = 1; l <= t; ++l) m.block_sizes.push_back((n - l - 1) / (t + 1) + 1);
    m.k0 = m.block_sizes.empty() ? 0 : m.block_sizes.front();
    return m;
}

inline std::vector<int> young_diagram(int n, int t)
{
    return multiplicities(n, t).block_sizes;
}

// Coefficients of 1 + h(s) truncated to length n: c[0] = 1, c[j] = b_j.
template <class T>
Vec<T> one_plus_h(const BasicModelParams<T>& p)
{
    Vec<T> c(p.n, T(0));
    c[0] = T(1);
    for (std::size_t j = 0; j < p.b_coeffs.size() && j + 1 < c.size(); ++j) c[j + 1] = p.b_coeffs[j];
    return c;
}

// N = S^{t+1}(I + h(S)); strictly upper triangular.
template <class T>
DenseMatrix<T> nilpotent_part(const BasicModelParams<T>& p)
{
    p.validate();
    const auto c = one_plus_h(p);
    DenseMatrix<T> m(p.n, p.n);
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; i + p.t + 1 + j < p.n; ++j)
            if (!is_zero(c[j])) m(i, i + p.t + 1 + j) = c[j];
    return m;
}

template <class T>
DenseMatrix<T> build_matrix(const BasicModelParams<T>& p)
{
    auto m = nilpotent_part(p);
    if (!is_zero(p.delta))
        for (int i = 0; i < p.n; ++i)
            for (int j = 0; j < p.n; ++j) m(i, j) += p.delta;
    return m;
}

inline Eigen::MatrixXcd model_matrix(const ModelParams& p)
{
    return to_eigen(build_matrix(p));
}

} // namespace nonnormal
