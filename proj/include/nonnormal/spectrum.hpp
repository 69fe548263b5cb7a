#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "model.hpp"

namespace nonnormal {

enum class PolynomialForm { General, ZeroB };

// Monic polynomial for the non-zero eigenvalues; coeffs[k] multiplies z^k.
template <class T>
struct CharPolynomial {
    Vec<T> coeffs;
    bool monic = true;
    PolynomialForm form = PolynomialForm::General;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

namespace detail {

inline mpz_class binomial(unsigned long n, unsigned long k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline RationalComplex ipow(const RationalComplex& x, int e)
{
    RationalComplex r(1);
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

inline CharPolynomial<RationalComplex> monic_shell(const ExactModelParams& p, PolynomialForm form)
{
    p.validate();
    require(!is_zero(p.delta), "delta must be non-zero for the closed-form polynomial");
    require(p.single_term(), "the closed-form polynomial needs h(s) = b s (only b_1 may be non-zero)");
    const auto m = multiplicities(p.n, p.t);
    CharPolynomial<RationalComplex> poly;
    poly.form = form;
    poly.coeffs.assign(m.p1 + 2, RationalComplex(0));
    poly.coeffs[m.p1 + 1] = RationalComplex(1);
    return poly;
}

inline CharPolynomial<RationalComplex> char_poly_zero_b(const ExactModelParams& p)
{
    auto poly = monic_shell(p, PolynomialForm::ZeroB);
    const int p1 = poly.degree() - 1;
    for (int k = 0; k <= p1; ++k) poly.coeffs[p1 - k] = -p.delta * RationalComplex(p.n - k * (p.t + 1));
    return poly;
}

// Valid for any b, including b = 0.
inline CharPolynomial<RationalComplex> char_poly_general(const ExactModelParams& p)
{
    auto poly = monic_shell(p, PolynomialForm::General);
    const auto m = multiplicities(p.n, p.t);
    const int n = p.n;
    const int t1 = p.t + 1;
    const RationalComplex& delta = p.delta;
    const RationalComplex b = p.b();
    const RationalComplex one_b = RationalComplex(1) + b;
    // The correction term only exists when some K satisfies K(t+2) >= n+1.
    const bool indicator = m.p1 >= m.p2 + 1 && static_cast<long>(m.p1) * (p.t + 2) >= n + 1;
    for (int k = 0; k <= m.p1; ++k) {
        const int j = m.p1 - k;  // power of z
        RationalComplex bracket = RationalComplex(n) * ipow(one_b, k);
        if (k > 0)
            bracket -= RationalComplex(k) * (RationalComplex(t1) * one_b + b) * ipow(one_b, k - 1);
        RationalComplex c = -delta * bracket;
        if (indicator && k >= m.p2 + 1) {
            RationalComplex sum(0);
            for (int q = std::max(0, n - t1 * k + 1); q <= k; ++q)
                sum += RationalComplex(mpq_class(binomial(k, q))) * ipow(b, q) * RationalComplex(q - n + t1 * k);
            c -= delta * sum;
        }
        poly.coeffs[j] = c;
    }
    return poly;
}

inline CharPolynomial<RationalComplex> char_poly_exact(const ExactModelParams& p)
{
    return p.b_is_zero() ? char_poly_zero_b(p) : char_poly_general(p);
}

} // namespace detail

// Closed-form polynomial of the non-zero eigenvalues (h(s) = b s only).
// The double version evaluates the formula exactly and rounds once: the
// correction sum cancels against terms of size |1+b|^p1.
template <class T>
CharPolynomial<T> char_poly(const BasicModelParams<T>& p)
{
    if constexpr (is_exact_v<T>) {
        return detail::char_poly_exact(p);
    } else {
        p.validate();
        require(!is_zero(p.delta), "delta must be non-zero for the closed-form polynomial");
        for (const auto& b : p.b_coeffs)
            require(std::isfinite(b.real()) && std::isfinite(b.imag()), "b coefficients must be finite");
        require(std::isfinite(p.delta.real()) && std::isfinite(p.delta.imag()), "delta must be finite");
        const auto exact = detail::char_poly_exact(to_exact(p));
        CharPolynomial<T> out;
        out.form = exact.form;
        for (const auto& c : exact.coeffs) out.coeffs.push_back(to_complex(c));
        return out;
    }
}

struct SpectrumReport {
    Multiplicities multiplicities;
    std::vector<Complex> eigenvalues;  // descending modulus, then ascending argument
    std::vector<double> residuals;     // backward error of each root
    int iterations = 0;
    std::size_t outlier_index = 0;
};

class RootFindingFailure : public NumericalFailure {
public:
    RootFindingFailure(const std::string& msg, std::vector<Complex> best, std::vector<double> residuals)
        : NumericalFailure(msg), best_iterate(std::move(best)), residuals(std::move(residuals))
    {
    }
    std::vector<Complex> best_iterate;
    std::vector<double> residuals;
};

namespace detail {

struct NewtonData {
    Complex ratio;          // p(z)/p'(z)
    double backward_error;  // |p(z)| / sum |c_k||z|^k
};

// For |z| > 1 the reversed polynomial is evaluated at 1/z so that large roots
// (the outlier sits near n*delta) never overflow.
inline NewtonData newton_data(const std::vector<Complex>& c, Complex z)
{
    const int d = static_cast<int>(c.size()) - 1;
    if (std::abs(z) <= 1.0) {
        Complex p = c[d], dp = 0.0;
        double scale = std::abs(c[d]);
        const double az = std::abs(z);
        for (int k = d - 1; k >= 0; --k) {
            dp = dp * z + p;
            p = p * z + c[k];
            scale = scale * az + std::abs(c[k]);
        }
        return {p / dp, scale > 0 ? std::abs(p) / scale : 0.0};
    }
    const Complex y = 1.0 / z;
    const double ay = std::abs(y);
    Complex q = c[0], dq = 0.0;
    double scale = std::abs(c[0]);
    for (int k = 1; k <= d; ++k) {
        dq = dq * y + q;
        q = q * y + c[k];
        scale = scale * ay + std::abs(c[k]);
    }
    const Complex den = static_cast<double>(d) * q - y * dq;
    return {z * q / den, scale > 0 ? std::abs(q) / scale : 0.0};
}

inline void sort_roots(std::vector<Complex>& roots, std::vector<double>& res)
{
    std::vector<std::size_t> idx(roots.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(roots[a]) > std::abs(roots[b]); });
    // Runs of equal modulus (conjugate pairs, symmetric points) go by argument.
    std::size_t start = 0;
    while (start < idx.size()) {
        std::size_t end = start + 1;
        const double ref = std::abs(roots[idx[start]]);
        while (end < idx.size() && ref - std::abs(roots[idx[end]]) <= 1e-12 * ref) ++end;
        std::stable_sort(idx.begin() + start, idx.begin() + end,
                         [&](std::size_t a, std::size_t b) { return std::arg(roots[a]) < std::arg(roots[b]); });
        start = end;
    }
    std::vector<Complex> r2;
    std::vector<double> s2;
    for (auto i : idx) {
        r2.push_back(roots[i]);
        s2.push_back(res[i]);
    }
    roots = std::move(r2);
    res = std::move(s2);
}

} // namespace detail

struct AberthResult {
    std::vector<Complex> roots;
    std::vector<double> residuals;
    int iterations = 0;
};

// Aberth-Ehrlich simultaneous iteration for a polynomial with
// coefficients c[0..d] (ascending, c[d] != 0), Gauss-Seidel updates.
inline AberthResult aberth_roots(const std::vector<Complex>& c, double initial_radius, double tol = 1e-12,
                                 int max_iter = 200)
{
    const int d = static_cast<int>(c.size()) - 1;
    require(d >= 1, "polynomial degree must be at least 1");
    require(!is_zero(c[d]), "leading coefficient must be non-zero");
    require(initial_radius > 0, "initial radius must be positive");

    AberthResult out;
    out.roots.resize(d);
    out.residuals.assign(d, std::numeric_limits<double>::infinity());
    const double offset = std::numbers::pi / (2.0 * d);
    for (int k = 0; k < d; ++k) out.roots[k] = std::polar(initial_radius, 2.0 * std::numbers::pi * k / d + offset);

    std::vector<char> done(d, 0);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 1; it <= max_iter; ++it) {
        out.iterations = it;
        bool all_done = true;
        for (int i = 0; i < d; ++i) {
            if (done[i] == 1) continue;
            auto nd = detail::newton_data(c, out.roots[i]);
            out.residuals[i] = nd.backward_error;
            if (!std::isfinite(std::abs(nd.ratio)) || (done[i] == 2 && nd.backward_error <= tol)) {
                done[i] = 1;
                continue;
            }
            // One more correction after the residual first passes tol.
            if (nd.backward_error <= tol) done[i] = 2;
            Complex s = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != i) s += 1.0 / (out.roots[i] - out.roots[j]);
            const Complex w = nd.ratio / (1.0 - nd.ratio * s);
            out.roots[i] -= w;
            if (std::abs(w) <= 4.0 * eps * std::abs(out.roots[i])) done[i] = 1;
            all_done = false;
        }
        if (all_done) break;
    }
    bool ok = true;
    for (int i = 0; i < d; ++i) {
        out.residuals[i] = detail::newton_data(c, out.roots[i]).backward_error;
        if (!(out.residuals[i] <= std::max(tol, 64.0 * d * eps))) ok = false;
    }
    detail::sort_roots(out.roots, out.residuals);
    if (!ok)
        throw RootFindingFailure("Aberth iteration did not converge in " + std::to_string(max_iter) + " iterations",
                                 out.roots, out.residuals);
    return out;
}

inline SpectrumReport nonzero_eigenvalues(const ModelParams& p, double tol = 1e-12)
{
    const auto poly = char_poly(p);
    SpectrumReport rep;
    rep.multiplicities = multiplicities(p.n, p.t);
    const double radius =
        std::max(1.0 + std::abs(p.b()), std::pow(p.n * std::abs(p.delta), 1.0 / (rep.multiplicities.p1 + 1)));
    auto res = aberth_roots(poly.coeffs, radius, tol);
    rep.eigenvalues = std::move(res.roots);
    rep.residuals = std::move(res.residuals);
    rep.iterations = res.iterations;
    rep.outlier_index = 0;
    return rep;
}

inline double catalan(int k)
{
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * 2.0 * (2 * i + 1) / (i + 2);
    return c;
}

// Truncated large-n*delta series for the outlier eigenvalue.
inline Complex outlier_expansion(const ModelParams& p, int order)
{
    p.validate();
    require(p.single_term(), "the outlier series needs h(s) = b s");
    const auto m = multiplicities(p.n, p.t);
    const Complex nd = static_cast<double>(p.n) * p.delta;
    require(std::abs(nd) > 1.0, "the outlier series needs |n delta| > 1");
    require(order >= 0 && order <= std::max(0, m.p1 - 1), "order must lie in [0, p1-1]");
    const Complex b = p.b();
    const Complex one_b = 1.0 + b;
    require(std::abs(one_b) > 0, "the outlier series needs 1 + b != 0");
    const double n = p.n;
    const Complex x = (p.t + 1.0) / n + b / (one_b * n);
    const Complex y = one_b / nd;
    Complex sum = 0.0;
    Complex xp = x, yp = 1.0;
    for (int k = 0; k < order; ++k) {
        sum += catalan(k) * xp * yp;
        xp *= x;
        yp *= y;
    }
    return nd + one_b - one_b * sum;
}

// Points predicted for the non-outlier eigenvalues in the circular regime.
inline std::vector<Complex> circular_limit(const ModelParams& p)
{
    p.validate();
    require(p.single_term(), "circular limit needs h(s) = b s");
    const auto m = multiplicities(p.n, p.t);
    require(m.p1 == m.p2, "circular limit needs p1 == p2 (got p1=" + std::to_string(m.p1) +
                              ", p2=" + std::to_string(m.p2) + ")");
    const Complex b = p.b();
    require(b.imag() == 0.0 && p.delta.imag() == 0.0, "circular limit is stated for real b and delta");
    const double bound = 4.0 * ((1.0 + b.real()) * (p.t + 1) + b.real()) / (double(p.n) * p.n);
    require(p.delta.real() > bound,
            "circular limit needs delta > 4((1+b)(t+1)+b)/n^2 = " + std::to_string(bound));
    std::vector<Complex> pts;
    for (int l = 1; l <= m.p1; ++l) pts.push_back((1.0 + b) * std::polar(1.0, 2.0 * std::numbers::pi * l / (m.p1 + 1)));
    return pts;
}

struct Eigenpair {
    Complex lambda;
    std::vector<Complex> right;  // unit 2-norm
    std::vector<Complex> left;   // scaled so that left^H right = 1
    double residual = 0.0;       // ||M v - lambda v|| with ||v|| = 1
    double kappa = 0.0;          // ||v|| ||w||
};

// v = (lambda I - N)^{-1} 1 and w^H = 1^T (lambda I - N)^{-1}, N strictly
// upper triangular and banded by the coefficients of 1 + h.
inline Eigenpair nonzero_eigenvector(const ModelParams& p, Complex lambda)
{
    p.validate();
    require(std::abs(lambda) > 1e-12, "eigenvalue too close to 0 for the triangular solve");
    const int n = p.n;
    const int s = p.t + 1;
    const auto c = one_plus_h(p);
    std::vector<Complex> v(n), r(n);
    for (int i = n - 1; i >= 0; --i) {
        Complex acc = 1.0;
        for (int j = 0; i + s + j < n; ++j) acc += c[j] * v[i + s + j];
        v[i] = acc / lambda;
    }
    for (int j = 0; j < n; ++j) {
        Complex acc = 1.0;
        for (int k = 0; j - s - k >= 0; ++k) acc += r[j - s - k] * c[k];
        r[j] = acc / lambda;
    }
    double vn = 0.0;
    for (auto x : v) vn += std::norm(x);
    vn = std::sqrt(vn);
    for (auto& x : v) x /= vn;
    Complex pair = 0.0;
    for (int i = 0; i < n; ++i) pair += r[i] * v[i];
    Eigenpair ep;
    ep.lambda = lambda;
    ep.right = v;
    ep.left.resize(n);
    double wn = 0.0;
    for (int i = 0; i < n; ++i) {
        ep.left[i] = std::conj(r[i] / pair);
        wn += std::norm(ep.left[i]);
    }
    ep.kappa = std::sqrt(wn);

    Complex sum = 0.0;
    for (auto x : v) sum += x;
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
        Complex mv = p.delta * sum;
        for (int j = 0; i + s + j < n; ++j) mv += c[j] * v[i + s + j];
        res += std::norm(mv - lambda * v[i]);
    }
    ep.residual = std::sqrt(res);
    return ep;
}

inline std::vector<Eigenpair> nonzero_eigenpairs(const ModelParams& p, const SpectrumReport& spec)
{
    std::vector<Eigenpair> out;
    for (auto l : spec.eigenvalues) out.push_back(nonzero_eigenvector(p, l));
    return out;
}

} // namespace nonnormal
