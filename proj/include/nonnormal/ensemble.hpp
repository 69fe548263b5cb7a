#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "model.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "resolvent.hpp"
#include "spectrum.hpp"

namespace nonnormal {

inline Eigen::MatrixXcd sample_gaussian(int n, const StreamId& stream)
{
    require(n >= 1, "matrix size must be positive");
    Eigen::MatrixXcd z(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            z(j, k) = complex_normal(stream, static_cast<std::uint64_t>(j) * n + k);
    return z;
}

// Hessenberg reduction + shifted complex QR (Eigen::ComplexEigenSolver).
inline std::vector<Complex> dense_eigensolve(const Eigen::MatrixXcd& m)
{
    require(m.rows() == m.cols(), "eigenvalues need a square matrix");
    if (m.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("complex QR iteration did not converge for a " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()) + " matrix");
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

struct EnsembleCloud {
    ModelParams params;
    Complex tilde_delta = 0.0;
    std::uint64_t seed = 0;
    int samples = 0;
    std::vector<std::uint64_t> sample_of;  // sample index of each eigenvalue
    std::vector<Complex> eigenvalues;      // grouped by sample, in sample order
    std::vector<char> filtered_out;        // attributed to the unperturbed non-zero spectrum
    std::vector<std::pair<std::uint64_t, std::string>> failures;
};

inline EnsembleCloud run_ensemble(const ModelParams& p, Complex tilde_delta, int samples, std::uint64_t master_seed,
                                  unsigned threads = 0)
{
    p.validate();
    require(samples >= 1, "at least one sample is required");
    const Eigen::MatrixXcd base = model_matrix(p);
    std::vector<std::vector<Complex>> per_sample(samples);
    std::vector<std::string> errors(samples);
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        try {
            Eigen::MatrixXcd m = base;
            if (!is_zero(tilde_delta)) m += tilde_delta * sample_gaussian(p.n, {master_seed, i});
            per_sample[i] = dense_eigensolve(m);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    EnsembleCloud cloud;
    cloud.params = p;
    cloud.tilde_delta = tilde_delta;
    cloud.seed = master_seed;
    cloud.samples = samples;
    for (int i = 0; i < samples; ++i) {
        if (!errors[i].empty()) cloud.failures.emplace_back(i, errors[i]);
        for (auto z : per_sample[i]) {
            cloud.sample_of.push_back(i);
            cloud.eigenvalues.push_back(z);
        }
    }
    cloud.filtered_out.assign(cloud.eigenvalues.size(), 0);
    return cloud;
}

struct FilterStats {
    int matched = 0;            // exact eigenvalues matched within tolerance
    int fallback = 0;           // exact eigenvalues replaced by the largest-modulus rule
    int fallback_samples = 0;   // samples with at least one fallback
    int ambiguities = 0;        // nearest cloud point already claimed
    double max_displacement = 0.0;  // max |matched - lambda_j| / |lambda_j|
};

// Marks, per sample, the cloud points attributed to the exact non-zero
// eigenvalues: greedy nearest match (descending |lambda_j|) within
// match_tol * |lambda_j|; each lambda_j left unmatched claims the
// largest-modulus unclaimed point instead, so p1+1 points are removed.
inline FilterStats filter_outer(EnsembleCloud& cloud, std::vector<Complex> exact, double match_tol = 1e-2)
{
    std::stable_sort(exact.begin(), exact.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    FilterStats st;
    cloud.filtered_out.assign(cloud.eigenvalues.size(), 0);
    std::size_t begin = 0;
    while (begin < cloud.eigenvalues.size()) {
        std::size_t end = begin;
        while (end < cloud.eigenvalues.size() && cloud.sample_of[end] == cloud.sample_of[begin]) ++end;
        int unmatched = 0;
        for (auto lambda : exact) {
            std::size_t best = end, best_any = end;
            double bd = std::numeric_limits<double>::infinity(), bd_any = bd;
            for (std::size_t i = begin; i < end; ++i) {
                const double d = std::abs(cloud.eigenvalues[i] - lambda);
                if (d < bd_any) {
                    bd_any = d;
                    best_any = i;
                }
                if (!cloud.filtered_out[i] && d < bd) {
                    bd = d;
                    best = i;
                }
            }
            if (best_any != best) ++st.ambiguities;
            if (best < end && bd <= match_tol * std::abs(lambda)) {
                cloud.filtered_out[best] = 1;
                st.max_displacement = std::max(st.max_displacement, bd / std::abs(lambda));
                ++st.matched;
            } else {
                ++unmatched;
            }
        }
        if (unmatched > 0) {
            ++st.fallback_samples;
            st.fallback += unmatched;
            std::vector<std::size_t> idx;
            for (std::size_t i = begin; i < end; ++i)
                if (!cloud.filtered_out[i]) idx.push_back(i);
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(cloud.eigenvalues[a]) > std::abs(cloud.eigenvalues[b]);
            });
            for (int k = 0; k < unmatched && k < static_cast<int>(idx.size()); ++k) cloud.filtered_out[idx[k]] = 1;
        }
        begin = end;
    }
    return st;
}

struct MeanRadius {
    double value = 0.0;
    std::size_t count = 0;
    FilterStats filter;
};

inline MeanRadius mean_radius_stats(EnsembleCloud cloud, const SpectrumReport& spectrum, double match_tol = 1e-2)
{
    require(!cloud.eigenvalues.empty(), "mean radius needs a non-empty cloud");
    MeanRadius out;
    out.filter = filter_outer(cloud, spectrum.eigenvalues, match_tol);
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.eigenvalues.size(); ++i)
        if (!cloud.filtered_out[i]) {
            sum += std::abs(cloud.eigenvalues[i]);
            ++out.count;
        }
    out.value = out.count ? sum / static_cast<double>(out.count) : 0.0;
    return out;
}

inline double mean_radius(const EnsembleCloud& cloud, const SpectrumReport& spectrum, double match_tol = 1e-2)
{
    return mean_radius_stats(cloud, spectrum, match_tol).value;
}

struct RadiusPoint {
    int t = 0;
    int n = 0;
    double rbar = 0.0;
};

struct RadiusFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double residual = 0.0;  // RMS of log(rbar) - (c1 x + c2)
};

// Least squares for log rbar = c1 (t+1)/(n+t+1) + c2.
inline RadiusFit fit_radius_law(const std::vector<RadiusPoint>& pts)
{
    require(pts.size() >= 3, "the radius fit needs at least 3 points");
    std::vector<double> x, y;
    for (const auto& p : pts) {
        require(p.rbar > 0, "mean radius values must be positive");
        x.push_back((p.t + 1.0) / (p.n + p.t + 1.0));
        y.push_back(std::log(p.rbar));
    }
    const double m = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 1e-14 * std::max(1.0, mx * mx))) throw InvalidArgument("degenerate fit: all x values coincide");
    RadiusFit f;
    f.c1 = sxy / sxx;
    f.c2 = my - f.c1 * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.c1 * x[i] + f.c2);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / m);
    return f;
}

// f(z) = z^{t+1} (1 + sum_j b_j z^j).
inline Complex symbol_value(int t, const std::vector<Complex>& b, Complex z)
{
    Complex h = 0.0;
    for (std::size_t j = b.size(); j-- > 0;) h = (h + b[j]) * z;
    return std::pow(z, t + 1) * (1.0 + h);
}

// varpi = (t+1) k0(t); r = eps^{1/varpi}.
inline double reduced_radius(int n, int t, double eps)
{
    require(eps > 0 && eps < 1, "epsilon must lie in (0, 1)");
    const auto m = multiplicities(n, t);
    require(m.k0 > 0, "size reduction needs t >= 1");
    return std::pow(eps, 1.0 / ((t + 1.0) * m.k0));
}

struct SymbolCurve {
    int t = 0;
    std::vector<Complex> b_coeffs;
    double r = 1.0;
    std::vector<double> theta;   // uniform grid on [0, 2pi], last = 2pi
    std::vector<Complex> points; // closed: points.back() == points.front()
    std::optional<double> theta0;
};

// Smallest theta in (0, 2pi) with Im f(r e^{i theta}) = 0: sign-change
// bracketing on the sample grid, then bisection to tol.
inline std::optional<double> find_theta0(int t, const std::vector<Complex>& b, double r, int samples,
                                         double tol = 1e-12)
{
    auto im = [&](double th) { return symbol_value(t, b, std::polar(r, th)).imag(); };
    const double step = 2.0 * std::numbers::pi / samples;
    double prev = im(step);
    if (prev == 0.0) return step;
    for (int k = 1; k < samples; ++k) {
        const double lo0 = k * step, hi0 = (k + 1) * step;
        const double cur = im(hi0);
        if (cur == 0.0 && k + 1 < samples) return hi0;
        if ((prev < 0) != (cur < 0) && k + 1 <= samples) {
            double lo = lo0, hi = hi0, flo = prev;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = im(mid);
                if (fm == 0.0) return mid;
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            if (root < 2.0 * std::numbers::pi) return root;
            return std::nullopt;
        }
        prev = cur;
    }
    return std::nullopt;
}

inline SymbolCurve symbol_curve(int t, const std::vector<Complex>& b, double r, int samples = 4096)
{
    require(r > 0 && r <= 1, "symbol radius must lie in (0, 1]");
    require(samples >= 16, "at least 16 curve samples are required");
    require(t >= 0, "t must be non-negative");
    SymbolCurve c;
    c.t = t;
    c.b_coeffs = b;
    c.r = r;
    for (int k = 0; k <= samples; ++k) {
        const double th = 2.0 * std::numbers::pi * k / samples;
        c.theta.push_back(th);
        c.points.push_back(symbol_value(t, b, std::polar(r, th)));
    }
    c.points.back() = c.points.front();
    c.theta0 = find_theta0(t, b, r, samples);
    return c;
}

namespace detail {

inline double segment_distance(Complex a, Complex b, Complex z)
{
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    double s = len2 > 0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(z - (a + s * ab));
}

// Signed crossing count of the closed polyline around z (edge k joins
// pts[k] and pts[k+1], the last vertex joins back to the first).
inline int winding_polyline(const std::vector<Complex>& pts, Complex z)
{
    int w = 0;
    const std::size_t m = pts.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Complex a = pts[k], b = pts[(k + 1) % m];
        const double cross = (b.real() - a.real()) * (z.imag() - a.imag()) - (z.real() - a.real()) * (b.imag() - a.imag());
        if (a.imag() <= z.imag()) {
            if (b.imag() > z.imag() && cross > 0) ++w;
        } else if (b.imag() <= z.imag() && cross < 0) {
            --w;
        }
    }
    return w;
}

inline double polyline_distance(const std::vector<Complex>& pts, Complex z)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) d = std::min(d, segment_distance(pts[k], pts[(k + 1) % pts.size()], z));
    return d;
}

} // namespace detail

inline int winding_number(const SymbolCurve& curve, Complex z, double margin = 1e-9)
{
    if (detail::polyline_distance(curve.points, z) <= margin)
        throw InvalidArgument("point lies on the sampled curve; winding number is ambiguous");
    return detail::winding_polyline(curve.points, z);
}

// Inner arcs theta in [theta0, 2pi - theta0] of the size-reduced curve.
inline std::vector<Complex> inner_arc(const SymbolCurve& curve)
{
    require(curve.theta0.has_value(), "theta0 not found: the curve never returns to the real axis");
    const double th0 = *curve.theta0;
    const double th1 = 2.0 * std::numbers::pi - th0;
    std::vector<Complex> pts{symbol_value(curve.t, curve.b_coeffs, std::polar(curve.r, th0))};
    for (std::size_t k = 0; k < curve.theta.size(); ++k)
        if (curve.theta[k] > th0 && curve.theta[k] < th1) pts.push_back(curve.points[k]);
    pts.push_back(symbol_value(curve.t, curve.b_coeffs, std::polar(curve.r, th1)));
    return pts;
}

struct RegionGrid {
    Region region;
    int nx = 0;
    int ny = 0;
    double r = 0.0;
    double theta0 = 0.0;
    std::vector<char> inside;  // node (ix, iy) at iy * nx + ix

    Complex node(int ix, int iy) const
    {
        return {region.x_min + (region.x_max - region.x_min) * ix / (nx - 1),
                region.y_min + (region.y_max - region.y_min) * iy / (ny - 1)};
    }
    bool at(int ix, int iy) const { return inside[static_cast<std::size_t>(iy) * nx + ix] != 0; }

    // Membership of the region inflated by one grid cell.
    bool contains_inflated(Complex z) const
    {
        auto [ix, iy] = nearest_node(region, nx, ny, z);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = ix + dx, y = iy + dy;
                if (x >= 0 && y >= 0 && x < nx && y < ny && at(x, y)) return true;
            }
        return false;
    }
};

// Inner arcs of f(r e^{i theta}) with r = eps^{1/varpi}, plus every node
// they wind around; nodes within half a cell of the arcs count as on them.
inline RegionGrid conjecture_region(const ModelParams& p, double eps, const Region& region, int nx, int ny,
                                    int samples = 4096, unsigned threads = 0)
{
    p.validate();
    region.validate();
    require(nx >= 2 && ny >= 2, "grid resolution must be at least 2x2");
    const double r = reduced_radius(p.n, p.t, eps);
    const auto curve = symbol_curve(p.t, p.b_coeffs, r, samples);
    if (!curve.theta0)
        throw NumericalFailure("theta0 not found for t=" + std::to_string(p.t) + ", r=" + std::to_string(r) +
                               ": Im f(r e^{i theta}) has no sign change on (0, 2pi)");
    const auto arc = inner_arc(curve);
    RegionGrid g;
    g.region = region;
    g.nx = nx;
    g.ny = ny;
    g.r = r;
    g.theta0 = *curve.theta0;
    g.inside.assign(static_cast<std::size_t>(nx) * ny, 0);
    const double half_cell =
        0.5 * std::hypot((region.x_max - region.x_min) / (nx - 1), (region.y_max - region.y_min) / (ny - 1));
    parallel_for(static_cast<std::size_t>(ny), threads, [&](std::size_t iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Complex z = g.node(ix, static_cast<int>(iy));
            const bool in = detail::winding_polyline(arc, z) != 0 || detail::polyline_distance(arc, z) <= half_cell;
            g.inside[iy * nx + ix] = in ? 1 : 0;
        }
    });
    return g;
}

} // namespace nonnormal
