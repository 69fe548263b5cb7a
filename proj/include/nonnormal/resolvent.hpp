#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "jordan.hpp"
#include "parallel.hpp"
#include "spectrum.hpp"

namespace nonnormal {

struct Region {
    double x_min = -1.5;
    double x_max = 1.5;
    double y_min = -1.5;
    double y_max = 1.5;

    void validate() const
    {
        require(x_min < x_max && y_min < y_max, "region corners must satisfy min < max");
    }
};

inline Region default_region(const ModelParams& p)
{
    const double h = 1.5 * (1.0 + std::abs(p.b()));
    return {-h, h, -h, h};
}

inline double sigma_min_svd(const Eigen::MatrixXcd& a)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(a.cols() - 1);
}

namespace detail {

inline Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& y)
{
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(y);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(y.rows(), y.cols());
}

inline Eigen::MatrixXcd start_block(Eigen::Index n, Eigen::Index k)
{
    Eigen::MatrixXcd x(n, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            x(i, j) = std::polar(1.0, 0.7 * static_cast<double>(i) * (j + 1) + 0.3 * (j + 1));
    return orthonormal_columns(x);
}

// Block inverse iteration on (A^H A)^{-1}. With B = A^{-H} X = Q_B R_B and
// Y = A^{-1} Q_B = Q_Y R_Y, (A^H A)^{-1} X = Q_Y R_Y R_B, so
// 1/sqrt(sigma_max(R_Y R_B)) is an upper bound for sigma_min(A) that stays
// accurate in relative terms even when sigma_min is tiny. A block wider than
// one vector handles clusters of small singular values (one per Jordan block
// of equal size). Returns -1 when it fails to settle.
template <class SolveH, class Solve>
double block_inverse_iteration(Eigen::Index n, Eigen::Index k, SolveH solve_h, Solve solve, double tol,
                               int max_iter)
{
    k = std::clamp<Eigen::Index>(k, 1, n);
    Eigen::MatrixXcd x = start_block(n, k);
    double prev = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, k);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXcd b = solve_h(x);
        if (!b.allFinite()) return 0.0;
        Eigen::HouseholderQR<Eigen::MatrixXcd> qb(b);
        const Eigen::MatrixXcd rb = qb.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        Eigen::MatrixXcd y = solve(Eigen::MatrixXcd(qb.householderQ() * id));
        if (!y.allFinite()) return 0.0;
        Eigen::HouseholderQR<Eigen::MatrixXcd> qy(y);
        const Eigen::MatrixXcd ry = qy.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        x = qy.householderQ() * id;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ry * rb);
        const double top = svd.singularValues()(0);
        if (!(top > 0) || !std::isfinite(top)) return 0.0;
        const double sigma = 1.0 / std::sqrt(top);
        if (std::abs(sigma - prev) <= tol * sigma) return sigma;
        prev = sigma;
    }
    return -1.0;
}

} // namespace detail

// Smallest singular value: full SVD up to n = 200, inverse iteration on an
// LU factorisation beyond (SVD fallback if it stalls).
inline double smallest_singular_value(const Eigen::MatrixXcd& a, double tol = 1e-8)
{
    const Eigen::Index n = a.rows();
    require(n == a.cols() && n > 0, "smallest singular value needs a non-empty square matrix");
    if (n <= 200) return sigma_min_svd(a);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double s = detail::block_inverse_iteration(
        n, 4, [&](const Eigen::MatrixXcd& x) { return Eigen::MatrixXcd(lu.adjoint().solve(x)); },
        [&](const Eigen::MatrixXcd& x) { return Eigen::MatrixXcd(lu.solve(x)); }, tol, 300);
    return s >= 0 ? s : sigma_min_svd(a);
}

inline double resolvent_norm_direct(const Eigen::MatrixXcd& M, Complex z)
{
    const Eigen::Index n = M.rows();
    const Eigen::MatrixXcd a = z * Eigen::MatrixXcd::Identity(n, n) - M;
    const double s = smallest_singular_value(a);
    if (s < 1e-300) return std::numeric_limits<double>::infinity();
    return 1.0 / s;
}

// sigma_min(zI - M) for many z: one complex Schur form M = Q T Q^H, then
// inverse iteration with triangular solves on zI - T (unitarily similar,
// same singular values).
class SchurSigmaEvaluator {
public:
    explicit SchurSigmaEvaluator(const Eigen::MatrixXcd& M, int block_size = 4, double tol = 1e-8,
                                 int max_iter = 300)
        : block_(block_size), tol_(tol), max_iter_(max_iter)
    {
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(M, false);
        if (schur.info() != Eigen::Success) throw NumericalFailure("complex Schur decomposition did not converge");
        t_ = schur.matrixT().triangularView<Eigen::Upper>();
    }

    double operator()(Complex z) const
    {
        const Eigen::Index n = t_.rows();
        Eigen::MatrixXcd a = -t_;
        a.diagonal().array() += z;
        const auto tri = a.triangularView<Eigen::Upper>();
        const double s = detail::block_inverse_iteration(
            n, block_, [&](const Eigen::MatrixXcd& x) { return Eigen::MatrixXcd(tri.adjoint().solve(x)); },
            [&](const Eigen::MatrixXcd& x) { return Eigen::MatrixXcd(tri.solve(x)); }, tol_, max_iter_);
        if (s >= 0) return s;
        return sigma_min_svd(a);
    }

    const Eigen::MatrixXcd& schur_factor() const { return t_; }

private:
    Eigen::MatrixXcd t_;
    Eigen::Index block_;
    double tol_;
    int max_iter_;
};

struct PseudoGrid {
    Region region;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;  // sigma_min at node (ix, iy) stored at iy * nx + ix

    double x(int ix) const { return region.x_min + (region.x_max - region.x_min) * ix / (nx - 1); }
    double y(int iy) const { return region.y_min + (region.y_max - region.y_min) * iy / (ny - 1); }
    Complex node(int ix, int iy) const { return {x(ix), y(iy)}; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    bool member(int ix, int iy, double eps) const { return at(ix, iy) < eps; }
    double cell_diagonal() const { return std::hypot(x(1) - x(0), y(1) - y(0)); }
};

inline PseudoGrid make_grid(const Region& region, int nx, int ny)
{
    region.validate();
    require(nx >= 2 && ny >= 2, "grid resolution must be at least 2x2");
    PseudoGrid g;
    g.region = region;
    g.nx = nx;
    g.ny = ny;
    g.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    return g;
}

// Block width covering the t equal-size Jordan blocks of the model.
inline int suggested_block_size(int t) { return std::clamp(t + 1, 2, 8); }

inline PseudoGrid pseudospectrum_grid(const Eigen::MatrixXcd& M, const Region& region, int nx, int ny,
                                      unsigned threads = 0, int block_size = 4)
{
    auto g = make_grid(region, nx, ny);
    const SchurSigmaEvaluator sigma(M, block_size);
    parallel_for(g.values.size(), threads, [&](std::size_t k) {
        const int ix = static_cast<int>(k % nx), iy = static_cast<int>(k / nx);
        g.values[k] = sigma(g.node(ix, iy));
    });
    return g;
}

struct GridComponent {
    int nx = 0;
    int ny = 0;
    std::vector<std::pair<int, int>> nodes;  // (ix, iy), discovery order
};

inline std::pair<int, int> nearest_node(const Region& r, int nx, int ny, Complex z)
{
    auto clampi = [](long v, int hi) { return static_cast<int>(std::clamp<long>(v, 0, hi)); };
    const int ix = clampi(std::lround((z.real() - r.x_min) / (r.x_max - r.x_min) * (nx - 1)), nx - 1);
    const int iy = clampi(std::lround((z.imag() - r.y_min) / (r.y_max - r.y_min) * (ny - 1)), ny - 1);
    return {ix, iy};
}

// 4-connected component of {nodes with inside(ix, iy)} containing the node
// nearest to seed; empty when that node is outside.
template <class Inside>
GridComponent flood_component(const Region& region, int nx, int ny, Complex seed, Inside inside)
{
    GridComponent comp;
    comp.nx = nx;
    comp.ny = ny;
    auto [sx, sy] = nearest_node(region, nx, ny, seed);
    if (!inside(sx, sy)) return comp;
    std::vector<char> seen(static_cast<std::size_t>(nx) * ny, 0);
    std::deque<std::pair<int, int>> queue{{sx, sy}};
    seen[static_cast<std::size_t>(sy) * nx + sx] = 1;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        comp.nodes.emplace_back(x, y);
        for (int k = 0; k < 4; ++k) {
            const int ax = x + dx[k], ay = y + dy[k];
            if (ax < 0 || ay < 0 || ax >= nx || ay >= ny) continue;
            auto& s = seen[static_cast<std::size_t>(ay) * nx + ax];
            if (s) continue;
            s = 1;
            if (inside(ax, ay)) queue.emplace_back(ax, ay);
        }
    }
    return comp;
}

inline GridComponent epsilon_component(const PseudoGrid& g, double eps, Complex seed = 0.0)
{
    return flood_component(g.region, g.nx, g.ny, seed, [&](int ix, int iy) { return g.member(ix, iy, eps); });
}

// Same component, but sigma_min is evaluated only on the nodes the flood
// touches; cheap when the component is small compared to the grid.
inline GridComponent epsilon_component_lazy(const SchurSigmaEvaluator& sigma, const Region& region, int nx, int ny,
                                            double eps, Complex seed = 0.0)
{
    region.validate();
    require(nx >= 2 && ny >= 2, "grid resolution must be at least 2x2");
    auto node = [&](int ix, int iy) {
        return Complex(region.x_min + (region.x_max - region.x_min) * ix / (nx - 1),
                       region.y_min + (region.y_max - region.y_min) * iy / (ny - 1));
    };
    return flood_component(region, nx, ny, seed, [&](int ix, int iy) { return sigma(node(ix, iy)) < eps; });
}

struct Disk {
    Complex center;
    double radius = 0.0;
    double kappa = 0.0;
};

struct EnclosureDisks {
    double epsilon = 0.0;
    double C0 = 0.0;           // t * kappa0
    double zero_radius = 0.0;  // (eps C0)^{(t+1)/(n+t+1)}
    std::vector<Disk> eigen_disks;
};

inline EnclosureDisks enclosure_disks(const ModelParams& p, const JordanBasis<Complex>& basis,
                                      const SpectrumReport& spectrum, double epsilon)
{
    require(epsilon > 0 && epsilon < 1, "epsilon must lie in (0, 1)");
    require(basis.complete(), "enclosure disks need a complete Jordan basis");
    EnclosureDisks out;
    out.epsilon = epsilon;
    out.C0 = p.t * basis.conditions.kappa0;
    out.zero_radius = std::pow(epsilon * out.C0, (p.t + 1.0) / (p.n + p.t + 1.0));
    for (const auto& ep : nonzero_eigenpairs(p, spectrum))
        out.eigen_disks.push_back({ep.lambda, epsilon * ep.kappa, ep.kappa});
    return out;
}

// Resolvent from the Jordan data: V D(z) W with D block diagonal,
// D_block(i, j) = z^{-(j-i+1)} for j >= i, and 1/(z - lambda_j) for the
// non-zero eigenvalues.
class ResolventExpansion {
public:
    ResolventExpansion(const ModelParams& p, const JordanBasis<Complex>& basis, const SpectrumReport& spectrum)
    {
        const auto sim = assemble_similarity(p, basis, spectrum);
        v_ = sim.V;
        w_ = sim.W;
        blocks_ = basis.block_sizes;
        lambdas_ = spectrum.eigenvalues;
    }

    Eigen::MatrixXcd operator()(Complex z) const
    {
        require(std::abs(z) >= 1e-12, "z too close to 0 for the Jordan expansion");
        for (auto l : lambdas_)
            require(std::abs(z - l) >= 1e-12, "z too close to a non-zero eigenvalue");
        const Eigen::Index n = v_.rows();
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
        Eigen::Index off = 0;
        const Complex zi = 1.0 / z;
        for (int size : blocks_) {
            Complex pw = zi;
            for (int k = 0; k < size; ++k) {
                for (int i = 0; i + k < size; ++i) d(off + i, off + i + k) = pw;
                pw *= zi;
            }
            off += size;
        }
        for (auto l : lambdas_) {
            d(off, off) = 1.0 / (z - l);
            ++off;
        }
        return v_ * d * w_;
    }

private:
    Eigen::MatrixXcd v_;
    Eigen::MatrixXcd w_;
    std::vector<int> blocks_;
    std::vector<Complex> lambdas_;
};

inline Eigen::MatrixXcd resolvent_jordan(const ModelParams& p, const JordanBasis<Complex>& basis,
                                         const SpectrumReport& spectrum, Complex z)
{
    return ResolventExpansion(p, basis, spectrum)(z);
}

} // namespace nonnormal
