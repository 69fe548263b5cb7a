#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensemble.hpp"
#include "exact_oracle.hpp"
#include "jordan.hpp"
#include "resolvent.hpp"
#include "spectrum.hpp"

namespace nonnormal::io {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepPoint {
    int t = 0;
    int n = 0;
};

// Everything a command needs; outputs are a pure function of this.
struct RunConfig {
    std::string subcommand;
    int n = 10;
    int t = 1;
    // Literals are kept as text so oracle-check can read them exactly.
    std::vector<std::string> b_re;
    std::vector<std::string> b_im;
    std::string delta_re = "0.01";
    std::string delta_im = "0";
    std::uint64_t seed = 1;
    int samples = 20;
    double tilde_delta_re = 1e-10;
    double tilde_delta_im = 0.0;
    std::vector<double> eps{1e-8};
    std::vector<double> region;  // x_min x_max y_min y_max; empty = default
    int nx = 200;
    int ny = 200;
    int curve_samples = 4096;
    std::string out = ".";
    std::string format = "csv";
    std::string input;
    unsigned threads = 0;
    bool timestamp = false;
    std::vector<SweepPoint> sweep;

    void validate() const
    {
        require(format == "csv" || format == "json", "format must be csv or json (got " + format + ")");
        require(b_im.size() <= b_re.size(), "more --b-im values than --b-re values");
        require(samples >= 1, "samples must be at least 1");
        require(nx >= 2 && ny >= 2, "resolution must be at least 2x2");
        require(region.empty() || region.size() == 4, "region needs 4 numbers: x_min x_max y_min y_max");
        require(curve_samples >= 16, "curve samples must be at least 16");
        require(!eps.empty(), "at least one epsilon is required");
        for (double e : eps) require(e > 0 && e < 1, "epsilon must lie in (0, 1)");
        require(std::isfinite(tilde_delta_re) && std::isfinite(tilde_delta_im), "tilde-delta must be finite");
    }
};

inline double parse_real(const std::string& text)
{
    if (text.find('/') != std::string::npos) return parse_rational(text).get_d();
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw InvalidArgument("not a number: '" + text + "'");
    require(std::isfinite(v), "value must be finite: '" + text + "'");
    return v;
}

inline ModelParams model_params(const RunConfig& c, int n, int t)
{
    ModelParams p;
    p.n = n;
    p.t = t;
    for (std::size_t j = 0; j < c.b_re.size(); ++j)
        p.b_coeffs.emplace_back(parse_real(c.b_re[j]), j < c.b_im.size() ? parse_real(c.b_im[j]) : 0.0);
    p.delta = {parse_real(c.delta_re), parse_real(c.delta_im)};
    p.validate();
    return p;
}

inline ModelParams model_params(const RunConfig& c) { return model_params(c, c.n, c.t); }

inline ExactModelParams exact_model_params(const RunConfig& c)
{
    ExactModelParams p;
    p.n = c.n;
    p.t = c.t;
    for (std::size_t j = 0; j < c.b_re.size(); ++j)
        p.b_coeffs.emplace_back(parse_rational(c.b_re[j]),
                                j < c.b_im.size() ? parse_rational(c.b_im[j]) : mpq_class(0));
    p.delta = RationalComplex(parse_rational(c.delta_re), parse_rational(c.delta_im));
    p.validate();
    return p;
}

// Shortest text that reads back to the same double.
inline std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline Json complex_list(const std::vector<Complex>& zs)
{
    Json a = Json::array();
    for (auto z : zs) a.push_back(complex_json(z));
    return a;
}

inline Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json params_json(const ModelParams& p)
{
    return {{"n", p.n}, {"t", p.t}, {"b", complex_list(p.b_coeffs)}, {"delta", complex_json(p.delta)}};
}

inline Json multiplicities_json(const Multiplicities& m)
{
    return {{"p1", m.p1}, {"p2", m.p2}, {"a0", m.a0}, {"g0", m.g0}, {"k0", m.k0}, {"xi", m.xi},
            {"block_sizes", m.block_sizes}};
}

// A table cell is a number, an integer or raw text.
struct Cell {
    enum Kind { Real, Integer, Text } kind = Real;
    double real = 0.0;
    long long integer = 0;
    std::string text;

    Cell(double v) : kind(Real), real(v) {}
    Cell(int v) : kind(Integer), integer(v) {}
    Cell(long long v) : kind(Integer), integer(v) {}
    Cell(std::uint64_t v) : kind(Integer), integer(static_cast<long long>(v)) {}
    Cell(std::string s) : kind(Text), text(std::move(s)) {}
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    bool header = true;
};

inline std::string stamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Writer {
public:
    explicit Writer(const RunConfig& c) : dir_(c.out), format_(c.format), timestamp_(c.timestamp)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    // Written as <stem>.csv or <stem>.json depending on the format.
    void table(const std::string& stem, const Table& t)
    {
        if (format_ == "json") {
            Json rows = Json::array();
            for (const auto& r : t.rows) {
                Json o = Json::object();
                for (std::size_t k = 0; k < r.size(); ++k) o[t.columns[k]] = cell_json(r[k]);
                rows.push_back(std::move(o));
            }
            json(stem, Json{{"rows", rows}});
            return;
        }
        std::ostringstream os;
        if (timestamp_) os << "# generated " << stamp() << '\n';
        if (t.header) os << join(t.columns) << '\n';
        for (const auto& r : t.rows) {
            std::vector<std::string> cells;
            for (const auto& c : r) cells.push_back(cell_text(c));
            os << join(cells) << '\n';
        }
        text(stem + ".csv", os.str());
    }

    void json(const std::string& stem, Json doc)
    {
        if (timestamp_) doc["generated"] = stamp();
        text(stem + ".json", doc.dump(2) + "\n");
    }

    void text(const std::string& name, const std::string& body)
    {
        const auto path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        f << body;
        if (!f) throw IoError("write failed for " + path.string());
        written_.push_back(path.string());
    }

    const std::vector<std::string>& written() const { return written_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
        return s;
    }
    static std::string cell_text(const Cell& c)
    {
        switch (c.kind) {
        case Cell::Real: return fmt(c.real);
        case Cell::Integer: return std::to_string(c.integer);
        default: return c.text;
        }
    }
    static Json cell_json(const Cell& c)
    {
        switch (c.kind) {
        case Cell::Real: return real_or_null(c.real);
        case Cell::Integer: return c.integer;
        default: return c.text;
        }
    }

    std::filesystem::path dir_;
    std::string format_;
    bool timestamp_;
    std::vector<std::string> written_;
};

inline Region config_region(const RunConfig& c, const ModelParams& p)
{
    if (c.region.empty()) return default_region(p);
    Region r{c.region[0], c.region[1], c.region[2], c.region[3]};
    r.validate();
    return r;
}

inline std::vector<std::string> cmd_spectrum(const RunConfig& c)
{
    const auto p = model_params(c);
    const auto poly = char_poly(p);
    const auto spec = nonzero_eigenvalues(p);
    Writer w(c);
    Json doc{{"params", params_json(p)},
             {"multiplicities", multiplicities_json(spec.multiplicities)},
             {"polynomial_form", poly.form == PolynomialForm::ZeroB ? "zero_b" : "general"},
             {"polynomial", complex_list(poly.coeffs)},
             {"eigenvalues", complex_list(spec.eigenvalues)},
             {"residuals", spec.residuals},
             {"iterations", spec.iterations},
             {"outlier_index", spec.outlier_index}};
    w.json("spectrum", doc);
    Table t{{"index", "re", "im", "residual"}, {}};
    for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k)
        t.rows.push_back({static_cast<int>(k), spec.eigenvalues[k].real(), spec.eigenvalues[k].imag(),
                          spec.residuals[k]});
    w.table("roots", t);
    return w.written();
}

inline Table chain_table(const std::vector<Vec<Complex>>& chain, int n)
{
    Table t;
    t.columns.push_back("q");
    for (int i = 1; i <= n; ++i) {
        t.columns.push_back("re" + std::to_string(i));
        t.columns.push_back("im" + std::to_string(i));
    }
    for (std::size_t q = 0; q < chain.size(); ++q) {
        std::vector<Cell> row{static_cast<int>(q + 1)};
        for (auto x : chain[q]) {
            row.emplace_back(x.real());
            row.emplace_back(x.imag());
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline std::vector<std::string> cmd_jordan(const RunConfig& c)
{
    const auto p = model_params(c);
    require(p.t >= 1, "the zero eigenvalue is simple for t = 0; jordan needs t >= 1");
    const auto basis = jordan_basis(p);
    const auto spec = nonzero_eigenvalues(p);
    const auto sim = assemble_similarity(p, basis, spec);
    Writer w(c);
    for (std::size_t l = 0; l < basis.right.size(); ++l) {
        w.table("chain_" + std::to_string(l + 1) + "_right", chain_table(basis.right[l], p.n));
        w.table("chain_" + std::to_string(l + 1) + "_left", chain_table(basis.left[l], p.n));
    }
    Json blocks = Json::array();
    for (const auto& b : basis.conditions.per_block) blocks.push_back({{"block", b.block}, {"kappa", b.kappa}});
    Json doc{{"params", params_json(p)},
             {"block_sizes", basis.block_sizes},
             {"maximal_block_kappa", blocks},
             {"kappa0", basis.conditions.kappa0},
             {"t_kappa0", p.t * basis.conditions.kappa0}};
    if (p.b_is_zero()) doc["t_kappa0_reference_b0"] = std::sqrt(2.0 * p.t * (p.t - 1));
    doc["similarity_residual"] = sim.similarity_residual;
    doc["inverse_residual"] = sim.inverse_residual;
    doc["norm_m"] = sim.norm_m;
    doc["cond_v"] = real_or_null(sim.cond_v);
    doc["warnings"] = sim.warnings;
    for (const auto& msg : sim.warnings) std::cerr << "warning: " << msg << '\n';
    w.json("jordan", doc);
    return w.written();
}

inline std::vector<std::string> cmd_pseudospec(const RunConfig& c)
{
    const auto p = model_params(c);
    const auto region = config_region(c, p);
    const auto grid = pseudospectrum_grid(model_matrix(p), region, c.nx, c.ny, c.threads, suggested_block_size(p.t));
    Writer w(c);
    Table pts{{"x", "y", "sigma_min"}, {}};
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) pts.rows.push_back({grid.x(ix), grid.y(iy), grid.at(ix, iy)});
    w.table("sigma", pts);
    // Row iy holds y(iy); column ix holds x(ix).
    Table mat;
    mat.header = false;
    for (int ix = 0; ix < grid.nx; ++ix) mat.columns.push_back("x" + std::to_string(ix));
    for (int iy = 0; iy < grid.ny; ++iy) {
        std::vector<Cell> row;
        for (int ix = 0; ix < grid.nx; ++ix) row.emplace_back(grid.at(ix, iy));
        mat.rows.push_back(std::move(row));
    }
    w.table("sigma_matrix", mat);

    const auto spec = nonzero_eigenvalues(p);
    std::optional<JordanBasis<Complex>> basis;
    if (p.t >= 1) basis = jordan_basis(p);
    const auto pairs = nonzero_eigenpairs(p, spec);
    Json disks = Json::array();
    for (double eps : c.eps) {
        Json d{{"epsilon", eps}};
        if (basis) {
            const auto e = enclosure_disks(p, *basis, spec, eps);
            d["C0"] = e.C0;
            d["kappa0"] = basis->conditions.kappa0;
            d["zero_radius"] = e.zero_radius;
        } else {
            d["C0"] = nullptr;
            d["kappa0"] = nullptr;
            d["zero_radius"] = nullptr;
        }
        Json ed = Json::array();
        for (const auto& ep : pairs)
            ed.push_back({{"center", complex_json(ep.lambda)}, {"radius", eps * ep.kappa}, {"kappa", ep.kappa}});
        d["eigen_disks"] = ed;
        disks.push_back(std::move(d));
    }
    Json doc{{"params", params_json(p)},
             {"region", {region.x_min, region.x_max, region.y_min, region.y_max}},
             {"resolution", {c.nx, c.ny}},
             {"disks", disks}};
    w.json("disks", doc);
    return w.written();
}

inline Table curve_table(const SymbolCurve& s)
{
    Table t{{"r", "theta", "re", "im"}, {}};
    for (std::size_t k = 0; k < s.points.size(); ++k)
        t.rows.push_back({s.r, s.theta[k], s.points[k].real(), s.points[k].imag()});
    return t;
}

inline Json curve_json(const SymbolCurve& s)
{
    Json j{{"r", s.r}, {"theta0", s.theta0 ? Json(*s.theta0) : Json(nullptr)}};
    try {
        j["winding_at_origin"] = winding_number(s, 0.0);
    } catch (const InvalidArgument&) {
        j["winding_at_origin"] = nullptr;
    }
    return j;
}

// Symbol curve at r = 1 and at the size-reduced radius of the first epsilon.
inline Json write_symbol_curves(Writer& w, const RunConfig& c, const ModelParams& p)
{
    const auto unit = symbol_curve(p.t, p.b_coeffs, 1.0, c.curve_samples);
    w.table("symbol_r1", curve_table(unit));
    Json doc{{"unit", curve_json(unit)}};
    if (p.t >= 1) {
        const double r = reduced_radius(p.n, p.t, c.eps.front());
        const auto reduced = symbol_curve(p.t, p.b_coeffs, r, c.curve_samples);
        w.table("symbol_reduced", curve_table(reduced));
        doc["reduced"] = curve_json(reduced);
        doc["reduced"]["epsilon"] = c.eps.front();
        doc["reduced"]["varpi"] = (p.t + 1) * multiplicities(p.n, p.t).k0;
    }
    return doc;
}

inline std::vector<std::string> cmd_symbol(const RunConfig& c)
{
    const auto p = model_params(c);
    Writer w(c);
    Json doc{{"params", params_json(p)}};
    doc["curves"] = write_symbol_curves(w, c, p);
    if (p.t >= 1) {
        const auto region = config_region(c, p);
        const auto g = conjecture_region(p, c.eps.front(), region, c.nx, c.ny, c.curve_samples, c.threads);
        Table t{{"x", "y", "inside"}, {}};
        std::size_t count = 0;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const auto z = g.node(ix, iy);
                t.rows.push_back({z.real(), z.imag(), g.at(ix, iy) ? 1 : 0});
                count += g.at(ix, iy);
            }
        w.table("region", t);
        doc["region"] = {{"bounds", {region.x_min, region.x_max, region.y_min, region.y_max}},
                         {"resolution", {c.nx, c.ny}},
                         {"inside_nodes", count}};
    }
    w.json("symbol", doc);
    return w.written();
}

inline Json fit_json(const std::vector<RadiusPoint>& pts)
{
    const auto f = fit_radius_law(pts);
    return {{"c1", f.c1}, {"c2", f.c2}, {"residual", f.residual}, {"exp_c1", std::exp(f.c1)}, {"points", pts.size()}};
}

inline std::vector<std::string> cmd_ensemble(const RunConfig& c)
{
    const auto base = model_params(c);
    std::vector<SweepPoint> points = c.sweep.empty() ? std::vector<SweepPoint>{{c.t, c.n}} : c.sweep;
    const Complex tilde{c.tilde_delta_re, c.tilde_delta_im};
    Writer w(c);
    Table rbar{{"t", "n", "rbar", "count", "matched", "fallback", "ambiguities", "max_displacement", "failures",
                "boundary_radius", "ratio"}, {}};
    std::vector<RadiusPoint> fit_points;
    for (const auto& pt : points) {
        const auto p = model_params(c, pt.n, pt.t);
        const auto spec = nonzero_eigenvalues(p);
        auto cloud = run_ensemble(p, tilde, c.samples, c.seed, c.threads);
        for (const auto& [sample, msg] : cloud.failures)
            std::cerr << "sample " << sample << " (t=" << pt.t << ", n=" << pt.n << ") failed: " << msg << '\n';
        const auto stats = filter_outer(cloud, spec.eigenvalues);
        if (stats.ambiguities > 0)
            std::cerr << "t=" << pt.t << ", n=" << pt.n << ": " << stats.ambiguities
                      << " match ambiguities resolved greedily\n";
        std::vector<double> moduli;
        for (std::size_t i = 0; i < cloud.eigenvalues.size(); ++i)
            if (!cloud.filtered_out[i]) moduli.push_back(std::abs(cloud.eigenvalues[i]));
        const long long count = static_cast<long long>(moduli.size());
        const double mean = count ? std::accumulate(moduli.begin(), moduli.end(), 0.0) / static_cast<double>(count) : 0.0;
        // Edge of the inner cloud: 99th percentile of the remaining moduli.
        std::sort(moduli.begin(), moduli.end());
        const double edge = count ? moduli[static_cast<std::size_t>(0.99 * static_cast<double>(count - 1))] : 0.0;
        rbar.rows.push_back({pt.t, pt.n, mean, count, stats.matched, stats.fallback, stats.ambiguities,
                             stats.max_displacement, static_cast<int>(cloud.failures.size()), edge,
                             edge > 0 ? mean / edge : 0.0});
        fit_points.push_back({pt.t, pt.n, mean});

        Table cl{{"sample", "re", "im", "filtered"}, {}};
        for (std::size_t i = 0; i < cloud.eigenvalues.size(); ++i)
            cl.rows.push_back({cloud.sample_of[i], cloud.eigenvalues[i].real(), cloud.eigenvalues[i].imag(),
                               static_cast<int>(cloud.filtered_out[i])});
        w.table(points.size() == 1 ? "cloud" : "cloud_t" + std::to_string(pt.t) + "_n" + std::to_string(pt.n), cl);
    }
    w.table("rbar", rbar);
    if (fit_points.size() >= 3) {
        Json doc{{"params", params_json(base)},
                 {"tilde_delta", complex_json(tilde)},
                 {"samples", c.samples},
                 {"seed", c.seed},
                 {"fit", fit_json(fit_points)}};
        w.json("fit", doc);
    }
    Json curves{{"params", params_json(base)}};
    curves["curves"] = write_symbol_curves(w, c, base);
    w.json("symbol", curves);
    return w.written();
}

// Reads columns t, n, rbar from a CSV with a header row.
inline std::vector<RadiusPoint> read_rbar_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(f, line))
        if (!line.empty() && line[0] != '#') {
            header = split(line);
            break;
        }
    auto col = [&](const std::string& name) {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw InvalidArgument(path + ": missing column '" + name + "'");
    };
    const auto ct = col("t"), cn = col("n"), cr = col("rbar");
    std::vector<RadiusPoint> pts;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line);
        require(cells.size() > std::max({ct, cn, cr}), path + ": short row '" + line + "'");
        pts.push_back({std::stoi(cells[ct]), std::stoi(cells[cn]), parse_real(cells[cr])});
    }
    return pts;
}

inline std::vector<std::string> cmd_fit(const RunConfig& c)
{
    require(!c.input.empty(), "fit needs --input with columns t, n, rbar");
    const auto pts = read_rbar_csv(c.input);
    Writer w(c);
    w.json("fit", Json{{"input", c.input}, {"fit", fit_json(pts)}});
    return w.written();
}

struct OracleOutcome {
    bool ok = true;
    std::vector<std::string> written;
};

inline OracleOutcome cmd_oracle_check(const RunConfig& c)
{
    const auto p = exact_model_params(c);
    require(p.n <= 12, "oracle-check is limited to n <= 12");
    const auto m = multiplicities(p.n, p.t);
    OracleOutcome out;
    Json checks = Json::array();
    auto record = [&](const std::string& name, bool ok, const std::string& detail = "") {
        out.ok = out.ok && ok;
        Json e{{"check", name}, {"ok", ok}};
        if (!detail.empty()) e["detail"] = detail;
        checks.push_back(std::move(e));
    };
    const auto cp = exact_charpoly(p);
    const bool nilpotent = p.delta.is_zero();
    record("zero_root_count", cp.zero_root_count() == (nilpotent ? p.n : m.a0),
           "count " + std::to_string(cp.zero_root_count()));
    if (!nilpotent) record("nonzero_factor", cp.nonzero_factor() == char_poly(p).coeffs);
    const auto ranks = rank_sequence(p, p.n);
    record("kernel_dimension", p.n - ranks[1] == (nilpotent ? p.t + 1 : m.g0), "dim " + std::to_string(p.n - ranks[1]));
    if (!nilpotent) record("block_sizes", block_sizes_from_ranks(ranks) == m.block_sizes);
    if (!nilpotent && p.t >= 1 && p.n <= 10) {
        const auto rep = exact_chain_check(p, jordan_basis(p));
        std::string detail;
        for (const auto& v : rep.violations) detail += (detail.empty() ? "" : "; ") + v;
        record("jordan_chains", rep.ok, detail);
    }
    Writer w(c);
    w.json("oracle", Json{{"n", p.n}, {"t", p.t}, {"ok", out.ok}, {"checks", checks}});
    out.written = w.written();
    return out;
}

} // namespace nonnormal::io
