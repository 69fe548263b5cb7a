#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <nonnormal/cli_io.hpp>

using namespace nonnormal;

namespace {

std::vector<int> int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        require(!item.empty(), "empty entry in list '" + s + "'");
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        require(used == item.size(), "not an integer: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

// "8,10,12@120,180" -> every (t, n) pair.
std::vector<io::SweepPoint> parse_sweep(const std::string& s)
{
    const auto at = s.find('@');
    require(at != std::string::npos, "sweep must look like T_LIST@N_LIST, e.g. 8,10@120,180");
    std::vector<io::SweepPoint> pts;
    for (int t : int_list(s.substr(0, at)))
        for (int n : int_list(s.substr(at + 1))) pts.push_back({t, n});
    return pts;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectra, Jordan chains, pseudospectra and perturbation ensembles of S^{t+1}(I + h(S)) + delta J"};
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.fallthrough();
    app.require_subcommand(1);

    io::RunConfig cfg;
    std::vector<std::string> sweeps;
    std::vector<int> resolution;
    app.add_option("--n", cfg.n, "matrix size")->capture_default_str();
    app.add_option("--t", cfg.t, "shift parameter t")->capture_default_str();
    app.add_option("--b,--b-re", cfg.b_re, "real part of b_j (repeat for b_1, b_2, ...)");
    app.add_option("--b-im", cfg.b_im, "imaginary part of b_j");
    app.add_option("--delta,--delta-re", cfg.delta_re, "real part of delta (decimal or p/q)")->capture_default_str();
    app.add_option("--delta-im", cfg.delta_im, "imaginary part of delta")->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed of the ensemble")->capture_default_str();
    app.add_option("--samples", cfg.samples, "ensemble samples per point")->capture_default_str();
    app.add_option("--tilde-delta,--tilde-delta-re", cfg.tilde_delta_re, "perturbation scale")->capture_default_str();
    app.add_option("--tilde-delta-im", cfg.tilde_delta_im, "imaginary part of the perturbation scale");
    app.add_option("--eps", cfg.eps, "epsilon values (comma separated)")->delimiter(',')->capture_default_str();
    app.add_option("--region", cfg.region, "x_min x_max y_min y_max")->expected(4);
    app.add_option("--resolution", resolution, "grid nodes: N or NX NY")->expected(1, 2);
    app.add_option("--curve-samples", cfg.curve_samples, "symbol curve samples")->capture_default_str();
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--format", cfg.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--input", cfg.input, "input CSV for fit (columns t, n, rbar)");
    app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)")->capture_default_str();
    app.add_flag("--timestamp", cfg.timestamp, "add a generation timestamp to outputs");
    app.add_option("--sweep", sweeps, "T_LIST@N_LIST for ensemble sweeps (repeatable)");

    app.add_subcommand("spectrum", "non-zero eigenvalues from the closed-form polynomial");
    app.add_subcommand("jordan", "Jordan chains, condition numbers and similarity residual");
    app.add_subcommand("pseudospec", "sigma_min grid and enclosure disks");
    app.add_subcommand("ensemble", "Gaussian perturbation clouds, mean radius and fit");
    app.add_subcommand("symbol", "symbol curves and the size-reduced region");
    app.add_subcommand("fit", "fit log R = c1 (t+1)/(n+t+1) + c2 to an rbar CSV");
    app.add_subcommand("oracle-check", "exact rational checks for n <= 12");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (resolution.size() == 1) cfg.nx = cfg.ny = resolution[0];
        if (resolution.size() == 2) {
            cfg.nx = resolution[0];
            cfg.ny = resolution[1];
        }
        for (const auto& s : sweeps)
            for (const auto& p : parse_sweep(s)) cfg.sweep.push_back(p);
        cfg.validate();

        std::vector<std::string> written;
        int status = 0;
        if (cfg.subcommand == "spectrum") written = io::cmd_spectrum(cfg);
        else if (cfg.subcommand == "jordan") written = io::cmd_jordan(cfg);
        else if (cfg.subcommand == "pseudospec") written = io::cmd_pseudospec(cfg);
        else if (cfg.subcommand == "ensemble") written = io::cmd_ensemble(cfg);
        else if (cfg.subcommand == "symbol") written = io::cmd_symbol(cfg);
        else if (cfg.subcommand == "fit") written = io::cmd_fit(cfg);
        else {
            auto r = io::cmd_oracle_check(cfg);
            written = r.written;
            if (!r.ok) {
                std::cerr << "oracle-check: mismatch, see " << written.front() << '\n';
                status = 2;
            }
        }
        for (const auto& f : written) std::cout << f << '\n';
        return status;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n(run with --help for usage)\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: value out of range: " << e.what() << '\n';
        return 1;
    } catch (const io::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}
