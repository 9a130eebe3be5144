#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kwe/cli_io.hpp"
#include "kwe/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Isotropic 4-wave kinetic wave equation: KZ checks, fluxes, symbol, stationary solver, evolution"};
    app.require_subcommand(1);
    std::string config_path, out_dir, spectrum_path;
    int threads = 1;
    double tol = 0.0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory (overrides out_dir)");
    app.add_option("--threads", threads, "worker threads (evaluation is single-threaded)")->check(CLI::PositiveNumber);
    app.add_option("--tol", tol, "scale factor for pass/fail tolerances")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify-kz", "stationarity, flux constancy and Zakharov roots of the KZ spectrum");
    auto* flux = app.add_subcommand("flux", "flux profile of a spectrum CSV");
    flux->add_option("spectrum", spectrum_path, "spectrum CSV (x,omega,f)")->required();
    auto* symbol = app.add_subcommand("symbol", "symbol scan and root check");
    auto* winding = app.add_subcommand("winding", "winding number of the symbol around the strip rectangle");
    auto* solve = app.add_subcommand("solve", "forced stationary solution");
    auto* evolve = app.add_subcommand("evolve", "time integration");
    auto* c1 = app.add_subcommand("c1", "estimate of c1 from several forcing amplitudes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kwe::kExitOk : kwe::kExitUsage;
    }

    try {
        kwe::RunConfig cfg = config_path.empty() ? kwe::parse_config("{}") : kwe::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (tol > 0.0) cfg.tol_scale = tol;
        kwe::validate(cfg);
        if (*verify) return kwe::cmd_verify_kz(cfg, std::cout);
        if (*flux) return kwe::cmd_flux(cfg, spectrum_path, std::cout);
        if (*symbol) return kwe::cmd_symbol(cfg, std::cout);
        if (*winding) return kwe::cmd_winding(cfg, std::cout);
        if (*solve) return kwe::cmd_solve(cfg, std::cout);
        if (*evolve) return kwe::cmd_evolve(cfg, std::cout);
        if (*c1) return kwe::cmd_c1(cfg, std::cout);
    } catch (const kwe::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kwe::kExitUsage;
    } catch (const kwe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kwe::kExitTolerance;
    }
    return kwe::kExitUsage;
}
