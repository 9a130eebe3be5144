#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kwe/grid.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

struct GridConfig {
    double x_min = -10.0;
    double x_max = 10.0;
    int n = 401;
};

// phi = eps b / M(b) with b = exp(-(x - center)^2 / (2 width^2)) w^{-3/2},
// so M(phi) = eps. j_m_inf <= 0 selects j_M* - eps.
struct ForcingConfig {
    double center = 0.4;
    double width = 0.3;
    double eps = 0.01;
    double j_m_inf = 0.0;
    double delta = 1.0 / 24.0;
};

struct SymbolConfig {
    std::vector<double> b{7.0 / 6.0, 1.1, 1.25};
    double tau_max = 50.0;
    int n_tau = 21;
    double d1 = 0.1;
    double d2 = 0.1;
    int winding_samples = 2000;
};

// Initial u = amplitude exp(-(x - center)^2 / (2 width^2)) on its own grid.
struct EvolveConfig {
    GridConfig grid{-6.0, 6.0, 61};
    double amplitude = 1.0;
    double center = 0.0;
    double width = 0.5;
    double forcing_eps = 0.0; // scale of the ForcingConfig bump as forcing
    double t_end = 0.2;
    double cadence = 0.05;
    double rtol = 1e-6;
};

struct C1Config {
    std::vector<double> eps{0.002, 0.005, 0.01};
};

struct RunConfig {
    GridConfig grid;
    QuadratureConfig quad;
    ForcingConfig forcing;
    SymbolConfig symbol;
    EvolveConfig evolve;
    C1Config c1;
    std::string out_dir = "kwe_out";
    std::uint64_t seed = 0;
    double tol_scale = 1.0; // multiplies every verify-kz tolerance
    int picard_stride = 2; // nonlinear terms at every other node, interpolated between
};

// JSON config; unknown keys and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// Spectrum files: CSV "x,omega,u,f" plus a sidecar <stem>.tails.json with
// c0, alpha, c_inf, beta. Without the sidecar, tails are matched with exponent 7/6.
void write_spectrum_csv(const std::string& path, const Spectrum& f);
Spectrum read_spectrum_csv(const std::string& path);
std::string fmt17(double v);

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitTolerance = 2 };

// Subcommands write under cfg.out_dir and return an exit code. Progress goes
// to log.
int cmd_verify_kz(const RunConfig& cfg, std::ostream& log);
int cmd_flux(const RunConfig& cfg, const std::string& spectrum_path, std::ostream& log);
int cmd_symbol(const RunConfig& cfg, std::ostream& log);
int cmd_winding(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_evolve(const RunConfig& cfg, std::ostream& log);
int cmd_c1(const RunConfig& cfg, std::ostream& log);

// Forcing of ForcingConfig sampled on a grid, scaled to mass eps.
Spectrum forcing_bump(const ForcingConfig& fc, const LogGrid& grid);

} // namespace kwe
