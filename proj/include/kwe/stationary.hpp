#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "kwe/grid.hpp"
#include "kwe/linearized.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

// G0 = chi(log w) w^{-7/6}: zero at small w, the KZ spectrum at large w.
AnalyticSpectrum g0_spectrum();

// The seven trilinear pieces of N(c, H) at one frequency, unscaled by c.
struct NonlinearTerms {
    double q_g0 = 0.0;       // Q(G0)
    double q_h = 0.0;        // Q(H)
    double q_g0h = 0.0;      // Q(G0, H)
    double c_g0 = 0.0;       // C(G0)
    double c_h = 0.0;        // C(H)
    double c_g0g0h = 0.0;    // C_sym(G0, G0, H)
    double c_g0hh = 0.0;     // C_sym(G0, H, H)
    double combine(double c) const;
};

// Q(g) = 3 C_sym(w^{-7/6}, g, g); Q(g, h) its polarization.
NonlinearTerms nonlinear_terms(const SpectralFunction& H, double omega, const QuadratureConfig& q);

// N(c, H) = c^2 Q(G0) + Q(H) + 2c Q(G0, H) + c^3 C(G0) + C(H) + 3c^2 C(G0, G0, H)
//           + 3c C(G0, H, H) at the nodes of H's grid, every stride-th node
// evaluated and the rest interpolated linearly in u.
Spectrum nonlinear_rhs(double c, const Spectrum& H, const QuadratureConfig& q, int stride = 1);

struct ForcingSpec {
    Spectrum phi;
    double delta = 1.0 / 24.0;
    double eps = 0.0;
    double j_m_inf = 0.0;
};

// Throws DomainError unless ||phi||_{3/2-delta, 3/2+delta} <= eps j_m_inf.
void validate(const ForcingSpec& spec);

struct SolverOptions {
    double step_tol = 1e-9;
    int max_iterations = 100;
    int stall_limit = 5;
    int probes = 12;
    int stride = 1;      // see nonlinear_rhs
    int flux_stride = 4; // see cascade_report
    int energy_probes = 6;
    std::function<void(int iteration, double step, double c)> on_iteration;
};

struct SolverReport {
    double c = 0.0;
    Spectrum H;
    Spectrum f;
    double amplitude = 1.0; // f = amplitude (w^{-7/6} + c G0 + H)
    double j_m_0 = 0.0;
    double j_m_inf = 0.0;
    int iterations = 0;
    std::vector<double> contraction_history;
    double contraction_ratio = 0.0; // max of consecutive step ratios after the first
    bool converged = false;
    std::vector<double> probe_omega;
    std::vector<double> probe_residual;
    double residual_sup = 0.0;
    double mass_balance_defect = 0.0; // |J_M(0) - J_M(inf) + M(phi)| / M(phi)
    double energy_flux_defect = 0.0;  // max over probes of J_E against int w^{3/2} phi
    double tail_c0 = 0.0;
    double tail_cinf = 0.0;
    double tail_alpha = 0.0;
    double tail_beta = 0.0;
    double jm_limit_0 = 0.0;
    double jm_limit_inf = 0.0;
    double forcing_mass = 0.0;
    bool positivity_ok = false;
};

// Picard iteration of (c, H) <- l(Phi + N(c, H)) from (0, 0) on the scaled
// problem with j_M(0) = j_M*, followed by the diagnostics.
SolverReport solve_stationary(const ForcingSpec& spec, const LogGrid& grid,
                              const QuadratureConfig& q, const SolverOptions& opt = {});
// Same with a prebuilt linear system on the grid.
SolverReport solve_stationary(const ForcingSpec& spec, const LinearizedSystem& sys,
                              const QuadratureConfig& q, const SolverOptions& opt = {});

struct C1Fit {
    double c1 = 0.0;
    double c2 = 0.0; // quadratic coefficient (0 with fewer than 2 points)
    std::vector<double> eps;
    std::vector<double> c;
};

// Least squares c = c1 eps + c2 eps^2.
C1Fit fit_c1(const std::vector<double>& eps, const std::vector<double>& c);

// Solves with phi = eps bump and j_m_inf = j_M* - eps (so j_M(0) = j_M*),
// then fits c against eps.
C1Fit extract_c1(const Spectrum& bump, const std::vector<double>& eps_values, const LogGrid& grid,
                 const QuadratureConfig& q, const SolverOptions& opt = {});

} // namespace kwe
