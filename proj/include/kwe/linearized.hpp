#pragma once

#include <complex>

#include <Eigen/Dense>

#include "kwe/grid.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

// L g = -3 C_sym(w^{-7/6}, w^{-7/6}, g).
double linearized_apply(const SpectralFunction& g, double omega, const QuadratureConfig& q);

// End columns of the hat basis: plain hats, or hats continued as the constant
// u = 1 beyond the window (so that u = 1 is exactly the KZ direction).
enum class BasisEnds { truncate, extend };

// j-th basis function as a linearly interpolated spectrum in the u variable.
Spectrum basis_function(const LogGrid& grid, int j, BasisEnds ends);

// A(i, j) = omega_i^{3/2} (L b_j)(omega_i), acting on u. Scale invariance of L
// makes the interior Toeplitz, so only one hat and the two end columns are
// integrated.
Eigen::MatrixXd assemble_matrix(const LogGrid& grid, const QuadratureConfig& q,
                                BasisEnds ends = BasisEnds::extend);

// Kernel form of L at omega = 1: (L g)(1) = a g(1) - int_0^inf k(r) g(r) dr.
double symbol_multiplier(const QuadratureConfig& q);
double symbol_kernel(double r, const QuadratureConfig& q);
// Same at r = 1 + dr, exact for |dr| far below machine epsilon.
double symbol_kernel_offset(double dr, const QuadratureConfig& q);

struct SymbolSample {
    double b = 0.0;
    double tau = 0.0;
    std::complex<double> value;
    double window_change = 0.0; // relative change when the r range is halved in log
};

// m(z) = omega^{z + 1/3} (L omega^{-z})(omega), z = b + i tau.
SymbolSample symbol_sample(double b, double tau, const QuadratureConfig& q);
std::complex<double> symbol(double b, double tau, const QuadratureConfig& q);

// Winding number of m around 0 along the boundary of
// [7/6 - d1, 7/6 + d2] x [-tau_max, tau_max]; samples per vertical side.
int spectral_winding(double d1, double d2, double tau_max, int samples, const QuadratureConfig& q);
int spectral_winding_box(double b_lo, double b_hi, double tau_max, int samples,
                         const QuadratureConfig& q);

// Quintic smoothstep: 0 for x <= 0, 1 for x >= 1.
double chi(double x);
// G0(x) = chi(x) e^{-7x/6} in u form on the grid: u = chi(x).
Eigen::VectorXd g0_direction(const LogGrid& grid);

struct AugmentedSolution {
    double c = 0.0;
    Spectrum H;
    double residual = 0.0;
};

struct LinearizedSystem {
    LogGrid grid;
    Eigen::MatrixXd extended; // BasisEnds::extend
};
LinearizedSystem assemble_system(const LogGrid& grid, const QuadratureConfig& q);

// Solves L(c G0 + H) = psi on the grid in the least-squares sense. In u form
// the solution is fixed to 0 below the window and continued as the constant c
// above it, so H vanishes outside the window.
AugmentedSolution solve_augmented(const Spectrum& psi, const LogGrid& grid, const QuadratureConfig& q);
AugmentedSolution solve_augmented(const Spectrum& psi, const LinearizedSystem& sys);
// Same with the right-hand side omega_i^{3/2} psi(omega_i) given at the nodes.
AugmentedSolution solve_augmented_rhs(const Eigen::VectorXd& rhs, const LinearizedSystem& sys);

} // namespace kwe
