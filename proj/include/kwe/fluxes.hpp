#pragma once

#include <Eigen/Dense>

#include "kwe/grid.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

struct FluxComponents {
    double j1 = 0.0;
    double j2 = 0.0;
    double j3 = 0.0;
    double j4 = 0.0;
    double jm = 0.0; // j1 + j2 - j3 - j4
};

// All four flux integrals at omega. The components share one truncation of
// the unbounded direction, so their slowly decaying tails cancel in jm.
FluxComponents flux_components(const Spectrum& f, double omega, const QuadratureConfig& q);
double flux_component(int i, const Spectrum& f, double omega, const QuadratureConfig& q);
double flux_mass(const Spectrum& f, double omega, const QuadratureConfig& q);

// j_M* = -J_M(w^{-7/6})(1) under high_resolution(q), cached per configuration.
double kz_constant(const QuadratureConfig& q);
QuadratureConfig high_resolution(const QuadratureConfig& q);

// omega J_M(omega) - int_0^omega J_M, with J_M frozen at its value `decades`
// below omega for the remainder of the integral.
double flux_energy(const Spectrum& f, double omega, const QuadratureConfig& q, double decades = 6.0);

struct FluxProfile {
    LogGrid grid;
    Eigen::VectorXd jm;
    Eigen::VectorXd je;
    double jm_limit_0 = 0.0;
    double jm_limit_inf = 0.0;
    double forcing_mass = 0.0;
    double compat_defect = 0.0; // |c0^3 - cinf^3 - M(phi)/j*|
};

// J_M at every stride-th node (interpolated in between), J_E from the defining
// relation with the integral taken relative to jm_limit_0.
FluxProfile cascade_report(const Spectrum& f, const Spectrum& phi, const QuadratureConfig& q,
                           int stride = 1);

// int_0^inf w^p f(w) dw over window cells and analytic tails.
double moment(const Spectrum& f, double p);

// int_y^inf f, analytic on power-law tails.
class TailIntegral {
public:
    TailIntegral(const Spectrum& f, const QuadratureConfig& q);
    double operator()(double y) const;

private:
    double above(double y) const;
    double below(double y) const;
    double cell(double a, double b) const;

    const Spectrum* f_;
    TailModel t_;
    bool pure_ = false;
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<double> nodes_; // breakpoints over the feature window
    std::vector<double> cum_;   // int_{nodes_[i]}^{hi_} f
    int order_ = 8;
};

} // namespace kwe
