#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "kwe/errors.hpp"

namespace kwe {

// KZ exponent: the stationary power law is omega^{-7/6}.
inline constexpr double kKZ = 7.0 / 6.0;

class LogGrid {
public:
    LogGrid() = default;
    LogGrid(double x_min, double x_max, int n);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    int size() const { return n_; }
    double spacing() const { return h_; }
    double x(int i) const { return x_min_ + h_ * i; }
    double omega(int i) const;
    Eigen::VectorXd xs() const;
    Eigen::VectorXd omegas() const;

    // Same spacing, shifted by dx. Used for exact rescaling.
    LogGrid shifted(double dx) const;

private:
    double x_min_ = 0.0;
    double x_max_ = 0.0;
    int n_ = 0;
    double h_ = 0.0;
};

LogGrid make_log_grid(double x_min, double x_max, int n);

// f ~ c0 omega^{-alpha} below the window, f ~ c_inf omega^{-beta} above.
struct TailModel {
    double c0 = 0.0;
    double alpha = kKZ;
    double c_inf = 0.0;
    double beta = kKZ;
};

// Interval in omega on which a spectral function has structure that the
// quadrature must resolve at panels_per_decade density.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

// Anything the collision quadrature can evaluate. Spectrum is the main
// implementation; analytic profiles (Rayleigh-Jeans, envelopes, test
// functions) go through AnalyticSpectrum.
class SpectralFunction {
public:
    virtual ~SpectralFunction() = default;
    virtual double operator()(double omega) const = 0;
    virtual TailModel tails() const = 0;
    virtual std::vector<Window> features() const { return {}; }
    virtual std::vector<double> kinks() const { return {}; }
};

class AnalyticSpectrum final : public SpectralFunction {
public:
    AnalyticSpectrum(std::function<double(double)> fn, TailModel tails,
                     std::vector<Window> features = {}, std::vector<double> kinks = {});

    double operator()(double omega) const override { return fn_(omega); }
    TailModel tails() const override { return tails_; }
    std::vector<Window> features() const override { return features_; }
    std::vector<double> kinks() const override { return kinks_; }

private:
    std::function<double(double)> fn_;
    TailModel tails_;
    std::vector<Window> features_;
    std::vector<double> kinks_;
};

enum class Interpolation { monotone_cubic, linear };

// f(omega_i) = omega_i^{-7/6} u_i on the window, power-law tails outside.
class Spectrum final : public SpectralFunction {
public:
    Spectrum() = default;
    Spectrum(LogGrid grid, Eigen::VectorXd u, TailModel tails,
             Interpolation interp = Interpolation::monotone_cubic);

    // Tail coefficients chosen so that f is continuous at both window edges.
    static Spectrum with_matched_tails(LogGrid grid, Eigen::VectorXd u, double alpha, double beta,
                                       Interpolation interp = Interpolation::monotone_cubic);

    double operator()(double omega) const override;
    TailModel tails() const override { return tails_; }
    std::vector<Window> features() const override;
    std::vector<double> kinks() const override;

    const LogGrid& grid() const { return grid_; }
    const Eigen::VectorXd& u() const { return u_; }
    Interpolation interpolation() const { return interp_; }
    // f at the nodes.
    Eigen::VectorXd values() const;
    // True when f coincides with its tail power laws everywhere.
    bool is_pure_power_law() const { return feat_lo_ > feat_hi_ && pure_; }

private:
    double eval_u(double x) const;
    void prepare();

    LogGrid grid_;
    Eigen::VectorXd u_;
    Eigen::VectorXd slope_;
    TailModel tails_;
    Interpolation interp_ = Interpolation::monotone_cubic;
    // Node range [feat_lo_, feat_hi_] where u deviates from the tails.
    int feat_lo_ = 0;
    int feat_hi_ = -1;
    bool pure_ = true;
};

Spectrum power_law(double c, double mu, const LogGrid& grid);
double eval(const SpectralFunction& s, double omega);

struct WeightedNormSpec {
    double alpha = kKZ;
    double beta = kKZ;
};

struct WeightedNorm {
    double value = 0.0;
    bool divergent = false;
};

// sup_{omega<1} omega^alpha |f| + sup_{omega>1} omega^beta |f| over nodes and tails.
WeightedNorm weighted_norm(const Spectrum& s, const WeightedNormSpec& spec);

struct TailFit {
    TailModel model;
    double residual_low = 0.0;
    double residual_high = 0.0;
    bool ill_conditioned = false;
};

// Least-squares fit of log f against log omega on the outer fraction of nodes.
TailFit fit_tails(const Spectrum& s, double window_fraction);

// f(omega) -> f(lambda omega), exact: shifted grid and rescaled tails.
Spectrum rescale(const Spectrum& s, double lambda);

// Spectrum sampled from an arbitrary function with matched power-law tails.
Spectrum sample(const LogGrid& grid, const std::function<double(double)>& f, double alpha,
                double beta, Interpolation interp = Interpolation::monotone_cubic);

} // namespace kwe
