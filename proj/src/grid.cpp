#include "kwe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kwe {

LogGrid::LogGrid(double x_min, double x_max, int n) : x_min_(x_min), x_max_(x_max), n_(n) {
    if (!(n >= 2) || !std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
        throw InvalidRange("LogGrid needs finite x_min < x_max and n >= 2");
    h_ = (x_max - x_min) / (n - 1);
}

double LogGrid::omega(int i) const { return std::exp(x(i)); }

Eigen::VectorXd LogGrid::xs() const {
    Eigen::VectorXd v(n_);
    for (int i = 0; i < n_; ++i) v[i] = x(i);
    return v;
}

Eigen::VectorXd LogGrid::omegas() const { return xs().array().exp(); }

LogGrid LogGrid::shifted(double dx) const { return LogGrid(x_min_ + dx, x_max_ + dx, n_); }

LogGrid make_log_grid(double x_min, double x_max, int n) { return LogGrid(x_min, x_max, n); }

AnalyticSpectrum::AnalyticSpectrum(std::function<double(double)> fn, TailModel tails,
                                   std::vector<Window> features, std::vector<double> kinks)
    : fn_(std::move(fn)), tails_(tails), features_(std::move(features)), kinks_(std::move(kinks)) {}

namespace {

bool close_rel(double a, double b, double tol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * scale || scale < 1e-300;
}

} // namespace

Spectrum::Spectrum(LogGrid grid, Eigen::VectorXd u, TailModel tails, Interpolation interp)
    : grid_(grid), u_(std::move(u)), tails_(tails), interp_(interp) {
    if (u_.size() != grid_.size()) throw InvalidRange("Spectrum: u has wrong length");
    if (!u_.allFinite()) throw InvalidRange("Spectrum: non-finite samples");
    const int n = grid_.size();
    const double w0 = grid_.omega(0), w1 = grid_.omega(n - 1);
    // Compare in u, relative to the largest sample.
    const double umax = u_.size() > 0 ? u_.cwiseAbs().maxCoeff() : 0.0;
    const double t0 = tails_.c0 * std::pow(w0, kKZ - tails_.alpha);
    const double t1 = tails_.c_inf * std::pow(w1, kKZ - tails_.beta);
    auto close = [&](double a, double b) {
        return close_rel(a, b, 1e-10) || std::abs(a - b) <= 1e-10 * umax;
    };
    if (!close(t0, u_[0]) || !close(t1, u_[n - 1]))
        throw InvalidRange("Spectrum: tail model does not match the window edge values");
    prepare();
}

Spectrum Spectrum::with_matched_tails(LogGrid grid, Eigen::VectorXd u, double alpha, double beta,
                                      Interpolation interp) {
    const int n = grid.size();
    if (u.size() != n) throw InvalidRange("Spectrum: u has wrong length");
    TailModel t;
    t.alpha = alpha;
    t.beta = beta;
    t.c0 = u[0] * std::exp((alpha - kKZ) * grid.x(0));
    t.c_inf = u[n - 1] * std::exp((beta - kKZ) * grid.x(n - 1));
    return Spectrum(grid, std::move(u), t, interp);
}

void Spectrum::prepare() {
    const int n = grid_.size();
    const double h = grid_.spacing();
    slope_ = Eigen::VectorXd::Zero(n);
    if (interp_ == Interpolation::monotone_cubic) {
        // Fritsch-Butland slopes on the uniform x grid.
        std::vector<double> d(n - 1);
        for (int i = 0; i + 1 < n; ++i) d[i] = (u_[i + 1] - u_[i]) / h;
        slope_[0] = d[0];
        slope_[n - 1] = d[n - 2];
        for (int i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) slope_[i] = 0.0;
            else slope_[i] = 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);
        }
    }

    // Locate the nodes where u departs from the tail power laws.
    const double scale = std::max(u_.cwiseAbs().maxCoeff(), 1e-300);
    const double tol = 1e-12 * scale;
    int ilo = n, ihi = -1;
    for (int i = 0; i < n; ++i) {
        const double ul = tails_.c0 * std::exp((kKZ - tails_.alpha) * grid_.x(i));
        if (std::abs(u_[i] - ul) > tol) {
            ilo = i;
            break;
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        const double ur = tails_.c_inf * std::exp((kKZ - tails_.beta) * grid_.x(i));
        if (std::abs(u_[i] - ur) > tol) {
            ihi = i;
            break;
        }
    }
    pure_ = (ilo == n && ihi == -1);
    feat_lo_ = std::max(0, ilo - 1);
    feat_hi_ = std::min(n - 1, ihi + 1);
    if (pure_) {
        feat_lo_ = n;
        feat_hi_ = n - 1;
    } else if (feat_lo_ > feat_hi_) {
        // Tails overlap on some nodes: switch between them without interpolation.
        const int mid = (feat_lo_ + feat_hi_) / 2;
        feat_lo_ = mid + 1;
        feat_hi_ = mid;
    }
}

double Spectrum::eval_u(double x) const {
    const int n = grid_.size();
    const double h = grid_.spacing();
    double t = (x - grid_.x_min()) / h;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, n - 2);
    const double s = t - i;
    if (interp_ == Interpolation::linear) return (1.0 - s) * u_[i] + s * u_[i + 1];
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u_[i] + (s3 - 2 * s2 + s) * h * slope_[i] +
           (-2 * s3 + 3 * s2) * u_[i + 1] + (s3 - s2) * h * slope_[i + 1];
}

double Spectrum::operator()(double omega) const {
    if (!(omega > 0.0)) throw DomainError("spectrum evaluated at omega <= 0");
    if (pure_) return tails_.c0 == 0.0 ? 0.0 : tails_.c0 * std::pow(omega, -tails_.alpha);
    const double x = std::log(omega);
    if (feat_lo_ > feat_hi_) {
        // Degenerate feature range: the two tails meet at node feat_hi_.
        if (x <= grid_.x(feat_hi_))
            return tails_.c0 == 0.0 ? 0.0 : tails_.c0 * std::pow(omega, -tails_.alpha);
        return tails_.c_inf == 0.0 ? 0.0 : tails_.c_inf * std::pow(omega, -tails_.beta);
    }
    if (x < grid_.x(feat_lo_))
        return tails_.c0 == 0.0 ? 0.0 : tails_.c0 * std::pow(omega, -tails_.alpha);
    if (x > grid_.x(feat_hi_))
        return tails_.c_inf == 0.0 ? 0.0 : tails_.c_inf * std::pow(omega, -tails_.beta);
    return std::exp(-kKZ * x) * eval_u(x);
}

std::vector<Window> Spectrum::features() const {
    if (pure_ || feat_lo_ >= feat_hi_) return {};
    return {Window{grid_.omega(feat_lo_), grid_.omega(feat_hi_)}};
}

std::vector<double> Spectrum::kinks() const {
    std::vector<double> k;
    if (pure_) return k;
    if (feat_lo_ > feat_hi_) {
        k.push_back(grid_.omega(feat_hi_));
        return k;
    }
    if (interp_ == Interpolation::linear) {
        for (int i = feat_lo_; i <= feat_hi_; ++i) k.push_back(grid_.omega(i));
    } else {
        k.push_back(grid_.omega(feat_lo_));
        k.push_back(grid_.omega(feat_hi_));
    }
    return k;
}

Eigen::VectorXd Spectrum::values() const {
    return (grid_.xs().array() * -kKZ).exp() * u_.array();
}

Spectrum power_law(double c, double mu, const LogGrid& grid) {
    Eigen::VectorXd u(grid.size());
    for (int i = 0; i < grid.size(); ++i) u[i] = c * std::exp((kKZ - mu) * grid.x(i));
    return Spectrum(grid, u, TailModel{c, mu, c, mu});
}

double eval(const SpectralFunction& s, double omega) { return s(omega); }

namespace {

// |c| sup_{a<w<b} w^gamma, b may be infinite. Sets divergent when unbounded.
double sup_power(double c, double gamma, double a, double b, bool& divergent) {
    if (c == 0.0 || !(a < b)) return 0.0;
    if (gamma > 0.0) {
        if (std::isinf(b)) {
            divergent = true;
            return std::numeric_limits<double>::infinity();
        }
        return std::abs(c) * std::pow(b, gamma);
    }
    if (gamma < 0.0) {
        if (a <= 0.0) {
            divergent = true;
            return std::numeric_limits<double>::infinity();
        }
        return std::abs(c) * std::pow(a, gamma);
    }
    return std::abs(c);
}

} // namespace

WeightedNorm weighted_norm(const Spectrum& s, const WeightedNormSpec& spec) {
    WeightedNorm out;
    const auto& g = s.grid();
    const auto t = s.tails();
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double w = g.omega(i);
        const double f = std::abs(std::pow(w, -kKZ) * s.u()[i]);
        if (w <= 1.0) lo = std::max(lo, std::pow(w, spec.alpha) * f);
        else hi = std::max(hi, std::pow(w, spec.beta) * f);
    }
    const double w0 = g.omega(0), w1 = g.omega(g.size() - 1);
    const double inf = std::numeric_limits<double>::infinity();
    bool div = false;
    lo = std::max(lo, sup_power(t.c0, spec.alpha - t.alpha, 0.0, std::min(w0, 1.0), div));
    hi = std::max(hi, sup_power(t.c0, spec.beta - t.alpha, 1.0, w0, div));
    lo = std::max(lo, sup_power(t.c_inf, spec.alpha - t.beta, w1, 1.0, div));
    hi = std::max(hi, sup_power(t.c_inf, spec.beta - t.beta, std::max(w1, 1.0), inf, div));
    out.divergent = div;
    out.value = div ? inf : lo + hi;
    return out;
}

TailFit fit_tails(const Spectrum& s, double window_fraction) {
    const auto& g = s.grid();
    const int n = g.size();
    if (!(window_fraction > 0.0 && window_fraction <= 0.5))
        throw InvalidRange("fit_tails: window fraction must lie in (0, 0.5]");
    const int k = std::max(3, static_cast<int>(std::lround(window_fraction * n)));
    if (2 * k > n) throw InvalidRange("fit_tails: grid too small for the requested fraction");
    const Eigen::VectorXd f = s.values();

    auto fit = [&](int first, double& c, double& expo, double& resid) {
        Eigen::MatrixXd a(k, 2);
        Eigen::VectorXd b(k);
        for (int j = 0; j < k; ++j) {
            const int i = first + j;
            if (!(f[i] > 0.0)) throw NonpositiveSpectrum("fit_tails: nonpositive value in fit window");
            a(j, 0) = 1.0;
            a(j, 1) = g.x(i);
            b[j] = std::log(f[i]);
        }
        const Eigen::Vector2d p = a.colPivHouseholderQr().solve(b);
        c = std::exp(p[0]);
        expo = -p[1];
        resid = std::sqrt((a * p - b).squaredNorm() / k);
    };

    TailFit out;
    fit(0, out.model.c0, out.model.alpha, out.residual_low);
    fit(n - k, out.model.c_inf, out.model.beta, out.residual_high);
    out.ill_conditioned = out.residual_low > 1e-3 || out.residual_high > 1e-3;
    return out;
}

Spectrum rescale(const Spectrum& s, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidRange("rescale: lambda must be positive");
    const double l = std::log(lambda);
    Eigen::VectorXd u = s.u() * std::pow(lambda, -kKZ);
    TailModel t = s.tails();
    t.c0 *= std::pow(lambda, -t.alpha);
    t.c_inf *= std::pow(lambda, -t.beta);
    return Spectrum(s.grid().shifted(-l), u, t, s.interpolation());
}

Spectrum sample(const LogGrid& grid, const std::function<double(double)>& f, double alpha,
                double beta, Interpolation interp) {
    Eigen::VectorXd u(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double w = grid.omega(i);
        u[i] = std::pow(w, kKZ) * f(w);
    }
    return Spectrum::with_matched_tails(grid, u, alpha, beta, interp);
}

} // namespace kwe
