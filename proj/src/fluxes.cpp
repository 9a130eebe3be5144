#include "kwe/fluxes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "kwe/collision.hpp"

namespace kwe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_a^b c s^{-mu} ds for 0 < a < b.
double power_integral(double c, double mu, double a, double b) {
    if (c == 0.0 || !(b > a)) return 0.0;
    if (std::abs(mu - 1.0) < 1e-14) return c * std::log(b / a);
    return c * (std::pow(b, 1.0 - mu) - std::pow(a, 1.0 - mu)) / (1.0 - mu);
}

} // namespace

TailIntegral::TailIntegral(const Spectrum& f, const QuadratureConfig& q)
    : f_(&f), t_(f.tails()), order_(q.gauss_order) {
    const auto w = f.features();
    if (w.empty()) {
        pure_ = true;
        return;
    }
    lo_ = w.front().lo;
    hi_ = w.front().hi;
    const double h = f.grid().spacing();
    const int cells = std::max(1, static_cast<int>(std::lround(std::log(hi_ / lo_) / h)));
    nodes_.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) nodes_[i] = lo_ * std::exp(std::log(hi_ / lo_) * i / cells);
    nodes_.back() = hi_;
    cum_.assign(cells + 1, 0.0);
    for (int i = cells - 1; i >= 0; --i) cum_[i] = cum_[i + 1] + cell(nodes_[i], nodes_[i + 1]);
}

double TailIntegral::cell(double a, double b) const {
    // Gauss-Legendre in log omega.
    const GaussRule& g = gauss_legendre(order_);
    const double la = std::log(a), lb = std::log(b);
    const double c = 0.5 * (la + lb), hh = 0.5 * (lb - la);
    double s = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
        const double w = std::exp(c + hh * g.x[k]);
        s += g.w[k] * (*f_)(w)*w;
    }
    return hh * s;
}

double TailIntegral::above(double y) const {
    if (t_.c_inf == 0.0) return 0.0;
    if (!(t_.beta > 1.0)) throw LocalityViolation("tail integral diverges (beta <= 1)");
    return t_.c_inf * std::pow(y, 1.0 - t_.beta) / (t_.beta - 1.0);
}

double TailIntegral::below(double y) const { return power_integral(t_.c0, t_.alpha, y, lo_); }

double TailIntegral::operator()(double y) const {
    if (pure_) return above(y); // single power law on the half-line
    if (y >= hi_) return above(y);
    if (y <= lo_) return below(y) + cum_[0] + above(hi_);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    return cell(y, nodes_[i]) + cum_[i] + above(hi_);
}

namespace {

struct FluxAcc {
    CompensatedSum<double> j1, j2, j3, j4, jm;
    void add(double w, double c1, double c2, double c3, double c4, double m) {
        j1.add(w * c1);
        j2.add(w * c2);
        j3.add(w * c3);
        j4.add(w * c4);
        jm.add(w * m);
    }
};

} // namespace

// With a, b the two frequencies entering the min of W and y = omega - a + b:
// J_M = int_0^omega da int_0^inf db min(sqrt a, sqrt b)
//       { [f(a) - f(b)] K(y) + f(a) f(b) [T(y) - T(omega)] },
// K(y) = int_0^inf f(omega + t) f(y + t) dt, T(y) = int_y^inf f.
// J1, J4 are the f(a) K and f(b) K parts, J2, J3 the T(y) and T(omega) parts.
FluxComponents flux_components(const Spectrum& f, double omega, const QuadratureConfig& q) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("flux evaluated at omega <= 0");
    q.validate();
    check_locality(f);
    FluxComponents out;
    const TailModel tm = f.tails();
    if (tm.c0 == 0.0 && tm.c_inf == 0.0 && f.u().cwiseAbs().maxCoeff() == 0.0) return out;

    FeatureSet fs;
    fs.add(f);
    const TailIntegral T(f, q);
    const double t_omega = T(omega);

    Rule rk, rin;
    auto kernel_k = [&](double y) {
        FeatureSet fk = fs.shifted(-omega);
        fk.merge(fs.shifted(-y));
        RuleRequest r{0.0, kInf, Grade::singular, Grade::mild, std::min(y, omega)};
        r.lo_floor = 0.01 * std::min(y, omega);
        r.truncate_lo = false;
        r.far_scale = std::max(y, omega);
        build_rule(r, fk, q, rk);
        CompensatedSum<double> s;
        for (std::size_t i = 0; i < rk.x.size(); ++i) {
            const double t = rk.x[i];
            s.add(rk.w[i] * f(omega + t) * f(y + t));
        }
        return s.value();
    };

    FluxAcc acc;
    // Region y < omega: d = omega - y, b in (0, y), a = b + d, min is sqrt b.
    auto region_low = [&](double y, double d, double wy) {
        const double k = kernel_k(y);
        const double dt = T(y) - t_omega;
        FeatureSet fi = fs;
        fi.merge(fs.shifted(-d));
        build_rule({0.0, y, Grade::singular, Grade::mild, y}, fi, q, rin);
        FluxAcc in;
        for (std::size_t j = 0; j < rin.x.size(); ++j) {
            const double b = rin.x[j];
            const double a = b + d;
            const double fa = f(a), fb = f(b);
            const double m = std::sqrt(b);
            const double fab = fa * fb;
            in.add(rin.w[j] * m, fa * k, fab * (t_omega + dt), fab * t_omega, fb * k,
                   (fa - fb) * k + fab * dt);
        }
        acc.add(wy, in.j1.value(), in.j2.value(), in.j3.value(), in.j4.value(), in.jm.value());
    };
    // Region y > omega: e = y - omega, a in (0, omega), b = a + e, min is sqrt a.
    auto region_high = [&](double e, double we) {
        const double y = omega + e;
        const double k = kernel_k(y);
        const double dt = T(y) - t_omega;
        FeatureSet fi = fs;
        fi.merge(fs.shifted(-e));
        build_rule({0.0, omega, Grade::singular, Grade::mild, omega}, fi, q, rin);
        FluxAcc in;
        for (std::size_t j = 0; j < rin.x.size(); ++j) {
            const double a = rin.x[j];
            const double b = a + e;
            const double fa = f(a), fb = f(b);
            const double m = std::sqrt(a);
            const double fab = fa * fb;
            in.add(rin.w[j] * m, fa * k, fab * (t_omega + dt), fab * t_omega, fb * k,
                   (fa - fb) * k + fab * dt);
        }
        acc.add(we, in.j1.value(), in.j2.value(), in.j3.value(), in.j4.value(), in.jm.value());
    };

    // y in (0, omega/2] directly, y in (omega/2, omega) through d = omega - y.
    // The inner integrals are non-smooth like d^{1/3} and e^{1/3}, so both
    // ends at y = omega are graded.
    {
        FeatureSet fo = fs;
        fo.merge(fs.mirrored(omega));
        const Rule ry = build_rule({0.0, 0.5 * omega, Grade::singular, Grade::mild, 0.5 * omega}, fo, q);
        for (std::size_t i = 0; i < ry.x.size(); ++i) region_low(ry.x[i], omega - ry.x[i], ry.w[i]);
        FeatureSet fd = fs.mirrored(omega);
        fd.merge(fs);
        const Rule rd = build_rule({0.0, 0.5 * omega, Grade::singular, Grade::mild, 0.5 * omega}, fd, q);
        for (std::size_t i = 0; i < rd.x.size(); ++i) region_low(omega - rd.x[i], rd.x[i], rd.w[i]);
    }
    {
        FeatureSet fe = fs.shifted(-omega);
        fe.merge(fs);
        const Rule re = build_rule({0.0, kInf, Grade::singular, Grade::mild, omega}, fe, q);
        for (std::size_t i = 0; i < re.x.size(); ++i) region_high(re.x[i], re.w[i]);
    }

    out.j1 = acc.j1.value();
    out.j2 = acc.j2.value();
    out.j3 = acc.j3.value();
    out.j4 = acc.j4.value();
    out.jm = acc.jm.value();
    return out;
}

double flux_component(int i, const Spectrum& f, double omega, const QuadratureConfig& q) {
    if (i < 1 || i > 4) throw InvalidRange("flux component index must be 1..4");
    const FluxComponents c = flux_components(f, omega, q);
    const double v[4] = {c.j1, c.j2, c.j3, c.j4};
    return v[i - 1];
}

double flux_mass(const Spectrum& f, double omega, const QuadratureConfig& q) {
    return flux_components(f, omega, q).jm;
}

QuadratureConfig high_resolution(const QuadratureConfig& q) {
    QuadratureConfig h = q;
    h.gauss_order = std::max(q.gauss_order + 4, 12);
    return h;
}

double kz_constant(const QuadratureConfig& q) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int, double, double>, double> cache;
    const auto key = std::make_tuple(q.panels_per_decade, q.gauss_order, q.refinement_levels,
                                     q.omega_cut_low, q.omega_cut_high);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const Spectrum kz = power_law(1.0, kKZ, make_log_grid(-1.0, 1.0, 3));
    const double j = -flux_mass(kz, 1.0, high_resolution(q));
    if (!(j > 0.0)) throw Error("kz_constant: nonpositive KZ flux, quadrature misconfigured");
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = j;
    return j;
}

double flux_energy(const Spectrum& f, double omega, const QuadratureConfig& q, double decades) {
    if (!(omega > 0.0)) throw DomainError("flux evaluated at omega <= 0");
    const double jw = flux_mass(f, omega, q);
    const double lo = omega * std::pow(10.0, -decades);
    const double j0 = flux_mass(f, lo, q);
    // int_0^omega J = j0 omega + int_lo^omega (J - j0), J ~ j0 below lo.
    const GaussRule& g = gauss_legendre(q.gauss_order);
    const int panels = static_cast<int>(std::ceil(decades));
    const double l0 = std::log(lo), l1 = std::log(omega);
    CompensatedSum<double> s;
    for (int p = 0; p < panels; ++p) {
        const double a = l0 + (l1 - l0) * p / panels, b = l0 + (l1 - l0) * (p + 1) / panels;
        const double c = 0.5 * (a + b), hh = 0.5 * (b - a);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            const double w = std::exp(c + hh * g.x[k]);
            s.add(hh * g.w[k] * w * (flux_mass(f, w, q) - j0));
        }
    }
    return omega * (jw - j0) - s.value();
}

double moment(const Spectrum& f, double p) {
    const auto& g = f.grid();
    const TailModel t = f.tails();
    const int n = g.size();
    const GaussRule& gr = gauss_legendre(8);
    CompensatedSum<double> s;
    for (int i = 0; i + 1 < n; ++i) {
        const double c = 0.5 * (g.x(i) + g.x(i + 1)), hh = 0.5 * g.spacing();
        for (std::size_t k = 0; k < gr.x.size(); ++k) {
            const double x = c + hh * gr.x[k];
            const double w = std::exp(x);
            s.add(hh * gr.w[k] * f(w) * std::pow(w, p + 1.0));
        }
    }
    const double w0 = g.omega(0), w1 = g.omega(n - 1);
    if (t.c0 != 0.0) {
        if (!(p - t.alpha > -1.0)) throw DomainError("moment diverges at small omega");
        s.add(t.c0 * std::pow(w0, p - t.alpha + 1.0) / (p - t.alpha + 1.0));
    }
    if (t.c_inf != 0.0) {
        if (!(p - t.beta < -1.0)) throw DomainError("moment diverges at large omega");
        s.add(-t.c_inf * std::pow(w1, p - t.beta + 1.0) / (p - t.beta + 1.0));
    }
    return s.value();
}

FluxProfile cascade_report(const Spectrum& f, const Spectrum& phi, const QuadratureConfig& q,
                           int stride) {
    if (stride < 1) throw InvalidRange("cascade_report: stride must be >= 1");
    FluxProfile out;
    const LogGrid& g = f.grid();
    const int n = g.size();
    out.grid = g;
    out.jm = Eigen::VectorXd::Zero(n);
    out.je = Eigen::VectorXd::Zero(n);
    std::vector<int> idx;
    for (int i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    for (int i : idx) out.jm[i] = flux_mass(f, g.omega(i), q);
    // Linear fill between evaluated nodes.
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const int a = idx[k], b = idx[k + 1];
        for (int i = a + 1; i < b; ++i)
            out.jm[i] = out.jm[a] + (out.jm[b] - out.jm[a]) * (i - a) / double(b - a);
    }

    // Limits: average over the outer decade at each end.
    const int dec = std::max(1, static_cast<int>(std::lround(std::log(10.0) / g.spacing())));
    const int m = std::min(dec, n / 2);
    out.jm_limit_0 = out.jm.head(m).mean();
    out.jm_limit_inf = out.jm.tail(m).mean();

    // J_E = omega (J - j0) - int_0^omega (J - j0), trapezoid in x with the
    // integrand (J - j0) omega; J = j0 assumed below the window.
    const double j0 = out.jm_limit_0;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i > 0) {
            const double a = (out.jm[i - 1] - j0) * g.omega(i - 1);
            const double b = (out.jm[i] - j0) * g.omega(i);
            integral += 0.5 * g.spacing() * (a + b);
        }
        out.je[i] = g.omega(i) * (out.jm[i] - j0) - integral;
    }

    out.forcing_mass = moment(phi, 0.5);
    const double js = kz_constant(q);
    const bool zero = f.u().cwiseAbs().maxCoeff() == 0.0;
    const TailModel tm = zero ? f.tails() : fit_tails(f, 0.05).model;
    out.compat_defect = std::abs(std::pow(tm.c0, 3) - std::pow(tm.c_inf, 3) - out.forcing_mass / js);
    return out;
}

} // namespace kwe
