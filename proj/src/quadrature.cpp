#include "kwe/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace kwe {

double QuadratureConfig::grading_ratio() const {
    return std::pow(omega_cut_low, 1.0 / refinement_levels);
}

void QuadratureConfig::validate() const {
    if (panels_per_decade < 1 || gauss_order < 2 || gauss_order > 64 || refinement_levels < 1)
        throw ConfigError("quadrature: panels_per_decade >= 1, 2 <= gauss_order <= 64, levels >= 1");
    if (!(omega_cut_low > 0.0 && omega_cut_low < 1.0) || !(omega_cut_high > 1.0))
        throw ConfigError("quadrature: need 0 < omega_cut_low < 1 < omega_cut_high");
    if (!(rel_tol > 0.0)) throw ConfigError("quadrature: rel_tol must be positive");
}

const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[order];
    if (!slot) {
        // Golub-Welsch: eigen-decomposition of the Jacobi matrix.
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
        for (int k = 1; k < order; ++k) {
            const double b = k / std::sqrt(4.0 * k * k - 1.0);
            j(k, k - 1) = b;
            j(k - 1, k) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
        auto r = std::make_unique<GaussRule>();
        r->x.resize(order);
        r->w.resize(order);
        for (int i = 0; i < order; ++i) {
            r->x[i] = es.eigenvalues()[i];
            const double v = es.eigenvectors()(0, i);
            r->w[i] = 2.0 * v * v;
        }
        // Symmetrize to remove eigen-solver noise.
        for (int i = 0; i < order / 2; ++i) {
            const int k = order - 1 - i;
            const double x = 0.5 * (r->x[k] - r->x[i]);
            const double w = 0.5 * (r->w[k] + r->w[i]);
            r->x[i] = -x;
            r->x[k] = x;
            r->w[i] = w;
            r->w[k] = w;
        }
        if (order % 2 == 1) r->x[order / 2] = 0.0;
        slot = std::move(r);
    }
    return *slot;
}

void FeatureSet::add(const SpectralFunction& f) {
    for (const auto& w : f.features()) add_window(w.lo, w.hi);
    for (double p : f.kinks()) add_point(p);
}

void FeatureSet::add_window(double a, double b) {
    if (b > a && b > 0.0) windows.push_back(Window{std::max(a, 0.0), b});
}

void FeatureSet::add_point(double p) {
    if (p > 0.0 && std::isfinite(p)) points.push_back(p);
}

FeatureSet FeatureSet::scaled(double factor, double shift) const {
    FeatureSet o;
    for (const auto& w : windows) {
        const double a = factor * w.lo + shift, b = factor * w.hi + shift;
        o.add_window(std::min(a, b), std::max(a, b));
    }
    for (double p : points) o.add_point(factor * p + shift);
    return o;
}

FeatureSet FeatureSet::shifted(double shift) const { return scaled(1.0, shift); }
FeatureSet FeatureSet::mirrored(double total) const { return scaled(-1.0, total); }

void FeatureSet::merge(const FeatureSet& o) {
    windows.insert(windows.end(), o.windows.begin(), o.windows.end());
    points.insert(points.end(), o.points.begin(), o.points.end());
}

namespace {

thread_local std::vector<double> tl_pts;

} // namespace

void build_rule(const RuleRequest& req, const FeatureSet& feats, const QuadratureConfig& q,
                Rule& out) {
    out.clear();
    auto& pts = tl_pts;
    pts.clear();
    const double r = q.grading_ratio();
    const double lo = req.lo;
    const bool inf_hi = std::isinf(req.hi);
    double hi = req.hi;
    double lo_eff = lo;

    if (inf_hi) {
        const double far = std::max(req.scale, req.far_scale) * q.omega_cut_high;
        hi = lo + far;
        for (double s = req.scale; s < far; s /= r) pts.push_back(lo + s);
    }
    if (!(hi > lo)) return;
    const double len = hi - lo;
    const double d_lo = inf_hi ? req.scale : std::min(req.scale, 0.5 * len);
    const double d_hi = std::min(req.scale, 0.5 * len);

    auto grade = [&](Grade g, double d, double floor_abs, double sign, double anchor) {
        if (g == Grade::none) return;
        if (g == Grade::mild) {
            pts.push_back(anchor + sign * d);
            pts.push_back(anchor + sign * 0.25 * d);
            pts.push_back(anchor + sign * 0.0625 * d);
            return;
        }
        const double stop = std::max(d * q.omega_cut_low, floor_abs);
        double s = d;
        for (int k = 0; k <= 4 * q.refinement_levels && s >= stop * (1.0 - 1e-12); ++k, s *= r)
            pts.push_back(anchor + sign * s);
    };

    grade(req.grade_lo, d_lo, req.lo_floor, 1.0, lo);
    if (!inf_hi) grade(req.grade_hi, d_hi, req.hi_floor, -1.0, hi);

    if (lo == 0.0 && req.grade_lo == Grade::singular && req.truncate_lo) {
        // Truncate the singular end at the deepest grading point.
        double m = hi;
        for (double p : pts)
            if (p > 0.0) m = std::min(m, p);
        lo_eff = m;
    }
    pts.push_back(lo_eff);
    pts.push_back(hi);

    const double step = std::log(10.0) / q.panels_per_decade;
    const double grow = std::exp(step);
    for (const auto& w : feats.windows) {
        double a = std::max(w.lo, lo_eff), b = std::min(w.hi, hi);
        if (!(b > a)) continue;
        if (a <= 0.0) a = 1e-6 * b;
        for (double p = a; p < b; p *= grow) pts.push_back(p);
        pts.push_back(b);
    }
    for (double p : feats.points)
        if (p > lo_eff && p < hi) pts.push_back(p);

    std::sort(pts.begin(), pts.end());
    std::size_t m = 0;
    for (double p : pts) {
        if (p < lo_eff || p > hi) continue;
        if (m > 0 && p - pts[m - 1] <= 1e-14 * std::max(std::abs(p), 1e-300)) continue;
        pts[m++] = p;
    }
    pts.resize(m);
    if (m < 2) return;

    const GaussRule& g = gauss_legendre(q.gauss_order);
    const double cap = std::min(10.0, 1.0 / r);
    auto emit = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            out.x.push_back(c + h * g.x[i]);
            out.w.push_back(h * g.w[i]);
        }
    };
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (a > 0.0 && b / a > cap) {
            // Cap the panel ratio at the grading ratio.
            const int k = static_cast<int>(std::ceil(std::log(b / a) / std::log(cap)));
            const double f = std::pow(b / a, 1.0 / k);
            double p = a;
            for (int j = 0; j < k; ++j) {
                const double nx = (j + 1 == k) ? b : p * f;
                emit(p, nx);
                p = nx;
            }
        } else {
            emit(a, b);
        }
    }
}

Rule build_rule(const RuleRequest& req, const FeatureSet& feats, const QuadratureConfig& q) {
    Rule r;
    build_rule(req, feats, q, r);
    return r;
}

} // namespace kwe
