#include "kwe/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "kwe/collision.hpp"
#include "regions.hpp"

namespace kwe {

namespace {

const Spectrum& kz_spectrum() {
    static const Spectrum s = power_law(1.0, kKZ, make_log_grid(-1.0, 1.0, 3));
    return s;
}

} // namespace

double linearized_apply(const SpectralFunction& g, double omega, const QuadratureConfig& q) {
    const Spectrum& f = kz_spectrum();
    return -3.0 * collision_sym(f, f, g, omega, q);
}

Spectrum basis_function(const LogGrid& grid, int j, BasisEnds ends) {
    const int n = grid.size();
    if (j < 0 || j >= n) throw InvalidRange("basis_function: index out of range");
    if (n < 2) throw InvalidRange("basis_function: grid needs two nodes");
    const bool ext_lo = ends == BasisEnds::extend && j == 0;
    const bool ext_hi = ends == BasisEnds::extend && j == n - 1;
    // Local grid over the support of the hat.
    const int a = std::max(j - 1, 0), b = std::min(j + 1, n - 1);
    const LogGrid local(grid.x(a), grid.x(b), b - a + 1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(b - a + 1);
    u[j - a] = 1.0;
    TailModel t{ext_lo ? 1.0 : 0.0, kKZ, ext_hi ? 1.0 : 0.0, kKZ};
    return Spectrum(local, u, t, Interpolation::linear);
}

namespace {

// k(d) = e^{3dh/2} (L hat)(e^{dh}) for the hat of half-width h centered at 0,
// cached per (h, quadrature) and extended on demand.
struct HatKernel {
    int lo = 0;
    std::vector<double> v; // v[d - lo]
};

double hat_kernel_value(double h, int d, const QuadratureConfig& q) {
    const Spectrum hat(LogGrid(-h, h, 3), Eigen::Vector3d(0.0, 1.0, 0.0),
                       TailModel{0.0, kKZ, 0.0, kKZ}, Interpolation::linear);
    const double x = d * h;
    return std::exp(1.5 * x) * linearized_apply(hat, std::exp(x), q);
}

std::vector<double> hat_kernel(double h, int dlo, int dhi, const QuadratureConfig& q) {
    static std::mutex mu;
    static std::map<std::tuple<double, int, int, int, double, double>, HatKernel> cache;
    const auto key = std::make_tuple(h, q.panels_per_decade, q.gauss_order, q.refinement_levels,
                                     q.omega_cut_low, q.omega_cut_high);
    std::lock_guard<std::mutex> lock(mu);
    HatKernel& k = cache[key];
    if (k.v.empty()) {
        k.lo = dlo;
        for (int d = dlo; d <= dhi; ++d) k.v.push_back(hat_kernel_value(h, d, q));
    }
    while (k.lo > dlo) {
        k.v.insert(k.v.begin(), hat_kernel_value(h, k.lo - 1, q));
        --k.lo;
    }
    while (k.lo + static_cast<int>(k.v.size()) - 1 < dhi)
        k.v.push_back(hat_kernel_value(h, k.lo + static_cast<int>(k.v.size()), q));
    return std::vector<double>(k.v.begin() + (dlo - k.lo), k.v.begin() + (dhi - k.lo) + 1);
}

} // namespace

Eigen::MatrixXd assemble_matrix(const LogGrid& grid, const QuadratureConfig& q, BasisEnds ends) {
    const int n = grid.size();
    if (n < 3) throw InvalidRange("assemble_matrix: grid needs three nodes");
    const double h = grid.spacing();
    // Kernel decays like e^{-4|x|/3} for sources above omega: 20 e-folds of
    // extra range make the end-column sums exact to rounding.
    const int extra = ends == BasisEnds::extend ? static_cast<int>(std::ceil(20.0 / h)) : 0;
    const int dlo = -(n - 1) - extra;
    const std::vector<double> kd = hat_kernel(h, dlo, n - 1, q);
    auto k = [&](int d) { return kd[d - dlo]; };
    Eigen::MatrixXd A(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) A(i, j) = k(i - j);
    if (ends == BasisEnds::extend) {
        // Column 0 is sum_{d >= i} k(d) = -sum_{d < i} k(d) since the hats sum
        // to the KZ spectrum, which L annihilates. Column n-1 is sum_{d <= i-n+1}.
        CompensatedSum<double> left;
        for (int d = dlo; d < -(n - 1); ++d) left.add(k(d));
        CompensatedSum<double> run;
        for (int d = dlo; d < 0; ++d) run.add(k(d));
        for (int i = 0; i < n; ++i) {
            A(i, 0) = -run.value();
            run.add(k(i));
        }
        CompensatedSum<double> tail = left;
        for (int i = 0; i < n; ++i) {
            tail.add(k(i - (n - 1)));
            A(i, n - 1) = tail.value();
        }
    }
    return A;
}

namespace {

double kzf(double w) { return std::pow(w, -kKZ); }

} // namespace

// k = k2 + 2 k3 at r = 1 + dr, with f = w^{-7/6} and f(1) = 1:
// k2: w2 = r on the line w3 + w4 = 1 + r, bracket f3 f4 - (f3 + f4);
// k3: w3 = r, w2 = r + w4 - 1, bracket (1 + f2) f4 - f2.
namespace {

// r and dr = r - 1 are both passed so neither is formed by cancellation.
double kernel_rd(double r, double dr, const QuadratureConfig& q) {
    if (!(r > 0.0) || dr == 0.0 || !std::isfinite(r))
        throw DomainError("symbol_kernel: r must be positive and != 1");
    thread_local Rule rule;
    // k2 over w3 < w4, doubled.
    CompensatedSum<double> k2;
    {
        const double hi = 0.5 * (1.0 + r);
        FeatureSet fs;
        fs.add_point(r);
        fs.add_point(1.0);
        build_rule({0.0, hi, Grade::singular, Grade::mild, std::min({1.0, r, hi})}, fs, q, rule);
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double w3 = rule.x[i];
            const double w4 = (1.0 - w3) + r;
            const double f3 = kzf(w3), f4 = kzf(w4);
            const double W = std::sqrt(std::min({1.0, r, w3}));
            k2.add(rule.w[i] * W * (f3 * f4 - (f3 + f4)));
        }
    }
    CompensatedSum<double> k3;
    {
        const double gap = std::abs(dr);
        FeatureSet fs;
        fs.add_point(r);
        fs.add_point(1.0);
        if (dr > 0.0) fs.add_point(1.0 - dr);
        RuleRequest req{0.0, detail::kInf, Grade::singular, Grade::mild, std::min(gap, 1.0)};
        req.far_scale = std::max(1.0, r);
        build_rule(req, fs, q, rule);
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double s = rule.x[i];
            // dr < 0: s = w2, w4 = s + |dr|. dr > 0: s = w4, w2 = s + dr.
            const double w2 = dr < 0.0 ? s : s + dr;
            const double w4 = dr < 0.0 ? s + gap : s;
            const double f2 = kzf(w2), f4 = kzf(w4);
            const double W = std::sqrt(std::min({1.0, w2, r, w4}));
            k3.add(rule.w[i] * W * ((1.0 + f2) * f4 - f2));
        }
    }
    return 2.0 * k2.value() + 2.0 * k3.value();
}

} // namespace

double symbol_kernel(double r, const QuadratureConfig& q) { return kernel_rd(r, r - 1.0, q); }
double symbol_kernel_offset(double dr, const QuadratureConfig& q) {
    return kernel_rd(1.0 + dr, dr, q);
}

double symbol_multiplier(const QuadratureConfig& q) {
    auto v = detail::ordered_regions<1>(1.0, FeatureSet{}, q, [](double w2, double w3, double w4) {
        const double f2 = kzf(w2), f3 = kzf(w3), f4 = kzf(w4);
        return std::array<double, 1>{f2 * (f3 + f4) - f3 * f4};
    });
    // Ordered domain is half of the full one.
    return 2.0 * (v[0][0] + v[1][0] + v[2][0]);
}

namespace {

constexpr double kTailLo = 46.0; // r down to e^{-46}
constexpr double kTailHi = 18.5; // r up to e^{18.5}, where k ~ r^{-7/6} is below 1e-9
constexpr double kStep = 0.025;  // resolves r^{-i tau} up to |tau| ~ 150

struct KernelNodes {
    std::vector<double> t, w, k; // t = ln r
    double k_lo = 0.0, k_hi = 0.0;
    double a = 0.0;
};

// The integrand of a behaves like w^{-5/6} where two frequencies vanish
// together, so the cutoff error is cut^{1/6}: 1e-60 keeps it below 1e-9.
QuadratureConfig deep_config(const QuadratureConfig& q, double cut) {
    QuadratureConfig d = q;
    d.gauss_order = std::max(q.gauss_order, 16);
    d.refinement_levels = static_cast<int>(std::ceil(q.refinement_levels * std::log(cut) /
                                                     std::log(q.omega_cut_low)));
    d.omega_cut_low = cut;
    return d;
}

KernelNodes build_nodes(const QuadratureConfig& q) {
    const QuadratureConfig qk = deep_config(q, 1e-40);
    KernelNodes kn;
    kn.a = symbol_multiplier(deep_config(q, 1e-60));
    const GaussRule& g = gauss_legendre(8);
    // Panels in |t|: geometric toward 0 (k ~ |1 - r|^{-5/6}), then uniform.
    auto side = [&](double sign, double len) {
        std::vector<double> pts;
        for (double s = kStep; s > 1e-60; s *= q.grading_ratio()) pts.push_back(s);
        std::reverse(pts.begin(), pts.end());
        const int m = static_cast<int>(std::ceil((len - kStep) / kStep));
        for (int i = 1; i <= m; ++i) pts.push_back(kStep + (len - kStep) * i / m);
        for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
            const double c = 0.5 * (pts[p] + pts[p + 1]), h = 0.5 * (pts[p + 1] - pts[p]);
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double at = c + h * g.x[i];
                const double t = sign * at;
                kn.t.push_back(t);
                kn.w.push_back(h * g.w[i]);
                kn.k.push_back(kernel_rd(std::exp(t), std::expm1(t), qk));
            }
        }
    };
    side(-1.0, kTailLo);
    side(1.0, kTailHi);
    kn.k_lo = symbol_kernel(std::exp(-kTailLo), qk);
    kn.k_hi = symbol_kernel(std::exp(kTailHi), qk);
    return kn;
}

const KernelNodes& kernel_nodes(const QuadratureConfig& q) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int, double, double>, KernelNodes> cache;
    const auto key = std::make_tuple(q.panels_per_decade, q.gauss_order, q.refinement_levels,
                                     q.omega_cut_low, q.omega_cut_high);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_nodes(q)).first;
    return it->second;
}

// a - int k r^{-z} dr over t in [-lo, hi] plus power-law tails
// k ~ r^{1/2} below and k ~ r^{-7/6} above.
std::complex<double> symbol_on(const KernelNodes& kn, std::complex<double> z, double lo, double hi,
                               const QuadratureConfig& q) {
    const std::complex<double> one_z = 1.0 - z;
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < kn.t.size(); ++i) {
        const double t = kn.t[i];
        if (t < -lo || t > hi) continue;
        s += kn.w[i] * kn.k[i] * std::exp(one_z * t);
    }
    const bool full = lo >= kTailLo && hi >= kTailHi;
    const QuadratureConfig qk = deep_config(q, 1e-40);
    const double klo = full ? kn.k_lo : symbol_kernel(std::exp(-lo), qk);
    const double khi = full ? kn.k_hi : symbol_kernel(std::exp(hi), qk);
    s += klo * std::exp(one_z * (-lo)) / (1.5 - z);
    s += khi * std::exp(one_z * hi) / (z + 1.0 / 6.0);
    return kn.a - s;
}

void check_line(double b) {
    if (!(b > 1.0 && b < 1.5)) throw InvalidRange("symbol: b must lie in (1, 3/2)");
}

} // namespace

SymbolSample symbol_sample(double b, double tau, const QuadratureConfig& q) {
    check_line(b);
    const KernelNodes& kn = kernel_nodes(q);
    const std::complex<double> z(b, tau);
    SymbolSample out;
    out.b = b;
    out.tau = tau;
    out.value = symbol_on(kn, z, kTailLo, kTailHi, q);
    const std::complex<double> half = symbol_on(kn, z, 0.5 * kTailLo, 0.5 * kTailHi, q);
    out.window_change = std::abs(out.value - half) / std::max(std::abs(out.value), kn.a * 1e-3);
    return out;
}

std::complex<double> symbol(double b, double tau, const QuadratureConfig& q) {
    check_line(b);
    return symbol_on(kernel_nodes(q), std::complex<double>(b, tau), kTailLo, kTailHi, q);
}

int spectral_winding_box(double b_lo, double b_hi, double tau_max, int samples,
                         const QuadratureConfig& q) {
    if (!(b_lo < b_hi) || !(tau_max > 0.0) || samples < 2)
        throw InvalidRange("spectral_winding: need b_lo < b_hi, tau_max > 0, samples >= 2");
    check_line(b_lo);
    check_line(b_hi);
    const KernelNodes& kn = kernel_nodes(q);
    // Counterclockwise in the (b, tau) plane.
    const std::complex<double> corners[5] = {{b_lo, -tau_max}, {b_hi, -tau_max}, {b_hi, tau_max},
                                             {b_lo, tau_max}, {b_lo, -tau_max}};
    double total = 0.0;
    std::complex<double> prev = symbol_on(kn, corners[0], kTailLo, kTailHi, q);
    if (prev == 0.0) throw AmbiguousWinding("spectral_winding: symbol vanishes on the contour");
    for (int side = 0; side < 4; ++side) {
        for (int i = 1; i <= samples; ++i) {
            const std::complex<double> z =
                corners[side] + (corners[side + 1] - corners[side]) * (double(i) / samples);
            const std::complex<double> m = symbol_on(kn, z, kTailLo, kTailHi, q);
            const double step = std::arg(m / prev);
            if (std::abs(step) > 0.5 * M_PI)
                throw AmbiguousWinding("spectral_winding: phase step exceeds pi/2, increase samples");
            total += step;
            prev = m;
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

int spectral_winding(double d1, double d2, double tau_max, int samples, const QuadratureConfig& q) {
    if (!(d1 > 0.0 && d1 < 1.0 / 6.0 && d2 > 0.0 && d2 < 1.0 / 6.0))
        throw InvalidRange("spectral_winding: need 0 < d1, d2 < 1/6");
    return spectral_winding_box(kKZ - d1, kKZ + d2, tau_max, samples, q);
}

double chi(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

Eigen::VectorXd g0_direction(const LogGrid& grid) {
    Eigen::VectorXd u(grid.size());
    for (int i = 0; i < grid.size(); ++i) u[i] = chi(grid.x(i));
    return u;
}

LinearizedSystem assemble_system(const LogGrid& grid, const QuadratureConfig& q) {
    LinearizedSystem sys;
    sys.grid = grid;
    sys.extended = assemble_matrix(grid, q, BasisEnds::extend);
    return sys;
}

AugmentedSolution solve_augmented(const Spectrum& psi, const LogGrid& grid, const QuadratureConfig& q) {
    return solve_augmented(psi, assemble_system(grid, q));
}

AugmentedSolution solve_augmented(const Spectrum& psi, const LinearizedSystem& sys) {
    const LogGrid& grid = sys.grid;
    const int n = grid.size();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) rhs[i] = std::pow(grid.omega(i), 1.5) * psi(grid.omega(i));
    return solve_augmented_rhs(rhs.head(n), sys);
}

AugmentedSolution solve_augmented_rhs(const Eigen::VectorXd& rhs_n, const LinearizedSystem& sys) {
    const LogGrid& grid = sys.grid;
    const int n = grid.size();
    if (sys.extended.rows() != n || rhs_n.size() != n)
        throw InvalidRange("solve_augmented: system does not match grid");
    if (grid.x(0) > -1.0 || grid.x(n - 1) < 1.0 + std::log(10.0))
        throw WindowTooSmall("solve_augmented: window must cover [-1, 1 + ln 10]");
    // Unknowns u_1..u_{n-1} on the extended basis with u_0 = 0, so u vanishes
    // below the window and the last column carries the constant tail c.
    const Eigen::MatrixXd B = sys.extended.rightCols(n - 1);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    qr.setThreshold(1e-12);
    if (qr.rank() < n - 1) throw RankDeficient("solve_augmented: system is singular");
    const Eigen::VectorXd sol = qr.solve(rhs_n);

    AugmentedSolution out;
    out.c = sol[n - 2];
    Eigen::VectorXd hu = Eigen::VectorXd::Zero(n);
    hu.tail(n - 1) = sol;
    hu -= out.c * g0_direction(grid);
    hu[n - 1] = 0.0;
    out.H = Spectrum(grid, hu, TailModel{0.0, kKZ, 0.0, kKZ});
    const double scale = rhs_n.cwiseAbs().maxCoeff();
    out.residual = (B * sol - rhs_n).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
    return out;
}

} // namespace kwe
