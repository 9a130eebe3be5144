#include "kwe/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "kwe/collision.hpp"
#include "kwe/fluxes.hpp"

namespace kwe {

namespace {

const Spectrum& kz() {
    static const Spectrum s = power_law(1.0, kKZ, make_log_grid(-1.0, 1.0, 3));
    return s;
}

// sup_{x<0} e^{-delta x} |h| + sup_{x>0} e^{delta x} |h| over the nodes.
double weighted_sup(const LogGrid& grid, const Eigen::VectorXd& h, double delta) {
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const double v = std::exp(delta * std::abs(x)) * std::abs(h[i]);
        (x < 0.0 ? lo : hi) = std::max(x < 0.0 ? lo : hi, v);
    }
    return lo + hi;
}

Spectrum scaled(const Spectrum& s, double k) {
    TailModel t = s.tails();
    t.c0 *= k;
    t.c_inf *= k;
    return Spectrum(s.grid(), k * s.u(), t, s.interpolation());
}

Spectrum h_spectrum(const LogGrid& grid, const Eigen::VectorXd& h) {
    return Spectrum(grid, h, TailModel{0.0, kKZ, 0.0, kKZ});
}

// int_0^omega w^{3/2} phi dw as int e^{5x/2} phi(e^x) dx, cellwise on the grid
// of phi plus the analytic lower tail.
double energy_input(const Spectrum& phi, double omega) {
    const LogGrid& g = phi.grid();
    const TailModel t = phi.tails();
    const double x_end = std::log(omega);
    double total = 0.0;
    if (t.c0 != 0.0) {
        const double p = 2.5 - t.alpha;
        if (p <= 0.0) throw DomainError("energy_input: forcing tail not integrable at 0");
        total += t.c0 * std::exp(p * std::min(x_end, g.x_min())) / p;
    }
    const GaussRule& gl = gauss_legendre(8);
    for (int i = 0; i + 1 < g.size(); ++i) {
        const double a = g.x(i), b = std::min(g.x(i + 1), x_end);
        if (b <= a) break;
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[k];
            total += 0.5 * (b - a) * gl.w[k] * std::exp(2.5 * x) * phi(std::exp(x));
        }
    }
    if (x_end > g.x_max() && t.c_inf != 0.0) {
        const double p = 2.5 - t.beta;
        if (p == 0.0) total += t.c_inf * (x_end - g.x_max());
        else total += t.c_inf * (std::exp(p * x_end) - std::exp(p * g.x_max())) / p;
    }
    return total;
}

} // namespace

AnalyticSpectrum g0_spectrum() {
    return AnalyticSpectrum([](double w) { return chi(std::log(w)) * std::pow(w, -kKZ); },
                            TailModel{0.0, kKZ, 1.0, kKZ}, {Window{1.0, std::exp(1.0)}});
}

double NonlinearTerms::combine(double c) const {
    CompensatedSum<double> s;
    s.add(c * c * q_g0);
    s.add(q_h);
    s.add(2.0 * c * q_g0h);
    s.add(c * c * c * c_g0);
    s.add(c_h);
    s.add(3.0 * c * c * c_g0g0h);
    s.add(3.0 * c * c_g0hh);
    return s.value();
}

NonlinearTerms nonlinear_terms(const SpectralFunction& H, double omega, const QuadratureConfig& q) {
    static const AnalyticSpectrum g0 = g0_spectrum();
    // Arguments: 0 = KZ, 1 = G0, 2 = H.
    const auto v = collision_sym_terms({&kz(), &g0, &H},
                                       {{{0, 1, 1}}, {{0, 2, 2}}, {{0, 1, 2}}, {{1, 1, 1}},
                                        {{2, 2, 2}}, {{1, 1, 2}}, {{1, 2, 2}}},
                                       omega, q);
    NonlinearTerms t;
    t.q_g0 = 3.0 * v[0];
    t.q_h = 3.0 * v[1];
    t.q_g0h = 3.0 * v[2];
    t.c_g0 = v[3];
    t.c_h = v[4];
    t.c_g0g0h = v[5];
    t.c_g0hh = v[6];
    return t;
}

Spectrum nonlinear_rhs(double c, const Spectrum& H, const QuadratureConfig& q, int stride) {
    if (stride < 1) throw InvalidRange("nonlinear_rhs: stride must be >= 1");
    const LogGrid& grid = H.grid();
    const int n = grid.size();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    if (c != 0.0 || H.u().cwiseAbs().maxCoeff() > 0.0) {
        std::vector<int> nodes;
        for (int i = 0; i < n; i += stride) nodes.push_back(i);
        if (nodes.back() != n - 1) nodes.push_back(n - 1);
        for (int i : nodes) {
            const double w = grid.omega(i);
            u[i] = std::pow(w, kKZ) * nonlinear_terms(H, w, q).combine(c);
        }
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            const int a = nodes[k], b = nodes[k + 1];
            for (int i = a + 1; i < b; ++i) {
                const double s = double(i - a) / double(b - a);
                u[i] = (1.0 - s) * u[a] + s * u[b];
            }
        }
    }
    return Spectrum::with_matched_tails(grid, u, 1.5, 1.5, Interpolation::linear);
}

void validate(const ForcingSpec& spec) {
    if (!(spec.delta > 0.0 && spec.delta < 1.0 / 12.0))
        throw DomainError("forcing: delta must lie in (0, 1/12)");
    if (!(spec.j_m_inf > 0.0)) throw DomainError("forcing: j_m_inf must be positive");
    const WeightedNorm nrm = weighted_norm(spec.phi, {1.5 - spec.delta, 1.5 + spec.delta});
    if (nrm.divergent || nrm.value > spec.eps * spec.j_m_inf)
        throw DomainError("forcing: ||phi||_{3/2-delta,3/2+delta} exceeds eps j_m_inf");
}

SolverReport solve_stationary(const ForcingSpec& spec, const LogGrid& grid, const QuadratureConfig& q,
                              const SolverOptions& opt) {
    return solve_stationary(spec, assemble_system(grid, q), q, opt);
}

SolverReport solve_stationary(const ForcingSpec& spec, const LinearizedSystem& sys,
                              const QuadratureConfig& q, const SolverOptions& opt) {
    validate(spec);
    const LogGrid& grid = sys.grid;
    const int n = grid.size();
    SolverReport rep;
    rep.forcing_mass = moment(spec.phi, 0.5);
    rep.j_m_inf = spec.j_m_inf;
    rep.j_m_0 = spec.j_m_inf + rep.forcing_mass;
    if (!(rep.j_m_0 > 0.0)) throw DomainError("solve_stationary: j_M(0) must be positive");
    const double js = kz_constant(q);
    // f = mu f~ with -C(f~) = phi / mu^3 and j_M(0) = j_M* for f~.
    const double mu = std::cbrt(rep.j_m_0 / js);
    rep.amplitude = mu;

    Eigen::VectorXd rhs_phi(n);
    for (int i = 0; i < n; ++i) {
        const double w = grid.omega(i);
        rhs_phi[i] = std::pow(w, 1.5) * spec.phi(w) / (mu * mu * mu);
    }

    double c = 0.0;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    int stalls = 0;
    if (rhs_phi.cwiseAbs().maxCoeff() == 0.0) {
        rep.converged = true;
    } else {
        for (int it = 1; it <= opt.max_iterations; ++it) {
            const Spectrum N = nonlinear_rhs(c, h_spectrum(grid, h), q, opt.stride);
            Eigen::VectorXd rhs = rhs_phi;
            for (int i = 0; i < n; ++i) rhs[i] += std::pow(grid.omega(i), 1.5 - kKZ) * N.u()[i];
            const AugmentedSolution s = solve_augmented_rhs(rhs, sys);
            Eigen::VectorXd hn(n);
            for (int i = 0; i < n; ++i) hn[i] = s.H.u()[i];
            const double step = std::abs(s.c - c) + weighted_sup(grid, hn - h, spec.delta);
            c = s.c;
            h = hn;
            rep.iterations = it;
            if (!rep.contraction_history.empty()) {
                const double ratio = step / rep.contraction_history.back();
                rep.contraction_ratio = std::max(rep.contraction_ratio, ratio);
                stalls = ratio >= 1.0 ? stalls + 1 : 0;
            }
            rep.contraction_history.push_back(step);
            if (opt.on_iteration) opt.on_iteration(it, step, c);
            if (step <= opt.step_tol) {
                rep.converged = true;
                break;
            }
            if (stalls >= opt.stall_limit)
                throw NoContraction("solve_stationary: Picard steps stopped decreasing");
        }
    }
    rep.c = c;
    rep.H = h_spectrum(grid, h);

    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = mu * (1.0 + c * chi(grid.x(i)) + h[i]);
    u[0] = mu;
    u[n - 1] = mu * (1.0 + c);
    rep.f = Spectrum(grid, u, TailModel{mu, kKZ, mu * (1.0 + c), kKZ});
    rep.positivity_ok = u.minCoeff() >= 0.0 && mu > 0.0 && 1.0 + c >= 0.0;

    // Residual probes over the inner 80% of the window.
    const double xa = grid.x_min() + 0.1 * (grid.x_max() - grid.x_min());
    const double xb = grid.x_max() - 0.1 * (grid.x_max() - grid.x_min());
    for (int k = 0; k < opt.probes; ++k) {
        const double x = opt.probes > 1 ? xa + (xb - xa) * k / (opt.probes - 1) : 0.5 * (xa + xb);
        const double w = std::exp(x);
        const CollisionSplit cs = collision(rep.f, w, q);
        const double r = std::abs(cs.total + spec.phi(w)) / cs.positive_part;
        rep.probe_omega.push_back(w);
        rep.probe_residual.push_back(r);
        rep.residual_sup = std::max(rep.residual_sup, r);
    }

    const FluxProfile prof = cascade_report(rep.f, spec.phi, q, opt.flux_stride);
    rep.jm_limit_0 = prof.jm_limit_0;
    rep.jm_limit_inf = prof.jm_limit_inf;
    const double m = rep.forcing_mass;
    const double dm = std::abs(rep.jm_limit_0 - rep.jm_limit_inf + m);
    rep.mass_balance_defect = m != 0.0 ? dm / std::abs(m) : dm;

    // J_E(f)(w) = int_0^w v^{3/2} phi(v) dv at probes spanning the middle third.
    const double e_total = energy_input(spec.phi, std::exp(grid.x_max()));
    for (int k = 0; k < opt.energy_probes; ++k) {
        const double x = grid.x_min() / 3.0 +
                         (grid.x_max() - grid.x_min()) / 3.0 * k / std::max(1, opt.energy_probes - 1);
        const double w = std::exp(x);
        const double d = std::abs(flux_energy(rep.f, w, q) - energy_input(spec.phi, w));
        rep.energy_flux_defect = std::max(rep.energy_flux_defect, e_total != 0.0 ? d / std::abs(e_total) : d);
    }

    const TailFit tf = fit_tails(rep.f, 0.1);
    if (tf.ill_conditioned) throw WindowTooSmall("solve_stationary: tail fit failed");
    rep.tail_c0 = tf.model.c0;
    rep.tail_alpha = tf.model.alpha;
    rep.tail_cinf = tf.model.c_inf;
    rep.tail_beta = tf.model.beta;
    return rep;
}

C1Fit fit_c1(const std::vector<double>& eps, const std::vector<double>& c) {
    if (eps.empty() || eps.size() != c.size()) throw InvalidRange("fit_c1: need matching nonempty samples");
    C1Fit fit;
    fit.eps = eps;
    fit.c = c;
    if (eps.size() == 1) {
        fit.c1 = c[0] / eps[0];
        return fit;
    }
    Eigen::MatrixXd A(eps.size(), 2);
    Eigen::VectorXd b(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        A(i, 0) = eps[i];
        A(i, 1) = eps[i] * eps[i];
        b[i] = c[i];
    }
    const Eigen::Vector2d s = A.colPivHouseholderQr().solve(b);
    fit.c1 = s[0];
    fit.c2 = s[1];
    return fit;
}

C1Fit extract_c1(const Spectrum& bump, const std::vector<double>& eps_values, const LogGrid& grid,
                 const QuadratureConfig& q, const SolverOptions& opt) {
    if (std::abs(moment(bump, 0.5) - 1.0) > 1e-6) throw DomainError("extract_c1: bump must have unit mass");
    const double js = kz_constant(q);
    const LinearizedSystem sys = assemble_system(grid, q);
    std::vector<double> cs;
    for (double e : eps_values) {
        if (!(e > 0.0)) throw DomainError("extract_c1: eps must be positive");
        ForcingSpec spec;
        spec.phi = scaled(bump, e);
        spec.eps = e;
        spec.j_m_inf = js - e;
        // Smallness is measured against j_M(inf) with the bump's own norm.
        const WeightedNorm nb = weighted_norm(bump, {1.5 - spec.delta, 1.5 + spec.delta});
        spec.eps = std::max(e, e * nb.value / spec.j_m_inf);
        cs.push_back(solve_stationary(spec, sys, q, opt).c);
    }
    return fit_c1(eps_values, cs);
}

} // namespace kwe
