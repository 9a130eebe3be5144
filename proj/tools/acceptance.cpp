// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "kwe/cli_io.hpp"
#include "kwe/collision.hpp"
#include "kwe/errors.hpp"
#include "kwe/evolution.hpp"
#include "kwe/fluxes.hpp"
#include "kwe/linearized.hpp"
#include "kwe/stationary.hpp"
#include "oracles.hpp"

using namespace kwe;

namespace {

const QuadratureConfig q{};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Gauss-Legendre on [a, b] split into equal cells.
template <class F>
double gl(F&& fn, double a, double b, int cells) {
    const GaussRule& r = gauss_legendre(8);
    const double h = (b - a) / cells;
    double s = 0.0;
    for (int c = 0; c < cells; ++c)
        for (std::size_t k = 0; k < r.x.size(); ++k) s += 0.5 * h * r.w[k] * fn(a + h * (c + 0.5 * (r.x[k] + 1.0)));
    return s;
}

Spectrum kz_spectrum() { return power_law(1.0, kKZ, LogGrid(-6.0, 6.0, 121)); }

std::vector<double> flux_probes() {
    std::vector<double> w;
    for (int k = 0; k <= 8; ++k) w.push_back(std::pow(10.0, -1.0 + 0.25 * k));
    return w;
}

void kz_stationarity(Outcome& o) {
    const Spectrum kz = kz_spectrum();
    double worst = 0.0;
    for (double w : {1e-2, 1e-1, 1.0, 1e1, 1e2}) worst = std::max(worst, std::abs(collision(kz, w, q).normalized()));
    o.detail << "max normalized residual " << worst;
    o.require(worst <= 1e-5, "residual <= 1e-5");
}

void flux_constancy(Outcome& o) {
    const Spectrum kz = kz_spectrum();
    double jmax = 0.0, jmin = INFINITY;
    for (double w : flux_probes()) {
        const double j = -flux_mass(kz, w, q);
        jmax = std::max(jmax, j);
        jmin = std::min(jmin, j);
    }
    QuadratureConfig q2 = q;
    q2.panels_per_decade *= 2;
    const double js = kz_constant(q), js2 = kz_constant(q2);
    o.detail << std::setprecision(10) << "max/min - 1 " << jmax / jmin - 1.0 << " j* " << js << " doubled " << js2;
    o.require(jmin > 0.0 && jmax / jmin - 1.0 <= 1e-5, "max/min within 1 +- 1e-5");
    o.require(js > 0.0 && rel(js, js2) <= 5e-5, "j* stable to 4 digits");
}

void kz_energy_flux(Outcome& o) {
    const Spectrum kz = kz_spectrum();
    const double js = kz_constant(q);
    double worst = 0.0;
    for (double w : flux_probes()) worst = std::max(worst, std::abs(flux_energy(kz, w, q)) / (w * js));
    o.detail << "max |J_E|/(w j*) " << worst;
    o.require(worst <= 1e-5, "<= 1e-5");
}

void zakharov_roots(Outcome& o) {
    double worst = 0.0;
    for (double a : {0.0, -1.0, -kKZ, -1.5}) {
        const ZakharovResult z = zakharov_delta1(a, 1.0, q);
        o.require(!z.divergent, "root integral convergent");
        worst = std::max(worst, std::abs(z.value) / z.scale);
    }
    const ZakharovResult c = zakharov_delta1(-1.3, 1.0, q);
    const double control = std::abs(c.value) / c.scale;
    o.detail << "max root residual " << worst << " control " << control;
    o.require(worst <= 1e-6, "roots <= 1e-6");
    o.require(control >= 1e-2, "control >= 1e-2");
}

void rj_cancellation(Outcome& o) {
    const AnalyticSpectrum rj([](double w) { return 1.0 / (1.0 + w); }, TailModel{1.0, 0.0, 1.0, 1.0},
                              {Window{0.1, 10.0}});
    double worst = 0.0;
    for (double w : {0.01, 0.3, 1.0, 3.0, 100.0}) {
        const CollisionSplit c = collision(rj, w, q);
        worst = std::max(worst, std::abs(c.total) / c.positive_part);
    }
    o.detail << "max |C|/positive part " << worst;
    o.require(worst <= 1e-13, "<= 1e-13");
}

void scaling(Outcome& o) {
    const LogGrid g(-6.0, 6.0, 121);
    const Spectrum s = sample(g, [](double w) {
        return std::pow(w, -kKZ) * (1.0 + 0.5 * std::exp(-std::pow(std::log(w / 2.0), 2) / 0.5));
    }, kKZ, kKZ);
    double worst = 0.0;
    for (double lambda : {0.5, 2.0})
        for (double w : {0.3, 1.0, 4.0}) worst = std::max(worst, scaling_check(s, lambda, w, q).rel_error);
    o.detail << "max relative error " << worst;
    o.require(worst <= 1e-5, "<= 1e-5");
}

void duality(Outcome& o) {
    const LogGrid g(-8.0, 8.0, 161);
    auto kz_bump = [&](double amp, double center, double var) {
        return sample(g, [=](double w) {
            return std::pow(w, -kKZ) * (1.0 + amp * std::exp(-std::pow(std::log(w / center), 2) / var));
        }, kKZ, kKZ);
    };
    struct Pair {
        Spectrum f;
        double a, b;
    };
    const std::vector<Pair> pairs{{kz_bump(0.5, 1.5, 0.3), 0.5, 3.0},
                                  {kz_bump(-0.3, 0.5, 0.5), 0.2, 1.0},
                                  {kz_bump(1.0, 4.0, 0.2), 1.0, 6.0}};
    double worst = 0.0;
    for (const Pair& p : pairs) {
        const auto phi = oracle::bump(p.a, p.b);
        auto dphi = [&](double w) { return (phi(w + 1e-6) - phi(w - 1e-6)) / 2e-6; };
        const double lhs = weak_pairing(p.f, oracle::bump_spectrum(p.a, p.b), q);
        const double rhs = gl([&](double w) { return flux_mass(p.f, w, q) * dphi(w); }, p.a, p.b, 6);
        worst = std::max(worst, rel(lhs, rhs));
    }
    o.detail << "max relative gap " << worst;
    o.require(worst <= 1e-4, "<= 1e-4");
}

void spectral(Outcome& o) {
    const double root = std::abs(symbol(kKZ, 0.0, q));
    const double scale = std::max({std::abs(symbol(kKZ - 0.02, 0.0, q)), std::abs(symbol(kKZ + 0.02, 0.0, q)),
                                   std::abs(symbol(kKZ, 0.02, q))});
    o.detail << "|m(7/6)| " << root << " neighbor scale " << scale;
    o.require(root <= 1e-3 * scale, "root <= 1e-3 scale");

    // Plateau: the symbol at the rectangle corners settles by tau_max.
    const double tau_max = 50.0;
    double drift = 0.0;
    for (double b : {kKZ - 0.1, kKZ + 0.1})
        drift = std::max(drift, rel(std::abs(symbol(b, tau_max, q)), std::abs(symbol(b, 2.0 * tau_max, q))));
    o.detail << " plateau drift " << drift;
    o.require(drift <= 0.01, "plateau within 1%");
    // The count is also checked at twice the height and twice the sampling.
    for (auto [tau, samples] : {std::pair{tau_max, 2000}, std::pair{2.0 * tau_max, 2000}, std::pair{tau_max, 4000}}) {
        try {
            const int w = spectral_winding(0.1, 0.1, tau, samples, q);
            o.detail << " winding(" << tau << ", " << samples << ") " << w;
            o.require(w == 1, "winding 1");
        } catch (const AmbiguousWinding& e) {
            o.require(false, e.what());
        }
    }

    Eigen::MatrixXd V(5, 2);
    Eigen::VectorXd y(5);
    for (int k = 0; k < 5; ++k) {
        const double s = -0.05 + 0.025 * k;
        V.row(k) << 1.0, s;
        y[k] = symbol(kKZ + s, 0.0, q).real();
    }
    const Eigen::Vector2d c = V.colPivHouseholderQr().solve(y);
    o.detail << " linear fit slope " << c[1] << " intercept " << c[0];
    o.require(c[1] != 0.0 && std::abs(c[0]) <= 1e-3 * std::abs(c[1]) * 0.05, "linear-fit intercept");
}

void fd_oracle(Outcome& o) {
    const Spectrum kz = power_law(1.0, kKZ, LogGrid(-8.0, 8.0, 161));
    const auto b = oracle::bump(1.0, 2.0);
    const AnalyticSpectrum bs = oracle::bump_spectrum(1.0, 2.0);
    const double eps = 1e-4;
    auto shifted = [&](double s) {
        return AnalyticSpectrum([&, s](double w) { return kz(w) + s * b(w); }, kz.tails(), {Window{1.0, 2.0}});
    };
    const AnalyticSpectrum fp = shifted(eps), fm = shifted(-eps);
    double worst = 0.0;
    for (double w : {0.7, 1.5, 3.0}) {
        const double fd = -(collision(fp, w, q).total - collision(fm, w, q).total) / (2.0 * eps);
        worst = std::max(worst, rel(linearized_apply(bs, w, q), fd));
    }
    o.detail << "max relative gap " << worst;
    o.require(worst <= std::max(1e-4, 10.0 * eps * eps), "<= max(1e-4, 10 eps^2)");
}

// Solves shared by the stationary and c1 criteria.
struct Solves {
    std::vector<double> eps;
    std::vector<SolverReport> reports;
    std::vector<double> seconds;
    double assembly_seconds = 0.0;
};

const LogGrid& solve_grid() {
    static const GridConfig c{};
    static const LogGrid g(c.x_min, c.x_max, c.n);
    return g;
}

const Solves& solves() {
    static std::optional<Solves> cache;
    if (cache) return *cache;
    Solves s;
    const auto t0 = std::chrono::steady_clock::now();
    const LinearizedSystem sys = assemble_system(solve_grid(), q);
    s.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double js = kz_constant(q);
    SolverOptions opt;
    opt.stride = RunConfig{}.picard_stride;
    for (double eps : {0.002, 0.005, 0.01}) {
        const auto t1 = std::chrono::steady_clock::now();
        ForcingConfig fc;
        fc.eps = eps;
        ForcingSpec spec;
        spec.phi = forcing_bump(fc, solve_grid());
        spec.j_m_inf = js - eps;
        spec.eps = weighted_norm(spec.phi, {1.5 - spec.delta, 1.5 + spec.delta}).value / spec.j_m_inf;
        s.eps.push_back(eps);
        s.reports.push_back(solve_stationary(spec, sys, q, opt));
        s.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count());
        std::fprintf(stderr, "solve eps=%g done in %.0f s\n", eps, s.seconds.back());
    }
    cache = std::move(s);
    return *cache;
}

void stationary(Outcome& o) {
    const Solves& s = solves();
    const double delta = ForcingSpec{}.delta;
    for (std::size_t k = 0; k < s.eps.size(); ++k) {
        const SolverReport& r = s.reports[k];
        const double split = r.jm_limit_inf - r.jm_limit_0;
        const double seconds = s.seconds[k] + (k == 0 ? s.assembly_seconds : 0.0);
        o.detail << (k ? "; " : "") << "eps " << s.eps[k] << ": kappa " << r.contraction_ratio << " mass "
                 << r.mass_balance_defect << " energy " << r.energy_flux_defect << " tails " << r.tail_alpha << "/"
                 << r.tail_beta << " split " << split << " (" << std::lround(seconds) << " s)";
        o.require(r.converged && r.contraction_ratio < 1.0, "converged with kappa < 1");
        o.require(r.positivity_ok, "f >= 0");
        o.require(r.mass_balance_defect <= 0.01, "mass balance <= 1%");
        o.require(r.energy_flux_defect <= 0.01, "energy flux identity <= 1%");
        o.require(std::abs(r.tail_alpha - kKZ) <= delta && std::abs(r.tail_beta - kKZ) <= delta,
                  "tail exponents within delta of 7/6");
        o.require(rel(split, r.forcing_mass) <= 0.01, "limit split = M(phi) within 1%");
        o.require(seconds <= 1800.0, "runtime <= 30 min");
    }
}

void c1_identity(Outcome& o) {
    const Solves& s = solves();
    std::vector<double> c;
    for (const SolverReport& r : s.reports) c.push_back(r.c);
    const C1Fit fit = fit_c1(s.eps, c);
    const double target = -1.0 / (3.0 * kz_constant(q));
    o.detail << "c1 " << fit.c1 << " target " << target << " relative error " << rel(fit.c1, target);
    o.require(rel(fit.c1, target) <= 0.05, "within 5%");
}

void evolution(Outcome& o) {
    // Bump on a positive background, so the entropy is finite at every node.
    const LogGrid g(-4.0, 4.0, 33);
    const Spectrum f0 = sample(g, [](double w) {
        const double x = std::log(w);
        return (0.1 + std::exp(-x * x / 0.5)) / (1.0 + w * w * w * w);
    }, 0.0, 4.0);
    const Spectrum zero(g, Eigen::VectorXd::Zero(g.size()), TailModel{0.0, 0.0, 0.0, 4.0});
    const EvolutionRun run = evolve(f0, zero, 0.1, MonitorSpec{0.05, 0}, q);
    const EvolutionState& a = run.snapshots.front().state;
    const EvolutionState& b = run.snapshots.back().state;
    const double T = b.t - a.t;
    const double dm = std::abs(b.mass + b.condensate_mass - a.mass) / (a.mass * T);
    const double de = std::abs(b.energy - a.energy) / (a.energy * T);
    double worst_ds = 0.0, defect = 0.0;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        const Snapshot& s = run.snapshots[k];
        defect = std::max({defect, std::abs(s.mass_defect), std::abs(s.energy_defect)});
        if (k > 0) worst_ds = std::min(worst_ds, s.state.entropy - run.snapshots[k - 1].state.entropy);
    }
    o.detail << "mass drift/T " << dm << " energy drift/T " << de << " worst entropy step " << worst_ds
             << " entropy gain " << b.entropy - a.entropy << " projected production " << defect;
    o.require(dm <= 1e-6 && de <= 1e-6, "conservation <= 1e-6 per unit time");
    o.require(worst_ds >= -1e-6 * std::abs(a.entropy), "entropy nondecreasing");
}

AnalyticSpectrum envelope(double a, double b) {
    return AnalyticSpectrum([a, b](double w) { return w < 1.0 ? std::pow(w, -a) : std::pow(w, -b); },
                            TailModel{1.0, a, 1.0, b}, {}, {1.0});
}

void trilinear_exponents(Outcome& o) {
    struct Triple {
        double af, bf, ag, bg, ah, bh;
    };
    const Triple ts[] = {{kKZ, kKZ, kKZ, kKZ, kKZ, kKZ},
                         {0.5, 1.5, 0.8, 1.3, 1.1, 1.2},
                         {1.2, 1.1, 0.3, 2.0, 0.6, 1.4},
                         {0.9, 1.2, 1.2, 1.1, 0.7, 1.05},
                         {0.2, 1.8, 0.4, 1.6, 0.3, 1.9}};
    double worst = 0.0;
    for (const Triple& t : ts) {
        const double ap = std::max({t.af, t.ah, t.af + t.ag + t.ah - 2.0, t.af + t.ag - 1.0, t.ah + t.ag - 1.0});
        const double bp = std::min(t.bf + t.bg + t.bh - 2.0, t.bh + 0.5);
        const AnalyticSpectrum f = envelope(t.af, t.bf), g = envelope(t.ag, t.bg), h = envelope(t.ah, t.bh);
        auto m = [&](double w) { return trilinear_magnitude(f, g, h, w, q); };
        const double lo = std::log(m(1e-8) / m(1e-6)) / std::log(1e2);
        const double hi = -std::log(m(1e8) / m(1e6)) / std::log(1e2);
        worst = std::max({worst, std::abs(lo - ap), std::abs(hi - bp)});
    }
    o.detail << "max exponent gap " << worst;
    o.require(worst <= 0.05, "<= 0.05");
}

struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
    double budget_seconds; // 0: no runtime bound
};

} // namespace

int main(int argc, char** argv) {
    const std::map<int, Criterion> all{
        {1, {"KZ stationarity", kz_stationarity, 60.0}},
        {2, {"flux constancy", flux_constancy, 120.0}},
        {3, {"KZ energy flux", kz_energy_flux, 0.0}},
        {4, {"Zakharov roots", zakharov_roots, 0.0}},
        {5, {"Rayleigh-Jeans cancellation", rj_cancellation, 0.0}},
        {6, {"scaling invariance", scaling, 0.0}},
        {7, {"duality", duality, 0.0}},
        {8, {"spectral diagnostics", spectral, 600.0}},
        {9, {"linearized FD oracle", fd_oracle, 0.0}},
        {10, {"forced stationary solutions", stationary, 0.0}},
        {11, {"c1 identity", c1_identity, 0.0}},
        {12, {"evolution sanity", evolution, 300.0}},
        {13, {"trilinear exponents", trilinear_exponents, 0.0}},
    };

    CLI::App app{"Acceptance criteria; all of them when none are given"};
    std::vector<int> ids;
    app.add_option("criteria", ids, "criterion numbers")->check(CLI::Range(1, 13));
    CLI11_PARSE(app, argc, argv);
    if (ids.empty())
        for (const auto& [id, c] : all) ids.push_back(id);

    bool ok = true;
    for (int id : ids) {
        const Criterion& c = all.at(id);
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("threw ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_seconds > 0.0) o.require(s <= c.budget_seconds, "runtime budget");
        std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, c.name, o.detail.str().c_str(), s);
        std::fflush(stdout);
        ok = ok && o.pass;
    }
    return ok ? 0 : 1;
}
