#include <doctest.h>

#include <cmath>

#include "kwe/collision.hpp"
#include "kwe/fluxes.hpp"
#include "kwe/stationary.hpp"
#include "oracles.hpp"

using namespace kwe;

TEST_SUITE_BEGIN("stationary");

namespace {

const QuadratureConfig q{};

Spectrum bump_u(const LogGrid& g, double center, double width, double amp, double tail = 1.5) {
    Eigen::VectorXd u(g.size());
    for (int i = 0; i < g.size(); ++i) u[i] = amp * std::exp(-std::pow(g.x(i) - center, 2) / (2 * width * width));
    return Spectrum::with_matched_tails(g, u, tail, tail);
}

// Forcing phi with M(phi) = m, Gaussian in u and zero outside the window.
Spectrum forcing(const LogGrid& g, double center, double width, double m) {
    Eigen::VectorXd u = bump_u(g, center, width, 1.0).u();
    u[0] = u[g.size() - 1] = 0.0;
    const TailModel none{0.0, 1.5, 0.0, 1.5};
    return Spectrum(g, u * (m / moment(Spectrum(g, u, none), 0.5)), none);
}

} // namespace

TEST_CASE("nonlinear terms with H = 0") {
    const LogGrid g(-6.0, 6.0, 61);
    const Spectrum zero = power_law(0.0, kKZ, g);
    const Spectrum r = nonlinear_rhs(0.0, zero, q);
    CHECK(r.u().cwiseAbs().maxCoeff() == 0.0);

    const AnalyticSpectrum g0 = g0_spectrum();
    const Spectrum kz = power_law(1.0, kKZ, g);
    const double w = 1.7, c = -0.3;
    const NonlinearTerms t = nonlinear_terms(zero, w, q);
    CHECK(t.q_h == 0.0);
    CHECK(t.q_g0h == 0.0);
    CHECK(t.c_h == 0.0);
    CHECK(t.c_g0g0h == 0.0);
    CHECK(t.c_g0hh == 0.0);
    const double ref = c * c * 3.0 * collision_sym(kz, g0, g0, w, q) + c * c * c * collision(g0, w, q).total;
    CHECK(t.combine(c) == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("combine expands the seven terms") {
    NonlinearTerms t;
    t.q_g0 = 1.0; t.q_h = 2.0; t.q_g0h = 3.0; t.c_g0 = 5.0; t.c_h = 7.0; t.c_g0g0h = 11.0; t.c_g0hh = 13.0;
    const double c = 0.5;
    CHECK(t.combine(c) == doctest::Approx(c * c * 1 + 2 + 2 * c * 3 + c * c * c * 5 + 7 + 3 * c * c * 11 + 3 * c * 13));
}

TEST_CASE("nonlinear part from the polynomial identity") {
    const LogGrid g(-8.0, 8.0, 161);
    const Spectrum kz = power_law(1.0, kKZ, g);
    const Spectrum h = sample(g, [](double w) {
        return 0.05 * std::pow(w, -kKZ) * std::exp(-std::pow(std::log(w) - 0.2, 2) / 0.5);
    }, kKZ, kKZ);
    const Spectrum sum(g, kz.u() + h.u(), TailModel{kz.tails().c0 + h.tails().c0, kKZ,
                                                    kz.tails().c_inf + h.tails().c_inf, kKZ});
    for (double w : {0.6, 1.5, 4.0}) {
        const NonlinearTerms t = nonlinear_terms(h, w, q);
        const CollisionSplit full = collision(sum, w, q);
        // C(f + H) - C(f) - 3 C(f, f, H) = Q(H) + C(H).
        const double oracle_v = full.total - collision(kz, w, q).total - 3.0 * collision_sym(kz, kz, h, w, q);
        INFO("w " << w << " terms " << t.combine(0.0) << " identity " << oracle_v);
        CHECK(std::abs(t.combine(0.0) - oracle_v) <= 1e-7 * full.positive_part);
    }
}

TEST_CASE("forcing validation") {
    const LogGrid g(-10.0, 10.0, 101);
    const double js = kz_constant(q);
    ForcingSpec s{forcing(g, 0.4, 0.3, 0.01), 1.0 / 24.0, 0.05, js};
    CHECK_NOTHROW(validate(s));
    ForcingSpec bad = s;
    bad.delta = 0.1;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = s;
    bad.j_m_inf = 0.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = s;
    bad.eps = 1e-6;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("unforced problem is solved by the KZ spectrum") {
    const LogGrid g(-10.0, 10.0, 101);
    const double js = kz_constant(q);
    const ForcingSpec s{power_law(0.0, 1.5, g), 1.0 / 24.0, 0.01, js};
    SolverOptions opt;
    opt.energy_probes = 0;
    const SolverReport r = solve_stationary(s, g, q, opt);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.c == 0.0);
    CHECK(r.H.u().cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < g.size(); ++i) CHECK(r.f.u()[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.positivity_ok);
}

TEST_CASE("c1 regression") {
    const double c1 = -0.113, c2 = 0.4;
    std::vector<double> e{0.002, 0.005, 0.01}, c;
    for (double x : e) c.push_back(c1 * x + c2 * x * x);
    const C1Fit f = fit_c1(e, c);
    CHECK(f.c1 == doctest::Approx(c1).epsilon(1e-12));
    CHECK(f.c2 == doctest::Approx(c2).epsilon(1e-10));
    const C1Fit one = fit_c1({0.01}, {c.back()});
    CHECK(one.c1 == doctest::Approx(c.back() / 0.01).epsilon(1e-15));
    // The single-point slope differs from c1 by the quadratic term only.
    CHECK(std::abs(one.c1 - f.c1) <= std::abs(f.c2) * 0.01 * (1 + 1e-12));
}

TEST_CASE("sign-changing forcing on a coarse grid") {
    const LogGrid g(-10.0, 10.0, 101);
    const double js = kz_constant(q);
    // Positive mass with a negative lobe.
    const Spectrum a = forcing(g, 0.6, 0.3, 0.006), b = forcing(g, -0.4, 0.3, -0.002);
    const Spectrum phi(g, a.u() + b.u(), TailModel{0.0, 1.5, 0.0, 1.5});
    ForcingSpec s{phi, 1.0 / 24.0, 0.0, js - moment(phi, 0.5)};
    s.eps = weighted_norm(phi, {1.5 - s.delta, 1.5 + s.delta}).value / s.j_m_inf;
    SolverOptions opt;
    opt.stride = 2;
    opt.energy_probes = 0;
    opt.probes = 4;
    const SolverReport r = solve_stationary(s, g, q, opt);
    CHECK(r.converged);
    CHECK(r.contraction_ratio < 1.0);
    for (std::size_t k = 2; k < r.contraction_history.size(); ++k)
        CHECK(r.contraction_history[k] < r.contraction_history[k - 1]);
    CHECK(r.positivity_ok);
    CHECK(r.mass_balance_defect <= 0.01);
    CHECK(r.c == doctest::Approx(-moment(phi, 0.5) / (3.0 * js)).epsilon(0.05));
}

TEST_SUITE_END();
