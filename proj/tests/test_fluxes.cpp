#include <doctest.h>

#include <cmath>

#include "kwe/collision.hpp"
#include "kwe/fluxes.hpp"
#include "oracles.hpp"

using namespace kwe;

TEST_SUITE_BEGIN("fluxes");

namespace {

const QuadratureConfig q{};

// Gauss-Legendre on [a, b] split into `cells` equal cells.
template <class F>
double gl(F&& fn, double a, double b, int cells, int order = 8) {
    const GaussRule& r = gauss_legendre(order);
    const double h = (b - a) / cells;
    double s = 0.0;
    for (int c = 0; c < cells; ++c)
        for (std::size_t k = 0; k < r.x.size(); ++k) {
            const double x = a + h * (c + 0.5 * (r.x[k] + 1.0));
            s += 0.5 * h * r.w[k] * fn(x);
        }
    return s;
}

Spectrum kz_plus_bump(const LogGrid& g, double amp) {
    return sample(g, [amp](double w) {
        return std::pow(w, -kKZ) * (1.0 + amp * std::exp(-std::pow(std::log(w / 1.5), 2) / 0.3));
    }, kKZ, kKZ);
}

} // namespace

TEST_CASE("KZ mass flux is constant and equals -j*") {
    const LogGrid g(-8.0, 8.0, 161);
    const Spectrum kz = power_law(1.0, kKZ, g);
    const double js = kz_constant(q);
    CHECK(js > 0.0);
    for (double w : {0.1, 1.0, 10.0}) CHECK(flux_mass(kz, w, q) / -js == doctest::Approx(1.0).epsilon(1e-6));
    for (double c : {0.5, 2.0})
        CHECK(flux_mass(power_law(c, kKZ, g), 1.0, q) == doctest::Approx(-c * c * c * js).epsilon(1e-6));
}

TEST_CASE("j* is stable under panel refinement") {
    QuadratureConfig q2 = q;
    q2.panels_per_decade = 2 * q.panels_per_decade;
    const double a = kz_constant(q), b = kz_constant(q2);
    CHECK(std::abs(a - b) <= 5e-5 * a);
}

TEST_CASE("flux components vanish where supports separate") {
    const LogGrid g(-4.0, 4.0, 81);
    const Spectrum b = sample(g, oracle::bump(1.0, 2.0), kKZ, kKZ);
    for (int i = 1; i <= 4; ++i) CHECK(flux_component(i, b, 10.0, q) == 0.0);
    const Spectrum zero = power_law(0.0, kKZ, g);
    CHECK(flux_mass(zero, 1.0, q) == 0.0);
    CHECK(flux_energy(zero, 1.0, q) == 0.0);
    const Spectrum kz = power_law(1.0, kKZ, g);
    CHECK(flux_component(1, kz, 1.0, q) > 0.0);
}

TEST_CASE("cubic homogeneity and scaling in omega") {
    const LogGrid g(-8.0, 8.0, 161);
    const Spectrum f = kz_plus_bump(g, 0.4);
    const double j = flux_mass(f, 1.3, q);
    const Spectrum f2(g, 1.7 * f.u(), TailModel{1.7, kKZ, 1.7, kKZ});
    CHECK(flux_mass(f2, 1.3, q) == doctest::Approx(std::pow(1.7, 3) * j).epsilon(1e-10));

    // f_l(w) = l^{-7/6} f(w / l) keeps the u samples on a shifted grid.
    const double lam = 2.5;
    const Spectrum fl(g.shifted(std::log(lam)), f.u(), f.tails());
    CHECK(flux_mass(fl, 1.0, q) == doctest::Approx(flux_mass(f, 1.0 / lam, q)).epsilon(1e-5));
}

TEST_CASE("energy flux of KZ vanishes") {
    const LogGrid g(-10.0, 10.0, 201);
    const Spectrum kz = power_law(1.0, kKZ, g);
    const double js = kz_constant(q);
    for (double w : {0.3, 1.0, 5.0}) CHECK(std::abs(flux_energy(kz, w, q)) <= 1e-5 * w * js);
}

TEST_CASE("duality between the weak form and the mass flux") {
    const LogGrid g(-8.0, 8.0, 161);
    const Spectrum f = kz_plus_bump(g, 0.5);
    const double a = 0.5, b = 3.0;
    const auto phi = oracle::bump(a, b);
    const AnalyticSpectrum phis = oracle::bump_spectrum(a, b);
    auto dphi = [&](double w) { return (phi(w + 1e-6) - phi(w - 1e-6)) / 2e-6; };

    const double lhs = weak_pairing(f, phis, q);
    double mag = 0.0;
    const double rhs = gl([&](double w) {
        const double v = flux_mass(f, w, q) * dphi(w);
        mag += std::abs(v);
        return v;
    }, a, b, 6);
    // Pointwise form of the same pairing.
    const double direct = gl([&](double w) { return std::sqrt(w) * collision(f, w, q).total * phi(w); }, a, b, 6);
    INFO("weak " << lhs << " flux " << rhs << " direct " << direct);
    CHECK(std::abs(lhs - rhs) <= 1e-4 * std::abs(rhs));
    CHECK(std::abs(lhs - direct) <= 1e-4 * std::abs(direct));
}

TEST_CASE("cascade report of KZ") {
    const LogGrid g(-6.0, 6.0, 49);
    const Spectrum kz = power_law(1.0, kKZ, g);
    const FluxProfile p = cascade_report(kz, power_law(0.0, kKZ, g), q, 4);
    const double js = kz_constant(q);
    CHECK(p.jm_limit_0 == doctest::Approx(-js).epsilon(1e-6));
    CHECK(p.jm_limit_inf == doctest::Approx(-js).epsilon(1e-6));
    CHECK(p.compat_defect <= 1e-6);
    CHECK(p.forcing_mass == 0.0);
    for (int i = 0; i < g.size(); ++i) CHECK(std::abs(p.je[i]) <= 1e-5 * g.omega(i) * js);

    const FluxProfile z = cascade_report(power_law(0.0, kKZ, g), power_law(0.0, kKZ, g), q, 4);
    CHECK(z.jm.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.je.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("moments") {
    const LogGrid g(-6.0, 6.0, 241);
    const Spectrum s = sample(g, [](double w) { return std::exp(-std::pow(std::log(w), 2)) / w; }, 0.5, 2.5);
    // int w^p e^{-x^2} / w dw = int e^{p x - x^2} dx = sqrt(pi) e^{p^2 / 4}.
    for (double p : {0.0, 0.5, 1.0}) CHECK(moment(s, p) == doctest::Approx(std::sqrt(M_PI) * std::exp(p * p / 4)).epsilon(1e-6));
}

TEST_SUITE_END();
