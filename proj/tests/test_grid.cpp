#include <doctest.h>

#include <cmath>

#include "kwe/grid.hpp"

using namespace kwe;

TEST_SUITE_BEGIN("grid");

TEST_CASE("log grid nodes and spacing") {
    const LogGrid g = make_log_grid(-1.0, 1.0, 3);
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(1) == 0.0);
    CHECK(g.x(2) == 1.0);
    CHECK(g.omega(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(g.omega(1) == 1.0);
    CHECK(make_log_grid(-13.8, 13.8, 1201).spacing() == doctest::Approx(0.023).epsilon(1e-13));
    CHECK_THROWS_AS(make_log_grid(0.0, 0.0, 2), InvalidRange);
    CHECK_THROWS_AS(make_log_grid(0.0, 1.0, 1), InvalidRange);
}

TEST_CASE("eval with tails") {
    const LogGrid g(-2.0, 2.0, 41);
    const Spectrum kz = power_law(1.0, kKZ, g);
    CHECK(kz(2.0) == doctest::Approx(std::pow(2.0, -kKZ)).epsilon(1e-14));
    CHECK_THROWS_AS(eval(kz, 0.0), DomainError);
    CHECK_THROWS_AS(eval(kz, -1.0), DomainError);

    const Spectrum zero = power_law(0.0, 1.3, g);
    CHECK(zero(0.01) == 0.0);
    CHECK(zero(1.0) == 0.0);
    CHECK(zero(1e4) == 0.0);

    // Upper tail 2 w^{-3/2} attached to a window that matches it at x_max.
    Eigen::VectorXd u(g.size());
    for (int i = 0; i < g.size(); ++i) u[i] = 2.0 * std::pow(g.omega(i), kKZ - 1.5);
    const Spectrum s(g, u, TailModel{2.0, 1.5, 2.0, 1.5});
    const double w = 4.0 * std::exp(g.x_max());
    CHECK(s(w) == doctest::Approx(2.0 * std::pow(w, -1.5)).epsilon(1e-14));
}

TEST_CASE("prefactor consistency of power laws on and off the grid") {
    const LogGrid g(-5.0, 5.0, 101);
    for (double mu : {0.5, 1.0, kKZ, 1.4}) {
        const Spectrum s = power_law(2.5, mu, g);
        for (double x = -7.0; x <= 7.0; x += 0.173) {
            const double w = std::exp(x);
            CHECK(s(w) == doctest::Approx(2.5 * std::pow(w, -mu)).epsilon(1e-12));
        }
    }
    CHECK(power_law(2.0, 1.5, g)(4.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK((power_law(1.0, kKZ, g).u().array() == 1.0).all());
}

TEST_CASE("tail mismatch is rejected") {
    const LogGrid g(-1.0, 1.0, 5);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(5);
    CHECK_NOTHROW(Spectrum(g, u, TailModel{1.0, kKZ, 1.0, kKZ}));
    CHECK_THROWS_AS(Spectrum(g, u, TailModel{1.1, kKZ, 1.0, kKZ}), InvalidRange);
    CHECK_THROWS_AS(Spectrum(g, Eigen::VectorXd::Ones(4), TailModel{}), InvalidRange);
}

TEST_CASE("weighted norms") {
    const LogGrid g(-4.0, 4.0, 81);
    const Spectrum kz = power_law(1.0, kKZ, g);
    const WeightedNorm n = weighted_norm(kz, {kKZ, kKZ});
    CHECK_FALSE(n.divergent);
    CHECK(n.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(weighted_norm(power_law(-3.0, kKZ, g), {kKZ, kKZ}).value == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(weighted_norm(power_law(0.0, kKZ, g), {kKZ, kKZ}).value == 0.0);
    CHECK(weighted_norm(kz, {1.0, 1.0}).divergent);

    // Homogeneity holds exactly for any spectrum.
    const Spectrum b = sample(g, [](double w) { return std::exp(-std::pow(std::log(w) - 0.3, 2)) / w; }, 1.0, 1.5);
    const double nb = weighted_norm(b, {1.1, 1.3}).value;
    for (double lam : {-2.0, 0.5, 3.0}) {
        const Spectrum s(g, lam * b.u(), TailModel{lam * b.tails().c0, 1.0, lam * b.tails().c_inf, 1.5});
        CHECK(weighted_norm(s, {1.1, 1.3}).value == doctest::Approx(std::abs(lam) * nb).epsilon(1e-15));
    }
}

TEST_CASE("tail fits") {
    const LogGrid g(-6.0, 6.0, 121);
    for (double c : {0.5, 3.0})
        for (double mu : {1.05, kKZ, 1.4}) {
            const TailFit f = fit_tails(power_law(c, mu, g), 0.1);
            CHECK(f.model.c0 == doctest::Approx(c).epsilon(1e-8));
            CHECK(f.model.alpha == doctest::Approx(mu).epsilon(1e-8));
            CHECK(f.model.c_inf == doctest::Approx(c).epsilon(1e-8));
            CHECK(f.model.beta == doctest::Approx(mu).epsilon(1e-8));
        }
    // A small bump in the middle does not reach the fit windows.
    const Spectrum kb = sample(g, [](double w) {
        return std::pow(w, -kKZ) * (1.0 + 1e-3 * std::exp(-std::pow(std::log(w), 2) / 0.5));
    }, kKZ, kKZ);
    const TailFit f = fit_tails(kb, 0.1);
    CHECK(std::abs(f.model.alpha - kKZ) < 1e-6);
    CHECK(std::abs(f.model.beta - kKZ) < 1e-6);

    CHECK_THROWS_AS(fit_tails(power_law(-1.0, kKZ, g), 0.1), NonpositiveSpectrum);
    CHECK_THROWS_AS(fit_tails(power_law(1.0, kKZ, g), 0.6), InvalidRange);
}

TEST_CASE("rescale is exact") {
    const LogGrid g(-3.0, 3.0, 61);
    const Spectrum b = sample(g, [](double w) { return std::exp(-std::pow(std::log(w), 2)) * std::pow(w, -kKZ); }, kKZ, kKZ);
    const Spectrum r = rescale(b, 2.0);
    for (double w : {0.01, 0.3, 1.0, 2.5, 40.0}) CHECK(r(w) == doctest::Approx(b(2.0 * w)).epsilon(1e-13));
}
TEST_SUITE_END();
