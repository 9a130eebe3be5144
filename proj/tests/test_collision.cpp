#include <doctest.h>

#include <cmath>

#include "kwe/collision.hpp"
#include "kwe/fluxes.hpp"
#include "oracles.hpp"

using namespace kwe;

TEST_SUITE_BEGIN("collision");

namespace {

const QuadratureConfig q{};

AnalyticSpectrum smooth_positive() {
    // Decays like the KZ law on both sides with a bump near omega = 2.
    return AnalyticSpectrum(
        [](double w) { return std::pow(w, -kKZ) * (1.0 + 0.5 * std::exp(-std::pow(std::log(w / 2.0), 2))); },
        TailModel{1.0, kKZ, 1.0, kKZ}, {Window{0.05, 80.0}});
}

} // namespace

TEST_CASE("kernel W") {
    CHECK(kernel_W(4.0, 1.0, 9.0, 16.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(kernel_W(1.0, 4.0, 9.0, 16.0) == 1.0);
    CHECK(kernel_W(2.0, 3.0, 2.0, 3.0) == 1.0);
}

TEST_CASE("collision against Monte Carlo for a compact bump") {
    const auto f = oracle::bump(1.0, 2.0);
    const AnalyticSpectrum fs = oracle::bump_spectrum(1.0, 2.0);
    for (double w1 : {0.5, 1.3, 1.7, 2.6}) {
        const oracle::McEstimate mc = oracle::collision(f, w1, 4.5, 4'000'000);
        const CollisionSplit c = collision(fs, w1, q);
        INFO("w1 = " << w1 << " quad " << c.total << " mc " << mc.mean << " +- " << mc.stderr_);
        CHECK(std::abs(c.total - mc.mean) <= 5.0 * mc.stderr_ + 1e-6);
        CHECK(c.c1 + c.c2 + c.c3 == doctest::Approx(c.total).epsilon(1e-14));
    }
}

TEST_CASE("trilinear form against Monte Carlo") {
    const auto f = oracle::bump(1.0, 2.0), g = oracle::bump(1.2, 2.2, 0.7), h = oracle::bump(0.8, 1.9, 1.3);
    const AnalyticSpectrum fs = oracle::bump_spectrum(1.0, 2.0), gs = oracle::bump_spectrum(1.2, 2.2, 0.7),
                           hs = oracle::bump_spectrum(0.8, 1.9, 1.3);
    for (double w1 : {0.6, 1.4, 1.8}) {
        const oracle::McEstimate mc = oracle::trilinear(f, g, h, w1, 4.5, 4'000'000);
        const double v = collision_trilinear(fs, gs, hs, w1, q);
        INFO("w1 = " << w1 << " quad " << v << " mc " << mc.mean << " +- " << mc.stderr_);
        CHECK(std::abs(v - mc.mean) <= 5.0 * mc.stderr_ + 1e-6);
    }
}

TEST_CASE("symmetrized form") {
    const AnalyticSpectrum f = smooth_positive();
    const AnalyticSpectrum g = oracle::bump_spectrum(1.0, 3.0);
    const AnalyticSpectrum h = oracle::bump_spectrum(0.5, 2.0, 2.0);
    for (double w1 : {0.7, 1.6}) {
        const double full = collision(f, w1, q).total;
        CHECK(collision_sym(f, f, f, w1, q) == doctest::Approx(full).epsilon(1e-12));
        const double fgh = collision_sym(f, g, h, w1, q);
        CHECK(collision_sym(h, f, g, w1, q) == fgh);
        CHECK(collision_sym(g, h, f, w1, q) == fgh);
        const AnalyticSpectrum f3([&](double w) { return 3.0 * f(w); }, TailModel{3.0, kKZ, 3.0, kKZ},
                                  f.features());
        CHECK(collision_sym(f3, g, h, w1, q) == doctest::Approx(3.0 * fgh).epsilon(1e-12));
    }
}

TEST_CASE("batched symmetric terms match separate evaluations") {
    const AnalyticSpectrum f = smooth_positive();
    const AnalyticSpectrum g = oracle::bump_spectrum(1.0, 3.0);
    const AnalyticSpectrum h = oracle::bump_spectrum(0.5, 2.0, 2.0);
    const std::vector<const SpectralFunction*> args{&f, &g, &h};
    const std::vector<std::array<int, 3>> terms{{0, 1, 1}, {0, 1, 2}, {2, 2, 2}, {0, 0, 2}};
    const QuadratureConfig hq = high_resolution(q);
    const std::vector<double> v = collision_sym_terms(args, terms, 1.3, hq);
    REQUIRE(v.size() == terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const double ref = collision_sym(*args[terms[t][0]], *args[terms[t][1]], *args[terms[t][2]], 1.3, hq);
        CHECK(v[t] == doctest::Approx(ref).epsilon(1e-8));
    }
    CHECK_THROWS_AS(collision_sym_terms(args, std::vector<std::array<int, 3>>(9, {0, 0, 0}), 1.0, q),
                    InvalidRange);
}

TEST_CASE("polynomial identity for KZ plus a bump") {
    const LogGrid grid(-8.0, 8.0, 161);
    const Spectrum kz = power_law(1.0, kKZ, grid);
    const AnalyticSpectrum g = oracle::bump_spectrum(0.8, 2.5, 0.3);
    const AnalyticSpectrum sum([&](double w) { return kz(w) + g(w); }, kz.tails(), {Window{0.8, 2.5}});
    for (double w1 : {0.5, 1.5, 4.0}) {
        const CollisionSplit lhs = collision(sum, w1, q);
        const double rhs = collision(kz, w1, q).total + 3.0 * collision_sym(kz, kz, g, w1, q) +
                           3.0 * collision_sym(kz, g, g, w1, q) + collision(g, w1, q).total;
        CHECK(std::abs(lhs.total - rhs) <= 1e-7 * lhs.positive_part);
    }
}

TEST_CASE("Rayleigh-Jeans cancellation") {
    const AnalyticSpectrum rj([](double w) { return 1.0 / (1.0 + w); }, TailModel{1.0, 0.0, 1.0, 1.0},
                              {Window{0.1, 10.0}});
    for (double w1 : {0.01, 0.3, 1.0, 3.0, 100.0}) {
        const CollisionSplit c = collision(rj, w1, q);
        CHECK(std::abs(c.total) <= 1e-13 * std::max(1.0, c.positive_part));
    }
}

TEST_CASE("homogeneity of power laws") {
    const LogGrid grid(-6.0, 6.0, 121);
    for (double mu : {1.05, 9.0 / 8.0, 1.2}) {
        const Spectrum s = power_law(1.0, mu, grid);
        const double c1 = collision(s, 1.0, q).total;
        for (double w : {2.0, 0.1, 30.0}) {
            const double ratio = collision(s, w, q).total / c1;
            CHECK(ratio == doctest::Approx(std::pow(w, 2.0 - 3.0 * mu)).epsilon(1e-5));
        }
    }
}

TEST_CASE("KZ stationarity and the Zakharov form") {
    const LogGrid grid(-6.0, 6.0, 121);
    const Spectrum kz = power_law(1.0, kKZ, grid);
    for (double w : {0.05, 1.0, 20.0}) CHECK(std::abs(collision(kz, w, q).normalized()) <= 1e-5);
    for (double a : {0.0, -1.0, -7.0 / 6.0, -3.0 / 2.0}) {
        const ZakharovResult z = zakharov_delta1(a, 1.0, q);
        CHECK_FALSE(z.divergent);
        CHECK(std::abs(z.value) <= 1e-6 * z.scale);
    }
    const ZakharovResult off = zakharov_delta1(-1.3, 1.0, q);
    CHECK(std::abs(off.value) >= 1e-2 * off.scale);
}

TEST_CASE("scaling check") {
    const LogGrid grid(-6.0, 6.0, 121);
    const Spectrum s = sample(grid, [](double w) { return std::pow(w, -kKZ) * (1.0 + 0.3 * std::exp(-std::pow(std::log(w), 2))); },
                              kKZ, kKZ);
    const ScalingCheck sc = scaling_check(s, 1.7, 0.8, q);
    CHECK(sc.rel_error <= 1e-8);
}

TEST_CASE("locality window") {
    const LogGrid grid(-2.0, 2.0, 41);
    CHECK_NOTHROW(check_locality(power_law(1.0, kKZ, grid)));
    CHECK_THROWS_AS(check_locality(power_law(1.0, 1.3, grid)), LocalityViolation);
    CHECK_THROWS_AS(check_locality(power_law(1.0, 0.9, grid)), LocalityViolation);
    CHECK(check_locality(power_law(1.0, 1.0, grid)));
    CHECK_THROWS_AS(collision(power_law(1.0, 1.3, grid), 1.0, q), LocalityViolation);
    CHECK_THROWS_AS(collision(power_law(1.0, kKZ, grid), -1.0, q), DomainError);
}

TEST_SUITE_END();
