#include <doctest.h>

#include <cmath>

#include "kwe/evolution.hpp"
#include "kwe/fluxes.hpp"

using namespace kwe;

TEST_SUITE_BEGIN("evolution");

namespace {

const QuadratureConfig q{};

Spectrum gaussian_u(const LogGrid& g, double center, double width, double amp) {
    Eigen::VectorXd u(g.size());
    for (int i = 0; i < g.size(); ++i) {
        const double v = amp * std::exp(-std::pow(g.x(i) - center, 2) / (2 * width * width));
        u[i] = v < 1e-200 ? 0.0 : v;
    }
    u[0] = u[g.size() - 1] = 0.0;
    return Spectrum(g, u, TailModel{0.0, 0.0, 0.0, 4.0});
}

} // namespace

TEST_CASE("functionals") {
    const LogGrid g(-4.0, 4.0, 801);
    // Plateau f = 1 on [1, 2] with steep smooth edges.
    const Spectrum plateau = sample(g, [](double w) {
        return 0.25 * (1.0 + std::tanh(40.0 * (w - 1.0))) * (1.0 - std::tanh(40.0 * (w - 2.0)));
    }, 0.0, 4.0);
    const Functionals p = functionals(plateau);
    CHECK(p.mass == doctest::Approx(2.0 / 3.0 * (std::pow(2.0, 1.5) - 1.0)).epsilon(1e-3));
    CHECK_FALSE(p.mass_divergent);

    const Functionals kz = functionals(power_law(1.0, kKZ, g));
    CHECK(kz.mass_divergent);
    CHECK(kz.energy_divergent);
    CHECK_FALSE(kz.entropy_flagged);

    const Functionals z = functionals(power_law(0.0, kKZ, g));
    CHECK(z.mass == 0.0);
    CHECK(z.energy == 0.0);
    CHECK(z.entropy_flagged);

    // Trapezoid in x is exact for the Gaussian to spectral accuracy.
    const LogGrid g2(-10.0, 10.0, 201);
    const Functionals gm = functionals(gaussian_u(g2, 0.0, 1.0, 1.0));
    // f = e^{-x^2/2} w^{-7/6}: M = int e^{-x^2/2} e^{x/3} dx.
    CHECK(gm.mass == doctest::Approx(std::sqrt(2 * M_PI) * std::exp(1.0 / 18.0)).epsilon(1e-10));
    CHECK(gm.energy == doctest::Approx(std::sqrt(2 * M_PI) * std::exp(16.0 / 18.0)).epsilon(1e-10));
}

TEST_CASE("linear regime from zero data") {
    const LogGrid g(-3.0, 3.0, 25);
    const Spectrum zero(g, Eigen::VectorXd::Zero(g.size()), TailModel{0.0, 0.0, 0.0, 4.0});
    const Spectrum phi = gaussian_u(g, 0.0, 0.5, 0.1);
    const StepResult r = step(make_state(zero), phi, 0.01, q);
    const double rate = (r.state.mass + r.state.condensate_mass) / r.dt_used;
    CHECK(rate == doctest::Approx(functionals(phi).mass).epsilon(0.01));
}

TEST_CASE("step underflow") {
    const LogGrid g(-3.0, 3.0, 25);
    const EvolutionState s = make_state(gaussian_u(g, 0.0, 0.5, 1.0));
    const Spectrum zero(g, Eigen::VectorXd::Zero(g.size()), TailModel{0.0, 0.0, 0.0, 4.0});
    StepOptions opt;
    opt.rtol = 1e-14;
    opt.atol = 1e-16;
    opt.dt_min = 0.3;
    CHECK_THROWS_AS(step(s, zero, 0.5, q, opt), StepUnderflow);
}

TEST_CASE("unforced bump conserves mass and energy and produces entropy") {
    const LogGrid g(-4.0, 4.0, 33);
    const Spectrum f0 = sample(g, [](double w) {
        const double x = std::log(w);
        return (0.1 + std::exp(-x * x / 0.5)) / (1.0 + w * w * w * w);
    }, 0.0, 4.0);
    const Spectrum zero(g, Eigen::VectorXd::Zero(g.size()), TailModel{0.0, 0.0, 0.0, 4.0});
    MonitorSpec mon;
    mon.cadence = 0.05;
    const EvolutionRun run = evolve(f0, zero, 0.1, mon, q);
    REQUIRE(run.snapshots.size() >= 3);
    const EvolutionState& a = run.snapshots.front().state;
    const EvolutionState& b = run.snapshots.back().state;
    const double T = b.t - a.t;
    CHECK(T == doctest::Approx(0.1));
    CHECK(std::abs(b.mass + b.condensate_mass - a.mass) <= 1e-6 * a.mass * T);
    CHECK(std::abs(b.energy - a.energy) <= 1e-6 * a.energy * T);
    for (std::size_t k = 1; k < run.snapshots.size(); ++k)
        CHECK(run.snapshots[k].state.entropy - run.snapshots[k - 1].state.entropy >= -1e-6 * std::abs(a.entropy));
    CHECK(b.entropy > a.entropy);
    // The projection only removes quadrature-level production.
    for (const Snapshot& s : run.snapshots) CHECK(std::abs(s.mass_defect) + std::abs(s.energy_defect) <= 1e-2);
}

TEST_SUITE_END();
