#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "kwe/grid.hpp"

namespace oracle {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Plain Monte Carlo over (w3, w4) in [0, L]^2, w2 = w3 + w4 - w1.
template <class Integrand>
McEstimate mc_box(Integrand&& fn, double w1, double L, long samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, L);
    double s = 0.0, s2 = 0.0;
    for (long k = 0; k < samples; ++k) {
        const double w3 = U(rng), w4 = U(rng);
        const double w2 = w3 + w4 - w1;
        double v = 0.0;
        if (w2 > 0.0) v = fn(w2, w3, w4);
        s += v;
        s2 += v * v;
    }
    const double area = L * L;
    const double m = s / samples;
    const double var = std::max(0.0, s2 / samples - m * m);
    return {area * m, area * std::sqrt(var / samples)};
}

inline double W(double w1, double w2, double w3, double w4) {
    return std::sqrt(std::min({w1, w2, w3, w4}) / w1);
}

// Unordered collision integral of compactly supported f.
inline McEstimate collision(const std::function<double(double)>& f, double w1, double L,
                            long samples, std::uint64_t seed = 7) {
    const double f1 = f(w1);
    return mc_box([&](double w2, double w3, double w4) {
        const double f2 = f(w2), f3 = f(w3), f4 = f(w4);
        return W(w1, w2, w3, w4) * ((f1 + f2) * f3 * f4 - (f3 + f4) * f1 * f2);
    }, w1, L, samples, seed);
}

// 2 iint_{w3 < w4} W [(f1 + f2) g3 h4 - (g3 + g4) h1 f2].
inline McEstimate trilinear(const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const std::function<double(double)>& h, double w1, double L,
                            long samples, std::uint64_t seed = 11) {
    const double f1 = f(w1), h1 = h(w1);
    return mc_box([&](double w2, double w3, double w4) {
        if (!(w3 < w4)) return 0.0;
        const double v = (f1 + f(w2)) * g(w3) * h(w4) - (g(w3) + g(w4)) * h1 * f(w2);
        return 2.0 * W(w1, w2, w3, w4) * v;
    }, w1, L, samples, seed);
}

// Smooth bump supported on [a, b].
inline std::function<double(double)> bump(double a, double b, double amp = 1.0) {
    return [=](double w) {
        if (!(w > a && w < b)) return 0.0;
        const double t = (w - a) / (b - a);
        return amp * std::exp(4.0 - 1.0 / (t * (1.0 - t)));
    };
}

inline kwe::AnalyticSpectrum bump_spectrum(double a, double b, double amp = 1.0) {
    return kwe::AnalyticSpectrum(bump(a, b, amp), kwe::TailModel{0.0, kwe::kKZ, 0.0, kwe::kKZ},
                                 {kwe::Window{a, b}});
}

} // namespace oracle
