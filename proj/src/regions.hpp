#pragma once

// Internal: 2D integration over the ordered resonant domain w3 < w4 with
// w2 = w3 + w4 - w1 > 0, split by which of w1, w2, w3 is smallest.
// Every sub-domain is parametrized by offsets so that differences of nearby
// frequencies are never formed by subtraction.

#include <array>
#include <cmath>
#include <limits>

#include "kwe/quadrature.hpp"

namespace kwe::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// eval(w2, w3, w4) -> std::array<double, K>; result is sum over regions of
// int W * eval, per region.
template <std::size_t K, class Eval>
std::array<std::array<double, K>, 3> ordered_regions(double w1, const FeatureSet& fs,
                                                     const QuadratureConfig& q, Eval&& eval) {
    std::array<SumArray<K>, 3> acc;
    thread_local Rule outer, inner;

    // Region 1: w1 < w3 < w4. w3 = w1 + a, w4 = w3 + b, W = 1.
    {
        FeatureSet fo = fs.shifted(-w1);
        fo.merge(fs.scaled(0.5, -0.5 * w1));
        build_rule({0.0, kInf, Grade::mild, Grade::mild, w1}, fo, q, outer);
        for (std::size_t i = 0; i < outer.x.size(); ++i) {
            const double a = outer.x[i];
            const double w3 = w1 + a;
            FeatureSet fi = fs.shifted(-w3);
            fi.merge(fs.shifted(-(w1 + 2.0 * a)));
            build_rule({0.0, kInf, Grade::mild, Grade::mild, w3}, fi, q, inner);
            SumArray<K> in;
            for (std::size_t j = 0; j < inner.x.size(); ++j) {
                const double b = inner.x[j];
                in.add(eval(w1 + 2.0 * a + b, w3, w3 + b), inner.w[j]);
            }
            acc[0].add(in.value(), outer.w[i]);
        }
    }

    // Region 2: w2 < w1 and w2 < w3 < w4. w3 = w2 + s, w4 = w1 - s,
    // s in (0, (w1 - w2) / 2), W = sqrt(w2 / w1).
    {
        FeatureSet fo = fs;
        fo.merge(fs.scaled(2.0, -w1));
        RuleRequest ro{0.0, w1, Grade::singular, Grade::mild, w1};
        build_rule(ro, fo, q, outer);
        for (std::size_t i = 0; i < outer.x.size(); ++i) {
            const double w2 = outer.x[i];
            const double len = 0.5 * (w1 - w2);
            FeatureSet fi = fs.shifted(-w2);
            fi.merge(fs.mirrored(w1));
            RuleRequest ri{0.0, len, Grade::singular, Grade::mild, len};
            ri.lo_floor = 0.01 * w2;
            ri.truncate_lo = false;
            build_rule(ri, fi, q, inner);
            SumArray<K> in;
            for (std::size_t j = 0; j < inner.x.size(); ++j) {
                const double s = inner.x[j];
                in.add(eval(w2, w2 + s, w1 - s), inner.w[j]);
            }
            acc[1].add(in.value(), outer.w[i] * std::sqrt(w2 / w1));
        }
    }

    // Region 3: w3 < w1 < w4. w4 = w1 + t, w2 = w3 + t, W = sqrt(w3 / w1).
    {
        RuleRequest ro{0.0, w1, Grade::singular, Grade::mild, w1};
        build_rule(ro, fs, q, outer);
        for (std::size_t i = 0; i < outer.x.size(); ++i) {
            const double w3 = outer.x[i];
            FeatureSet fi = fs.shifted(-w1);
            fi.merge(fs.shifted(-w3));
            RuleRequest ri{0.0, kInf, Grade::singular, Grade::mild, w1};
            ri.lo_floor = 0.01 * w3;
            ri.truncate_lo = false;
            build_rule(ri, fi, q, inner);
            SumArray<K> in;
            for (std::size_t j = 0; j < inner.x.size(); ++j) {
                const double t = inner.x[j];
                in.add(eval(w3 + t, w3, w1 + t), inner.w[j]);
            }
            acc[2].add(in.value(), outer.w[i] * std::sqrt(w3 / w1));
        }
    }

    return {acc[0].value(), acc[1].value(), acc[2].value()};
}

} // namespace kwe::detail
