#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "kwe/grid.hpp"

namespace kwe {

struct QuadratureConfig {
    int panels_per_decade = 4;  // log-space density on spectral features
    int gauss_order = 8;        // Gauss-Legendre points per panel
    int refinement_levels = 32; // geometric panels toward each singular line
    double omega_cut_low = 1e-20;  // relative depth of the singular grading
    double omega_cut_high = 1e20;  // relative truncation of unbounded ranges
    double rel_tol = 1e-8;

    // Panel ratio of the singular grading: cut_low^(1/levels).
    double grading_ratio() const;
    void validate() const;
};

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};
const GaussRule& gauss_legendre(int order);

// Neumaier compensated sum.
template <class T>
class CompensatedSum {
public:
    void add(T v) {
        const T t = sum_ + v;
        if constexpr (std::is_floating_point_v<T>) {
            if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
            else comp_ += (v - t) + sum_;
        } else {
            comp_ += (sum_ - t) + v;
        }
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

template <std::size_t K>
struct SumArray {
    std::array<CompensatedSum<double>, K> s;
    void add(const std::array<double, K>& v, double w) {
        for (std::size_t k = 0; k < K; ++k) s[k].add(w * v[k]);
    }
    std::array<double, K> value() const {
        std::array<double, K> r{};
        for (std::size_t k = 0; k < K; ++k) r[k] = s[k].value();
        return r;
    }
};

enum class Grade { none, mild, singular };

// One integration variable on [lo, hi] (hi may be +inf).
struct RuleRequest {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    Grade grade_lo = Grade::mild;
    Grade grade_hi = Grade::mild;
    double scale = 1.0;    // span of grading and of the unbounded far field
    double lo_floor = 0.0; // singular grading toward lo > 0 stops at this distance
    double hi_floor = 0.0;
    bool truncate_lo = true; // drop the innermost panel of a singular grading at lo = 0
    double far_scale = 0.0;  // if > scale, the far field runs to far_scale * cut_high
};

// Breakpoint sets in the variable's own units: log-density windows and kinks.
struct FeatureSet {
    std::vector<Window> windows;
    std::vector<double> points;

    void add(const SpectralFunction& f);
    void add_window(double a, double b);
    void add_point(double p);
    // Image under v -> v + shift of every window/point, clipped to positives.
    FeatureSet shifted(double shift) const;
    FeatureSet mirrored(double total) const; // v -> total - v
    FeatureSet scaled(double factor, double shift) const; // v -> factor v + shift
    void merge(const FeatureSet& o);
};

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    void clear() {
        x.clear();
        w.clear();
    }
};

// Composite Gauss-Legendre rule with geometric grading and feature panels.
void build_rule(const RuleRequest& req, const FeatureSet& feats, const QuadratureConfig& q,
                Rule& out);
Rule build_rule(const RuleRequest& req, const FeatureSet& feats, const QuadratureConfig& q);

} // namespace kwe
