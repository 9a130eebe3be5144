#pragma once

#include <array>
#include <vector>

#include "kwe/grid.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

// Locality window: alpha < 5/4 and beta > 1 for every nonzero tail.
inline constexpr double kAlphaMax = 1.25;
inline constexpr double kBetaMin = 1.0;

// min(sqrt w1, sqrt w2, sqrt w3, sqrt w4) / sqrt w1.
double kernel_W(double w1, double w2, double w3, double w4);

// Contributions of the three sub-domains where w1, w2 or w3 is the smallest
// frequency. positive_part is the gain integral used for normalization.
struct CollisionSplit {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double total = 0.0;
    double positive_part = 0.0;
    bool boundary = false; // an input sits on the edge of the locality window

    double normalized() const { return positive_part > 0.0 ? total / positive_part : total; }
};

CollisionSplit collision(const SpectralFunction& f, double w1, const QuadratureConfig& q);

// Trilinear form over the ordered domain w3 < w4:
// 2 iint W [(f1 + f2) g3 h4 - (g3 + g4) h1 f2].
double collision_trilinear(const SpectralFunction& f, const SpectralFunction& g,
                           const SpectralFunction& h, double w1, const QuadratureConfig& q);

// Average of the trilinear form over the six orderings of (f, g, h).
double collision_sym(const SpectralFunction& f, const SpectralFunction& g,
                     const SpectralFunction& h, double w1, const QuadratureConfig& q);

// Several symmetrized forms collision_sym(args[t[0]], args[t[1]], args[t[2]])
// sharing one quadrature pass. At most kMaxSymTerms terms and four arguments.
inline constexpr int kMaxSymTerms = 8;
std::vector<double> collision_sym_terms(const std::vector<const SpectralFunction*>& args,
                                        const std::vector<std::array<int, 3>>& terms, double w1,
                                        const QuadratureConfig& q);

// Same ordered-domain integral with every term taken in absolute value.
double trilinear_magnitude(const SpectralFunction& f, const SpectralFunction& g,
                           const SpectralFunction& h, double w1, const QuadratureConfig& q);

struct ScalingCheck {
    double lhs = 0.0;       // C[f(lambda .)](w)
    double rhs = 0.0;       // lambda^{-2} C[f](lambda w)
    double rel_error = 0.0; // relative to the positive part
};

ScalingCheck scaling_check(const Spectrum& f, double lambda, double w, const QuadratureConfig& q);

// int sqrt(w) C(f)(w) phi(w) dw through the symmetrized weak form.
double weak_pairing(const SpectralFunction& f, const SpectralFunction& phi,
                    const QuadratureConfig& q);

struct ZakharovResult {
    double value = 0.0;
    double scale = 0.0; // positive-part magnitude, used for normalization
    bool divergent = false;
};

// Conformally mapped integral for f = w^alpha over the triangle where all
// of w2, w3, w4 lie below w1.
ZakharovResult zakharov_delta1(double alpha, double w1, const QuadratureConfig& q);

// Throws LocalityViolation outside the window; returns true on its boundary.
bool check_locality(const SpectralFunction& f);

} // namespace kwe
