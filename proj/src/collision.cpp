#include "kwe/collision.hpp"

#include <algorithm>
#include <cmath>

#include "regions.hpp"

namespace kwe {

using detail::kInf;

double kernel_W(double w1, double w2, double w3, double w4) {
    if (!(w1 > 0.0) || w2 < 0.0 || w3 < 0.0 || w4 < 0.0)
        throw DomainError("kernel_W: frequencies must be nonnegative with w1 > 0");
    return std::sqrt(std::min(std::min(w1, w2), std::min(w3, w4)) / w1);
}

bool check_locality(const SpectralFunction& f) {
    const TailModel t = f.tails();
    if (t.c0 != 0.0 && !(t.alpha < kAlphaMax))
        throw LocalityViolation("spectrum decays too slowly at small omega (alpha >= 5/4)");
    if (t.c_inf != 0.0 && t.beta < kBetaMin)
        throw LocalityViolation("spectrum decays too slowly at large omega (beta < 1)");
    return t.c_inf != 0.0 && t.beta == kBetaMin;
}

namespace {

void check_point(double w1) {
    if (!(w1 > 0.0) || !std::isfinite(w1)) throw DomainError("collision evaluated at omega <= 0");
}

} // namespace

CollisionSplit collision(const SpectralFunction& f, double w1, const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    CollisionSplit out;
    out.boundary = check_locality(f);
    FeatureSet fs;
    fs.add(f);
    const double f1 = f(w1);
    auto r = detail::ordered_regions<2>(w1, fs, q, [&](double w2, double w3, double w4) {
        const double f2 = f(w2), f3 = f(w3), f4 = f(w4);
        const double gain = (f1 + f2) * f3 * f4;
        return std::array<double, 2>{gain - (f3 + f4) * f1 * f2, gain};
    });
    // Ordered domain covers half of the symmetric integrand.
    out.c1 = 2.0 * r[0][0];
    out.c2 = 2.0 * r[1][0];
    out.c3 = 2.0 * r[2][0];
    CompensatedSum<double> tot;
    tot.add(out.c1);
    tot.add(out.c2);
    tot.add(out.c3);
    out.total = tot.value();
    out.positive_part = 2.0 * (r[0][1] + r[1][1] + r[2][1]);
    return out;
}

namespace {

FeatureSet features_of(const SpectralFunction& f, const SpectralFunction& g,
                       const SpectralFunction& h) {
    FeatureSet fs;
    fs.add(f);
    fs.add(g);
    fs.add(h);
    return fs;
}

} // namespace

double collision_trilinear(const SpectralFunction& f, const SpectralFunction& g,
                           const SpectralFunction& h, double w1, const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    check_locality(f);
    check_locality(g);
    check_locality(h);
    const FeatureSet fs = features_of(f, g, h);
    const double f1 = f(w1), h1 = h(w1);
    auto r = detail::ordered_regions<1>(w1, fs, q, [&](double w2, double w3, double w4) {
        const double f2 = f(w2);
        return std::array<double, 1>{(f1 + f2) * g(w3) * h(w4) - (g(w3) + g(w4)) * h1 * f2};
    });
    CompensatedSum<double> s;
    for (const auto& v : r) s.add(2.0 * v[0]);
    return s.value();
}

double collision_sym(const SpectralFunction& f, const SpectralFunction& g,
                     const SpectralFunction& h, double w1, const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    check_locality(f);
    check_locality(g);
    check_locality(h);
    const FeatureSet fs = features_of(f, g, h);
    const SpectralFunction* s[3] = {&f, &g, &h};
    double v1[3];
    for (int k = 0; k < 3; ++k) v1[k] = (*s[k])(w1);
    static constexpr int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    auto r = detail::ordered_regions<1>(w1, fs, q, [&](double w2, double w3, double w4) {
        double v2[3], v3[3], v4[3];
        for (int k = 0; k < 3; ++k) {
            v2[k] = (*s[k])(w2);
            v3[k] = (*s[k])(w3);
            v4[k] = (*s[k])(w4);
        }
        std::array<double, 6> t;
        for (int p = 0; p < 6; ++p) {
            const int a = perm[p][0], b = perm[p][1], c = perm[p][2];
            t[p] = (v1[a] + v2[a]) * v3[b] * v4[c] - (v3[b] + v4[b]) * v1[c] * v2[a];
        }
        // Sorting makes the sum independent of the argument order.
        std::sort(t.begin(), t.end());
        double sum = 0.0;
        for (double x : t) sum += x;
        return std::array<double, 1>{sum / 6.0};
    });
    CompensatedSum<double> acc;
    for (const auto& v : r) acc.add(2.0 * v[0]);
    return acc.value();
}

std::vector<double> collision_sym_terms(const std::vector<const SpectralFunction*>& args,
                                        const std::vector<std::array<int, 3>>& terms, double w1,
                                        const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    const int na = static_cast<int>(args.size());
    const int nt = static_cast<int>(terms.size());
    if (na < 1 || na > 4 || nt > kMaxSymTerms)
        throw InvalidRange("collision_sym_terms: at most 4 arguments and 8 terms");
    FeatureSet fs;
    for (const auto* a : args) {
        check_locality(*a);
        fs.add(*a);
    }
    for (const auto& t : terms)
        for (int k : t)
            if (k < 0 || k >= na) throw InvalidRange("collision_sym_terms: argument index");
    double v1[4];
    for (int k = 0; k < na; ++k) v1[k] = (*args[k])(w1);
    static constexpr int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    auto r = detail::ordered_regions<kMaxSymTerms>(w1, fs, q, [&](double w2, double w3, double w4) {
        double v2[4], v3[4], v4[4];
        for (int k = 0; k < na; ++k) {
            v2[k] = (*args[k])(w2);
            v3[k] = (*args[k])(w3);
            v4[k] = (*args[k])(w4);
        }
        std::array<double, kMaxSymTerms> out{};
        for (int i = 0; i < nt; ++i) {
            std::array<double, 6> t;
            for (int p = 0; p < 6; ++p) {
                const int a = terms[i][perm[p][0]], b = terms[i][perm[p][1]], c = terms[i][perm[p][2]];
                t[p] = (v1[a] + v2[a]) * v3[b] * v4[c] - (v3[b] + v4[b]) * v1[c] * v2[a];
            }
            std::sort(t.begin(), t.end());
            double sum = 0.0;
            for (double x : t) sum += x;
            out[i] = sum / 6.0;
        }
        return out;
    });
    std::vector<double> out(nt);
    for (int i = 0; i < nt; ++i) {
        CompensatedSum<double> acc;
        for (const auto& v : r) acc.add(2.0 * v[i]);
        out[i] = acc.value();
    }
    return out;
}

double trilinear_magnitude(const SpectralFunction& f, const SpectralFunction& g,
                           const SpectralFunction& h, double w1, const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    check_locality(f);
    check_locality(g);
    check_locality(h);
    const FeatureSet fs = features_of(f, g, h);
    const double f1 = f(w1), h1 = h(w1);
    auto r = detail::ordered_regions<1>(w1, fs, q, [&](double w2, double w3, double w4) {
        const double f2 = f(w2), g3 = g(w3), g4 = g(w4);
        return std::array<double, 1>{std::abs((f1 + f2) * g3 * h(w4)) +
                                     std::abs((g3 + g4) * h1 * f2)};
    });
    return 2.0 * (r[0][0] + r[1][0] + r[2][0]);
}

ScalingCheck scaling_check(const Spectrum& f, double lambda, double w, const QuadratureConfig& q) {
    if (!(lambda > 0.0)) throw InvalidRange("scaling_check: lambda must be positive");
    const Spectrum fl = rescale(f, lambda);
    const CollisionSplit a = collision(fl, w, q);
    const CollisionSplit b = collision(f, lambda * w, q);
    ScalingCheck out;
    out.lhs = a.total;
    out.rhs = b.total / (lambda * lambda);
    const double scale = std::max(a.positive_part, b.positive_part / (lambda * lambda));
    out.rel_error = std::abs(out.lhs - out.rhs) / scale;
    return out;
}

double weak_pairing(const SpectralFunction& f, const SpectralFunction& phi,
                    const QuadratureConfig& q) {
    q.validate();
    check_locality(f);
    // 2 int_{w1<w2, w3<w4} min(sqrt w1, sqrt w3) f1 f2 (f3 + f4) (phi3 + phi4 - phi1 - phi2)
    // with s = w1 + w2 = w3 + w4, w1, w3 in (0, s/2).
    FeatureSet fs;
    fs.add(f);
    fs.add(phi);
    FeatureSet fouter = fs;
    fouter.merge(fs.scaled(2.0, 0.0));
    const Rule rs = build_rule({0.0, kInf, Grade::singular, Grade::mild, 1.0}, fouter, q);
    CompensatedSum<double> total;
    Rule r1, r3;
    for (std::size_t i = 0; i < rs.x.size(); ++i) {
        const double s = rs.x[i];
        const double half = 0.5 * s;
        FeatureSet fi = fs;
        fi.merge(fs.mirrored(s));
        build_rule({0.0, half, Grade::singular, Grade::mild, half}, fi, q, r1);
        CompensatedSum<double> mid;
        for (std::size_t j = 0; j < r1.x.size(); ++j) {
            const double w1 = r1.x[j], w2 = s - w1;
            const double f12 = f(w1) * f(w2);
            const double p12 = phi(w1) + phi(w2);
            FeatureSet fk = fi;
            fk.add_point(w1);
            build_rule({0.0, half, Grade::singular, Grade::mild, half}, fk, q, r3);
            CompensatedSum<double> in;
            for (std::size_t k = 0; k < r3.x.size(); ++k) {
                const double w3 = r3.x[k], w4 = s - w3;
                const double m = std::sqrt(std::min(w1, w3));
                in.add(r3.w[k] * m * (f(w3) + f(w4)) * ((phi(w3) + phi(w4)) - p12));
            }
            mid.add(r1.w[j] * f12 * in.value());
        }
        total.add(rs.w[i] * mid.value());
    }
    return 2.0 * total.value();
}

ZakharovResult zakharov_delta1(double alpha, double w1, const QuadratureConfig& q) {
    check_point(w1);
    q.validate();
    const double gam = 3.0 * alpha + 3.5;
    // Triangle: w3 in (0, w1), w2 in (0, w3), w4 = w1 - w3 + w2. Here w2 is
    // always the smallest, so W = sqrt(w2 / w1).
    RuleRequest ro{0.0, w1, Grade::singular, Grade::singular, w1};
    const Rule outer = build_rule(ro, FeatureSet{}, q);
    CompensatedSum<double> val, mag, absv, deep;
    Rule inner;
    for (std::size_t i = 0; i < outer.x.size(); ++i) {
        const double w3 = outer.x[i];
        const double gap = w1 - w3; // w4 - w2
        RuleRequest ri{0.0, w3, Grade::singular, Grade::singular, w3};
        ri.lo_floor = std::min(w3, gap) * q.omega_cut_low;
        const FeatureSet fi = [&] {
            FeatureSet f;
            f.add_point(gap);
            return f;
        }();
        build_rule(ri, fi, q, inner);
        CompensatedSum<double> v_in, m_in, a_in, d_in;
        for (std::size_t j = 0; j < inner.x.size(); ++j) {
            const double w2 = inner.x[j];
            const double w4 = gap + w2;
            const double W = std::sqrt(w2 / w1);
            const double t = std::pow(w1 * w2 * w3 * w4, alpha);
            const double p1 = std::pow(w1, -alpha), p2 = std::pow(w2, -alpha), p3 = std::pow(w3, -alpha),
                         p4 = std::pow(w4, -alpha);
            const double b1 = (p1 + p2) - (p3 + p4);
            const double s1 = p1 + p2 + p3 + p4;
            const double q2 = std::pow(w1 / w2, gam), q3 = std::pow(w1 / w3, gam),
                         q4 = std::pow(w1 / w4, gam);
            const double b2 = (1.0 + q2) - (q3 + q4);
            const double s2 = 1.0 + q2 + q3 + q4;
            const double v = W * t * b1 * b2;
            const double m = 0.5 * W * std::abs(t) * (std::abs(b1) * s2 + s1 * std::abs(b2));
            v_in.add(inner.w[j] * v);
            m_in.add(inner.w[j] * m);
            a_in.add(inner.w[j] * std::abs(v));
            if (std::min({w2, w3, w4}) < 1e-12 * w1) d_in.add(inner.w[j] * std::abs(v));
        }
        val.add(outer.w[i] * v_in.value());
        mag.add(outer.w[i] * m_in.value());
        absv.add(outer.w[i] * a_in.value());
        deep.add(outer.w[i] * d_in.value());
    }
    ZakharovResult out;
    out.value = val.value();
    out.scale = mag.value();
    // Endpoint test on the signed integrand: a convergent one leaves almost
    // nothing below 1e-12. Pointwise cancellation (roundoff only) passes.
    const double a = absv.value();
    const bool cancels = a <= 1e-10 * out.scale;
    out.divergent = !std::isfinite(out.scale) || (!cancels && !(deep.value() <= 1e-2 * a));
    return out;
}

} // namespace kwe
