#include "kwe/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "kwe/collision.hpp"

namespace kwe {

namespace {

// int_0^{w0} c w^{p - a} dw, or +inf flagged.
double low_tail(double c, double a, double p, double w0, bool& divergent) {
    if (c == 0.0) return 0.0;
    const double e = p + 1.0 - a;
    if (e <= 0.0) {
        divergent = true;
        return 0.0;
    }
    return c * std::pow(w0, e) / e;
}

double high_tail(double c, double b, double p, double w1, bool& divergent) {
    if (c == 0.0) return 0.0;
    const double e = b - p - 1.0;
    if (e <= 0.0) {
        divergent = true;
        return 0.0;
    }
    return c * std::pow(w1, -e) / e;
}

Spectrum node_spectrum(const LogGrid& grid, const Eigen::VectorXd& u, const StepOptions& opt) {
    return Spectrum::with_matched_tails(grid, u, opt.alpha_low, opt.beta_high);
}

// Mass and energy as linear functionals of u: trapezoid over the nodes plus
// the tails matched to the end nodes. Zero weights when a tail diverges.
struct Invariants {
    Eigen::VectorXd mass;
    Eigen::VectorXd energy;
};

Invariants invariants(const LogGrid& grid, const StepOptions& opt) {
    const int n = grid.size();
    auto weights = [&](double p) {
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) {
            const double wt = (i == 0 || i == n - 1) ? 0.5 * grid.spacing() : grid.spacing();
            a[i] = wt * std::pow(grid.omega(i), p + 1.0 - kKZ);
        }
        const double lo = p + 1.0 - opt.alpha_low, hi = opt.beta_high - p - 1.0;
        if (lo <= 0.0 || hi <= 0.0) return Eigen::VectorXd::Zero(n).eval();
        a[0] += std::pow(grid.omega(0), p + 1.0 - kKZ) / lo;
        a[n - 1] += std::pow(grid.omega(n - 1), p + 1.0 - kKZ) / hi;
        return a;
    };
    return {weights(0.5), weights(1.5)};
}

struct Rate {
    Eigen::VectorXd k;
    double mass_defect = 0.0;   // a . k_collision / a . u
    double energy_defect = 0.0; // same for energy
};

Rate rate(const LogGrid& grid, const Eigen::VectorXd& u, const Spectrum& phi, const QuadratureConfig& q,
          const StepOptions& opt) {
    const Spectrum f = node_spectrum(grid, u, opt);
    const int n = grid.size();
    Eigen::VectorXd kc(n), kf(n);
    for (int i = 0; i < n; ++i) {
        const double w = grid.omega(i);
        kc[i] = std::pow(w, kKZ) * collision(f, w, q).total;
        kf[i] = std::pow(w, kKZ) * phi(w);
    }
    const Invariants inv = invariants(grid, opt);
    Rate r;
    const double m = inv.mass.dot(u), e = inv.energy.dot(u);
    r.mass_defect = m != 0.0 ? inv.mass.dot(kc) / m : 0.0;
    r.energy_defect = e != 0.0 ? inv.energy.dot(kc) / e : 0.0;
    if (opt.conservative) {
        Eigen::MatrixXd G(2, n);
        G.row(0) = inv.mass.transpose();
        G.row(1) = inv.energy.transpose();
        const Eigen::VectorXd d = kc.cwiseAbs();
        const Eigen::Matrix2d S = G * d.asDiagonal() * G.transpose();
        const Eigen::Vector2d lambda = S.completeOrthogonalDecomposition().solve(G * kc);
        kc -= d.asDiagonal() * (G.transpose() * lambda);
    }
    r.k = kc + kf;
    return r;
}

struct Stepped {
    StepResult res;
    Rate k_end;
};

Stepped step_impl(const EvolutionState& s, const Spectrum& phi, double dt, const Rate& r1,
                  const QuadratureConfig& q, const StepOptions& opt) {
    if (!(dt > 0.0)) throw InvalidRange("step: dt must be positive");
    const LogGrid& grid = s.f.grid();
    const Eigen::VectorXd& u = s.f.u();
    const Eigen::VectorXd& k1 = r1.k;
    int rejected = 0;
    while (true) {
        if (dt < opt.dt_min) throw StepUnderflow("step: dt below dt_min");
        const Eigen::VectorXd k2 = rate(grid, u + 0.5 * dt * k1, phi, q, opt).k;
        const Eigen::VectorXd k3 = rate(grid, u + 0.75 * dt * k2, phi, q, opt).k;
        const Eigen::VectorXd u1 = u + dt * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3);
        Rate r4 = rate(grid, u1, phi, q, opt);
        const Eigen::VectorXd err = dt * (-5.0 / 72.0 * k1 + 1.0 / 12.0 * k2 + 1.0 / 9.0 * k3 - 0.125 * r4.k);
        // atol is relative to the larger of the start and end profiles, so
        // growth from zero data is measured against its own size.
        const double scale = std::max(u.cwiseAbs().maxCoeff(), u1.cwiseAbs().maxCoeff());
        double norm = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            const double tol = opt.atol * scale + opt.rtol * std::max(std::abs(u[i]), std::abs(u1[i]));
            if (err[i] != 0.0) norm = std::max(norm, tol > 0.0 ? std::abs(err[i]) / tol : HUGE_VAL);
        }
        if (norm > 1.0) {
            dt *= 0.5;
            ++rejected;
            continue;
        }

        // Negative values in the lowest decade go to the condensate.
        Eigen::VectorXd uc = u1;
        const double x_clip = grid.x_min() + std::log(10.0);
        bool clipped = false;
        for (int i = 0; i < uc.size() && grid.x(i) <= x_clip; ++i)
            if (uc[i] < 0.0) {
                uc[i] = 0.0;
                clipped = true;
            }
        double condensate = s.condensate_mass;
        if (clipped) {
            condensate += functionals(node_spectrum(grid, u1, opt)).mass -
                          functionals(node_spectrum(grid, uc, opt)).mass;
        }

        Stepped out;
        out.res.state = make_state(node_spectrum(grid, uc, opt), s.t + dt, condensate);
        out.res.dt_used = dt;
        out.res.dt_next = dt * std::clamp(0.9 * std::cbrt(1.0 / std::max(norm, 1e-12)), 0.2, 5.0);
        out.res.rejected = rejected;
        out.k_end = clipped ? rate(grid, uc, phi, q, opt) : std::move(r4);
        return out;
    }
}

Snapshot snapshot(const EvolutionState& s, const Rate& r, const Spectrum& phi, const MonitorSpec& mon,
                  const QuadratureConfig& q) {
    Snapshot snap;
    snap.state = s;
    snap.mass_defect = r.mass_defect;
    snap.energy_defect = r.energy_defect;
    const LogGrid& g = s.f.grid();
    snap.jm_xmin = flux_mass(s.f, g.omega(0), q);
    snap.jm_xmax = flux_mass(s.f, g.omega(g.size() - 1), q);
    if (mon.profile_stride > 0) snap.profile = cascade_report(s.f, phi, q, mon.profile_stride);
    return snap;
}

} // namespace

Functionals functionals(const Spectrum& f) {
    const LogGrid& g = f.grid();
    const int n = g.size();
    const Eigen::VectorXd v = f.values();
    Functionals out;
    CompensatedSum<double> m, e, s;
    for (int i = 0; i < n; ++i) {
        const double wt = (i == 0 || i == n - 1) ? 0.5 * g.spacing() : g.spacing();
        const double w = g.omega(i);
        m.add(wt * std::pow(w, 1.5) * v[i]);
        e.add(wt * std::pow(w, 2.5) * v[i]);
        if (v[i] > 0.0) s.add(wt * std::pow(w, 1.5) * std::log(v[i]));
        else out.entropy_flagged = true;
    }
    const TailModel t = f.tails();
    const double w0 = g.omega(0), w1 = g.omega(n - 1);
    m.add(low_tail(t.c0, t.alpha, 0.5, w0, out.mass_divergent));
    m.add(high_tail(t.c_inf, t.beta, 0.5, w1, out.mass_divergent));
    e.add(low_tail(t.c0, t.alpha, 1.5, w0, out.energy_divergent));
    e.add(high_tail(t.c_inf, t.beta, 1.5, w1, out.energy_divergent));
    out.mass = m.value();
    out.energy = e.value();
    out.entropy = s.value();
    return out;
}

EvolutionState make_state(const Spectrum& f, double t, double condensate) {
    EvolutionState s;
    s.t = t;
    s.f = f;
    const Functionals fn = functionals(f);
    s.mass = fn.mass;
    s.energy = fn.energy;
    s.entropy = fn.entropy;
    s.condensate_mass = condensate;
    return s;
}

StepResult step(const EvolutionState& s, const Spectrum& phi, double dt, const QuadratureConfig& q,
                const StepOptions& opt) {
    return step_impl(s, phi, dt, rate(s.f.grid(), s.f.u(), phi, q, opt), q, opt).res;
}

EvolutionRun evolve(const Spectrum& f0, const Spectrum& phi, double t_end, const MonitorSpec& mon,
                    const QuadratureConfig& q, const StepOptions& opt) {
    if (!(t_end > 0.0)) throw InvalidRange("evolve: t_end must be positive");
    if (!(mon.cadence > 0.0)) throw InvalidRange("evolve: cadence must be positive");
    const LogGrid& grid = f0.grid();
    EvolutionRun run;
    EvolutionState s = make_state(node_spectrum(grid, f0.u(), opt));
    Rate k = rate(grid, s.f.u(), phi, q, opt);
    run.snapshots.push_back(snapshot(s, k, phi, mon, q));
    double dt = 0.25 * std::min(mon.cadence, t_end);
    double next = std::min(mon.cadence, t_end);
    while (s.t < t_end) {
        const double room = next - s.t;
        const bool hits = dt >= room;
        const Stepped st = step_impl(s, phi, hits ? room : dt, k, q, opt);
        s = st.res.state;
        k = st.k_end;
        ++run.steps;
        run.rejected += st.res.rejected;
        // Keep the controller's proposal when the step was cut short by a snapshot.
        dt = hits && st.res.rejected == 0 ? std::max(dt, st.res.dt_next) : st.res.dt_next;
        if (hits && st.res.dt_used == room) {
            s.t = next;
            run.snapshots.push_back(snapshot(s, k, phi, mon, q));
            next = std::min(next + mon.cadence, t_end);
        }
    }
    return run;
}

} // namespace kwe
