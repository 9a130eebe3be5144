#pragma once

#include <optional>
#include <vector>

#include "kwe/fluxes.hpp"
#include "kwe/grid.hpp"
#include "kwe/quadrature.hpp"

namespace kwe {

// Trapezoid rule in x over the nodes plus closed-form power-law tails.
// Entropy covers only the window nodes with f > 0.
struct Functionals {
    double mass = 0.0;    // int w^{1/2} f
    double energy = 0.0;  // int w^{3/2} f
    double entropy = 0.0; // int w^{1/2} log f
    bool mass_divergent = false;
    bool energy_divergent = false;
    bool entropy_flagged = false; // some node has f <= 0
};

Functionals functionals(const Spectrum& f);

struct EvolutionState {
    double t = 0.0;
    Spectrum f;
    double mass = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double condensate_mass = 0.0; // mass removed by clipping at the lowest decade
};

EvolutionState make_state(const Spectrum& f, double t = 0.0, double condensate = 0.0);

struct StepOptions {
    double rtol = 1e-6;
    double atol = 1e-12; // relative to max |u| at either end of the step
    double dt_min = 1e-12;
    // Tail exponents attached to the evolving node values: f ~ w^0 below the
    // window (the collision tends to a constant there), steep decay above.
    double alpha_low = 0.0;
    double beta_high = 4.0;
    // Remove the mass and energy production left by the node quadrature with
    // the smallest correction weighted by |rate|.
    bool conservative = true;
};

struct StepResult {
    EvolutionState state;
    double dt_used = 0.0;
    double dt_next = 0.0;
    int rejected = 0;
};

// One accepted Bogacki-Shampine 3(2) step of du/dt = w^{7/6} (C(f) + phi),
// starting from dt and halving on rejection.
StepResult step(const EvolutionState& s, const Spectrum& phi, double dt, const QuadratureConfig& q,
                const StepOptions& opt = {});

struct MonitorSpec {
    double cadence = 0.1;
    int profile_stride = 0; // > 0: attach a FluxProfile at that stride
};

struct Snapshot {
    EvolutionState state;
    double jm_xmin = 0.0;
    double jm_xmax = 0.0;
    // Mass and energy production of the uncorrected collision rate, relative
    // to the current mass and energy.
    double mass_defect = 0.0;
    double energy_defect = 0.0;
    std::optional<FluxProfile> profile;
};

struct EvolutionRun {
    std::vector<Snapshot> snapshots; // t = 0, each cadence crossing, t_end
    int steps = 0;
    int rejected = 0;
};

EvolutionRun evolve(const Spectrum& f0, const Spectrum& phi, double t_end, const MonitorSpec& mon,
                    const QuadratureConfig& q, const StepOptions& opt = {});

} // namespace kwe
