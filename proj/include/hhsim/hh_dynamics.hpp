#pragma once

#include <cstdint>
#include "hhsim/rng.hpp"
#include <span>
#include <vector>

namespace hhsim {

enum class Gate { n, m, h };

struct GateRates {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Membrane potential and gating variables (V, n, m, h).
struct BioState {
    double v = 0.0;
    double n = 0.0;
    double m = 0.0;
    double h = 0.0;

    friend bool operator==(const BioState&, const BioState&) = default;
};

struct GatingSteadyState {
    double n = 0.0;
    double m = 0.0;
    double h = 0.0;
};

struct EquilibriumPoint {
    double signal = 0.0;
    BioState state;
};

/// Opening/closing rates of one gate. Removable singularities of alpha_n at
/// v = 10 and alpha_m at v = 25 are evaluated through x/(e^x - 1).
GateRates gate_rates(Gate gate, double v);

struct AllGateRates {
    GateRates n;
    GateRates m;
    GateRates h;
};

/// All six rates from two exponentials; agrees with gate_rates to rounding.
/// Used on the integration hot path.
AllGateRates all_gate_rates(double v);

/// F(v,n,m,h) = 36 n^4 (v+12) + 120 m^3 h (v-120) + 0.3 (v-10.6)
double ionic_current(const BioState& s);

GatingSteadyState gating_steady_state(double v);

/// F evaluated along the steady-state gating curve.
double f_infinity(double v);

/// Solves F_inf(v) = a by bisection on [-12, 120].
EquilibriumPoint equilibrium_point(double a);

/// Sup-norm of the deterministic vector field at s for signal a.
double vector_field_norm(const BioState& s, double a);

/// One explicit Euler step: V += drift*dt + dx - F*dt, gating clamped to [0,1].
/// Shared by the deterministic and the stochastic integrators.
BioState euler_bio_step(const BioState& s, double drift, double dx, double dt);

/// Uniform draw on (-12,120) x (0,1)^3.
BioState random_bio_state(RandomStream& rng);

struct DeterministicRun {
    BioState final_state;
    std::vector<double> spike_times;
};

/// Explicit Euler integration of the deterministic system with constant signal a.
DeterministicRun integrate_deterministic(const BioState& s0, double a, double dt, double t_end,
                                         double delta0 = 1.0);

struct AttractorOptions {
    double dt = 0.001;
    double burn_in = 1000.0;
    double tail = 1000.0;
    int spike_threshold = 3;
    double equilibrium_tolerance = 1e-3;
    double delta0 = 1.0;
};

struct AttractorVerdict {
    enum class Kind { Equilibrium, Orbit };
    Kind kind = Kind::Equilibrium;
    int spike_count_tail = 0;
    double distance_to_equilibrium = 0.0;
    /// distance_to_equilibrium <= equilibrium_tolerance
    bool converged = false;
};

AttractorVerdict classify_attractor(double a, std::uint64_t seed, const AttractorOptions& opts = {});

/// Fraction of random starts attracted by the orbit, per signal value.
std::vector<double> bistability_scan(std::span<const double> a_grid, int n_trials, std::uint64_t seed,
                                     const AttractorOptions& opts = {}, int jobs = 1);

}  // namespace hhsim
