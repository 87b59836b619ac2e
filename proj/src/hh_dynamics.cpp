#include "hhsim/hh_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hhsim/errors.hpp"
#include "hhsim/parallel.hpp"
#include "hhsim/spike_detector.hpp"

namespace hhsim {

namespace {

// x / (e^x - 1), continuous at 0.
double x_over_expm1(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x / 2.0 + x2 / 12.0 - x2 * x2 / 720.0;
    }
    return x / std::expm1(x);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite potential");
}

}  // namespace

AllGateRates all_gate_rates(double v) {
    // One exponential in -0.1 v serves five of the six rates:
    // exp(-v/20) = E^(1/2), exp(-v/80) = E^(1/8).
    const double e = std::exp(-0.1 * v);
    const double e_half = std::sqrt(e);
    const double e_eighth = std::sqrt(std::sqrt(e_half));
    auto ratio = [](double x, double ex) {
        if (std::abs(x) < 1e-4) return x_over_expm1(x);
        return x / (ex - 1.0);
    };
    AllGateRates r;
    r.n = {0.1 * ratio(1.0 - 0.1 * v, 2.718281828459045 * e), 0.125 * e_eighth};
    r.m = {ratio(2.5 - 0.1 * v, 12.182493960703473 * e), 4.0 * std::exp(-v / 18.0)};
    r.h = {0.07 * e_half, 1.0 / (20.085536923187668 * e + 1.0)};
    return r;
}

GateRates gate_rates(Gate gate, double v) {
    require_finite(v, "gate_rates");
    switch (gate) {
        case Gate::n:
            // (0.1 - 0.01 v) / (exp(1 - 0.1 v) - 1) = 0.1 * x / (e^x - 1), x = 1 - 0.1 v
            return {0.1 * x_over_expm1(1.0 - 0.1 * v), 0.125 * std::exp(-v / 80.0)};
        case Gate::m:
            return {x_over_expm1(2.5 - 0.1 * v), 4.0 * std::exp(-v / 18.0)};
        case Gate::h:
            return {0.07 * std::exp(-v / 20.0), 1.0 / (std::exp(3.0 - 0.1 * v) + 1.0)};
    }
    return {};
}

double ionic_current(const BioState& s) {
    const double n2 = s.n * s.n;
    return 36.0 * n2 * n2 * (s.v + 12.0) + 120.0 * s.m * s.m * s.m * s.h * (s.v - 120.0) + 0.3 * (s.v - 10.6);
}

GatingSteadyState gating_steady_state(double v) {
    const auto rn = gate_rates(Gate::n, v);
    const auto rm = gate_rates(Gate::m, v);
    const auto rh = gate_rates(Gate::h, v);
    return {rn.alpha / (rn.alpha + rn.beta), rm.alpha / (rm.alpha + rm.beta), rh.alpha / (rh.alpha + rh.beta)};
}

double f_infinity(double v) {
    const auto g = gating_steady_state(v);
    return ionic_current({v, g.n, g.m, g.h});
}

EquilibriumPoint equilibrium_point(double a) {
    if (!(a > 0.0 && a <= 200.0)) throw DomainError("equilibrium_point: signal must lie in (0, 200]");
    double lo = -12.0;
    double hi = 120.0;
    if (!(f_infinity(lo) < a && f_infinity(hi) > a)) throw DomainError("equilibrium_point: bracket does not straddle a");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = f_infinity(mid) - a;
        if (std::abs(r) <= 1e-10 || mid == lo || mid == hi) break;
        (r < 0.0 ? lo : hi) = mid;
    }
    const auto g = gating_steady_state(mid);
    return {a, {mid, g.n, g.m, g.h}};
}

double vector_field_norm(const BioState& s, double a) {
    const auto rn = gate_rates(Gate::n, s.v);
    const auto rm = gate_rates(Gate::m, s.v);
    const auto rh = gate_rates(Gate::h, s.v);
    const double dv = a - ionic_current(s);
    const double dn = rn.alpha * (1.0 - s.n) - rn.beta * s.n;
    const double dm = rm.alpha * (1.0 - s.m) - rm.beta * s.m;
    const double dh = rh.alpha * (1.0 - s.h) - rh.beta * s.h;
    return std::max({std::abs(dv), std::abs(dn), std::abs(dm), std::abs(dh)});
}

BioState euler_bio_step(const BioState& s, double drift, double dx, double dt) {
    const auto [rn, rm, rh] = all_gate_rates(s.v);
    BioState out;
    out.v = s.v + drift * dt + dx - ionic_current(s) * dt;
    out.n = std::clamp(s.n + (rn.alpha * (1.0 - s.n) - rn.beta * s.n) * dt, 0.0, 1.0);
    out.m = std::clamp(s.m + (rm.alpha * (1.0 - s.m) - rm.beta * s.m) * dt, 0.0, 1.0);
    out.h = std::clamp(s.h + (rh.alpha * (1.0 - s.h) - rh.beta * s.h) * dt, 0.0, 1.0);
    return out;
}

BioState random_bio_state(RandomStream& rng) {
    BioState s;
    s.v = rng.uniform(-12.0, 120.0);
    s.n = rng.uniform(0.0, 1.0);
    s.m = rng.uniform(0.0, 1.0);
    s.h = rng.uniform(0.0, 1.0);
    return s;
}

DeterministicRun integrate_deterministic(const BioState& s0, double a, double dt, double t_end, double delta0) {
    if (!(dt > 0.0 && dt <= 0.01)) throw DomainError("integrate_deterministic: dt must lie in (0, 0.01]");
    if (!(t_end > 0.0)) throw DomainError("integrate_deterministic: t_end must be positive");
    const auto steps = static_cast<long long>(std::llround(t_end / dt));
    DeterministicRun run;
    SpikeDetector detector(delta0);
    BioState s = s0;
    for (long long k = 0; k < steps; ++k) {
        const BioState next = euler_bio_step(s, a, 0.0, dt);
        const double t = static_cast<double>(k + 1) * dt;
        if (!std::isfinite(next.v)) throw IntegrationBlowup(k + 1, t);
        if (auto spike = detector.observe(s.m, s.h, next.m, next.h, t)) run.spike_times.push_back(*spike);
        s = next;
    }
    run.final_state = s;
    return run;
}

AttractorVerdict classify_attractor(double a, std::uint64_t seed, const AttractorOptions& opts) {
    if (!(a > 0.0 && a <= 20.0)) throw DomainError("classify_attractor: signal must lie in (0, 20]");
    RandomStream rng(seed);
    const BioState start = random_bio_state(rng);
    const auto run = integrate_deterministic(start, a, opts.dt, opts.burn_in + opts.tail, opts.delta0);

    AttractorVerdict verdict;
    verdict.spike_count_tail = static_cast<int>(std::count_if(run.spike_times.begin(), run.spike_times.end(),
                                                              [&](double t) { return t > opts.burn_in; }));
    const BioState eq = equilibrium_point(a).state;
    const BioState& s = run.final_state;
    verdict.distance_to_equilibrium =
        std::max({std::abs(s.v - eq.v), std::abs(s.n - eq.n), std::abs(s.m - eq.m), std::abs(s.h - eq.h)});
    verdict.converged = verdict.distance_to_equilibrium <= opts.equilibrium_tolerance;
    verdict.kind = verdict.spike_count_tail >= opts.spike_threshold ? AttractorVerdict::Kind::Orbit
                                                                     : AttractorVerdict::Kind::Equilibrium;
    return verdict;
}

std::vector<double> bistability_scan(std::span<const double> a_grid, int n_trials, std::uint64_t seed,
                                     const AttractorOptions& opts, int jobs) {
    if (n_trials < 10) throw DomainError("bistability_scan: need at least 10 trials");
    const std::size_t total = a_grid.size() * static_cast<std::size_t>(n_trials);
    std::vector<char> orbit(total, 0);
    parallel_for(total, jobs, [&](std::size_t idx) {
        const std::size_t ia = idx / static_cast<std::size_t>(n_trials);
        const std::size_t trial = idx % static_cast<std::size_t>(n_trials);
        const auto v = classify_attractor(a_grid[ia], derive_seed(derive_seed(seed, ia), trial), opts);
        orbit[idx] = v.kind == AttractorVerdict::Kind::Orbit ? 1 : 0;
    });
    std::vector<double> fractions(a_grid.size(), 0.0);
    for (std::size_t idx = 0; idx < total; ++idx) fractions[idx / n_trials] += orbit[idx];
    for (auto& f : fractions) f /= n_trials;
    return fractions;
}

}  // namespace hhsim
