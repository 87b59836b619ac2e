#include "hhsim/stochastic_neuron.hpp"

#include <algorithm>
#include <cmath>

#include "hhsim/errors.hpp"

namespace hhsim {

void validate(const NoiseParams& p) {
    if (!(p.tau > 0.0)) throw DomainError("noise: tau must be positive");
    if (!(p.sigma >= 0.0)) throw DomainError("noise: sigma must be non-negative");
    if (!std::isfinite(p.theta)) throw DomainError("noise: theta must be finite");
}

double ou_step(double x, const NoiseParams& p, double dt, double gaussian) {
    return x - p.tau * x * dt + p.sigma * std::sqrt(dt) * gaussian;
}

double ou_step_exact(double x, const NoiseParams& p, double dt, double gaussian) {
    const double decay = std::exp(-p.tau * dt);
    return x * decay + p.sigma * std::sqrt(-std::expm1(-2.0 * p.tau * dt) / (2.0 * p.tau)) * gaussian;
}

FullState neuron_step(const FullState& s, double drift, const NoiseParams& p, double dt, double gaussian,
                      OuScheme scheme) {
    const double x_next =
        scheme == OuScheme::EulerMaruyama ? ou_step(s.x, p, dt, gaussian) : ou_step_exact(s.x, p, dt, gaussian);
    return {euler_bio_step(s.bio, drift, x_next - s.x, dt), x_next};
}

FullState draw_stationary_start(RandomStream& rng, const NoiseParams& p) {
    FullState s;
    s.x = std::sqrt(p.stationary_variance()) * rng.gaussian();
    s.bio = random_bio_state(rng);
    return s;
}

std::size_t SpikeTrain::count_up_to(double t) const {
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

NeuronRun simulate_neuron(const NoiseParams& p, const SimulationOptions& opts, std::uint64_t seed,
                          const InitialCondition& init) {
    validate(p);
    if (!(opts.t_end > 0.0)) throw DomainError("simulate_neuron: t_end must be positive");
    if (!(opts.dt > 0.0)) throw DomainError("simulate_neuron: dt must be positive");
    if (!(opts.burn_in >= 0.0)) throw DomainError("simulate_neuron: burn_in must be non-negative");

    RandomStream rng(seed);
    FullState s = std::holds_alternative<FullState>(init) ? std::get<FullState>(init) : draw_stationary_start(rng, p);

    const auto burn_steps = static_cast<long long>(std::llround(opts.burn_in / opts.dt));
    const auto steps = burn_steps + static_cast<long long>(std::llround(opts.t_end / opts.dt));

    NeuronRun run;
    run.train.horizon = opts.t_end;
    run.train.delta0 = opts.delta0;
    SpikeDetector detector(opts.delta0);
    if (opts.record_every > 0 && burn_steps == 0) run.trajectory.push_back({0.0, s});

    for (long long k = 0; k < steps; ++k) {
        const FullState next = neuron_step(s, p.theta, p, opts.dt, rng.gaussian(), opts.ou);
        const long long step = k + 1;
        // Absolute grid time; spikes and samples are reported relative to the burn-in end.
        const double t = static_cast<double>(step) * opts.dt;
        if (!std::isfinite(next.bio.v) || !std::isfinite(next.x)) throw IntegrationBlowup(step, t);
        const auto spike = detector.observe(s.bio.m, s.bio.h, next.bio.m, next.bio.h, t);
        s = next;
        if (step <= burn_steps) continue;
        const double t_rel = static_cast<double>(step - burn_steps) * opts.dt;
        if (spike) run.train.times.push_back(t_rel);
        if (opts.record_every > 0 && (step - burn_steps) % opts.record_every == 0) run.trajectory.push_back({t_rel, s});
    }
    run.final_state = s;
    return run;
}

OutputPath::OutputPath(const SpikeTrain& train, double c1, double u0) : c1_(c1), u0_(u0), times_(train.times) {
    if (!(c1 > 0.0)) throw DomainError("output_path: c1 must be positive");
    if (!(u0 >= 0.0)) throw DomainError("output_path: u0 must be non-negative");
    pre_.reserve(times_.size());
    post_.reserve(times_.size());
    double last_t = 0.0;
    double last_u = u0;
    for (double t : times_) {
        const double before = last_u * std::exp(-c1 * (t - last_t));
        pre_.push_back(before);
        post_.push_back(before + 1.0);
        last_t = t;
        last_u = before + 1.0;
    }
}

double OutputPath::value_at(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return u0_ * std::exp(-c1_ * t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    return post_[k] * std::exp(-c1_ * (t - times_[k]));
}

std::vector<double> OutputPath::sample(double step, double t_end) const {
    if (!(step > 0.0)) throw DomainError("OutputPath::sample: step must be positive");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor(t_end / step + 1e-9));
    out.reserve(static_cast<std::size_t>(n + 1));
    for (long long k = 0; k <= n; ++k) out.push_back(value_at(static_cast<double>(k) * step));
    return out;
}

OutputPath output_path(const SpikeTrain& train, double c1, double u0) { return OutputPath(train, c1, u0); }

}  // namespace hhsim
