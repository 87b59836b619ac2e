#include "hhsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "hhsim/errors.hpp"
#include "hhsim/regime_classifiers.hpp"

namespace hhsim {

std::vector<int> BlockLayout::inhibitory_indices() const {
    std::vector<int> out;
    for (int b = 0; b < blocks; ++b) out.push_back(b * block_size);
    return out;
}

void validate(const BlockLayout& layout, int min_block_size) {
    if (layout.blocks < 3) throw ConfigError("circuit: block count M must be at least 3");
    if (layout.blocks % 2 == 0) throw ConfigError("circuit: block count M must be odd");
    if (layout.block_size < min_block_size)
        throw ConfigError("circuit: block size L must be at least " + std::to_string(min_block_size));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TransmissionParams TransmissionParams::from_benchmarks(double theta1, double theta2, double delta_star, double c1) {
    const OutputBenchmarks b = output_benchmarks(delta_star, c1);
    return {theta1, theta2, b.u1, b.u2};
}

double psi_star(double x, const TransmissionParams& p) { return normal_cdf((x - p.psi_mean()) / p.psi_sd()); }

void validate(const TransmissionParams& p) {
    if (!std::isfinite(p.theta1) || !std::isfinite(p.theta2) || !(p.theta1 < p.theta2))
        throw ConfigError("transmission: need finite theta1 < theta2");
    if (!(p.u1_star > 1.0) || !std::isfinite(p.u1_star)) throw ConfigError("transmission: u1* must exceed 1");
    if (!(psi_star(1.0, p) < 0.025)) throw ConfigError("transmission: Psi*(1) must be below 0.025");
    if (!(psi_star(p.u1_star, p) > 0.975)) throw ConfigError("transmission: Psi*(u1*) must exceed 0.975");
}

double transmission(Coupling kind, double u, const TransmissionParams& p) {
    const double span = (p.theta2 - p.theta1) * psi_star(u, p);
    return kind == Coupling::Excitatory ? p.theta1 + span : p.theta2 - span;
}

Circuit::Circuit(CircuitSpec spec) : spec_(std::move(spec)) {
    validate(spec_.layout);
    validate(spec_.transmission);
    validate(NoiseParams{0.0, spec_.tau, spec_.sigma});
    if (!(spec_.c1 > 0.0)) throw ConfigError("circuit: c1 must be positive");
    if (!(spec_.dt > 0.0 && spec_.dt <= 0.01)) throw ConfigError("circuit: dt must lie in (0, 0.01]");
    if (!(spec_.delta0 > 0.0)) throw ConfigError("circuit: delta0 must be positive");
    if (spec_.record_every < 0) throw ConfigError("circuit: record_every must be non-negative");
}

double Circuit::drive(int i, double u) const {
    if (spec_.constant_drive) return *spec_.constant_drive;
    return transmission(coupling(i), u, spec_.transmission);
}

Circuit build_circuit(const CircuitSpec& spec) { return Circuit(spec); }

namespace {

void refresh_drives(const Circuit& circuit, CircuitState& state) {
    const int n = circuit.size();
    for (int i = 0; i < n; ++i) state.drives[i] = circuit.drive(i, state.outputs[circuit.predecessor(i)]);
}

}  // namespace

CircuitState init_circuit(const Circuit& circuit) {
    const auto& spec = circuit.spec();
    const int n = circuit.size();
    const NoiseParams noise = circuit.noise();
    CircuitState state;
    state.neurons.reserve(n);
    state.streams.reserve(n);
    for (int i = 0; i < n; ++i) {
        state.streams.emplace_back(circuit.neuron_seed(i));
        state.neurons.push_back(draw_stationary_start(state.streams.back(), noise));
        state.detectors.emplace_back(spec.delta0);
    }
    state.outputs.assign(n, 0.0);
    if (spec.init == InitScenario::UniformOutputs) {
        RandomStream rng(derive_seed(spec.seed, std::numeric_limits<std::uint64_t>::max()));
        for (double& u : state.outputs) {
            do u = rng.uniform(1.0, spec.transmission.u1_star);
            while (u <= 1.0);
        }
    }
    state.drives.assign(n, 0.0);
    refresh_drives(circuit, state);
    return state;
}

std::vector<int> step_circuit(const Circuit& circuit, CircuitState& state) {
    const auto& spec = circuit.spec();
    const int n = circuit.size();
    const NoiseParams noise = circuit.noise();
    refresh_drives(circuit, state);
    const long long step = state.step + 1;
    const double t = static_cast<double>(step) * spec.dt;
    std::vector<int> spiked;
    for (int i = 0; i < n; ++i) {
        const FullState& s = state.neurons[i];
        const FullState next = neuron_step(s, state.drives[i], noise, spec.dt, state.streams[i].gaussian());
        if (!std::isfinite(next.bio.v) || !std::isfinite(next.x)) throw IntegrationBlowup(step, t, i);
        if (state.detectors[i].observe(s.bio.m, s.bio.h, next.bio.m, next.bio.h, t)) spiked.push_back(i);
        state.neurons[i] = next;
    }
    const double decay = std::exp(-spec.c1 * spec.dt);
    for (double& u : state.outputs) u *= decay;
    for (int i : spiked) state.outputs[i] += 1.0;
    state.step = step;
    state.t = t;
    return spiked;
}

CircuitRun run_circuit(const Circuit& circuit, double t_end) {
    if (!(t_end > 0.0)) throw DomainError("run_circuit: t_end must be positive");
    const auto& spec = circuit.spec();
    const int n = circuit.size();
    CircuitState state = init_circuit(circuit);
    const std::vector<double> u0 = state.outputs;

    CircuitRun run;
    run.trains.resize(n);
    for (auto& train : run.trains) {
        train.horizon = t_end;
        train.delta0 = spec.delta0;
    }
    run.drive_samples.resize(n);
    run.output_samples.resize(n);
    run.min_drive = std::numeric_limits<double>::infinity();
    run.max_drive = -std::numeric_limits<double>::infinity();

    auto record = [&](double t) {
        run.sample_times.push_back(t);
        for (int i = 0; i < n; ++i) {
            run.drive_samples[i].push_back(state.drives[i]);
            run.output_samples[i].push_back(state.outputs[i]);
        }
    };
    if (spec.record_every > 0) record(0.0);

    const auto steps = static_cast<long long>(std::llround(t_end / spec.dt));
    for (long long k = 0; k < steps; ++k) {
        const auto spiked = step_circuit(circuit, state);
        for (int i : spiked) run.trains[i].times.push_back(state.t);
        const auto [lo, hi] = std::minmax_element(state.drives.begin(), state.drives.end());
        run.min_drive = std::min(run.min_drive, *lo);
        run.max_drive = std::max(run.max_drive, *hi);
        if (spec.record_every > 0 && state.step % spec.record_every == 0) {
            // Sample the input that will act on the next step.
            refresh_drives(circuit, state);
            record(state.t);
        }
    }
    run.outputs.reserve(n);
    for (int i = 0; i < n; ++i) run.outputs.emplace_back(run.trains[i], spec.c1, u0[i]);
    return run;
}

ActivityMatrix block_activity(std::span<const SpikeTrain> trains, const BlockLayout& layout, double window,
                              double delta_star) {
    if (!(window > 0.0)) throw DomainError("block_activity: window must be positive");
    if (!(delta_star > 0.0)) throw DomainError("block_activity: delta_star must be positive");
    if (trains.size() != static_cast<std::size_t>(layout.size()))
        throw DomainError("block_activity: one train per neuron required");
    ActivityMatrix out;
    out.window = window;
    out.threshold = static_cast<int>(std::ceil(layout.block_size * window / (2.0 * delta_star)));
    const double horizon = trains.empty() ? 0.0 : trains.front().horizon;
    const auto windows = static_cast<std::size_t>(std::floor(horizon / window + 1e-9));
    out.counts.assign(windows, std::vector<int>(layout.blocks, 0));
    for (int i = 0; i < layout.size(); ++i) {
        for (double t : trains[i].times) {
            const auto w = static_cast<std::size_t>(std::ceil(t / window)) - 1;
            if (w < windows) ++out.counts[w][layout.block_of(i)];
        }
    }
    out.active.resize(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        out.active[w].resize(layout.blocks);
        for (int b = 0; b < layout.blocks; ++b) out.active[w][b] = out.counts[w][b] >= out.threshold;
    }
    return out;
}

ActivityMatrix activity_from_flags(std::vector<std::vector<bool>> active, double window) {
    ActivityMatrix out;
    out.window = window;
    out.threshold = 1;
    out.counts.reserve(active.size());
    for (const auto& row : active) {
        std::vector<int> c(row.size());
        for (std::size_t b = 0; b < row.size(); ++b) c[b] = row[b] ? 1 : 0;
        out.counts.push_back(std::move(c));
    }
    out.active = std::move(active);
    return out;
}

namespace {

// Unique block b with active[b] == active[b-1], or -1.
int frustrated_block(const std::vector<bool>& active) {
    const int m = static_cast<int>(active.size());
    int found = -1;
    for (int b = 0; b < m; ++b) {
        if (active[b] == active[(b + m - 1) % m]) {
            if (found >= 0) return -1;
            found = b;
        }
    }
    return found;
}

std::vector<int> active_set(const std::vector<bool>& active) {
    std::vector<int> out;
    for (std::size_t b = 0; b < active.size(); ++b)
        if (active[b]) out.push_back(static_cast<int>(b));
    return out;
}

}  // namespace

RotationVerdict detect_rotation(const ActivityMatrix& matrix, const RotationOptions& opts) {
    RotationVerdict v;
    const auto first = static_cast<std::size_t>(std::ceil(opts.burn_in / matrix.window - 1e-9));
    if (first >= matrix.windows()) return v;

    v.all_windows_mixed = true;
    std::vector<std::vector<bool>> patterns;
    std::vector<std::size_t> starts;
    for (std::size_t w = first; w < matrix.windows(); ++w) {
        const auto& row = matrix.active[w];
        const bool any_active = std::find(row.begin(), row.end(), true) != row.end();
        const bool any_quiet = std::find(row.begin(), row.end(), false) != row.end();
        if (!any_active || !any_quiet) v.all_windows_mixed = false;
        if (patterns.empty() || patterns.back() != row) {
            patterns.push_back(row);
            starts.push_back(w);
        }
    }
    for (const auto& p : patterns) v.sequence.push_back(active_set(p));

    const int m = patterns.front().empty() ? 0 : static_cast<int>(patterns.front().size());
    v.transitions = static_cast<int>(patterns.size()) - 1;
    for (std::size_t k = 1; k < patterns.size(); ++k) {
        const int a = frustrated_block(patterns[k - 1]);
        const int b = frustrated_block(patterns[k]);
        if (a >= 0 && b >= 0 && b == (a + 1) % m) ++v.cyclic_transitions;
    }

    std::map<std::vector<bool>, std::size_t> last_seen;
    double lag_sum = 0.0;
    double time_sum = 0.0;
    int recurrences = 0;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
        const auto it = last_seen.find(patterns[k]);
        if (it != last_seen.end()) {
            lag_sum += static_cast<double>(k - it->second);
            time_sum += static_cast<double>(starts[k] - starts[it->second]) * matrix.window;
            ++recurrences;
        }
        last_seen[patterns[k]] = k;
    }
    if (recurrences > 0) {
        v.period_transitions = lag_sum / recurrences;
        v.period_time = time_sum / recurrences;
    }

    const double cyclic_fraction =
        v.transitions > 0 ? static_cast<double>(v.cyclic_transitions) / v.transitions : 0.0;
    v.rotating = v.all_windows_mixed && v.transitions >= opts.min_transitions &&
                 cyclic_fraction >= opts.min_cyclic_fraction;
    return v;
}

}  // namespace hhsim
