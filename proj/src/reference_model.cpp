#include "hhsim/reference_model.hpp"

#include <cmath>

#include "hhsim/errors.hpp"
#include "hhsim/rng.hpp"

namespace hhsim {

void validate(const ReferenceSpec& spec) {
    validate(spec.layout, 1);
    if (!(spec.c > 0.0 && spec.c < 1.0)) throw ConfigError("reference: c must lie in (0,1)");
    if (!(spec.dt > 0.0)) throw ConfigError("reference: dt must be positive");
    if (!(spec.t_end > 0.0)) throw ConfigError("reference: t_end must be positive");
    if (spec.record_every < 1) throw ConfigError("reference: record_every must be at least 1");
}

std::vector<double> reference_model_step(std::span<const double> x, double c, const BlockLayout& layout, double dt) {
    const int n = layout.size();
    if (x.size() != static_cast<std::size_t>(n)) throw DomainError("reference_model_step: state size mismatch");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double coupling = std::tanh(x[layout.predecessor(i)]);
        out[i] = x[i] + dt * (-c * x[i] + (layout.inhibitory(i) ? -coupling : coupling));
    }
    return out;
}

std::vector<double> ReferenceRun::series(int neuron) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s[neuron]);
    return out;
}

ReferenceRun run_reference(const ReferenceSpec& spec) {
    validate(spec);
    RandomStream rng(spec.seed);
    std::vector<double> x(spec.layout.size());
    for (double& xi : x) xi = rng.uniform(-1.0, 1.0);

    ReferenceRun run;
    run.times.push_back(0.0);
    run.states.push_back(x);
    const auto steps = static_cast<long long>(std::llround(spec.t_end / spec.dt));
    for (long long k = 1; k <= steps; ++k) {
        x = reference_model_step(x, spec.c, spec.layout, spec.dt);
        if (k % spec.record_every == 0) {
            run.times.push_back(static_cast<double>(k) * spec.dt);
            run.states.push_back(x);
        }
    }
    return run;
}

namespace {

double lagged_correlation(std::span<const double> x, std::size_t lag) {
    const std::size_t n = x.size() - lag;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += x[i];
        mb += x[i + lag];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i] - ma;
        const double b = x[i + lag] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

AutocorrelationPeak autocorrelation_peak(std::span<const double> x) {
    AutocorrelationPeak peak;
    if (x.size() < 4) return peak;
    const std::size_t max_lag = x.size() / 2;
    std::vector<double> r(max_lag + 1, 1.0);
    for (std::size_t k = 1; k <= max_lag; ++k) r[k] = lagged_correlation(x, k);

    std::size_t k = 1;
    while (k <= max_lag && r[k] >= 0.0) ++k;
    // First local maximum after decorrelation; the global maximum if r keeps rising.
    for (; k <= max_lag; ++k) {
        if (!peak.found || r[k] > peak.value) peak = {k, r[k], true};
        if (r[k] > 0.0 && k < max_lag && r[k + 1] < r[k]) break;
    }
    return peak;
}

}  // namespace hhsim
