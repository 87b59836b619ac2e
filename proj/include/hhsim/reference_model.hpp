#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hhsim/circuit.hpp"

namespace hhsim {

/// Deterministic ring dx_i/dt = -c x_i + f(x_{i-1}), with the sign of the
/// coupling flipped at inhibitory positions and f = tanh.
struct ReferenceSpec {
    BlockLayout layout;
    double c = 0.05;
    double dt = 0.01;
    double t_end = 2000.0;
    std::uint64_t seed = 1;
    /// Store every k-th state.
    int record_every = 10;
};

void validate(const ReferenceSpec& spec);

/// One explicit Euler step.
std::vector<double> reference_model_step(std::span<const double> x, double c, const BlockLayout& layout, double dt);

struct ReferenceRun {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // [sample][neuron]

    [[nodiscard]] std::vector<double> series(int neuron) const;
};

/// x(0) uniform on (-1,1)^N from the seed's stream.
ReferenceRun run_reference(const ReferenceSpec& spec);

struct AutocorrelationPeak {
    std::size_t lag = 0;
    double value = 0.0;
    bool found = false;
};

/// Sample autocorrelation r(k) = Pearson correlation of x[0..n-k) and x[k..n),
/// for k up to n/2. Returns the largest r(k) beyond the first lag at which r
/// drops below zero.
AutocorrelationPeak autocorrelation_peak(std::span<const double> x);

}  // namespace hhsim
