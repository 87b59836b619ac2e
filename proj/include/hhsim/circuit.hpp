#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hhsim/rng.hpp"
#include "hhsim/spike_detector.hpp"
#include "hhsim/stochastic_neuron.hpp"

namespace hhsim {

/// M blocks of L neurons on a ring. Neurons are 0-based: neuron i here is
/// neuron i+1 in one-based ring notation, so the inhibitory (block-leading)
/// positions are i % L == 0 and neuron 0's predecessor is neuron N-1.
struct BlockLayout {
    int blocks = 3;      // M, odd, >= 3
    int block_size = 4;  // L

    [[nodiscard]] int size() const noexcept { return blocks * block_size; }
    [[nodiscard]] bool inhibitory(int i) const noexcept { return i % block_size == 0; }
    [[nodiscard]] int predecessor(int i) const noexcept { return (i + size() - 1) % size(); }
    [[nodiscard]] int block_of(int i) const noexcept { return i / block_size; }
    [[nodiscard]] std::vector<int> inhibitory_indices() const;
};

/// Throws ConfigError unless M is odd, M >= 3 and L >= min_block_size.
void validate(const BlockLayout& layout, int min_block_size = 4);

/// Standard normal distribution function.
double normal_cdf(double z);

/// Drift levels theta1 < theta2 and the benchmark interval (u1*, u2*) that
/// shape Psi*(x) = Phi((x - (1+u1*)/2) / ((u1*-1)/6)).
struct TransmissionParams {
    double theta1 = 4.0;
    double theta2 = 10.0;
    double u1_star = 3.0;
    double u2_star = 4.0;

    [[nodiscard]] double psi_mean() const { return 0.5 * (1.0 + u1_star); }
    [[nodiscard]] double psi_sd() const { return (u1_star - 1.0) / 6.0; }

    /// u1*, u2* from the regular-spiking median delta_star and decay c1.
    static TransmissionParams from_benchmarks(double theta1, double theta2, double delta_star, double c1);
};

/// Rejects theta1 >= theta2, u1* <= 1, Psi*(1) >= 0.025 or Psi*(u1*) <= 0.975.
void validate(const TransmissionParams& p);

double psi_star(double x, const TransmissionParams& p);

enum class Coupling { Excitatory, Inhibitory };

/// Excitatory: theta1 + (theta2-theta1) Psi*(u); inhibitory: theta2 - (theta2-theta1) Psi*(u).
double transmission(Coupling kind, double u, const TransmissionParams& p);

enum class InitScenario { ZeroOutputs, UniformOutputs };

struct CircuitSpec {
    BlockLayout layout;
    double tau = 1.4;
    double sigma = 1.5;
    double c1 = 0.02;
    TransmissionParams transmission = TransmissionParams::from_benchmarks(4.0, 10.0, 14.3, 0.02);
    double dt = 0.001;
    double delta0 = 1.0;
    std::uint64_t seed = 1;
    InitScenario init = InitScenario::ZeroOutputs;
    /// Store input/output samples every k steps.
    int record_every = 1000;
    /// Test hook: every neuron receives this constant drift instead of its transmitted input.
    std::optional<double> constant_drive;
};

/// Validated circuit with its index sets.
class Circuit {
public:
    explicit Circuit(CircuitSpec spec);

    [[nodiscard]] const CircuitSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const BlockLayout& layout() const noexcept { return spec_.layout; }
    [[nodiscard]] int size() const noexcept { return spec_.layout.size(); }
    [[nodiscard]] Coupling coupling(int i) const noexcept {
        return spec_.layout.inhibitory(i) ? Coupling::Inhibitory : Coupling::Excitatory;
    }
    [[nodiscard]] int predecessor(int i) const noexcept { return spec_.layout.predecessor(i); }
    [[nodiscard]] NoiseParams noise() const { return {0.0, spec_.tau, spec_.sigma}; }
    /// Seed of neuron i's private stream.
    [[nodiscard]] std::uint64_t neuron_seed(int i) const { return derive_seed(spec_.seed, static_cast<std::uint64_t>(i)); }
    /// Input A_i given the predecessor output u.
    [[nodiscard]] double drive(int i, double u) const;

private:
    CircuitSpec spec_;
};

Circuit build_circuit(const CircuitSpec& spec);

struct CircuitState {
    std::vector<FullState> neurons;
    std::vector<double> outputs;
    /// Inputs A_i used by the most recent step (A_0 after init).
    std::vector<double> drives;
    std::vector<SpikeDetector> detectors;
    std::vector<RandomStream> streams;
    long long step = 0;
    double t = 0.0;
};

CircuitState init_circuit(const Circuit& circuit);

/// One synchronous Euler step. Inputs use the outputs from the start of the
/// step; outputs then decay by exp(-c1 dt) and jump by 1 per spike. Returns the
/// indices that spiked.
std::vector<int> step_circuit(const Circuit& circuit, CircuitState& state);

struct CircuitRun {
    std::vector<SpikeTrain> trains;
    std::vector<OutputPath> outputs;
    std::vector<double> sample_times;
    /// [neuron][sample]
    std::vector<std::vector<double>> drive_samples;
    std::vector<std::vector<double>> output_samples;
    double min_drive = 0.0;
    double max_drive = 0.0;
};

CircuitRun run_circuit(const Circuit& circuit, double t_end);

/// Spike counts per (window, block) and the derived activity flags.
struct ActivityMatrix {
    double window = 0.0;
    int threshold = 0;
    std::vector<std::vector<int>> counts;  // [window][block]
    std::vector<std::vector<bool>> active; // [window][block]

    [[nodiscard]] std::size_t windows() const noexcept { return counts.size(); }
};

/// A block is active in a window iff its count reaches ceil(L * window / (2 delta_star)).
ActivityMatrix block_activity(std::span<const SpikeTrain> trains, const BlockLayout& layout, double window,
                              double delta_star = 14.3);

/// Builds a matrix directly from activity flags (for synthetic patterns).
ActivityMatrix activity_from_flags(std::vector<std::vector<bool>> active, double window);

struct RotationOptions {
    double burn_in = 600.0;
    /// Minimum number of pattern transitions after burn-in.
    int min_transitions = 3;
    /// Fraction of transitions that must advance the frustrated block by +1.
    double min_cyclic_fraction = 1.0;
};

struct RotationVerdict {
    bool rotating = false;
    bool all_windows_mixed = false;
    int transitions = 0;
    int cyclic_transitions = 0;
    /// Transitions until an activity pattern recurs (mean over recurrences), 0 if none.
    double period_transitions = 0.0;
    /// Time until an activity pattern recurs (mean over recurrences), 0 if none.
    double period_time = 0.0;
    /// Distinct consecutive activity patterns after burn-in, as sets of active blocks.
    std::vector<std::vector<int>> sequence;
};

/// Rotation of block activity: after burn-in every window has an active and a
/// quiet block, and between successive patterns the unique frustrated block
/// (the block whose activity equals its predecessor's) moves one block forward.
RotationVerdict detect_rotation(const ActivityMatrix& matrix, const RotationOptions& opts = {});

}  // namespace hhsim
