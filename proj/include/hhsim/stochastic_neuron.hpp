#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hhsim/hh_dynamics.hpp"
#include "hhsim/rng.hpp"
#include "hhsim/spike_detector.hpp"

namespace hhsim {

/// Signal theta plus Ornstein-Uhlenbeck noise dX = -tau X dt + sigma dW.
struct NoiseParams {
    double theta = 4.0;
    double tau = 1.0;
    double sigma = 1.0;

    /// Variance of the OU invariant law, sigma^2 / (2 tau).
    [[nodiscard]] double stationary_variance() const { return sigma * sigma / (2.0 * tau); }
};

void validate(const NoiseParams& p);

/// Five-dimensional Markov state (V, n, m, h, X).
struct FullState {
    BioState bio;
    double x = 0.0;

    friend bool operator==(const FullState&, const FullState&) = default;
};

enum class OuScheme { EulerMaruyama, Exact };

/// Euler-Maruyama: x - tau x dt + sigma sqrt(dt) g.
double ou_step(double x, const NoiseParams& p, double dt, double gaussian);

/// Exact OU transition over dt driven by the same standard normal.
double ou_step_exact(double x, const NoiseParams& p, double dt, double gaussian);

/// One step of the stochastic neuron. `drift` is theta for a free neuron or
/// the circuit input A_t; p.theta is ignored.
FullState neuron_step(const FullState& s, double drift, const NoiseParams& p, double dt, double gaussian,
                      OuScheme scheme = OuScheme::EulerMaruyama);

/// X0 ~ N(0, sigma^2/2tau), bio uniform on (-12,120) x (0,1)^3, drawn in that order.
FullState draw_stationary_start(RandomStream& rng, const NoiseParams& p);

/// Strictly increasing spike times on (0, horizon].
struct SpikeTrain {
    std::vector<double> times;
    double horizon = 0.0;
    double delta0 = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    /// N_t: number of spikes in (0, t].
    [[nodiscard]] std::size_t count_up_to(double t) const;
};

struct RandomStationary {};
using InitialCondition = std::variant<RandomStationary, FullState>;

struct SimulationOptions {
    double t_end = 500.0;
    double dt = 0.001;
    /// Discarded initial segment; spike times are reported relative to its end.
    double burn_in = 0.0;
    double delta0 = 1.0;
    /// Keep every k-th grid point of the post-burn-in trajectory; 0 keeps none.
    int record_every = 10;
    OuScheme ou = OuScheme::EulerMaruyama;
};

struct TrajectorySample {
    double t = 0.0;
    FullState state;
};

struct NeuronRun {
    std::vector<TrajectorySample> trajectory;
    SpikeTrain train;
    FullState final_state;
};

NeuronRun simulate_neuron(const NoiseParams& p, const SimulationOptions& opts, std::uint64_t seed,
                          const InitialCondition& init = RandomStationary{});

/// Output process dU = -c1 U dt + dN, evaluated exactly between spikes.
class OutputPath {
public:
    OutputPath(const SpikeTrain& train, double c1, double u0);

    [[nodiscard]] double c1() const noexcept { return c1_; }
    [[nodiscard]] double u0() const noexcept { return u0_; }
    [[nodiscard]] std::span<const double> spike_times() const noexcept { return times_; }
    /// U at tau_l (after the jump).
    [[nodiscard]] std::span<const double> post_jump() const noexcept { return post_; }
    /// U at tau_l- (before the jump).
    [[nodiscard]] std::span<const double> pre_jump() const noexcept { return pre_; }

    /// Right-continuous value U_t, t >= 0.
    [[nodiscard]] double value_at(double t) const;
    /// U on the grid 0, step, 2 step, ... up to t_end.
    [[nodiscard]] std::vector<double> sample(double step, double t_end) const;

private:
    double c1_;
    double u0_;
    std::vector<double> times_;
    std::vector<double> post_;
    std::vector<double> pre_;
};

OutputPath output_path(const SpikeTrain& train, double c1, double u0 = 0.0);

}  // namespace hhsim
