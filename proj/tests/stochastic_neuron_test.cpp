#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hhsim/errors.hpp"
#include "hhsim/hh_dynamics.hpp"
#include "hhsim/spike_statistics.hpp"
#include "hhsim/stochastic_neuron.hpp"

using namespace hhsim;

TEST_CASE("OU step") {
    CHECK(ou_step(0.0, {4.0, 1.0, 1.0}, 0.001, 0.0) == 0.0);
    CHECK(ou_step(1.0, {4.0, 0.5, 0.0}, 0.001, 0.0) == doctest::Approx(0.9995).epsilon(1e-15));
    CHECK(ou_step_exact(1.0, {4.0, 0.5, 0.0}, 0.001, 0.0) == doctest::Approx(std::exp(-0.0005)).epsilon(1e-15));
}

TEST_CASE("OU stationary variance is preserved") {
    const NoiseParams p{0.0, 1.5, 2.0};
    RandomStream rng(17);
    double x = std::sqrt(p.stationary_variance()) * rng.gaussian();
    double sum = 0.0, sum2 = 0.0;
    const int n = 400000;
    for (int k = 0; k < n; ++k) {
        x = ou_step_exact(x, p, 0.05, rng.gaussian());
        sum += x;
        sum2 += x * x;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(p.stationary_variance()).epsilon(0.05));
}

TEST_CASE("noise-off neuron step equals the deterministic Euler step bitwise") {
    RandomStream rng(4);
    BioState s = random_bio_state(rng);
    FullState f{s, 0.0};
    const NoiseParams p{7.0, 1.0, 0.0};
    for (int k = 0; k < 20000; ++k) {
        s = euler_bio_step(s, 7.0, 0.0, 0.001);
        f = neuron_step(f, 7.0, p, 0.001, rng.gaussian());
        REQUIRE(f.bio == s);
    }
}

TEST_CASE("noise-off simulation matches integrate_deterministic") {
    RandomStream rng(8);
    const BioState s0 = random_bio_state(rng);
    SimulationOptions opts;
    opts.t_end = 200.0;
    opts.record_every = 0;
    const auto sim = simulate_neuron({10.0, 1.0, 0.0}, opts, 99, FullState{s0, 0.0});
    const auto det = integrate_deterministic(s0, 10.0, 0.001, 200.0);
    CHECK(sim.final_state.bio == det.final_state);
    CHECK(sim.train.times == det.spike_times);
}

TEST_CASE("spike detector square pulse") {
    SpikeDetector d(1.0);
    std::vector<double> spikes;
    // m - h > 0 on [5, 9) and from 12 on; grid step 0.5
    auto above = [](double t) { return (t >= 5.0 && t < 9.0) || t >= 12.0; };
    double t_prev = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double t = 0.5 * k;
        const double mp = above(t_prev) ? 0.6 : 0.4, mc = above(t) ? 0.6 : 0.4;
        if (auto s = d.observe(mp, 0.5, mc, 0.5, t)) spikes.push_back(*s);
        t_prev = t;
    }
    CHECK(spikes == std::vector<double>{5.0, 12.0});
}

TEST_CASE("spike detector ignores re-crossings inside the refractory window") {
    SpikeDetector d(1.0);
    CHECK(d.observe(0.4, 0.5, 0.6, 0.5, 1.0));
    CHECK_FALSE(d.observe(0.6, 0.5, 0.4, 0.5, 1.5));
    CHECK_FALSE(d.observe(0.4, 0.5, 0.6, 0.5, 1.8));
    CHECK_FALSE(d.observe(0.6, 0.5, 0.4, 0.5, 2.5));
    CHECK(d.phase() == SpikeDetector::Phase::BelowSeekingUp);
    CHECK(d.observe(0.4, 0.5, 0.6, 0.5, 3.0));
}

TEST_CASE("regular regime simulation") {
    SimulationOptions opts;
    opts.t_end = 400.0;
    opts.burn_in = 100.0;
    opts.record_every = 0;
    const auto run = simulate_neuron({10.0, 0.7, 0.83666}, opts, 21);
    CHECK(run.train.size() >= 25);
    CHECK(run.train.size() <= 29);
    const auto isis = interspike_intervals(run.train);
    const double med = empirical_quantile(EmpiricalDF(isis), 0.5);
    CHECK(med >= 13.8);
    CHECK(med <= 15.3);
    CHECK(spike_rate(run.train, 400.0) == doctest::Approx(1.0 / 14.4).epsilon(0.1));
}

TEST_CASE("first upcrossing comes early in the regular regime") {
    SimulationOptions opts;
    opts.t_end = 50.0;
    opts.record_every = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(simulate_neuron({10.0, 0.7, 0.83666}, opts, seed).train.size() >= 1);
}

TEST_CASE("simulation is deterministic and samples stay clamped") {
    SimulationOptions opts;
    opts.t_end = 50.0;
    opts.record_every = 100;
    const auto a = simulate_neuron({10.0, 1.0, 1.0}, opts, 5);
    const auto b = simulate_neuron({10.0, 1.0, 1.0}, opts, 5);
    CHECK(a.train.times == b.train.times);
    CHECK(a.final_state == b.final_state);
    CHECK(a.trajectory.size() == 501);
    for (const auto& s : a.trajectory)
        REQUIRE((s.state.bio.n >= 0.0 && s.state.bio.n <= 1.0 && s.state.bio.m >= 0.0 && s.state.bio.m <= 1.0 &&
                 s.state.bio.h >= 0.0 && s.state.bio.h <= 1.0));
    CHECK_THROWS_AS(simulate_neuron({10.0, 0.0, 1.0}, opts, 5), DomainError);
}

TEST_CASE("output process") {
    SpikeTrain empty{{}, 10.0};
    CHECK(output_path(empty, 0.02).value_at(5.0) == 0.0);

    SpikeTrain one{{1.0}, 10.0};
    const auto u = output_path(one, 0.02);
    CHECK(u.value_at(2.0) == doctest::Approx(std::exp(-0.02)).epsilon(1e-15));
    CHECK(u.value_at(0.5) == 0.0);

    SpikeTrain periodic;
    for (int k = 1; k <= 400; ++k) periodic.times.push_back(14.4 * k);
    periodic.horizon = 14.4 * 401;
    const auto p = output_path(periodic, 0.02);
    for (std::size_t k = 0; k < p.post_jump().size(); ++k)
        REQUIRE(p.post_jump()[k] - p.pre_jump()[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.post_jump().back() == doctest::Approx(3.996).epsilon(1e-3));
    CHECK(p.pre_jump().back() == doctest::Approx(2.996).epsilon(1e-3));
}
