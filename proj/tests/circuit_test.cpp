#include <doctest.h>

#include <cmath>

#include "hhsim/circuit.hpp"
#include "hhsim/errors.hpp"
#include "hhsim/reference_model.hpp"

using namespace hhsim;

namespace {

TransmissionParams fig_params() { return TransmissionParams::from_benchmarks(4.0, 10.0, 14.3, 0.02); }

CircuitSpec short_spec(std::uint64_t seed) {
    CircuitSpec s;
    s.seed = seed;
    s.record_every = 100;
    return s;
}

}  // namespace

TEST_CASE("normal distribution function") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
    CHECK(normal_cdf(3.0) == doctest::Approx(0.9986501019683699).epsilon(1e-12));
}

TEST_CASE("psi star") {
    const auto p = fig_params();
    CHECK(psi_star(p.psi_mean(), p) == doctest::Approx(0.5));
    CHECK(psi_star(1.0, p) == doctest::Approx(0.0013498980316301).epsilon(1e-9));
    CHECK(psi_star(p.u1_star, p) == doctest::Approx(0.9986501019683699).epsilon(1e-12));
    double prev = psi_star(-5.0, p);
    for (double x = -4.9; x < 10.0; x += 0.1) {
        const double cur = psi_star(x, p);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("transmission functions") {
    const auto p = fig_params();
    CHECK(transmission(Coupling::Excitatory, p.psi_mean(), p) == doctest::Approx(7.0));
    CHECK(transmission(Coupling::Inhibitory, p.psi_mean(), p) == doctest::Approx(7.0));
    const double tail = 6.0 * psi_star(0.0, p) + 1e-12;
    CHECK(transmission(Coupling::Excitatory, 0.0, p) - 4.0 <= tail);
    CHECK(10.0 - transmission(Coupling::Inhibitory, 0.0, p) <= tail);
    CHECK(10.0 - transmission(Coupling::Excitatory, p.u2_star, p) < 0.15);
    for (double u = 0.0; u < 8.0; u += 0.01) {
        const double e = transmission(Coupling::Excitatory, u, p);
        const double i = transmission(Coupling::Inhibitory, u, p);
        REQUIRE(e + i == doctest::Approx(14.0).epsilon(1e-15));
        REQUIRE((e >= 4.0 && e <= 10.0 && i >= 4.0 && i <= 10.0));
    }
}

TEST_CASE("transmission parameters must separate 1 from u1*") {
    CHECK_NOTHROW(validate(fig_params()));
    TransmissionParams narrow{4.0, 10.0, 1.05, 2.05};
    CHECK_NOTHROW(validate(narrow));
    TransmissionParams bad{4.0, 10.0, 1.0, 2.0};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    TransmissionParams swapped{10.0, 4.0, 3.0, 4.0};
    CHECK_THROWS_AS(validate(swapped), ConfigError);
}

TEST_CASE("block layout") {
    const BlockLayout l{3, 4};
    CHECK(l.size() == 12);
    CHECK(l.inhibitory_indices() == std::vector<int>{0, 4, 8});
    CHECK(l.predecessor(0) == 11);
    CHECK(l.predecessor(5) == 4);
    CHECK_THROWS_AS(validate(BlockLayout{4, 4}), ConfigError);
    CHECK_THROWS_AS(validate(BlockLayout{1, 4}), ConfigError);
    CHECK_THROWS_AS(validate(BlockLayout{3, 3}), ConfigError);
    CircuitSpec s;
    s.layout = {4, 4};
    CHECK_THROWS_AS(build_circuit(s), ConfigError);
}

TEST_CASE("circuit initialisation") {
    const Circuit c = build_circuit(short_spec(3));
    const auto s = init_circuit(c);
    for (int i = 0; i < c.size(); ++i) {
        if (c.layout().inhibitory(i)) CHECK(s.drives[i] == doctest::Approx(10.0).epsilon(1e-3));
        else CHECK(s.drives[i] == doctest::Approx(4.0).epsilon(1e-3));
    }
    const auto again = init_circuit(c);
    for (int i = 0; i < c.size(); ++i) CHECK(again.neurons[i] == s.neurons[i]);

    auto spec = short_spec(3);
    spec.init = InitScenario::UniformOutputs;
    const auto u = init_circuit(build_circuit(spec));
    for (double x : u.outputs) CHECK((x > 1.0 && x < spec.transmission.u1_star));
}

TEST_CASE("circuit step: decay, jumps and left-limit inputs") {
    const Circuit c = build_circuit(short_spec(4));
    auto state = init_circuit(c);
    const double decay = std::exp(-0.02 * 0.001);
    bool saw_spike = false;
    for (int k = 0; k < 60000; ++k) {
        const auto before = state.outputs;
        std::vector<double> expected_drives(c.size());
        for (int i = 0; i < c.size(); ++i) expected_drives[i] = c.drive(i, before[c.predecessor(i)]);
        const auto spiked = step_circuit(c, state);
        REQUIRE(state.drives == expected_drives);
        std::vector<bool> fired(c.size(), false);
        for (int i : spiked) fired[i] = true;
        for (int i = 0; i < c.size(); ++i) {
            REQUIRE(state.outputs[i] == before[i] * decay + (fired[i] ? 1.0 : 0.0));
        }
        saw_spike = saw_spike || !spiked.empty();
    }
    CHECK(saw_spike);
}

TEST_CASE("constant drive decouples the circuit into single neurons") {
    auto spec = short_spec(6);
    spec.constant_drive = 10.0;
    const Circuit c = build_circuit(spec);
    const auto run = run_circuit(c, 120.0);
    SimulationOptions opts;
    opts.t_end = 120.0;
    opts.record_every = 0;
    for (int i = 0; i < c.size(); ++i) {
        const auto single = simulate_neuron({10.0, spec.tau, spec.sigma}, opts, c.neuron_seed(i));
        REQUIRE(run.trains[i].times == single.train.times);
    }
}

TEST_CASE("short circuit runs") {
    const Circuit c = build_circuit(short_spec(8));
    const auto run = run_circuit(c, 1.0);
    for (const auto& t : run.trains) CHECK(t.size() <= 1);
    const auto longer = run_circuit(c, 60.0);
    CHECK(longer.min_drive >= 4.0);
    CHECK(longer.max_drive <= 10.0);
    CHECK(longer.sample_times.size() == 601);
    const auto repeat = run_circuit(c, 60.0);
    for (int i = 0; i < c.size(); ++i) CHECK(repeat.trains[i].times == longer.trains[i].times);
    for (int i = 0; i < c.size(); ++i) CHECK(longer.outputs[i].u0() == 0.0);
}

TEST_CASE("rotation detector on synthetic activity") {
    SUBCASE("pairs of active blocks rotating") {
        std::vector<std::vector<bool>> rows;
        const std::vector<std::vector<bool>> cycle{{true, true, false}, {false, true, true}, {true, false, true}};
        for (int rep = 0; rep < 4; ++rep)
            for (const auto& p : cycle)
                for (int w = 0; w < 5; ++w) rows.push_back(p);
        const auto v = detect_rotation(activity_from_flags(rows, 50.0), {0.0, 3, 1.0});
        CHECK(v.rotating);
        CHECK(v.period_transitions == doctest::Approx(3.0));
        CHECK(v.period_time == doctest::Approx(750.0));
        CHECK(v.sequence.front() == std::vector<int>{0, 1});
    }
    SUBCASE("single flips") {
        const std::vector<std::vector<bool>> cycle{{true, false, true}, {false, false, true}, {false, true, true},
                                                   {false, true, false}, {true, true, false}, {true, false, false}};
        std::vector<std::vector<bool>> rows;
        for (int rep = 0; rep < 3; ++rep)
            for (const auto& p : cycle) rows.push_back(p);
        const auto v = detect_rotation(activity_from_flags(rows, 50.0), {0.0, 3, 1.0});
        CHECK(v.rotating);
        CHECK(v.period_transitions == doctest::Approx(6.0));
    }
    SUBCASE("reverse order is not rotating forward") {
        std::vector<std::vector<bool>> rows;
        const std::vector<std::vector<bool>> cycle{{true, false, true}, {false, true, true}, {true, true, false}};
        for (int rep = 0; rep < 4; ++rep)
            for (const auto& p : cycle) rows.push_back(p);
        CHECK_FALSE(detect_rotation(activity_from_flags(rows, 50.0), {0.0, 3, 1.0}).rotating);
    }
    SUBCASE("all silent or all active") {
        const std::vector<std::vector<bool>> silent(30, {false, false, false});
        const std::vector<std::vector<bool>> busy(30, {true, true, true});
        CHECK_FALSE(detect_rotation(activity_from_flags(silent, 50.0)).rotating);
        CHECK_FALSE(detect_rotation(activity_from_flags(busy, 50.0)).rotating);
    }
    SUBCASE("silent trains give no rotation") {
        std::vector<SpikeTrain> trains(12, SpikeTrain{{}, 1800.0});
        const auto m = block_activity(trains, BlockLayout{3, 4}, 50.0);
        CHECK(m.windows() == 36);
        CHECK(m.threshold == 7);
        CHECK_FALSE(detect_rotation(m).rotating);
    }
}

TEST_CASE("reference model") {
    const BlockLayout l{3, 4};
    const std::vector<double> zero(12, 0.0);
    CHECK(reference_model_step(zero, 0.05, l, 0.01) == zero);
    std::vector<double> x(12, 0.0);
    x[11] = 1.0;
    x[0] = 0.0;
    x[3] = 1.0;
    const auto next = reference_model_step(x, 0.05, l, 0.01);
    CHECK(next[0] == doctest::Approx(-0.01 * std::tanh(1.0)));
    CHECK(next[4] == doctest::Approx(-0.01 * std::tanh(1.0)));
    ReferenceSpec spec;
    spec.c = 1.5;
    CHECK_THROWS_AS(run_reference(spec), ConfigError);
}

TEST_CASE("autocorrelation peak") {
    std::vector<double> sine;
    for (int k = 0; k < 4000; ++k) sine.push_back(std::sin(2.0 * M_PI * k / 250.0));
    const auto p = autocorrelation_peak(sine);
    CHECK(p.found);
    CHECK(p.lag == 250);
    CHECK(p.value > 0.99);
    const std::vector<double> ramp{1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(autocorrelation_peak(ramp).value < 0.95);
}

TEST_CASE("reference model settles onto a periodic orbit") {
    ReferenceSpec spec;
    spec.seed = 3;
    const auto run = run_reference(spec);
    const auto x = run.series(0);
    const std::vector<double> tail(x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2), x.end());
    const auto p = autocorrelation_peak(tail);
    CHECK(p.found);
    CHECK(p.value >= 0.95);
}
