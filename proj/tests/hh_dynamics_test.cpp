#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hhsim/errors.hpp"
#include "hhsim/hh_dynamics.hpp"

using namespace hhsim;

namespace {

// Rate formulas written out directly, away from the singular points.
double alpha_n_direct(double v) { return (0.1 - 0.01 * v) / (std::exp(1.0 - 0.1 * v) - 1.0); }
double alpha_m_direct(double v) { return (2.5 - 0.1 * v) / (std::exp(2.5 - 0.1 * v) - 1.0); }

}  // namespace

TEST_CASE("gate rates at reference potentials") {
    const auto n0 = gate_rates(Gate::n, 0.0);
    CHECK(n0.alpha == doctest::Approx(0.1 / (std::exp(1.0) - 1.0)).epsilon(1e-14));
    CHECK(n0.beta == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(gate_rates(Gate::n, 10.0).alpha == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(gate_rates(Gate::m, 25.0).alpha == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rates are continuous across the removable singularities") {
    for (double d : {-1e-6, 1e-6, -1e-5, 1e-5}) {
        CHECK(std::abs(gate_rates(Gate::n, 10.0 + d).alpha - 0.1) < 1e-5);
        CHECK(std::abs(gate_rates(Gate::m, 25.0 + d).alpha - 1.0) < 1e-5);
    }
    for (double v : {-50.0, -5.0, 3.0, 9.0, 11.0, 24.0, 26.0, 60.0, 150.0}) {
        CHECK(gate_rates(Gate::n, v).alpha == doctest::Approx(alpha_n_direct(v)).epsilon(1e-12));
        CHECK(gate_rates(Gate::m, v).alpha == doctest::Approx(alpha_m_direct(v)).epsilon(1e-12));
    }
}

TEST_CASE("fast rate path agrees with the per-gate formulas") {
    for (double v = -100.0; v <= 200.0; v += 0.37) {
        const auto all = all_gate_rates(v);
        for (auto [gate, rates] : {std::pair{Gate::n, all.n}, std::pair{Gate::m, all.m}, std::pair{Gate::h, all.h}}) {
            const auto ref = gate_rates(gate, v);
            CHECK(rates.alpha == doctest::Approx(ref.alpha).epsilon(1e-12));
            CHECK(rates.beta == doctest::Approx(ref.beta).epsilon(1e-12));
            CHECK(rates.alpha >= 0.0);
            CHECK(rates.beta >= 0.0);
        }
    }
}

TEST_CASE("non-finite potential is rejected") {
    CHECK_THROWS_AS(gate_rates(Gate::h, std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(gate_rates(Gate::n, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("ionic current") {
    CHECK(ionic_current({10.6, 0.0, 0.5, 0.0}) == 0.0);
    CHECK(ionic_current({-12.0, 1.0, 0.0, 1.0}) == doctest::Approx(-6.78).epsilon(1e-14));
    CHECK(ionic_current({0.0, 0.3178, 0.0529, 0.5961}) == doctest::Approx(-0.044160135359979424).epsilon(1e-12));
}

TEST_CASE("steady-state gating") {
    const auto s0 = gating_steady_state(0.0);
    CHECK(s0.n == doctest::Approx(0.3176769140606974).epsilon(1e-12));
    CHECK(gating_steady_state(200.0).h < 1e-5);
    for (double v = -12.0; v <= 120.0; v += 1.0) {
        const auto s = gating_steady_state(v);
        CHECK((s.n > 0.0 && s.n < 1.0 && s.m > 0.0 && s.m < 1.0 && s.h > 0.0 && s.h < 1.0));
    }
}

TEST_CASE("F_infinity is strictly increasing on the 0.1 grid") {
    double prev = f_infinity(-12.0);
    for (int k = 1; k <= 1320; ++k) {
        const double cur = f_infinity(-12.0 + 0.1 * k);
        REQUIRE(cur > prev);
        prev = cur;
    }
    CHECK(f_infinity(10.6) > 0.0);
}

TEST_CASE("equilibrium point") {
    REQUIRE(f_infinity(3.0) > 0.0);
    CHECK(std::abs(equilibrium_point(f_infinity(3.0)).state.v - 3.0) < 1e-8);
    const auto e4 = equilibrium_point(4.0);
    CHECK(std::abs(f_infinity(e4.state.v) - 4.0) <= 1e-10);
    CHECK(vector_field_norm(e4.state, 4.0) <= 1e-8);
    const auto e10 = equilibrium_point(10.0);
    CHECK(e10.state.v > e4.state.v);
    CHECK_THROWS_AS(equilibrium_point(0.0), DomainError);
    CHECK_THROWS_AS(equilibrium_point(250.0), DomainError);
}

TEST_CASE("Euler step clamps gating variables") {
    const BioState s{50.0, 1.0, 1.0, 0.0};
    const BioState next = euler_bio_step(s, 0.0, 0.0, 0.01);
    CHECK((next.n >= 0.0 && next.n <= 1.0 && next.m >= 0.0 && next.m <= 1.0 && next.h >= 0.0 && next.h <= 1.0));
}

TEST_CASE("deterministic integration") {
    SUBCASE("equilibrium is a fixed point") {
        const auto e = equilibrium_point(4.0);
        const auto run = integrate_deterministic(e.state, 4.0, 0.001, 100.0);
        CHECK(run.spike_times.empty());
        CHECK(std::abs(run.final_state.v - e.state.v) < 1e-6);
        CHECK(std::abs(run.final_state.n - e.state.n) < 1e-6);
    }
    SUBCASE("a = 10 spikes regularly") {
        RandomStream rng(3);
        const auto run = integrate_deterministic(random_bio_state(rng), 10.0, 0.001, 500.0);
        int after = 0;
        for (double t : run.spike_times) after += t > 100.0;
        CHECK(after >= 20);
    }
    SUBCASE("a = 4 settles") {
        RandomStream rng(5);
        const auto run = integrate_deterministic(random_bio_state(rng), 4.0, 0.001, 2000.0);
        for (double t : run.spike_times) CHECK(t < 1500.0);
        CHECK(vector_field_norm(run.final_state, 4.0) < 1e-3);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(integrate_deterministic({}, 4.0, 0.02, 1.0), DomainError);
        CHECK_THROWS_AS(integrate_deterministic({}, 4.0, 0.001, 0.0), DomainError);
    }
}

TEST_CASE("attractor classification is deterministic") {
    AttractorOptions fast;
    fast.burn_in = 300.0;
    fast.tail = 300.0;
    const auto a = classify_attractor(10.0, 11, fast);
    const auto b = classify_attractor(10.0, 11, fast);
    CHECK(a.kind == AttractorVerdict::Kind::Orbit);
    CHECK(a.spike_count_tail == b.spike_count_tail);
    CHECK(a.distance_to_equilibrium == b.distance_to_equilibrium);
    const auto q = classify_attractor(4.0, 11, fast);
    CHECK(q.kind == AttractorVerdict::Kind::Equilibrium);
    CHECK(q.converged);
}

TEST_CASE("bistability scan: serial and parallel agree") {
    AttractorOptions fast;
    fast.dt = 0.005;
    fast.burn_in = 200.0;
    fast.tail = 200.0;
    const std::vector<double> grid{4.0, 10.0};
    const auto serial = bistability_scan(grid, 10, 9, fast, 1);
    const auto parallel = bistability_scan(grid, 10, 9, fast, 4);
    CHECK(serial == parallel);
    CHECK(serial[0] == 0.0);
    CHECK(serial[1] == 1.0);
    CHECK_THROWS_AS(bistability_scan(grid, 5, 9, fast), DomainError);
}
