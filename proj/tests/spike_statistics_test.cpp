#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hhsim/errors.hpp"
#include "hhsim/rng.hpp"
#include "hhsim/spike_statistics.hpp"

using namespace hhsim;

TEST_CASE("interspike intervals") {
    CHECK(interspike_intervals(std::vector<double>{1, 3, 7}) == std::vector<double>{2, 4});
    CHECK(interspike_intervals(std::vector<double>{5}).empty());
}

TEST_CASE("empirical quantiles use the inf definition") {
    CHECK(empirical_quantile(EmpiricalDF({1, 2, 3, 4}), 0.5) == 2.0);
    CHECK(empirical_quantile(EmpiricalDF({5}), 0.3) == 5.0);
    CHECK(empirical_quantile(EmpiricalDF({1, 1, 1, 10}), 0.25) == 1.0);
    CHECK_THROWS_AS(empirical_quantile(EmpiricalDF({}), 0.5), DomainError);
}

TEST_CASE("EDF against brute-force counting") {
    RandomStream rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + static_cast<int>(rng.canonical() * 50);
        std::vector<double> xs(n);
        for (double& x : xs) x = std::floor(rng.uniform(0.0, 10.0) * 4.0) / 4.0;
        const EmpiricalDF df(xs);
        for (int q = 0; q < 1000; ++q) {
            const double v = rng.uniform(-1.0, 11.0);
            const auto count = std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= v; });
            REQUIRE(df(v) == static_cast<double>(count) / n);
        }
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] > sorted[i - 1]) gap = std::min(gap, sorted[i] - sorted[i - 1]);
        for (double alpha : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const double q = empirical_quantile(df, alpha);
            CHECK(df(q) >= alpha);
            if (std::isfinite(gap)) CHECK(df(q - gap / 2) < alpha);
        }
    }
}

TEST_CASE("quantile ratio") {
    const auto flat = quantile_ratio(std::vector<double>{3, 3, 3, 3}, 0.1);
    CHECK(flat.ratio == 0.0);
    const auto r = quantile_ratio(std::vector<double>{10, 12, 14, 16, 18}, 0.25);
    CHECK(r.lower == 12.0);
    CHECK(r.upper == 16.0);
    CHECK(r.median == 14.0);
    CHECK(r.ratio == doctest::Approx(4.0 / 14.0));
    CHECK_THROWS_AS(quantile_ratio(std::vector<double>{0, 0, 0}, 0.25), DegenerateDataError);
}

TEST_CASE("segment counts are left-open right-closed") {
    const SpikeTrain a{{1.0, 251.0}, 500.0};
    CHECK(segment_counts(a, 250.0, 2).counts == std::vector<int>{1, 1});
    const SpikeTrain b{{250.0}, 500.0};
    CHECK(segment_counts(b, 250.0, 2).counts == std::vector<int>{1, 0});
    const SpikeTrain c{{}, 500.0};
    CHECK(segment_counts(c, 250.0, 2).counts == std::vector<int>{0, 0});
    CHECK_THROWS_AS(segment_counts(c, 250.0, 3), DomainError);
}

TEST_CASE("empirical Laplace transform") {
    const std::vector<int> s{1, 2};
    CHECK(empirical_laplace(s, 0.0) == 1.0);
    CHECK(empirical_laplace(std::vector<int>{0, 0, 0}, 3.0) == 1.0);
    CHECK(empirical_laplace(s, 1.0) == doctest::Approx(0.2516073622040275).epsilon(1e-14));
    CHECK_THROWS_AS(empirical_laplace(s, -1.0), DomainError);
}

TEST_CASE("spike rate") {
    CHECK(spike_rate(SpikeTrain{{}, 10.0}, 10.0) == 0.0);
    CHECK(spike_rate(SpikeTrain{{1, 2, 3}, 10.0}, 10.0) == doctest::Approx(0.3));
}

TEST_CASE("tuple EDF and pattern frequency") {
    const TupleEDF g({1, 2, 3}, 2);
    CHECK(g.size() == 2);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(g(std::vector<double>{inf, inf}) == 1.0);
    CHECK(g(std::vector<double>{2, 3}) == 1.0);
    CHECK(g(std::vector<double>{1, 5}) == 0.5);
    auto one = [](TupleEDF::Tuple) { return 1.0; };
    for (const auto& v : {std::vector<double>{2, 3}, std::vector<double>{1, 5}, std::vector<double>{0.5, 9}})
        CHECK(g.pattern_frequency(v, one) == g(v));
    auto first_gt = [](TupleEDF::Tuple t) { return t[0] > 1.5 ? 1.0 : -1.0; };
    CHECK(g.pattern_frequency(std::vector<double>{inf, inf}, first_gt) == 0.0);
    CHECK_THROWS_AS((void)g.pattern_frequency(std::vector<double>{inf, inf}, [](TupleEDF::Tuple) { return 2.0; }),
                    DomainError);
    CHECK_THROWS_AS(TupleEDF({1.0}, 2), DomainError);
}

TEST_CASE("output-pair approximations") {
    SpikeTrain periodic;
    for (int k = 1; k <= 40; ++k) periodic.times.push_back(10.0 * k);
    periodic.horizon = 410.0;
    const std::size_t depth = 5;
    const auto ap = output_pair_approximations(periodic, 0.02, depth);
    double geometric = 0.0;
    for (std::size_t l = 0; l <= depth; ++l) geometric += std::exp(-0.02 * 10.0 * static_cast<double>(l));
    for (const auto& [v, w] : ap.approx) {
        CHECK(v == doctest::Approx(geometric).epsilon(1e-13));
        CHECK(w == doctest::Approx(v * std::exp(-0.2)).epsilon(1e-13));
    }
    CHECK(ap.max_gap <= ap.tail_bound);
    CHECK(ap.joint_df(1e9, 1e9) == 1.0);
    CHECK(geometric_tail(0.02, 500) == doctest::Approx(0.0022473721892881608).epsilon(1e-12));
    CHECK_THROWS_AS(output_pair_approximations(SpikeTrain{{1, 2, 3}, 5.0}, 0.02, 5), DomainError);
}

TEST_CASE("geometric tail bound holds on random trains") {
    RandomStream rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        SpikeTrain tr;
        double t = 0.0;
        for (int k = 0; k < 300; ++k) {
            t += 1.0 + rng.uniform(0.0, 20.0);
            tr.times.push_back(t);
        }
        tr.horizon = t + 1.0;
        for (std::size_t depth : {5u, 20u, 100u}) {
            const auto ap = output_pair_approximations(tr, 0.02, depth);
            REQUIRE(ap.max_gap <= ap.tail_bound);
        }
    }
}

TEST_CASE("output-pair tuples") {
    SpikeTrain tr;
    for (int k = 1; k <= 30; ++k) tr.times.push_back(3.0 * k + (k % 3));
    tr.horizon = 200.0;
    const auto tuples = output_pair_tuples(tr, 0.02, 4, 2);
    const auto ap = output_pair_approximations(tr, 0.02, 4);
    REQUIRE(!tuples.empty());
    CHECK(tuples.front().size() == 3);
    CHECK(tuples.front()[1] == ap.approx[1]);
}
