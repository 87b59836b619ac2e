#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "hhsim/stochastic_neuron.hpp"

namespace hhsim {

std::vector<double> interspike_intervals(std::span<const double> times);
std::vector<double> interspike_intervals(const SpikeTrain& train);

/// Right-continuous empirical distribution function of a sample.
class EmpiricalDF {
public:
    explicit EmpiricalDF(std::vector<double> sample);

    /// #{x_i <= v} / n
    [[nodiscard]] double operator()(double v) const;
    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
    [[nodiscard]] std::span<const double> sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// inf{ v : F(v) >= alpha }, no interpolation.
double empirical_quantile(const EmpiricalDF& df, double alpha);

struct QuantileSpread {
    double lower = 0.0;   // alpha-quantile
    double upper = 0.0;   // (1-alpha)-quantile
    double median = 0.0;
    double distance = 0.0;  // upper - lower
    double ratio = 0.0;     // distance / median
};

/// d(alpha)/median of an ISI sample, with inf-quantiles.
QuantileSpread quantile_ratio(std::span<const double> isis, double alpha);

struct SegmentCounts {
    std::vector<int> counts;
    double t0 = 0.0;

    [[nodiscard]] std::size_t k() const noexcept { return counts.size(); }
    [[nodiscard]] double mean() const;
};

/// xi_k = #spikes in ((k-1) t0, k t0], k = 1..K.
SegmentCounts segment_counts(const SpikeTrain& train, double t0, int k);

/// (1/n) sum exp(-v xi_j)
double empirical_laplace(std::span<const int> counts, double v);

/// N_t / t
double spike_rate(const SpikeTrain& train, double t);

/// Empirical law of successive L-tuples of interspike intervals.
class TupleEDF {
public:
    using Tuple = std::span<const double>;
    /// Bounded pattern functional, |h| <= 1.
    using Pattern = std::function<double(Tuple)>;

    TupleEDF(std::vector<double> isis, std::size_t dimension);

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    /// Number m of tuples.
    [[nodiscard]] std::size_t size() const noexcept { return isis_.size() - dim_ + 1; }
    [[nodiscard]] Tuple tuple(std::size_t i) const { return Tuple(isis_).subspan(i, dim_); }

    /// Fraction of tuples lying in the box [0, v].
    [[nodiscard]] double operator()(std::span<const double> v) const;
    /// (1/m) sum over tuples of 1_[0,v] * h. Throws DomainError if |h| > 1 anywhere it is evaluated.
    [[nodiscard]] double pattern_frequency(std::span<const double> v, const Pattern& h) const;

private:
    std::vector<double> isis_;
    std::size_t dim_;
};

using OutputPair = std::pair<double, double>;

struct OutputPairApproximation {
    std::size_t depth = 0;  // L
    /// (V_n, V_{n+1}^-) for n = 1..m
    std::vector<OutputPair> approx;
    /// (U_{tau_{n+L}}, U_{tau_{n+L+1}-}) with U started at 0
    std::vector<OutputPair> exact;
    double max_gap = 0.0;
    /// sum_{l > L} exp(-c1 delta0 l)
    double tail_bound = 0.0;

    /// Joint empirical DF of the approximating pairs, by direct counting.
    [[nodiscard]] double joint_df(double v1, double v2) const;
};

OutputPairApproximation output_pair_approximations(const SpikeTrain& train, double c1, std::size_t depth);

/// Successive (J+1)-tuples of approximating pairs: element n holds the pairs for n, n+1, ..., n+J.
std::vector<std::vector<OutputPair>> output_pair_tuples(const SpikeTrain& train, double c1, std::size_t depth,
                                                        std::size_t extra);

/// Closed-form tail sum_{l > depth} exp(-rate l).
double geometric_tail(double rate, std::size_t depth);

}  // namespace hhsim
