#include "hhsim/spike_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hhsim/errors.hpp"

namespace hhsim {

std::vector<double> interspike_intervals(std::span<const double> times) {
    std::vector<double> out;
    if (times.size() < 2) return out;
    out.reserve(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) out.push_back(times[i] - times[i - 1]);
    return out;
}

std::vector<double> interspike_intervals(const SpikeTrain& train) { return interspike_intervals(train.times); }

EmpiricalDF::EmpiricalDF(std::vector<double> sample) : sorted_(std::move(sample)) {
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDF::operator()(double v) const {
    if (sorted_.empty()) return 0.0;
    const auto below = std::upper_bound(sorted_.begin(), sorted_.end(), v) - sorted_.begin();
    return static_cast<double>(below) / static_cast<double>(sorted_.size());
}

double empirical_quantile(const EmpiricalDF& df, double alpha) {
    if (df.size() == 0) throw DomainError("empirical_quantile: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("empirical_quantile: alpha must lie in (0,1)");
    const auto n = df.size();
    // Smallest order statistic x_(k) with k/n >= alpha, evaluated exactly as F would be.
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    while (k > 1 && static_cast<double>(k - 1) / static_cast<double>(n) >= alpha) --k;
    while (k < n && static_cast<double>(k) / static_cast<double>(n) < alpha) ++k;
    return df.sorted()[k - 1];
}

QuantileSpread quantile_ratio(std::span<const double> isis, double alpha) {
    if (isis.size() < 2) throw DomainError("quantile_ratio: need at least two intervals");
    const EmpiricalDF df(std::vector<double>(isis.begin(), isis.end()));
    QuantileSpread q;
    q.median = empirical_quantile(df, 0.5);
    if (!(q.median > 0.0)) throw DegenerateDataError("quantile_ratio: median is not positive");
    q.lower = empirical_quantile(df, alpha);
    q.upper = empirical_quantile(df, 1.0 - alpha);
    q.distance = q.upper - q.lower;
    q.ratio = q.distance / q.median;
    return q;
}

double SegmentCounts::mean() const {
    if (counts.empty()) return 0.0;
    return static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0LL)) /
           static_cast<double>(counts.size());
}

SegmentCounts segment_counts(const SpikeTrain& train, double t0, int k) {
    if (!(t0 > 0.0) || k < 1) throw DomainError("segment_counts: need t0 > 0 and K >= 1");
    const double t1 = t0 * k;
    if (train.horizon < t1 * (1.0 - 1e-12)) throw DomainError("segment_counts: horizon shorter than K*T0");
    SegmentCounts out{std::vector<int>(static_cast<std::size_t>(k), 0), t0};
    for (double t : train.times) {
        if (t <= 0.0 || t > t1) continue;
        auto idx = static_cast<long long>(std::ceil(t / t0)) - 1;
        idx = std::clamp<long long>(idx, 0, k - 1);
        ++out.counts[static_cast<std::size_t>(idx)];
    }
    return out;
}

double empirical_laplace(std::span<const int> counts, double v) {
    if (counts.empty()) throw DomainError("empirical_laplace: empty sample");
    if (!(v >= 0.0)) throw DomainError("empirical_laplace: argument must be non-negative");
    double sum = 0.0;
    for (int c : counts) sum += std::exp(-v * c);
    return sum / static_cast<double>(counts.size());
}

double spike_rate(const SpikeTrain& train, double t) {
    if (!(t > 0.0)) throw DomainError("spike_rate: t must be positive");
    return static_cast<double>(train.count_up_to(t)) / t;
}

TupleEDF::TupleEDF(std::vector<double> isis, std::size_t dimension) : isis_(std::move(isis)), dim_(dimension) {
    if (dim_ == 0) throw DomainError("TupleEDF: dimension must be positive");
    if (isis_.size() < dim_) throw DomainError("TupleEDF: fewer intervals than the tuple dimension");
}

double TupleEDF::operator()(std::span<const double> v) const {
    return pattern_frequency(v, [](Tuple) { return 1.0; });
}

double TupleEDF::pattern_frequency(std::span<const double> v, const Pattern& h) const {
    if (v.size() != dim_) throw DomainError("TupleEDF: query dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto t = tuple(i);
        bool inside = true;
        for (std::size_t j = 0; j < dim_ && inside; ++j) inside = t[j] >= 0.0 && t[j] <= v[j];
        if (!inside) continue;
        const double value = h(t);
        if (!(std::abs(value) <= 1.0)) throw DomainError("pattern_frequency: |h| must not exceed 1");
        sum += value;
    }
    return sum / static_cast<double>(size());
}

double geometric_tail(double rate, std::size_t depth) {
    return std::exp(-rate * static_cast<double>(depth + 1)) / -std::expm1(-rate);
}

double OutputPairApproximation::joint_df(double v1, double v2) const {
    if (approx.empty()) return 0.0;
    const auto hits = std::count_if(approx.begin(), approx.end(),
                                    [&](const OutputPair& p) { return p.first <= v1 && p.second <= v2; });
    return static_cast<double>(hits) / static_cast<double>(approx.size());
}

namespace {

// V_n and V_{n+1}^- for 0-based first index `first`.
OutputPair truncated_pair(std::span<const double> t, double c1, std::size_t first, std::size_t depth) {
    const double t_top = t[first + depth];
    const double t_next = t[first + depth + 1];
    double after = 0.0;
    double before = 0.0;
    for (std::size_t j = first; j <= first + depth; ++j) {
        after += std::exp(-c1 * (t_top - t[j]));
        before += std::exp(-c1 * (t_next - t[j]));
    }
    return {after, before};
}

}  // namespace

OutputPairApproximation output_pair_approximations(const SpikeTrain& train, double c1, std::size_t depth) {
    if (!(c1 > 0.0)) throw DomainError("output_pair_approximations: c1 must be positive");
    if (train.size() < depth + 2) throw DomainError("output_pair_approximations: need at least L+2 spikes");
    const std::span<const double> t(train.times);
    const auto exact = output_path(train, c1, 0.0);
    OutputPairApproximation out;
    out.depth = depth;
    out.tail_bound = geometric_tail(c1 * train.delta0, depth);
    const std::size_t m = train.size() - depth - 1;
    out.approx.reserve(m);
    out.exact.reserve(m);
    for (std::size_t n = 0; n < m; ++n) {
        const auto p = truncated_pair(t, c1, n, depth);
        const OutputPair e{exact.post_jump()[n + depth], exact.pre_jump()[n + depth + 1]};
        out.approx.push_back(p);
        out.exact.push_back(e);
        out.max_gap = std::max({out.max_gap, std::abs(e.first - p.first), std::abs(e.second - p.second)});
    }
    return out;
}

std::vector<std::vector<OutputPair>> output_pair_tuples(const SpikeTrain& train, double c1, std::size_t depth,
                                                        std::size_t extra) {
    if (!(c1 > 0.0)) throw DomainError("output_pair_tuples: c1 must be positive");
    if (train.size() < depth + extra + 2) throw DomainError("output_pair_tuples: need at least L+J+2 spikes");
    const std::span<const double> t(train.times);
    const std::size_t m = train.size() - depth - extra - 1;
    std::vector<std::vector<OutputPair>> out(m);
    for (std::size_t n = 0; n < m; ++n) {
        out[n].reserve(extra + 1);
        for (std::size_t j = 0; j <= extra; ++j) out[n].push_back(truncated_pair(t, c1, n + j, depth));
    }
    return out;
}

}  // namespace hhsim
