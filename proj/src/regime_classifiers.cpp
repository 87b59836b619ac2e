#include "hhsim/regime_classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <vector>

#include <json.hpp>

#include "hhsim/errors.hpp"
#include "hhsim/parallel.hpp"

namespace hhsim {

double poisson_cdf(double lambda, double v) {
    if (!(lambda >= 0.0) || !(v >= 0.0)) throw DomainError("poisson_cdf: negative input");
    if (lambda == 0.0) return 1.0;
    const auto k_max = static_cast<long long>(std::floor(v));
    double sum = 0.0;
    if (lambda < 500.0) {
        double term = std::exp(-lambda);
        sum = term;
        for (long long k = 1; k <= k_max; ++k) {
            term *= lambda / static_cast<double>(k);
            sum += term;
        }
    } else {
        const double log_lambda = std::log(lambda);
        for (long long k = 0; k <= k_max; ++k)
            sum += std::exp(static_cast<double>(k) * log_lambda - lambda - std::lgamma(static_cast<double>(k) + 1.0));
    }
    return std::min(sum, 1.0);
}

double poisson_laplace(double lambda, double v) {
    if (!(lambda >= 0.0) || !(v >= 0.0)) throw DomainError("poisson_laplace: negative input");
    return std::exp(lambda * std::expm1(-v));
}

int poisson_upper_quantile(double alpha, double lambda) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("poisson_upper_quantile: alpha must lie in (0,1]");
    if (!(lambda >= 0.0)) throw DomainError("poisson_upper_quantile: negative lambda");
    int n = 0;
    while (1.0 - poisson_cdf(lambda, n) > alpha) ++n;
    return n;
}

int sample_poisson(RandomStream& rng, double lambda) {
    const double u = rng.canonical();
    int k = 0;
    double p = std::exp(-lambda);
    double cdf = p;
    while (u > cdf && p > 0.0) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

namespace {

// Value counts of a sample of non-negative integers: (value, multiplicity).
std::vector<std::pair<int, int>> histogram(std::span<const int> counts) {
    std::map<int, int> h;
    for (int c : counts) ++h[c];
    return {h.begin(), h.end()};
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double delta_df(std::span<const int> counts, double mean, double i_end) {
    if (counts.empty()) throw DomainError("delta_df: empty sample");
    if (!(i_end >= 0.0)) throw DomainError("delta_df: negative interval end");
    const auto n = static_cast<double>(counts.size());
    const auto last = static_cast<int>(std::floor(i_end));
    double total = 0.0;
    for (int k = 0; k <= last; ++k) {
        const double width = std::min(static_cast<double>(k + 1), i_end) - k;
        if (width <= 0.0) continue;
        const auto below = std::count_if(counts.begin(), counts.end(), [k](int c) { return c <= k; });
        total += std::abs(static_cast<double>(below) / n - poisson_cdf(mean, k)) * width;
    }
    return total;
}

double delta_lt(std::span<const int> counts, double mean, double i_end) {
    if (counts.empty()) throw DomainError("delta_lt: empty sample");
    const auto hist = histogram(counts);
    const auto n = static_cast<double>(counts.size());
    auto integrand = [&](double v) {
        double psi = 0.0;
        for (const auto& [value, mult] : hist) psi += mult * std::exp(-v * value);
        return std::abs(psi / n - poisson_laplace(mean, v));
    };
    return adaptive_simpson(integrand, 0.0, i_end, 1e-8);
}

CriticalValues calibrate_quantiles(const CalibrationConfig& cfg, int jobs) {
    if (cfg.k < 1 || cfg.replications < 1) throw DomainError("calibrate_quantiles: need K >= 1 and replications >= 1");
    if (!(cfg.alpha_c > 0.0 && cfg.alpha_c < 1.0)) throw DomainError("calibrate_quantiles: alpha_c must lie in (0,1)");
    const double lambda = cfg.lambda_c * cfg.t0;
    const auto reps = static_cast<std::size_t>(cfg.replications);
    std::vector<double> df_stats(reps);
    std::vector<double> lt_stats(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        RandomStream rng(derive_seed(cfg.seed, r));
        std::vector<int> xi(static_cast<std::size_t>(cfg.k));
        long long total = 0;
        for (auto& x : xi) total += (x = sample_poisson(rng, lambda));
        const double mean = static_cast<double>(total) / cfg.k;
        df_stats[r] = delta_df(xi, mean, cfg.i_end);
        lt_stats[r] = delta_lt(xi, mean, cfg.i_end);
    });
    const double level = 1.0 - cfg.alpha_c;
    return {empirical_quantile(EmpiricalDF(std::move(df_stats)), level),
            empirical_quantile(EmpiricalDF(std::move(lt_stats)), level)};
}

namespace {

nlohmann::json calibration_key(const CalibrationConfig& cfg) {
    return {{"lambda_c", cfg.lambda_c}, {"t0", cfg.t0},
            {"k", cfg.k},               {"i_end", cfg.i_end},
            {"alpha_c", cfg.alpha_c},   {"replications", cfg.replications},
            {"seed", cfg.seed}};
}

}  // namespace

void save_calibration(const std::filesystem::path& path, const CalibrationConfig& cfg, const CriticalValues& cv) {
    auto doc = calibration_key(cfg);
    doc["c_df"] = cv.c_df;
    doc["c_lt"] = cv.c_lt;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write calibration cache " + path.string());
    out << doc.dump(2) << '\n';
}

std::optional<CriticalValues> load_calibration(const std::filesystem::path& path, const CalibrationConfig& cfg) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    const auto doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    const auto wanted = calibration_key(cfg);
    for (const auto& [key, value] : wanted.items())
        if (!doc.contains(key) || doc.at(key) != value) return std::nullopt;
    if (!doc.contains("c_df") || !doc.contains("c_lt")) return std::nullopt;
    return CriticalValues{doc.at("c_df").get<double>(), doc.at("c_lt").get<double>()};
}

CriticalValues calibrate_cached(const std::filesystem::path& path, const CalibrationConfig& cfg, int jobs) {
    if (auto cached = load_calibration(path, cfg)) return *cached;
    const auto cv = calibrate_quantiles(cfg, jobs);
    save_calibration(path, cfg, cv);
    return cv;
}

QuietVerdict classify_quiet(const SpikeTrain& train, const QuietConfig& cfg) {
    const double t1 = cfg.t1();
    if (train.horizon < t1 * (1.0 - 1e-12)) throw DomainError("classify_quiet: horizon shorter than K*T0");
    QuietVerdict v;
    v.n_t1 = train.count_up_to(t1);
    v.lambda_tilde = static_cast<double>(v.n_t1) / t1;
    v.quantile_bound = poisson_upper_quantile(cfg.count_level, cfg.lambda_c * t1);
    const auto seg = segment_counts(train, cfg.t0, cfg.k);
    const double plug_in = v.lambda_tilde * cfg.t0;
    v.delta_df = delta_df(seg.counts, plug_in, cfg.i_end);
    v.delta_lt = delta_lt(seg.counts, plug_in, cfg.i_end);
    v.c_df = cfg.c_df;
    v.c_lt = cfg.c_lt;
    v.extremely_rare = v.n_t1 <= static_cast<std::size_t>(cfg.rare_count) && v.lambda_tilde <= cfg.rare_rate;
    v.count_ok = v.n_t1 <= static_cast<std::size_t>(v.quantile_bound);
    v.df_ok = v.delta_df <= cfg.c_df;
    v.lt_ok = v.delta_lt <= cfg.c_lt;
    if (v.extremely_rare)
        v.branch = QuietVerdict::Branch::ExtremelyRare;
    else if (v.count_ok && v.df_ok && v.lt_ok)
        v.branch = QuietVerdict::Branch::PoissonFit;
    else
        v.branch = QuietVerdict::Branch::Fail;
    return v;
}

OutputBenchmarks output_benchmarks(double delta, double c1) {
    if (!(delta > 0.0) || !(c1 > 0.0)) throw DomainError("output_benchmarks: delta and c1 must be positive");
    const double u2 = 1.0 / -std::expm1(-c1 * delta);
    // u2 >= 1, so u2 - 1 is exact and u2 - u1 == 1 holds bit-for-bit.
    return {u2 - 1.0, u2};
}

RegularVerdict classify_regular(const SpikeTrain& train, double t1, double c1) {
    if (!(t1 > 0.0)) throw DomainError("classify_regular: T1 must be positive");
    if (train.horizon < t1 * (1.0 - 1e-12)) throw DomainError("classify_regular: horizon shorter than T1");
    RegularVerdict v;
    v.n_t1 = train.count_up_to(t1);
    v.count_ok = v.n_t1 > 20;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (v.n_t1 < 3) {
        v.median = v.coverage = v.r05 = v.r10 = v.r25 = nan;
        v.benchmarks = {nan, nan};
        return v;
    }
    const auto isis =
        interspike_intervals(std::span<const double>(train.times).first(v.n_t1));
    v.insufficient_data = false;
    v.median = quantile_ratio(isis, 0.25).median;
    v.r05 = quantile_ratio(isis, 0.05).ratio;
    v.r10 = quantile_ratio(isis, 0.10).ratio;
    v.r25 = quantile_ratio(isis, 0.25).ratio;
    v.coverage = static_cast<double>(v.n_t1) * v.median / t1;
    v.coverage_ok = std::abs(v.coverage - 1.0) <= 0.05;
    v.r05_ok = v.r05 <= 0.3;
    v.r10_ok = v.r10 <= 0.2;
    v.r25_ok = v.r25 <= 0.1;
    v.benchmarks = output_benchmarks(v.median, c1);
    return v;
}

}  // namespace hhsim
