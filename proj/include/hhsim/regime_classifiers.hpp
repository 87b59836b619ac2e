#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>

#include "hhsim/rng.hpp"
#include "hhsim/spike_statistics.hpp"
#include "hhsim/stochastic_neuron.hpp"

namespace hhsim {

// ---- Poisson reference law ------------------------------------------------

/// P(xi <= v) for xi ~ Poisson(lambda).
double poisson_cdf(double lambda, double v);

/// E exp(-v xi) = exp(-lambda (1 - e^{-v})).
double poisson_laplace(double lambda, double v);

/// min{ n >= 0 : P(xi > n) <= alpha }
int poisson_upper_quantile(double alpha, double lambda);

/// Draw by inversion of the CDF.
int sample_poisson(RandomStream& rng, double lambda);

// ---- goodness-of-fit statistics -------------------------------------------

/// Integral over [0, i_end] of |F_hat - F_mean|. Exact: both are step functions
/// with jumps at the integers.
double delta_df(std::span<const int> counts, double mean, double i_end);

/// Integral over [0, i_end] of |psi_hat - phi_mean| by adaptive Simpson (abs tol 1e-8).
double delta_lt(std::span<const int> counts, double mean, double i_end);

/// Adaptive Simpson quadrature on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

// ---- Monte-Carlo calibration ----------------------------------------------

struct CalibrationConfig {
    double lambda_c = 0.0005;
    double t0 = 250.0;
    int k = 100;
    double i_end = 5.5;
    double alpha_c = 0.0005;
    int replications = 40000;
    std::uint64_t seed = 20230101;

    friend bool operator==(const CalibrationConfig&, const CalibrationConfig&) = default;
};

struct CriticalValues {
    double c_df = 0.0;
    double c_lt = 0.0;

    friend bool operator==(const CriticalValues&, const CriticalValues&) = default;
};

/// Upper alpha_c-quantiles of both statistics under K iid Poisson(lambda_c t0)
/// counts with plug-in mean. Replication r draws from stream derive_seed(seed, r).
CriticalValues calibrate_quantiles(const CalibrationConfig& cfg, int jobs = 1);

/// Cache file holding one calibration keyed by its full config.
void save_calibration(const std::filesystem::path& path, const CalibrationConfig& cfg, const CriticalValues& cv);
std::optional<CriticalValues> load_calibration(const std::filesystem::path& path, const CalibrationConfig& cfg);
/// Loads the cache when its key matches, else calibrates and rewrites it.
CriticalValues calibrate_cached(const std::filesystem::path& path, const CalibrationConfig& cfg, int jobs = 1);

// ---- quiet behaviour ------------------------------------------------------

struct QuietConfig {
    double t0 = 250.0;
    int k = 100;
    double lambda_c = 0.0005;
    double alpha_c = 0.0005;
    double i_end = 5.5;
    double c_df = 0.075;
    double c_lt = 0.15;
    /// Level of the Poisson count bound on N_T1.
    double count_level = 0.05;
    /// Extremely-rare branch: N_T1 <= rare_count and lambda_tilde <= rare_rate.
    int rare_count = 2;
    double rare_rate = 0.0001;

    [[nodiscard]] double t1() const { return t0 * k; }
};

struct QuietVerdict {
    enum class Branch { ExtremelyRare, PoissonFit, Fail };
    Branch branch = Branch::Fail;
    std::size_t n_t1 = 0;
    double lambda_tilde = 0.0;
    int quantile_bound = 0;
    double delta_df = 0.0;
    double delta_lt = 0.0;
    double c_df = 0.0;
    double c_lt = 0.0;
    bool extremely_rare = false;
    bool count_ok = false;
    bool df_ok = false;
    bool lt_ok = false;

    [[nodiscard]] bool quiet() const { return branch != Branch::Fail; }
    friend bool operator==(const QuietVerdict&, const QuietVerdict&) = default;
};

QuietVerdict classify_quiet(const SpikeTrain& train, const QuietConfig& cfg);

// ---- regular spiking --------------------------------------------------------

struct OutputBenchmarks {
    double u1 = 0.0;  // sum_{j>=0} e^{-c1 delta (j+1)}
    double u2 = 0.0;  // sum_{j>=0} e^{-c1 delta j}
};

OutputBenchmarks output_benchmarks(double delta, double c1);

struct RegularVerdict {
    std::size_t n_t1 = 0;
    /// Fewer than two intervals: no median, every statistic below is NaN.
    bool insufficient_data = true;
    double median = 0.0;
    double coverage = 0.0;  // N * median / T1
    double r05 = 0.0;
    double r10 = 0.0;
    double r25 = 0.0;
    bool count_ok = false;     // N > 20
    bool coverage_ok = false;  // |coverage - 1| <= 0.05
    bool r05_ok = false;       // <= 0.3
    bool r10_ok = false;       // <= 0.2
    bool r25_ok = false;       // <= 0.1
    /// Benchmarks at the observed median for c1 (NaN without data or c1).
    OutputBenchmarks benchmarks;

    [[nodiscard]] bool regular() const { return count_ok && coverage_ok && r05_ok && r10_ok && r25_ok; }
};

RegularVerdict classify_regular(const SpikeTrain& train, double t1, double c1 = 0.02);

}  // namespace hhsim
