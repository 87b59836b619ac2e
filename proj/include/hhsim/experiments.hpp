#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hhsim/circuit.hpp"
#include "hhsim/regime_classifiers.hpp"

namespace hhsim {

using Json = nlohmann::ordered_json;

struct DetScanParams {
    std::vector<double> a_grid{4.0, 5.2, 5.245, 5.3, 8.4, 10.0};
    int trials = 40;
    double dt = 0.001;
    double burn_in = 1000.0;
    double tail = 1000.0;
    int spike_threshold = 3;
    double equilibrium_tolerance = 1e-3;
};

struct NeuronParams {
    double theta = 10.0;
    double tau = 1.0;
    double sigma = 1.0;
    double t_end = 500.0;
    double burn_in = 100.0;
    double dt = 0.001;
    double delta0 = 1.0;
    double c1 = 0.02;
    OuScheme ou = OuScheme::EulerMaruyama;
    int runs = 1;
    /// Trajectory decimation; 0 disables the trajectory files.
    int record_every = 100;
};

struct QuietSweepParams {
    double theta = 4.0;
    double sigma = 2.5;
    std::vector<double> taus{2.0, 2.1, 2.2, 2.3, 2.4};
    int runs = 10;
    double burn_in = 1000.0;
    double dt = 0.001;
    double delta0 = 1.0;
    QuietConfig test;
};

struct RegularSweepParams {
    double theta = 10.0;
    std::vector<double> sigmas{1.0, 1.5, 2.5, 5.0};
    std::vector<double> taus{0.1, 0.5, 1.0, 2.5, 5.0};
    int runs = 20;
    double burn_in = 100.0;
    double t1 = 500.0;
    double c1 = 0.02;
    double dt = 0.001;
    double delta0 = 1.0;
};

struct CalibrateParams {
    CalibrationConfig calibration;
    /// Optional cache file; empty disables caching.
    std::string cache;
};

struct CircuitParams {
    int blocks = 3;
    int block_size = 4;
    double tau = 1.4;
    double sigma = 1.5;
    double c1 = 0.02;
    double theta1 = 4.0;
    double theta2 = 10.0;
    double delta_star = 14.3;
    double dt = 0.001;
    double delta0 = 1.0;
    InitScenario init = InitScenario::ZeroOutputs;
    double t_end = 1800.0;
    int runs = 1;
    double window = 50.0;
    RotationOptions rotation;
    int record_every = 1000;
};

struct ReferenceParams {
    int blocks = 3;
    int block_size = 4;
    double c = 0.05;
    double dt = 0.01;
    double t_end = 2000.0;
    int runs = 10;
    int record_every = 10;
    double min_peak = 0.95;
};

using ExperimentParams = std::variant<DetScanParams, NeuronParams, QuietSweepParams, RegularSweepParams,
                                      CalibrateParams, CircuitParams, ReferenceParams>;

enum class ExperimentKind { DeterministicScan, SingleNeuron, QuietSweep, RegularSweep, Calibrate, CircuitRun, ReferenceRun };

struct ExperimentConfig {
    ExperimentParams params = NeuronParams{};
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out_dir = "out";

    [[nodiscard]] ExperimentKind kind() const { return static_cast<ExperimentKind>(params.index()); }
};

std::string kind_name(ExperimentKind kind);
/// CLI subcommand name of a kind ("det-scan", "neuron", ...).
std::string subcommand_name(ExperimentKind kind);

/// Every violated constraint, empty when the config is runnable.
std::vector<std::string> validation_problems(const ExperimentConfig& cfg);

/// Throws ValidationError listing every unknown key, type mismatch and violated constraint.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& cfg);

struct RunRecord {
    std::size_t run_id = 0;
    std::uint64_t seed = 0;
    Json parameters = Json::object();
    Json summary = Json::object();
    Json verdicts = Json::object();
    double wall_time = 0.0;
};

struct ExperimentResult {
    std::vector<RunRecord> records;
    /// Kind-specific aggregate (percent tables, calibrated values).
    Json table = Json::object();
    bool complete = false;
};

/// Validates, runs all runs in parallel up to cfg.jobs, and writes runs.csv,
/// manifest.json and per-run artifacts under cfg.out_dir. Without writing
/// when write_files is false.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

/// runs.csv rows: run_id, seed, then flattened parameters, summary and verdicts, wall_time_s last.
void emit_records_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);

}  // namespace hhsim
