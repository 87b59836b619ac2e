#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhsim {

/// Argument outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Not enough data to evaluate a statistic (e.g. zero median).
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid static configuration (circuit layout, transmission parameters).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared while integrating.
class IntegrationBlowup : public std::runtime_error {
public:
    IntegrationBlowup(long long step, double time, int neuron = -1)
        : std::runtime_error(describe(step, time, neuron)), step_(step), time_(time), neuron_(neuron) {}

    [[nodiscard]] long long step() const noexcept { return step_; }
    [[nodiscard]] double time() const noexcept { return time_; }
    /// Circuit neuron index, -1 for single-neuron runs.
    [[nodiscard]] int neuron() const noexcept { return neuron_; }

private:
    static std::string describe(long long step, double time, int neuron) {
        std::string msg = "integration blowup at step " + std::to_string(step) + " (t=" + std::to_string(time) + ")";
        if (neuron >= 0) msg += " in neuron " + std::to_string(neuron);
        return msg;
    }

    long long step_;
    double time_;
    int neuron_;
};

/// Experiment configuration failed validation; carries every violated constraint.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

    [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out = "invalid configuration:";
        for (const auto& s : p) out += "\n  - " + s;
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace hhsim
