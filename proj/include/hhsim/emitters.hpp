#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hhsim/circuit.hpp"
#include "hhsim/stochastic_neuron.hpp"

namespace hhsim {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

/// RFC-4180 quoting for one field.
std::string csv_field(const std::string& s);

/// Header row plus data rows; throws std::runtime_error on I/O failure.
void emit_csv(const std::filesystem::path& path, std::span<const std::string> header,
              std::span<const std::vector<std::string>> rows);

/// Single column "t".
void emit_spike_train_csv(const SpikeTrain& train, const std::filesystem::path& path);

/// Columns t, V, n, m, h, X, U with U from the output process.
void emit_trajectory_csv(std::span<const TrajectorySample> trajectory, const OutputPath& output,
                         const std::filesystem::path& path);

/// Columns neuron, t (neuron is 1-based).
void emit_circuit_spikes_csv(std::span<const SpikeTrain> trains, const std::filesystem::path& path);

/// Columns t, A1..AN.
void emit_circuit_inputs_csv(const CircuitRun& run, const std::filesystem::path& path);

struct RasterStats {
    int levels = 0;
    std::size_t dots = 0;
};

/// Spike raster: neuron i (1-based) at level i, neuron N repeated at level 0;
/// inhibitory positions red, excitatory green.
RasterStats emit_raster_svg(std::span<const SpikeTrain> trains, const BlockLayout& layout,
                            const std::filesystem::path& path);

}  // namespace hhsim
