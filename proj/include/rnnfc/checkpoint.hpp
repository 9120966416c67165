#pragma once

#include "rnnfc/tape.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rnnfc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> data;

    bool operator==(const NamedArray&) const = default;
};

/// Parameters plus (optionally) optimizer state, enough to resume training exactly.
struct Checkpoint {
    std::vector<NamedArray> parameters;
    std::string optimizer_kind;
    std::int64_t optimizer_step = 0;
    std::vector<NamedArray> optimizer_state;

    bool operator==(const Checkpoint&) const = default;
};

std::vector<NamedArray> export_parameters(const grad::ParameterSet& params);

/// Copies values into existing parameters; names and shapes must match.
void import_parameters(const std::vector<NamedArray>& arrays, grad::ParameterSet& params);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace rnnfc
