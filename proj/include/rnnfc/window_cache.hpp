#pragma once

#include "rnnfc/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace rnnfc {

inline constexpr std::uint32_t kWindowCacheVersion = 1;

struct WindowCacheKey {
    std::string collection;
    Pipeline pipeline = Pipeline::Stl;
    int m = 0;
    int n = 0;
    Stage stage = Stage::Train;
    InputFormat format = InputFormat::MovingWindow;

    bool operator==(const WindowCacheKey&) const = default;
};

/// <dir>/<collection>/<pipeline>_<format>_m<m>_n<n>/<series>.<stage>.wsc
std::filesystem::path window_cache_path(const std::filesystem::path& dir, const WindowCacheKey& key,
                                        const std::string& series_id);

/// Writes one WindowSet with a versioned header. Output depends only on the inputs.
void write_window_cache(const std::filesystem::path& path, const WindowCacheKey& key, const WindowSet& windows);

/// Reads a cache file; throws ParseError on a bad header or a key mismatch.
WindowSet read_window_cache(const std::filesystem::path& path, const WindowCacheKey& expected);

} // namespace rnnfc
