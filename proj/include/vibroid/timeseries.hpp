#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibroid/linalg.hpp"

namespace vibroid {

/// Uniformly sampled multi-channel signal: one row per channel, one column
/// per sample at t0 + k*dt.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::string> names;  ///< channel names, one per row
    Matrix values;

    Index channels() const { return values.rows(); }
    Index samples() const { return values.cols(); }
    double time_at(Index k) const { return t0 + dt * static_cast<double>(k); }
    void validate() const;
};

/// Writes `t,<name>,...` rows with full-precision (%.17g) decimal text, so
/// write-then-read reproduces every double exactly and equal inputs yield
/// byte-identical files.
void write_csv(const std::filesystem::path& path, const TimeSeries& series);

/// Reads the format produced by write_csv. The time column must be
/// uniformly spaced (relative tolerance 1e-9 on the step).
TimeSeries read_csv(const std::filesystem::path& path);

}  // namespace vibroid
