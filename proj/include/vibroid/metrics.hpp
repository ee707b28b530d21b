#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vibroid/newmark.hpp"
#include "vibroid/system_model.hpp"

namespace vibroid {

/// Proportional Gaussian measurement pollution: each sample gains
/// tau * (signal standard deviation) * N(0,1).
struct NoiseSpec {
    double tau = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seedable standard-normal stream with a fixed, documented algorithm
/// (mt19937_64 feeding a Box-Muller pair), so equal seeds reproduce equal
/// noise bit-for-bit on every platform. The library's own normal
/// distribution is implementation-defined and deliberately avoided.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next();

private:
    double uniform_open(double offset);  // (x >> 11) * 2^-53, plus offset ulp

    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Unbiased (n-1) sample standard deviation; 0 for n < 2.
double sample_std(const Vector& signal);

/// Returns signal + tau * std(signal) * N(0,1). tau = 0 or a constant
/// signal returns the input unchanged (same bits).
Vector add_noise(const Vector& signal, const NoiseSpec& spec);

/// Row-wise pollution of a multi-channel series: each row is one signal
/// with its own standard deviation, drawing from a single stream in row
/// order (deterministic under a fixed seed and channel layout).
Matrix add_noise(const Matrix& signals, const NoiseSpec& spec);

/// Magnitude / phase / comprehensive discrepancy between two transient
/// signals. The phase part is bounded in [0, 1]; a pure sign flip scores
/// zero on all three (absolute value inside the phase term).
struct GeersErrors {
    double mag = 0.0;
    double phase = 0.0;
    double comp = 0.0;
};

GeersErrors geers_errors(const Vector& identified, const Vector& reference);

/// Stacks the selected physical responses per sample in (displacement,
/// velocity, acceleration) order: one row per channel, one column per sample.
Matrix assemble_measurement_vector(const StateSeries& physical, const SelectionConfig& sel);

/// Channel names matching assemble_measurement_vector row order,
/// e.g. "disp_3", "vel_0", "acc_7" (zero-based DOF indices).
std::vector<std::string> measurement_names(const SelectionConfig& sel);

}  // namespace vibroid
