#include "vibroid/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vibroid {

void NoiseSpec::validate() const {
    if (tau < 0.0) {
        throw std::runtime_error("noise: tau must be nonnegative, got " + std::to_string(tau));
    }
}

double GaussianStream::uniform_open(double offset) {
    return (static_cast<double>(engine_() >> 11) + offset) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform_open(1.0);  // in (0, 1], log stays finite
    const double u2 = uniform_open(0.0);  // in [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

double sample_std(const Vector& signal) {
    const Index n = signal.size();
    if (n < 2) return 0.0;
    const double mean = signal.mean();
    const double ss = (signal.array() - mean).square().sum();
    return std::sqrt(ss / static_cast<double>(n - 1));
}

Vector add_noise(const Vector& signal, const NoiseSpec& spec) {
    spec.validate();
    if (signal.size() == 0) {
        throw std::runtime_error("noise: empty signal");
    }
    const double sigma = sample_std(signal);
    if (spec.tau == 0.0 || sigma == 0.0) {
        return signal;
    }
    GaussianStream stream(spec.seed);
    Vector out = signal;
    for (Index i = 0; i < out.size(); ++i) {
        out(i) += spec.tau * sigma * stream.next();
    }
    return out;
}

Matrix add_noise(const Matrix& signals, const NoiseSpec& spec) {
    spec.validate();
    if (signals.size() == 0) {
        throw std::runtime_error("noise: empty signal matrix");
    }
    if (spec.tau == 0.0) {
        return signals;
    }
    GaussianStream stream(spec.seed);
    Matrix out = signals;
    for (Index r = 0; r < out.rows(); ++r) {
        const double sigma = sample_std(out.row(r).transpose());
        if (sigma == 0.0) continue;
        for (Index k = 0; k < out.cols(); ++k) {
            out(r, k) += spec.tau * sigma * stream.next();
        }
    }
    return out;
}

GeersErrors geers_errors(const Vector& identified, const Vector& reference) {
    if (identified.size() != reference.size()) {
        throw std::runtime_error("geers: signal lengths differ (" +
                                 std::to_string(identified.size()) + " vs " +
                                 std::to_string(reference.size()) + ")");
    }
    if (identified.size() < 2) {
        throw std::runtime_error("geers: signals must have at least 2 samples");
    }
    const double sum_n = identified.squaredNorm();
    const double sum_m = reference.squaredNorm();
    if (sum_m == 0.0) {
        throw std::runtime_error("geers: reference signal is identically zero");
    }
    GeersErrors e;
    e.mag = std::sqrt(sum_n) / std::sqrt(sum_m) - 1.0;
    const double cross = std::abs(identified.dot(reference));
    const double denom = std::sqrt(std::sqrt(sum_n) * std::sqrt(sum_m));
    e.phase = denom == 0.0 ? 1.0 : 1.0 - std::sqrt(cross) / denom;
    e.comp = std::hypot(e.mag, e.phase);
    return e;
}

Matrix assemble_measurement_vector(const StateSeries& physical, const SelectionConfig& sel) {
    const Index n = physical.d.rows();
    sel.validate(n);
    const Index n_z = sel.measurement_count();
    Matrix z(n_z, physical.samples());
    Index row = 0;
    for (Index i : sel.disp_idx) z.row(row++) = physical.d.row(i);
    for (Index i : sel.vel_idx) z.row(row++) = physical.v.row(i);
    for (Index i : sel.acc_idx) z.row(row++) = physical.a.row(i);
    return z;
}

std::vector<std::string> measurement_names(const SelectionConfig& sel) {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(sel.measurement_count()));
    for (Index i : sel.disp_idx) names.push_back("disp_" + std::to_string(i));
    for (Index i : sel.vel_idx) names.push_back("vel_" + std::to_string(i));
    for (Index i : sel.acc_idx) names.push_back("acc_" + std::to_string(i));
    return names;
}

}  // namespace vibroid
