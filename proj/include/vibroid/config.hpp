#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vibroid/metrics.hpp"
#include "vibroid/newmark.hpp"
#include "vibroid/rom.hpp"
#include "vibroid/system_model.hpp"

namespace vibroid {

/// One sinusoidal component A*sin(omega*t + phase).
struct SineTerm {
    double amplitude = 0.0;
    double omega = 0.0;  ///< rad/s
    double phase = 0.0;  ///< rad
};

/// Applied force at one DOF, a finite sum of sinusoids.
struct ForceProfile {
    Index dof = 0;
    std::vector<SineTerm> terms;

    double value(double t) const;
};

/// Parses a profile expression: either a '+'-joined sum of
/// `A*sin(W*pi*t)` / `A*sin(W*t)` terms, or
/// `random(count=N, band=HZ, amp=A, seed=S)` — a seeded composition of N
/// sinusoids with uniform random frequency in (0, HZ] Hz, amplitude in
/// (0, A], and phase in [0, 2*pi). Throws with the offending text on
/// malformed input.
std::vector<SineTerm> parse_force_profile(const std::string& text);

enum class Method { proposed, akf, both };

/// Everything a harness run needs, read from one INI-style config file.
struct ExperimentConfig {
    // Model source: generated toy by default, external manifest when set.
    bool use_manifest = false;
    std::filesystem::path manifest;
    ToyModelSpec toy;

    RomSpec rom;
    DampingSpec damping;
    NewmarkParams newmark;
    SelectionConfig selection;
    std::vector<ForceProfile> forces;
    NoiseSpec noise;

    Method method = Method::proposed;
    bool alpha_from_l_curve = false;
    double alpha = 0.0;
    std::vector<double> alpha_grid;   ///< used when alpha_from_l_curve
    double l_curve_window = 1.0;      ///< calibration span, seconds

    // AKF covariance settings (the baseline needs explicit tuning inputs).
    double akf_q_force = 1.0;
    double akf_q_state = 1e-20;
    double akf_p0 = 1e-2;
    double akf_r_floor = 1e-12;  ///< R diagonal when the noise level is zero

    double duration = 1.0;
    int repeats = 1;
    std::filesystem::path out_dir = "out";

    std::vector<double> sweep_taus;        ///< noise-sweep tau values
    std::vector<double> akf_dt_divisors;   ///< comparison runs AKF at dt/divisor

    /// Cross-field checks (duration > 0, repeats >= 1, profile DOFs listed
    /// in selection.force_idx exactly once, grid present when l_curve).
    void validate() const;
};

/// Raw INI content: ordered (section, key/value) pairs. Sections repeat;
/// `[force]` in particular appears once per applied force.
struct ConfigSection {
    std::string name;
    std::map<std::string, std::string> entries;
    size_t line = 0;
};

std::vector<ConfigSection> parse_ini(const std::filesystem::path& path);

/// Parses and validates a full experiment description. Unknown sections or
/// keys are errors (typo protection).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Samples the applied forces on the selection's force DOFs:
/// row j follows selection.force_idx[j], column k is t = k*dt.
/// A force DOF without a profile contributes a zero row.
Matrix force_time_matrix(const std::vector<ForceProfile>& profiles,
                         const std::vector<Index>& force_idx, double dt, Index samples);

}  // namespace vibroid
