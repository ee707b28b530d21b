#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vibroid/config.hpp"
#include "vibroid/inverse_id.hpp"
#include "vibroid/metrics.hpp"
#include "vibroid/svg.hpp"
#include "vibroid/timeseries.hpp"

namespace vibroid {

struct ChannelErrors {
    std::string name;
    GeersErrors errors;
};

/// One identification method's results on a scenario.
struct MethodOutcome {
    std::string method;  ///< "proposed" or "akf"
    Matrix forces;       ///< identified forces, n_forces x N (t = dt ... N dt)
    double wall_seconds = 0.0;  ///< identification loop only
    std::vector<ChannelErrors> force_errors;
    std::vector<ChannelErrors> disp_errors;
    double mean_force_comp = 0.0;  ///< mean comprehensive error over force channels
};

struct RunReport {
    bool trivial_scenario = false;  ///< all reference forces identically zero
    double dt = 0.0;
    double duration = 0.0;
    double alpha_used = 0.0;
    bool alpha_degenerate = false;  ///< L-curve fell back to minimum residual
    double real_time_factor = 0.0;  ///< proposed identification wall time / duration
    std::vector<MethodOutcome> outcomes;
    std::vector<std::string> notices;
    std::vector<std::filesystem::path> artifacts;
};

/// Full protocol for one scenario: build model, reduce, forward-solve the
/// reference, pollute measurements, identify (proposed and/or AKF), score
/// against the clean reference, and emit CSV/SVG artifacts plus report.txt.
/// `log` receives progress lines when non-null.
RunReport run_scenario(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct SweepPoint {
    double tau = 0.0;
    double alpha_used = 0.0;
    double mean_comp = 0.0;    ///< force-channel epsilon_comp, averaged over repeats
    double stderr_comp = 0.0;  ///< standard error over repeats
    std::vector<double> per_force_mean_comp;
};

struct SweepReport {
    std::vector<SweepPoint> points;
    std::vector<std::filesystem::path> artifacts;
};

/// Repeats the scenario at each noise level with per-repeat seeds and
/// averages the error measures (the model and reference are built once).
SweepReport run_noise_sweep(const ExperimentConfig& cfg, const std::vector<double>& taus,
                            std::ostream* log = nullptr);

struct ComparisonRow {
    std::string method;
    double dt = 0.0;
    double mean_comp = 0.0;
    double wall_seconds = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;  ///< proposed first, then AKF per dt
    bool trends_checked = false;      ///< false when only one equal-dt AKF case ran
    bool akf_error_monotone = false;  ///< AKF error non-increasing as dt shrinks
    bool proposed_at_least_as_accurate = false;
    bool proposed_faster = false;     ///< than AKF at its smallest dt
    std::vector<std::string> notices;
    std::vector<std::filesystem::path> artifacts;
};

/// Proposed identifier at the configured dt against the AKF at
/// dt / divisor for each configured divisor, on the same scenario.
ComparisonReport run_akf_comparison(const ExperimentConfig& cfg,
                                    const std::vector<double>& akf_dt_divisors,
                                    std::ostream* log = nullptr);

/// Writes one SVG line chart per bundle plus the CSV holding exactly the
/// plotted data. Returns the emitted paths (csv, svg, csv, svg, ...).
std::vector<std::filesystem::path> emit_plots(
    const std::vector<std::pair<PlotSpec, TimeSeries>>& bundles,
    const std::filesystem::path& out_dir);

}  // namespace vibroid
