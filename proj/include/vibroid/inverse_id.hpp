#pragma once

#include <utility>
#include <vector>

#include "vibroid/newmark.hpp"
#include "vibroid/rom.hpp"

namespace vibroid {

/// Settings for the per-step regularized force identifier.
struct IdentifierConfig {
    NewmarkParams newmark;
    double alpha = 0.0;  ///< Tikhonov regularization weight, >= 0
    SelectionConfig selection;
};

/// Everything step-invariant, assembled once so the per-step loop is only
/// small mat-vec work. `solver` owns the effective-stiffness factorization
/// and the reduced operators; the identifier therefore embeds exactly the
/// same discretization as the forward integrator.
struct Gain {
    NewmarkSolver solver;
    Matrix reduced_force_map;  ///< basis^T * Sf, m x n_forces
    Matrix G;                  ///< stacked response sensitivity, 3m x n_forces
    Matrix Shat;               ///< reduced measurement operator, n_z x 3m
    Matrix P;                  ///< regularized pseudo-inverse, n_forces x n_z
    double alpha = 0.0;

    Index n_modes() const { return solver.system().size(); }
    Index n_forces() const { return G.cols(); }
    Index n_measurements() const { return Shat.rows(); }
};

/// Assembles the effective-stiffness factorization, the force-to-response
/// operator G, the reduced measurement operator Shat, and the regularized
/// pseudo-inverse P = (G^T Shat^T Shat G + alpha I)^{-1} G^T Shat^T.
///
/// Throws when the measurement count is below the force count with
/// alpha = 0, and when the regularized normal matrix is singular; both
/// errors suggest alpha > 0 or more sensors.
Gain precompute_gain(const ReducedModel& rom, const IdentifierConfig& cfg);

/// One identification step: from the reduced state at t and the measurement
/// at t+dt, returns the identified force and the reduced state at t+dt.
/// Measurement ordering is the selection contract: displacements, then
/// velocities, then accelerations.
std::pair<Vector, State> step_identify(const Gain& gain, const State& s, const Vector& z_m);

/// Back-transformation of one reduced state to physical coordinates.
State recover_physical(const ReducedModel& rom, const State& reduced);

/// Column-wise back-transformation of a whole reduced series.
StateSeries recover_physical(const ReducedModel& rom, const StateSeries& reduced);

struct IdentificationResult {
    Matrix forces;        ///< n_forces x N; column k holds the force at t = (k+1)*dt
    StateSeries reduced;  ///< N reduced states at t = dt ... N*dt
    double wall_seconds = 0.0;          ///< identification loop only
    double residual_sq_sum = 0.0;       ///< sum over steps of |z_m - Shat(G f + g)|^2
    double solution_sq_sum = 0.0;       ///< sum over steps of |f|^2
};

/// Sequential identification over measurement columns z_m(dt) ... z_m(N dt),
/// starting from the reduced state s0 at t = 0.
IdentificationResult run_identification(const Gain& gain, const State& s0,
                                        const Matrix& measurements);

struct AlphaSelection {
    double alpha = 0.0;
    Index grid_index = 0;
    bool degenerate = false;  ///< no convex corner found; fell back to min residual
    std::vector<double> residual_norms;
    std::vector<double> solution_norms;
    std::vector<double> curvatures;  ///< signed 3-point curvature, 0 at endpoints
};

/// L-curve corner search: runs the identifier on a calibration window for
/// each grid value, places (log residual norm, log solution norm) points,
/// and picks the grid value of maximum positive discrete curvature.
/// Ties break toward the larger alpha; a curve with no convex corner falls
/// back to the minimum-residual point with `degenerate` set.
AlphaSelection l_curve_select_alpha(const ReducedModel& rom, const IdentifierConfig& cfg,
                                    const State& s0, const Matrix& calibration_window,
                                    const std::vector<double>& alpha_grid);

}  // namespace vibroid
