#pragma once

#include <utility>

#include "vibroid/rom.hpp"
#include "vibroid/system_model.hpp"

namespace vibroid {

/// First-order form of the reduced equations of motion,
/// x = [d; v], xdot = Ac x + Bc f.
struct StateSpaceModel {
    Matrix Ac;  ///< [[0, I], [-mass^{-1} stiffness, -mass^{-1} damping]]
    Matrix Bc;  ///< [0; mass^{-1} basis^T Sf]
};

/// Builds the continuous state-space form of a reduced model with force
/// selection Sf (full size x n_forces). Throws if the reduced mass is singular.
StateSpaceModel build_state_space(const ReducedModel& rom, const Matrix& Sf);

/// Scaling-and-squaring Pade matrix exponential (validation-grade accuracy).
Matrix matrix_exponential(const Matrix& m);

/// Zero-order-hold discretization via the augmented exponential
/// exp([[Ac, Bc], [0, 0]] dt), which handles singular Ac. Returns (Ad, Bd).
std::pair<Matrix, Matrix> discretize(const StateSpaceModel& ssm, double dt);

/// Discrete model over the state augmented with a random-walk force.
struct AugmentedModel {
    Matrix Aa;  ///< [[Ad, Bd], [0, I]]
    Matrix Ga;  ///< measurement rows over [d; v; f], ordered disp, vel, acc
    Matrix Q;   ///< process noise covariance
    Matrix R;   ///< measurement noise covariance
    Index n_modes = 0;
    Index n_forces = 0;

    Index state_size() const { return Aa.rows(); }
};

/// Assembles the augmented transition and measurement operators.
/// Displacement rows read S_d basis d, velocity rows S_v basis v, and
/// acceleration rows eliminate the acceleration through the equation of
/// motion, picking up direct force feedthrough.
AugmentedModel augment(const Matrix& Ad, const Matrix& Bd, const ReducedModel& rom,
                       const SelectionConfig& selection, const Matrix& Q, const Matrix& R);

/// Block-diagonal process noise: state_var on the 2m state block,
/// force_var on the force block.
Matrix process_noise(Index n_state, Index n_forces, double state_var, double force_var);

struct FilterState {
    Vector x;  ///< [d; v; f] estimate
    Matrix P;  ///< covariance, kept symmetric

    static FilterState zero(Index n, double p0);
};

/// Kalman measurement update. The innovation covariance is factorized
/// (never inverted); throws when it is not positive definite. The updated
/// covariance is re-symmetrized.
FilterState measurement_update(const AugmentedModel& m, const FilterState& fs, const Vector& z);

/// Kalman time update: x <- Aa x, P <- Aa P Aa^T + Q.
FilterState time_update(const AugmentedModel& m, const FilterState& fs);

struct FilterResult {
    Matrix forces;  ///< n_forces x N, corrected estimates at t = dt ... N dt
    Matrix states;  ///< 2m x N, corrected reduced state estimates
    double wall_seconds = 0.0;
};

/// Runs predict-correct over measurement columns z(dt) ... z(N dt) starting
/// from fs0 at t = 0, recording the corrected estimates.
FilterResult run_filter(const AugmentedModel& m, const FilterState& fs0,
                        const Matrix& measurements);

}  // namespace vibroid
