#include "vibroid/akf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <stdexcept>
#include <string>

namespace vibroid {

StateSpaceModel build_state_space(const ReducedModel& rom, const Matrix& Sf) {
    const Index m = rom.size();
    if (Sf.rows() != rom.n_full) {
        throw std::runtime_error("akf: Sf has " + std::to_string(Sf.rows()) +
                                 " rows, model has " + std::to_string(rom.n_full) + " DOFs");
    }
    Eigen::PartialPivLU<Matrix> mass_lu(rom.mass);
    if (mass_lu.rcond() < 1e-14) {
        throw std::runtime_error("akf: reduced mass matrix is numerically singular");
    }
    StateSpaceModel ssm;
    ssm.Ac = Matrix::Zero(2 * m, 2 * m);
    ssm.Ac.topRightCorner(m, m) = Matrix::Identity(m, m);
    ssm.Ac.bottomLeftCorner(m, m) = -mass_lu.solve(rom.stiffness);
    ssm.Ac.bottomRightCorner(m, m) = -mass_lu.solve(rom.damping);
    ssm.Bc = Matrix::Zero(2 * m, Sf.cols());
    ssm.Bc.bottomRows(m) = mass_lu.solve(rom.basis.transpose() * Sf);
    return ssm;
}

Matrix matrix_exponential(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::runtime_error("matrix_exponential: matrix must be square");
    }
    return m.exp();
}

std::pair<Matrix, Matrix> discretize(const StateSpaceModel& ssm, double dt) {
    if (!(dt > 0.0)) {
        throw std::runtime_error("akf: discretization step must be positive");
    }
    const Index n = ssm.Ac.rows();
    const Index k = ssm.Bc.cols();
    Matrix block = Matrix::Zero(n + k, n + k);
    block.topLeftCorner(n, n) = ssm.Ac * dt;
    block.topRightCorner(n, k) = ssm.Bc * dt;
    const Matrix e = matrix_exponential(block);
    if (!e.allFinite()) {
        throw std::runtime_error("akf: matrix exponential overflowed (dt*|Ac| too large)");
    }
    return {e.topLeftCorner(n, n), e.topRightCorner(n, k)};
}

AugmentedModel augment(const Matrix& Ad, const Matrix& Bd, const ReducedModel& rom,
                       const SelectionConfig& selection, const Matrix& Q, const Matrix& R) {
    const Index m = rom.size();
    const Index n_f = Bd.cols();
    const Index n_aug = 2 * m + n_f;
    if (Ad.rows() != 2 * m || Ad.cols() != 2 * m || Bd.rows() != 2 * m) {
        throw std::runtime_error("akf: discrete operator size does not match the model");
    }
    selection.validate(rom.n_full);
    if (n_f != selection.force_count()) {
        throw std::runtime_error("akf: Bd has " + std::to_string(n_f) +
                                 " inputs, selection names " +
                                 std::to_string(selection.force_count()) + " force DOFs");
    }
    const Index n_z = selection.measurement_count();
    if (Q.rows() != n_aug || Q.cols() != n_aug) {
        throw std::runtime_error("akf: Q must be " + std::to_string(n_aug) + " square");
    }
    if (R.rows() != n_z || R.cols() != n_z) {
        throw std::runtime_error("akf: R must be " + std::to_string(n_z) + " square");
    }

    AugmentedModel am;
    am.n_modes = m;
    am.n_forces = n_f;
    am.Aa = Matrix::Zero(n_aug, n_aug);
    am.Aa.topLeftCorner(2 * m, 2 * m) = Ad;
    am.Aa.topRightCorner(2 * m, n_f) = Bd;
    am.Aa.bottomRightCorner(n_f, n_f) = Matrix::Identity(n_f, n_f);

    Eigen::PartialPivLU<Matrix> mass_lu(rom.mass);
    const Matrix inv_stiff = mass_lu.solve(rom.stiffness);
    const Matrix inv_damp = mass_lu.solve(rom.damping);
    const Matrix inv_force =
        mass_lu.solve(rom.basis.transpose() * selection.force_matrix(rom.n_full));

    am.Ga = Matrix::Zero(n_z, n_aug);
    Index row = 0;
    const Matrix Sd = SelectionConfig::selection_matrix(selection.disp_idx, rom.n_full);
    am.Ga.block(row, 0, Sd.rows(), m) = Sd * rom.basis;
    row += Sd.rows();
    const Matrix Sv = SelectionConfig::selection_matrix(selection.vel_idx, rom.n_full);
    am.Ga.block(row, m, Sv.rows(), m) = Sv * rom.basis;
    row += Sv.rows();
    // Acceleration rows substitute a = -mass^{-1}(stiffness d + damping v)
    // + mass^{-1} basis^T Sf f, giving direct feedthrough to the force block.
    const Matrix Sa = SelectionConfig::selection_matrix(selection.acc_idx, rom.n_full);
    const Matrix SaT = Sa * rom.basis;
    am.Ga.block(row, 0, Sa.rows(), m) = -SaT * inv_stiff;
    am.Ga.block(row, m, Sa.rows(), m) = -SaT * inv_damp;
    am.Ga.block(row, 2 * m, Sa.rows(), n_f) = SaT * inv_force;

    am.Q = Q;
    am.R = R;
    return am;
}

Matrix process_noise(Index n_state, Index n_forces, double state_var, double force_var) {
    Matrix q = Matrix::Zero(n_state + n_forces, n_state + n_forces);
    q.topLeftCorner(n_state, n_state) = state_var * Matrix::Identity(n_state, n_state);
    q.bottomRightCorner(n_forces, n_forces) =
        force_var * Matrix::Identity(n_forces, n_forces);
    return q;
}

FilterState FilterState::zero(Index n, double p0) {
    return {Vector::Zero(n), p0 * Matrix::Identity(n, n)};
}

FilterState measurement_update(const AugmentedModel& m, const FilterState& fs,
                               const Vector& z) {
    if (z.size() != m.Ga.rows()) {
        throw std::runtime_error("akf: measurement size " + std::to_string(z.size()) +
                                 ", expected " + std::to_string(m.Ga.rows()));
    }
    Matrix P = 0.5 * (fs.P + fs.P.transpose());
    Matrix PGt = P * m.Ga.transpose();
    Matrix W = m.Ga * PGt + m.R;
    Eigen::LLT<Matrix> llt(0.5 * (W + W.transpose()));
    if (llt.info() != Eigen::Success) {
        // In exact arithmetic W = Ga P Ga^T + R is at least as definite as R,
        // so a rejection here means accumulated roundoff pushed P itself
        // slightly indefinite and the acceleration feedthrough grading blew
        // that past R's smallest entries. Project P back onto the PSD cone
        // and rebuild; the spectral clamp is backward stable, which a pivoted
        // LDLT of an indefinite matrix is not.
        const Eigen::SelfAdjointEigenSolver<Matrix> es(P);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("akf: covariance eigendecomposition failed");
        }
        P = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
            es.eigenvectors().transpose();
        P = 0.5 * (P + P.transpose());
        PGt = P * m.Ga.transpose();
        W = m.Ga * PGt + m.R;
        llt.compute(0.5 * (W + W.transpose()));
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("akf: innovation covariance is not positive definite");
        }
    }
    // L = P Ga^T W^{-1}, via the factorization of W.
    const Matrix L = llt.solve(PGt.transpose()).transpose();
    FilterState out;
    out.x = fs.x + L * (z - m.Ga * fs.x);
    // Joseph form: PSD for any gain, and its rounding error scales with ||P||
    // itself. The short form P - L Ga P loses definiteness at eps*||L||*||Ga||,
    // which the acceleration feedthrough grading amplifies by many decades.
    const Matrix open = Matrix::Identity(P.rows(), P.cols()) - L * m.Ga;
    out.P = open * P * open.transpose() + L * m.R * L.transpose();
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

FilterState time_update(const AugmentedModel& m, const FilterState& fs) {
    FilterState out;
    out.x = m.Aa * fs.x;
    out.P = m.Aa * fs.P * m.Aa.transpose() + m.Q;
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

FilterResult run_filter(const AugmentedModel& m, const FilterState& fs0,
                        const Matrix& measurements) {
    const Index steps = measurements.cols();
    const Index n_state = 2 * m.n_modes;
    FilterResult result;
    result.forces.resize(m.n_forces, steps);
    result.states.resize(n_state, steps);

    FilterState fs = fs0;
    const auto tic = std::chrono::steady_clock::now();
    for (Index k = 0; k < steps; ++k) {
        fs = time_update(m, fs);
        fs = measurement_update(m, fs, measurements.col(k));
        result.states.col(k) = fs.x.head(n_state);
        result.forces.col(k) = fs.x.tail(m.n_forces);
    }
    const auto toc = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(toc - tic).count();
    return result;
}

}  // namespace vibroid
