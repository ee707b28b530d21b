#include "vibroid/inverse_id.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vibroid {

Gain precompute_gain(const ReducedModel& rom, const IdentifierConfig& cfg) {
    cfg.newmark.validate();
    cfg.selection.validate(rom.n_full);
    if (cfg.alpha < 0.0) {
        throw std::runtime_error("identifier: alpha must be nonnegative, got " +
                                 std::to_string(cfg.alpha));
    }
    const Index n_z = cfg.selection.measurement_count();
    const Index n_f = cfg.selection.force_count();
    if (n_f == 0) {
        throw std::runtime_error("identifier: no force DOFs configured");
    }
    if (n_z < n_f && cfg.alpha == 0.0) {
        throw std::runtime_error("identifier: " + std::to_string(n_z) + " measurements for " +
                                 std::to_string(n_f) +
                                 " forces is underdetermined with alpha = 0; "
                                 "add sensors or set alpha > 0");
    }

    const Index m = rom.size();
    Gain gain{NewmarkSolver({rom.mass, rom.damping, rom.stiffness}, cfg.newmark),
              Matrix(), Matrix(), Matrix(), Matrix(), cfg.alpha};

    const Matrix Sf = cfg.selection.force_matrix(rom.n_full);
    gain.reduced_force_map = rom.basis.transpose() * Sf;

    // Response sensitivity to the force at t+dt, stacked (d, v, a) blocks.
    const Matrix HtSf = gain.solver.solve_effective(gain.reduced_force_map);
    const double beta = cfg.newmark.beta;
    const double delta = cfg.newmark.delta;
    const double dt = cfg.newmark.dt;
    gain.G.resize(3 * m, n_f);
    gain.G.topRows(m) = HtSf;
    gain.G.middleRows(m, m) = (delta / (beta * dt)) * HtSf;
    gain.G.bottomRows(m) = (1.0 / (beta * dt * dt)) * HtSf;

    // Reduced measurement operator over the stacked state.
    gain.Shat = Matrix::Zero(n_z, 3 * m);
    Index row = 0;
    const auto place = [&](const std::vector<Index>& idx, Index block) {
        const Matrix S = SelectionConfig::selection_matrix(idx, rom.n_full);
        gain.Shat.block(row, block * m, S.rows(), m) = S * rom.basis;
        row += S.rows();
    };
    place(cfg.selection.disp_idx, 0);
    place(cfg.selection.vel_idx, 1);
    place(cfg.selection.acc_idx, 2);

    const Matrix SG = gain.Shat * gain.G;
    const Matrix normal =
        SG.transpose() * SG + cfg.alpha * Matrix::Identity(n_f, n_f);
    Eigen::FullPivLU<Matrix> normal_lu(normal);
    if (!normal_lu.isInvertible()) {
        throw std::runtime_error(
            "identifier: normal matrix is rank-deficient (rank " +
            std::to_string(normal_lu.rank()) + " of " + std::to_string(n_f) +
            "); set alpha > 0 or add sensors covering the force DOFs");
    }
    gain.P = normal_lu.solve(SG.transpose());
    return gain;
}

std::pair<Vector, State> step_identify(const Gain& gain, const State& s, const Vector& z_m) {
    const Index m = gain.n_modes();
    if (s.size() != m) {
        throw std::runtime_error("identifier: reduced state size mismatch");
    }
    if (z_m.size() != gain.n_measurements()) {
        throw std::runtime_error("identifier: measurement size " + std::to_string(z_m.size()) +
                                 ", expected " + std::to_string(gain.n_measurements()));
    }
    if (!z_m.allFinite() || !s.finite()) {
        throw std::runtime_error("identifier: non-finite measurement or state");
    }

    const NewmarkParams& p = gain.solver.params();
    const double beta = p.beta;
    const double delta = p.delta;
    const double dt = p.dt;

    // Free response at t+dt (zero applied force), stacked like G.
    const Vector rhat = gain.solver.internal_force(s);
    const Vector d_free = gain.solver.solve_effective(rhat);
    Vector g(3 * m);
    g.head(m) = d_free;
    g.segment(m, m) = (delta / (beta * dt)) * (d_free - s.d) - (delta / beta - 1.0) * s.v +
                      dt * (1.0 - delta / (2.0 * beta)) * s.a;
    g.tail(m) = (d_free - s.d) / (beta * dt * dt) - s.v / (beta * dt) -
                (1.0 / (2.0 * beta) - 1.0) * s.a;

    const Vector f = gain.P * (z_m - gain.Shat * g);
    const Vector stacked = gain.G * f + g;
    State next{stacked.head(m), stacked.segment(m, m), stacked.tail(m)};
    return {f, std::move(next)};
}

State recover_physical(const ReducedModel& rom, const State& reduced) {
    if (reduced.size() != rom.size()) {
        throw std::runtime_error("recover_physical: reduced state size mismatch");
    }
    return {rom.basis * reduced.d, rom.basis * reduced.v, rom.basis * reduced.a};
}

StateSeries recover_physical(const ReducedModel& rom, const StateSeries& reduced) {
    if (reduced.d.rows() != rom.size()) {
        throw std::runtime_error("recover_physical: reduced series size mismatch");
    }
    StateSeries out;
    out.dt = reduced.dt;
    out.d = rom.basis * reduced.d;
    out.v = rom.basis * reduced.v;
    out.a = rom.basis * reduced.a;
    return out;
}

IdentificationResult run_identification(const Gain& gain, const State& s0,
                                        const Matrix& measurements) {
    const Index m = gain.n_modes();
    const Index steps = measurements.cols();
    IdentificationResult result;
    result.forces.resize(gain.n_forces(), steps);
    result.reduced.dt = gain.solver.params().dt;
    result.reduced.d.resize(m, steps);
    result.reduced.v.resize(m, steps);
    result.reduced.a.resize(m, steps);

    State s = s0;
    const auto tic = std::chrono::steady_clock::now();
    for (Index k = 0; k < steps; ++k) {
        auto [f, next] = step_identify(gain, s, measurements.col(k));
        // Residual/solution accumulators feed the L-curve; the predicted
        // measurement is Shat * stacked(next) since next = G f + g.
        Vector stacked(3 * m);
        stacked << next.d, next.v, next.a;
        result.residual_sq_sum += (measurements.col(k) - gain.Shat * stacked).squaredNorm();
        result.solution_sq_sum += f.squaredNorm();
        result.forces.col(k) = f;
        result.reduced.d.col(k) = next.d;
        result.reduced.v.col(k) = next.v;
        result.reduced.a.col(k) = next.a;
        s = std::move(next);
    }
    const auto toc = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(toc - tic).count();
    return result;
}

AlphaSelection l_curve_select_alpha(const ReducedModel& rom, const IdentifierConfig& cfg,
                                    const State& s0, const Matrix& calibration_window,
                                    const std::vector<double>& alpha_grid) {
    if (alpha_grid.empty()) {
        throw std::runtime_error("l_curve: empty alpha grid");
    }
    for (double a : alpha_grid) {
        if (!(a > 0.0)) {
            throw std::runtime_error("l_curve: grid values must be strictly positive, got " +
                                     std::to_string(a));
        }
    }
    const Index n = static_cast<Index>(alpha_grid.size());
    AlphaSelection sel;
    sel.residual_norms.resize(alpha_grid.size());
    sel.solution_norms.resize(alpha_grid.size());
    sel.curvatures.assign(alpha_grid.size(), 0.0);

    for (Index i = 0; i < n; ++i) {
        IdentifierConfig c = cfg;
        c.alpha = alpha_grid[static_cast<size_t>(i)];
        const Gain gain = precompute_gain(rom, c);
        const IdentificationResult r = run_identification(gain, s0, calibration_window);
        sel.residual_norms[static_cast<size_t>(i)] = std::sqrt(r.residual_sq_sum);
        sel.solution_norms[static_cast<size_t>(i)] = std::sqrt(r.solution_sq_sum);
    }

    // Signed discrete curvature of the log-log curve. With points ordered by
    // increasing alpha (residual grows, solution shrinks), a convex corner
    // has positive cross product.
    const double floor_val = 1e-300;  // guards log of an exactly-zero norm
    auto lx = [&](Index i) {
        return std::log10(std::max(sel.residual_norms[static_cast<size_t>(i)], floor_val));
    };
    auto ly = [&](Index i) {
        return std::log10(std::max(sel.solution_norms[static_cast<size_t>(i)], floor_val));
    };
    double best_curv = 0.0;
    Index best = -1;
    for (Index i = 1; i + 1 < n; ++i) {
        const double x1 = lx(i - 1), y1 = ly(i - 1);
        const double x2 = lx(i), y2 = ly(i);
        const double x3 = lx(i + 1), y3 = ly(i + 1);
        const double cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1);
        const double l12 = std::hypot(x2 - x1, y2 - y1);
        const double l23 = std::hypot(x3 - x2, y3 - y2);
        const double l13 = std::hypot(x3 - x1, y3 - y1);
        const double denom = l12 * l23 * l13;
        const double curv = denom > 0.0 ? 2.0 * cross / denom : 0.0;
        sel.curvatures[static_cast<size_t>(i)] = curv;
        if (curv > 0.0 && curv >= best_curv) {  // >= ties break toward larger alpha
            best_curv = curv;
            best = i;
        }
    }

    Index min_i = 0;
    for (Index i = 1; i < n; ++i) {
        if (sel.residual_norms[static_cast<size_t>(i)] <=
            sel.residual_norms[static_cast<size_t>(min_i)]) {
            min_i = i;
        }
    }
    // A genuine corner marks the transition out of the misfit floor, so it
    // cannot fit the calibration window orders of magnitude worse than the
    // best grid point does. Noise-free data has no floor and produces exactly
    // that artifact: curvature peaks deep in the over-regularized branch.
    if (best >= 0 && sel.residual_norms[static_cast<size_t>(best)] >
                         100.0 * sel.residual_norms[static_cast<size_t>(min_i)]) {
        best = -1;
    }
    if (best < 0) {
        // No (credible) corner: fall back to the smallest residual.
        sel.grid_index = min_i;
        sel.degenerate = n > 1;
    } else {
        sel.grid_index = best;
    }
    sel.alpha = alpha_grid[static_cast<size_t>(sel.grid_index)];
    return sel;
}

}  // namespace vibroid
