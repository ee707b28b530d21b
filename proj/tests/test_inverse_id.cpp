#include "vibroid/inverse_id.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vibroid/metrics.hpp"
#include "vibroid/rom.hpp"
#include "vibroid/system_model.hpp"

namespace {

using vibroid::DampingSpec;
using vibroid::Gain;
using vibroid::IdentifierConfig;
using vibroid::Index;
using vibroid::Matrix;
using vibroid::NewmarkParams;
using vibroid::ReducedModel;
using vibroid::RomSpec;
using vibroid::SelectionConfig;
using vibroid::State;
using vibroid::StateSeries;
using vibroid::ToyModelSpec;
using vibroid::Vector;

struct Scenario {
    vibroid::CoupledSystem sys;
    ReducedModel rom;
    IdentifierConfig cfg;
};

/// Desk-scale pipe: 60 m steel rod against a 60 m water column, modes in
/// the tens of Hz so 1 kHz sampling resolves them comfortably.
Scenario make_scenario(double alpha = 0.0, double dt = 1e-3) {
    ToyModelSpec spec;
    spec.n_struct_elems = 12;
    spec.n_fluid_elems = 12;
    spec.area = 0.01;
    spec.len_struct = 60.0;
    spec.len_fluid = 60.0;

    Scenario sc;
    sc.sys = generate_toy(spec);

    DampingSpec damping;
    damping.a1_struct = 1.0;
    damping.a2_struct = 1e-4;
    damping.a1_fluid = 1.0;
    damping.a2_fluid = 1e-4;
    sc.rom = build_rom(sc.sys, RomSpec{6, 4, true}, damping);

    sc.cfg.newmark.dt = dt;
    sc.cfg.alpha = alpha;
    sc.cfg.selection.force_idx = {3, 8};
    // Acceleration picks cover both force locations; the per-step inversion
    // feeds the identified force back into the state update, and sets that
    // miss a force location can leave that closed loop non-minimum-phase.
    sc.cfg.selection.acc_idx = {1, 3, 5, 8};
    return sc;
}

/// Two-tone test forces, column k sampled at t = k*dt.
Matrix applied_forces(double dt, Index samples) {
    Matrix f(2, samples);
    for (Index k = 0; k < samples; ++k) {
        const double t = dt * static_cast<double>(k);
        f(0, k) = 200.0 * std::sin(30.0 * M_PI * t) + 370.0 * std::sin(175.0 * M_PI * t);
        f(1, k) = 500.0 * std::sin(100.0 * M_PI * t) + 460.0 * std::sin(95.0 * M_PI * t);
    }
    return f;
}

Vector stack_state(const StateSeries& s, Index k) {
    Vector x(3 * s.d.rows());
    x << s.d.col(k), s.v.col(k), s.a.col(k);
    return x;
}

/// Clean measurements z(dt) ... z(N dt) for the given applied force history.
Matrix simulate_measurements(const Gain& gain, const Matrix& applied) {
    const Matrix reduced_force = gain.reduced_force_map * applied;
    const StateSeries ref =
        gain.solver.integrate(State::zero(gain.n_modes()), reduced_force);
    Matrix z(gain.n_measurements(), applied.cols() - 1);
    for (Index k = 1; k < applied.cols(); ++k) {
        z.col(k - 1) = gain.Shat * stack_state(ref, k);
    }
    return z;
}

/// Free-flight prediction for one step: the zero-force Newmark update is
/// exactly the g vector of the identification equation.
Vector free_prediction(const Gain& gain, const State& s) {
    const State g = gain.solver.step(s, Vector::Zero(gain.n_modes()));
    Vector out(3 * gain.n_modes());
    out << g.d, g.v, g.a;
    return out;
}

TEST(Gain, OperatorShapes) {
    const Scenario sc = make_scenario();
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Index m = sc.rom.size();
    EXPECT_EQ(gain.n_modes(), m);
    EXPECT_EQ(gain.G.rows(), 3 * m);
    EXPECT_EQ(gain.G.cols(), 2);
    EXPECT_EQ(gain.Shat.rows(), 4);
    EXPECT_EQ(gain.Shat.cols(), 3 * m);
    EXPECT_EQ(gain.P.rows(), 2);
    EXPECT_EQ(gain.P.cols(), 4);
}

TEST(Gain, PseudoInverseNeutralizesForwardMap) {
    // alpha = 0 with full column rank: P * (Shat G) = I.
    const Scenario sc = make_scenario(0.0);
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix identity = gain.P * (gain.Shat * gain.G);
    EXPECT_LE((identity - Matrix::Identity(2, 2)).norm(), 1e-8);
}

TEST(Gain, SquareCaseIsExactInverse) {
    Scenario sc = make_scenario(0.0);
    sc.cfg.selection.acc_idx = {3, 8};  // collocated: n_z = n_forces
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix sg = gain.Shat * gain.G;
    ASSERT_EQ(sg.rows(), 2);
    EXPECT_LE((gain.P - sg.inverse()).norm(), 1e-8 * gain.P.norm());
}

TEST(Gain, RidgeLimitShrinksTheGain) {
    Scenario sc = make_scenario();
    const Gain plain = precompute_gain(sc.rom, sc.cfg);
    const Matrix normal = plain.G.transpose() * plain.Shat.transpose() * plain.Shat * plain.G;
    sc.cfg.alpha = 1e12 * normal.norm();
    const Gain ridge = precompute_gain(sc.rom, sc.cfg);
    const double bound =
        2.0 * (plain.G.transpose() * plain.Shat.transpose()).norm() / sc.cfg.alpha;
    EXPECT_LE(ridge.P.norm(), bound);
}

TEST(Gain, UnderdeterminedWithoutRegularizationIsRejected) {
    Scenario sc = make_scenario(0.0);
    sc.cfg.selection.acc_idx = {5};  // one sensor, two forces
    try {
        precompute_gain(sc.rom, sc.cfg);
        FAIL() << "expected throw for underdetermined alpha=0 setup";
    } catch (const std::runtime_error& err) {
        EXPECT_NE(std::string(err.what()).find("alpha"), std::string::npos) << err.what();
    }
    // Any positive regularization makes the same layout solvable.
    sc.cfg.alpha = 1e-6;
    EXPECT_NO_THROW(precompute_gain(sc.rom, sc.cfg));
}

TEST(Gain, NegativeAlphaRejected) {
    Scenario sc = make_scenario();
    sc.cfg.alpha = -1.0;
    EXPECT_THROW(precompute_gain(sc.rom, sc.cfg), std::runtime_error);
}

TEST(StepIdentify, FreePredictionMeansZeroForce) {
    for (const double alpha : {0.0, 0.5}) {
        const Scenario sc = make_scenario(alpha);
        const Gain gain = precompute_gain(sc.rom, sc.cfg);
        State s = State::zero(gain.n_modes());
        s.d.setLinSpaced(gain.n_modes(), -0.3, 0.4);
        s.v.setConstant(0.05);
        s.a.setConstant(-0.01);
        const Vector z = gain.Shat * free_prediction(gain, s);
        const auto [f, next] = step_identify(gain, s, z);
        // The residual z - Shat*g cancels to rounding, and the force map P
        // amplifies that rounding by its own norm (~1e3 here), so the zero
        // bound has to carry the same factor.
        const double f_floor = 1e-11 * std::max(1.0, gain.P.norm()) * std::max(1.0, z.norm());
        EXPECT_LE(f.norm(), f_floor) << "alpha = " << alpha;
        const State expected = gain.solver.step(s, Vector::Zero(gain.n_modes()));
        EXPECT_LE((next.d - expected.d).norm(), 1e-10);
    }
}

TEST(StepIdentify, ZeroStateZeroMeasurement) {
    const Scenario sc = make_scenario();
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const auto [f, next] = step_identify(gain, State::zero(gain.n_modes()),
                                         Vector::Zero(gain.n_measurements()));
    EXPECT_EQ(f.norm(), 0.0);
    EXPECT_EQ(next.d.norm(), 0.0);
    EXPECT_EQ(next.v.norm(), 0.0);
    EXPECT_EQ(next.a.norm(), 0.0);
}

TEST(StepIdentify, RejectsBadMeasurements) {
    const Scenario sc = make_scenario();
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const State s = State::zero(gain.n_modes());
    EXPECT_THROW(step_identify(gain, s, Vector::Zero(3)), std::runtime_error);
    Vector z = Vector::Zero(gain.n_measurements());
    z(1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(step_identify(gain, s, z), std::runtime_error);
}

TEST(StepIdentify, MatchesForwardStepWithIdentifiedForce) {
    // Reapplying the identified force through the plain integrator must land
    // on the identifier's own next state: same discretization inside.
    const Scenario sc = make_scenario(1e-4);
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    std::mt19937_64 engine(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    State s = State::zero(gain.n_modes());
    for (Index i = 0; i < gain.n_modes(); ++i) {
        s.d(i) = dist(engine);
        s.v(i) = dist(engine);
        s.a(i) = dist(engine);
    }
    Vector z(gain.n_measurements());
    for (Index i = 0; i < z.size(); ++i) z(i) = dist(engine);
    const auto [f, next] = step_identify(gain, s, z);
    const State replay = gain.solver.step(s, (gain.reduced_force_map * f).eval());
    const double scale = std::max(1.0, replay.d.norm());
    EXPECT_LE((next.d - replay.d).norm(), 1e-10 * scale);
    EXPECT_LE((next.v - replay.v).norm(), 1e-10 * std::max(1.0, replay.v.norm()));
    EXPECT_LE((next.a - replay.a).norm(), 1e-10 * std::max(1.0, replay.a.norm()));
}

TEST(StepIdentify, GradientOptimalityOnRandomSteps) {
    // The identified force must zero the regularized normal-equation
    // gradient G^T Shat^T (Shat(Gf+g) - z) + alpha f.
    for (const double alpha : {0.0, 0.3}) {
        const Scenario sc = make_scenario(alpha);
        const Gain gain = precompute_gain(sc.rom, sc.cfg);
        std::mt19937_64 engine(99);
        std::normal_distribution<double> dist(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            State s = State::zero(gain.n_modes());
            for (Index i = 0; i < gain.n_modes(); ++i) {
                s.d(i) = dist(engine);
                s.v(i) = dist(engine);
                s.a(i) = dist(engine);
            }
            Vector z(gain.n_measurements());
            for (Index i = 0; i < z.size(); ++i) z(i) = 100.0 * dist(engine);
            const Vector g = free_prediction(gain, s);
            const auto [f, next] = step_identify(gain, s, z);
            const Vector grad = gain.G.transpose() * gain.Shat.transpose() *
                                    (gain.Shat * (gain.G * f + g) - z) +
                                alpha * f;
            const double scale =
                (gain.G.transpose() * gain.Shat.transpose() * z).norm() + 1.0;
            EXPECT_LE(grad.norm(), 1e-8 * scale) << "alpha " << alpha << " trial " << trial;
        }
    }
}

TEST(StepIdentify, ObjectiveNotWorseThanZeroForce) {
    const Scenario sc = make_scenario(0.05);
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    std::mt19937_64 engine(5);
    std::normal_distribution<double> dist(0.0, 1.0);
    State s = State::zero(gain.n_modes());
    for (Index i = 0; i < gain.n_modes(); ++i) s.d(i) = dist(engine);
    Vector z(gain.n_measurements());
    for (Index i = 0; i < z.size(); ++i) z(i) = dist(engine);
    const Vector g = free_prediction(gain, s);
    const auto [f, next] = step_identify(gain, s, z);
    const double j_f = (gain.Shat * (gain.G * f + g) - z).squaredNorm() +
                       sc.cfg.alpha * f.squaredNorm();
    const double j_0 = (gain.Shat * g - z).squaredNorm();
    EXPECT_LE(j_f, j_0 * (1.0 + 1e-12));
}

TEST(StepIdentify, SolutionNormMonotoneInAlpha) {
    const Scenario sc = make_scenario();
    std::mt19937_64 engine(17);
    std::normal_distribution<double> dist(0.0, 1.0);
    State s = State::zero(sc.rom.size());
    for (Index i = 0; i < sc.rom.size(); ++i) {
        s.d(i) = dist(engine);
        s.v(i) = dist(engine);
    }
    Vector z(4);
    for (Index i = 0; i < 4; ++i) z(i) = 10.0 * dist(engine);

    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
        IdentifierConfig cfg = sc.cfg;
        cfg.alpha = std::pow(10.0, -8.0 + k);
        const Gain gain = precompute_gain(sc.rom, cfg);
        const auto [f, next] = step_identify(gain, s, z);
        EXPECT_LE(f.norm(), previous * (1.0 + 1e-12)) << "alpha grid point " << k;
        previous = f.norm();
    }
}

TEST(RunIdentification, ExactRoundTripNoiseFree) {
    const double dt = 1e-3;
    const Index steps = 500;
    const Scenario sc = make_scenario(0.0, dt);
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix applied = applied_forces(dt, steps + 1);
    const Matrix z = simulate_measurements(gain, applied);

    const vibroid::IdentificationResult result =
        run_identification(gain, State::zero(gain.n_modes()), z);
    ASSERT_EQ(result.forces.cols(), steps);
    const double peak = applied.cwiseAbs().maxCoeff();
    const double err =
        (result.forces - applied.rightCols(steps)).cwiseAbs().maxCoeff() / peak;
    EXPECT_LE(err, 1e-8);
    EXPECT_GT(result.solution_sq_sum, 0.0);
    EXPECT_LE(result.residual_sq_sum, 1e-12 * result.solution_sq_sum);
    EXPECT_GE(result.wall_seconds, 0.0);
}

TEST(RunIdentification, AllZeroMeasurementsFromRest) {
    const Scenario sc = make_scenario();
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix z = Matrix::Zero(gain.n_measurements(), 20);
    const vibroid::IdentificationResult result =
        run_identification(gain, State::zero(gain.n_modes()), z);
    EXPECT_EQ(result.forces.norm(), 0.0);
    EXPECT_EQ(result.reduced.d.norm(), 0.0);
}

TEST(RecoverPhysical, ZeroAndUnitCoordinate) {
    const Scenario sc = make_scenario();
    const State zero = recover_physical(sc.rom, State::zero(sc.rom.size()));
    EXPECT_EQ(zero.d.norm(), 0.0);

    State unit = State::zero(sc.rom.size());
    unit.d(0) = 1.0;
    const State rec = recover_physical(sc.rom, unit);
    EXPECT_LE((rec.d - sc.rom.basis.col(0)).norm(), 1e-14);
    EXPECT_EQ(rec.v.norm(), 0.0);
}

TEST(RecoverPhysical, SquareBasisInvertsExactly) {
    // All modes retained: basis is square and invertible, so projecting a
    // physical vector to generalized coordinates and back is the identity.
    ToyModelSpec spec;
    spec.n_struct_elems = 5;
    spec.n_fluid_elems = 5;
    spec.area = 0.01;
    spec.len_struct = 60.0;
    spec.len_fluid = 60.0;
    const vibroid::CoupledSystem sys = generate_toy(spec);
    const ReducedModel rom = build_rom(sys, RomSpec{5, 6, true}, DampingSpec{});
    ASSERT_EQ(rom.basis.rows(), rom.basis.cols());

    Vector x(rom.n_full);
    x.setLinSpaced(rom.n_full, -1.0, 2.0);
    State reduced = State::zero(rom.size());
    reduced.d = rom.basis.lu().solve(x);
    const State back = recover_physical(rom, reduced);
    EXPECT_LE((back.d - x).norm(), 1e-10 * x.norm());
}

TEST(LCurve, NoiseFreePicksMinimalResidual) {
    const double dt = 1e-3;
    const Scenario sc = make_scenario(0.0, dt);
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix applied = applied_forces(dt, 201);
    const Matrix z = simulate_measurements(gain, applied);

    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(std::pow(10.0, -12.0 + k));
    const vibroid::AlphaSelection sel = l_curve_select_alpha(
        sc.rom, sc.cfg, State::zero(sc.rom.size()), z, grid);
    const double min_residual =
        *std::min_element(sel.residual_norms.begin(), sel.residual_norms.end());
    EXPECT_LE(sel.residual_norms[static_cast<std::size_t>(sel.grid_index)],
              min_residual * (1.0 + 1e-6));
}

TEST(LCurve, NoisySelectionLandsNearOracleAlpha) {
    // With 1% measurement noise the corner must sit within one decade of
    // the grid value that actually minimizes the true force error.
    const double dt = 1e-3;
    const Scenario sc = make_scenario(0.0, dt);
    const Gain clean_gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix applied = applied_forces(dt, 601);
    const Matrix z_clean = simulate_measurements(clean_gain, applied);
    const Matrix z_noisy = vibroid::add_noise(z_clean, vibroid::NoiseSpec{0.01, 42});

    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, -10.0 + k));

    double best_alpha = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (const double alpha : grid) {
        IdentifierConfig cfg = sc.cfg;
        cfg.alpha = alpha;
        const Gain gain = precompute_gain(sc.rom, cfg);
        const vibroid::IdentificationResult result =
            run_identification(gain, State::zero(sc.rom.size()), z_noisy);
        const double err = (result.forces - applied.rightCols(600)).norm();
        if (err < best_err) {
            best_err = err;
            best_alpha = alpha;
        }
    }

    const vibroid::AlphaSelection sel = l_curve_select_alpha(
        sc.rom, sc.cfg, State::zero(sc.rom.size()), z_noisy, grid);
    EXPECT_LE(std::abs(std::log10(sel.alpha) - std::log10(best_alpha)), 1.0)
        << "selected " << sel.alpha << " oracle " << best_alpha;
}

TEST(LCurve, SinglePointGridReturnsIt) {
    const Scenario sc = make_scenario();
    const Gain gain = precompute_gain(sc.rom, sc.cfg);
    const Matrix applied = applied_forces(1e-3, 51);
    const Matrix z = simulate_measurements(gain, applied);
    const vibroid::AlphaSelection sel = l_curve_select_alpha(
        sc.rom, sc.cfg, State::zero(sc.rom.size()), z, {3e-4});
    EXPECT_EQ(sel.alpha, 3e-4);
    EXPECT_FALSE(sel.degenerate);
}

TEST(LCurve, RejectsBadGrids) {
    const Scenario sc = make_scenario();
    const Matrix z = Matrix::Zero(4, 10);
    EXPECT_THROW(l_curve_select_alpha(sc.rom, sc.cfg, State::zero(sc.rom.size()), z, {}),
                 std::runtime_error);
    EXPECT_THROW(
        l_curve_select_alpha(sc.rom, sc.cfg, State::zero(sc.rom.size()), z, {1e-3, 0.0}),
        std::runtime_error);
}

}  // namespace
