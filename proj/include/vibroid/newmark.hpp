#pragma once

#include <vector>

#include "vibroid/linalg.hpp"

namespace vibroid {

/// Newmark time-integration coefficients. The defaults are the average
/// acceleration scheme (unconditionally stable and second-order accurate).
struct NewmarkParams {
    double beta = 0.25;
    double delta = 0.5;
    double dt = 1e-3;

    /// Throws std::runtime_error unless dt > 0, 0 < beta <= 0.5, 0 <= delta <= 1.
    void validate() const;

    /// True iff delta >= 1/2 and beta >= (delta + 1/2)^2 / 4.
    bool unconditionally_stable() const;
};

/// Response triplet at one time instant: value, first and second derivative.
struct State {
    Vector d;
    Vector v;
    Vector a;

    static State zero(Index n);
    Index size() const { return d.size(); }
    bool finite() const;
};

/// One state per sample, column k holding the state at t0 + k*dt.
struct StateSeries {
    Matrix d;
    Matrix v;
    Matrix a;
    double dt = 0.0;

    Index samples() const { return d.cols(); }
    State at(Index k) const { return {d.col(k), v.col(k), a.col(k)}; }
};

/// Generic linear second-order system mass*a + damping*v + stiffness*d = f.
/// Works unchanged for full assembled blocks or reduced modal operators;
/// the matrices may be non-symmetric.
struct SecondOrderSystem {
    Matrix mass;
    Matrix damping;
    Matrix stiffness;

    Index size() const { return mass.rows(); }
    void validate() const;
};

/// Effective stiffness of the implicit scheme:
/// stiffness + mass/(beta dt^2) + damping*delta/(beta dt).
Matrix effective_stiffness(const SecondOrderSystem& sys, const NewmarkParams& p);

/// Implicit one-step integrator. Factorizes the effective stiffness once at
/// construction; the factorization is tied to (system, dt) and a different
/// dt needs a new solver.
class NewmarkSolver {
public:
    NewmarkSolver(SecondOrderSystem sys, NewmarkParams p);

    const NewmarkParams& params() const { return params_; }
    const SecondOrderSystem& system() const { return sys_; }

    /// Applies the cached effective-stiffness factorization: x = Khat^{-1} b.
    Vector solve_effective(const Vector& b) const { return lu_.solve(b); }
    Matrix solve_effective(const Matrix& b) const { return lu_.solve(b); }

    /// History load vector carrying the previous state into the next step:
    /// mass*(d/(b dt^2) + v/(b dt) + (1/2b - 1) a)
    ///   + damping*(delta d/(b dt) + (delta/b - 1) v + (delta/2b - 1) dt a).
    Vector internal_force(const State& s) const;

    /// Consistent start: a0 = mass^{-1} (f0 - damping*v0 - stiffness*d0).
    Vector initial_acceleration(const Vector& d0, const Vector& v0, const Vector& f0) const;

    /// Advances one step under the force at t+dt. Throws on non-finite input.
    State step(const State& s, const Vector& f_next) const;

    /// Integrates from s0 through force samples f(0), f(dt), ..., f(N dt);
    /// the returned series has one column per force sample. When
    /// `solve_initial_acceleration`, s0.a is replaced by the consistent value.
    StateSeries integrate(const State& s0, const Matrix& force_series,
                          bool solve_initial_acceleration = true) const;

private:
    SecondOrderSystem sys_;
    NewmarkParams params_;
    EquilibratedLU lu_;
    // Cached scheme coefficients (Bathe's a0..a7 in conventional notation).
    double c_d2_, c_v2_, c_a2_;  // mass multipliers in internal_force
    double c_d1_, c_v1_, c_a1_;  // damping multipliers in internal_force
};

}  // namespace vibroid
