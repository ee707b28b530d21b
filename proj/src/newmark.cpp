#include "vibroid/newmark.hpp"

#include <stdexcept>
#include <string>

namespace vibroid {

void NewmarkParams::validate() const {
    if (!(dt > 0.0)) {
        throw std::runtime_error("newmark: dt must be positive, got " + std::to_string(dt));
    }
    if (!(beta > 0.0) || beta > 0.5) {
        throw std::runtime_error("newmark: beta must lie in (0, 0.5], got " +
                                 std::to_string(beta));
    }
    if (delta < 0.0 || delta > 1.0) {
        throw std::runtime_error("newmark: delta must lie in [0, 1], got " +
                                 std::to_string(delta));
    }
}

bool NewmarkParams::unconditionally_stable() const {
    return delta >= 0.5 && beta >= 0.25 * (0.5 + delta) * (0.5 + delta);
}

State State::zero(Index n) {
    return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
}

bool State::finite() const {
    return d.allFinite() && v.allFinite() && a.allFinite();
}

void SecondOrderSystem::validate() const {
    if (mass.rows() != mass.cols() || damping.rows() != damping.cols() ||
        stiffness.rows() != stiffness.cols() || mass.rows() != damping.rows() ||
        mass.rows() != stiffness.rows()) {
        throw std::runtime_error("newmark: mass/damping/stiffness must be square and same size");
    }
}

Matrix effective_stiffness(const SecondOrderSystem& sys, const NewmarkParams& p) {
    sys.validate();
    p.validate();
    const double bdt2 = p.beta * p.dt * p.dt;
    const double bdt = p.beta * p.dt;
    return sys.stiffness + sys.mass / bdt2 + sys.damping * (p.delta / bdt);
}

NewmarkSolver::NewmarkSolver(SecondOrderSystem sys, NewmarkParams p)
    : sys_(std::move(sys)), params_(p), lu_(effective_stiffness(sys_, params_)) {
    if (lu_.rcond() < 1e-14) {
        throw std::runtime_error(
            "newmark: effective stiffness is numerically singular "
            "(rigid-body mode with no mass or damping path?)");
    }
    const double beta = params_.beta;
    const double delta = params_.delta;
    const double dt = params_.dt;
    c_d2_ = 1.0 / (beta * dt * dt);
    c_v2_ = 1.0 / (beta * dt);
    c_a2_ = 1.0 / (2.0 * beta) - 1.0;
    c_d1_ = delta / (beta * dt);
    c_v1_ = delta / beta - 1.0;
    c_a1_ = (delta / (2.0 * beta) - 1.0) * dt;
}

Vector NewmarkSolver::internal_force(const State& s) const {
    return sys_.mass * (c_d2_ * s.d + c_v2_ * s.v + c_a2_ * s.a) +
           sys_.damping * (c_d1_ * s.d + c_v1_ * s.v + c_a1_ * s.a);
}

Vector NewmarkSolver::initial_acceleration(const Vector& d0, const Vector& v0,
                                           const Vector& f0) const {
    EquilibratedLU mass_lu(sys_.mass);
    if (mass_lu.rcond() < 1e-14) {
        throw std::runtime_error("newmark: mass matrix singular in initial acceleration solve");
    }
    return mass_lu.solve(f0 - sys_.damping * v0 - sys_.stiffness * d0);
}

State NewmarkSolver::step(const State& s, const Vector& f_next) const {
    if (s.size() != sys_.size() || f_next.size() != sys_.size()) {
        throw std::runtime_error("newmark: state/force size mismatch (system size " +
                                 std::to_string(sys_.size()) + ")");
    }
    if (!s.finite() || !f_next.allFinite()) {
        throw std::runtime_error("newmark: non-finite state or force input");
    }
    State next;
    next.d = lu_.solve(f_next + internal_force(s));
    next.a = c_d2_ * (next.d - s.d) - c_v2_ * s.v - c_a2_ * s.a;
    next.v = s.v + params_.dt * ((1.0 - params_.delta) * s.a + params_.delta * next.a);
    return next;
}

StateSeries NewmarkSolver::integrate(const State& s0, const Matrix& force_series,
                                     bool solve_initial_acceleration) const {
    if (force_series.rows() != sys_.size()) {
        throw std::runtime_error("newmark: force series has " +
                                 std::to_string(force_series.rows()) + " rows, system has " +
                                 std::to_string(sys_.size()));
    }
    if (s0.size() != sys_.size()) {
        throw std::runtime_error("newmark: initial state size mismatch");
    }
    const Index n = sys_.size();
    const Index samples = force_series.cols();
    StateSeries out;
    out.dt = params_.dt;
    out.d.resize(n, samples);
    out.v.resize(n, samples);
    out.a.resize(n, samples);

    State s = s0;
    if (solve_initial_acceleration) {
        s.a = initial_acceleration(s0.d, s0.v, force_series.col(0));
    }
    out.d.col(0) = s.d;
    out.v.col(0) = s.v;
    out.a.col(0) = s.a;
    for (Index k = 1; k < samples; ++k) {
        s = step(s, force_series.col(k));
        out.d.col(k) = s.d;
        out.v.col(k) = s.v;
        out.a.col(k) = s.a;
    }
    return out;
}

}  // namespace vibroid
