#pragma once

#include <vector>

#include "vibroid/system_model.hpp"

namespace vibroid {

struct RomSpec {
    int n_modes_struct = 1;
    int n_modes_fluid = 1;
    bool mass_normalize = true;
};

/// Rayleigh damping coefficients, per field.
struct DampingSpec {
    double a1_struct = 0.0;  ///< mass-proportional, structure
    double a2_struct = 0.0;  ///< stiffness-proportional, structure
    double a1_fluid = 0.0;
    double a2_fluid = 0.0;
};

struct Modes {
    Matrix vectors;  ///< columns are modes, sorted by ascending eigenvalue
    Vector values;   ///< nonnegative eigenvalues (squared angular frequencies)
};

/// Static displacement response per unit pressure: psi = Ks^{-1} C,
/// computed by factorize-and-solve. Throws if Ks is singular.
Matrix static_coupling_map(const CoupledSystem& sys);

/// Lowest n structural modes of (Ks, Ms). Mass-normalized when requested,
/// column signs fixed so the first significant entry is positive.
Modes structural_modes(const CoupledSystem& sys, int n, bool mass_normalize = true);

/// Coupling-corrected fluid mass: Mf + [rho_f c^2 C^T + psi^T Ms] psi.
/// Returned as computed; symmetry holds algebraically and is checked in tests.
Matrix partially_reduced_fluid_mass(const CoupledSystem& sys, const Matrix& psi);

/// Lowest n fluid modes of (Kf, Mf_tilde). Mf_tilde must be SPD; the error
/// message reports its smallest eigenvalue when it is not.
Modes fluid_modes(const Matrix& Kf, const Matrix& Mf_tilde, int n, bool mass_normalize = true);

/// Projection-reduced coupled model with Rayleigh damping.
struct ReducedModel {
    Matrix basis;      ///< transformation, n_total x m, blocks [[Phi, psi Xi], [0, Xi]]
    Matrix mass;       ///< basis^T * assembled mass * basis
    Matrix stiffness;  ///< basis^T * assembled stiffness * basis
    Matrix damping;    ///< block-diagonal Rayleigh damping in modal coordinates
    Vector struct_eigenvalues;
    Vector fluid_eigenvalues;
    Matrix coupling_map;  ///< psi, kept for inspection
    Index n_modes_struct = 0;
    Index n_modes_fluid = 0;
    Index n_full = 0;

    Index size() const { return mass.rows(); }
};

ReducedModel build_reduced(const CoupledSystem& sys, const Modes& structural,
                           const Matrix& psi, const Modes& fluid, const DampingSpec& damping);

/// Convenience pipeline: coupling map, both mode sets, reduction.
ReducedModel build_rom(const CoupledSystem& sys, const RomSpec& spec,
                       const DampingSpec& damping);

/// Sorted nonzero eigenvalues of the pencil stiffness*x = lambda*mass*x.
/// General dense solve; meant for validation, not the identification path.
Vector coupled_eigenvalues(const Matrix& mass, const Matrix& stiffness,
                           double zero_tol_rel = 1e-9);

/// Per-mode relative eigenvalue error between the full pencil and the
/// reduced pencil, for the k smallest nonzero coupled eigenvalues.
std::vector<double> eigenvalue_error(const AssembledSystem& full, const ReducedModel& red,
                                     int k);

}  // namespace vibroid
