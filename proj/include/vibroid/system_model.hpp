#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibroid/linalg.hpp"

namespace vibroid {

/// Coupled structural-acoustic system in physical blocks.
///
/// Structural displacements u (size n_s) and fluid pressures p (size n_f)
/// with coupling matrix C (n_s x n_f). All indices in this library are
/// zero-based, including every index list read from files.
struct CoupledSystem {
    Matrix Ms;  ///< structural mass, n_s x n_s, SPD
    Matrix Ks;  ///< structural stiffness, n_s x n_s, symmetric
    Matrix Mf;  ///< fluid mass, n_f x n_f, symmetric
    Matrix Kf;  ///< fluid stiffness, n_f x n_f, symmetric
    Matrix C;   ///< coupling, n_s x n_f
    double rho_f = 0.0;  ///< fluid density
    double c = 0.0;      ///< speed of sound

    Index n_struct() const { return Ms.rows(); }
    Index n_fluid() const { return Mf.rows(); }
    Index n_total() const { return n_struct() + n_fluid(); }

    /// Throws std::runtime_error if any invariant fails (squareness,
    /// symmetry to 1e-10, Ms positive definite, C shape, rho_f > 0, c > 0).
    void validate() const;
};

/// Block-assembled equations of motion: mass * ddot(d) + stiffness * d = Sf f
/// with d = [u; p]. The blocks are non-symmetric by construction; solvers
/// must not assume symmetry.
struct AssembledSystem {
    Matrix mass;       ///< [[Ms, 0], [rho_f c^2 C^T, Mf]]
    Matrix stiffness;  ///< [[Ks, -C], [0, Kf]]
    Index n_struct = 0;
    Index n_fluid = 0;

    Index size() const { return mass.rows(); }
};

AssembledSystem assemble_blocks(const CoupledSystem& sys);

/// Measured/forced DOF bookkeeping. Indices address the assembled global
/// vector [u; p] after boundary elimination, zero-based.
struct SelectionConfig {
    std::vector<Index> disp_idx;
    std::vector<Index> vel_idx;
    std::vector<Index> acc_idx;
    std::vector<Index> force_idx;

    Index measurement_count() const {
        return static_cast<Index>(disp_idx.size() + vel_idx.size() + acc_idx.size());
    }
    Index force_count() const { return static_cast<Index>(force_idx.size()); }

    /// Throws if an index is out of [0, n_total) or duplicated within a list.
    void validate(Index n_total) const;

    /// Boolean row-picker: k x n with one unit entry per row.
    static Matrix selection_matrix(const std::vector<Index>& idx, Index n_total);

    /// Force selection matrix Sf, n_total x n_forces (unit columns).
    Matrix force_matrix(Index n_total) const;
};

enum class ToyKind { rod_tube_piston, spring_mass_chain };

/// End conditions for the 1-D toy generators. `piston_coupled = false`
/// zeroes the coupling block entirely (decoupled limit).
struct BoundaryFlags {
    bool fix_struct_left = true;
    bool fix_struct_right = false;
    bool open_fluid_left = false;   ///< pressure-release (p = 0) end
    bool open_fluid_right = false;
    bool piston_coupled = true;
};

/// Desk-scale 1-D stand-in for a meshed pipe: an axial rod (consistent
/// linear elements) joined to an acoustic column through a piston at the
/// rod's right end / column's left node.
struct ToyModelSpec {
    ToyKind kind = ToyKind::rod_tube_piston;
    int n_struct_elems = 10;
    int n_fluid_elems = 10;
    double youngs_modulus = 210e9;
    double rho_struct = 7800.0;
    double area = 1e-4;
    double len_struct = 1.0;
    double len_fluid = 1.0;
    double rho_fluid = 1000.0;
    double sound_speed = 1480.0;
    BoundaryFlags ends;

    void validate() const;
};

CoupledSystem generate_toy(const ToyModelSpec& spec);

struct LoadedModel {
    CoupledSystem system;
    SelectionConfig selection;
};

/// Loads a system from a manifest: key = value lines with keys
/// Ms, Ks, Mf, Kf, C (Matrix Market paths, relative to the manifest),
/// rho_f, c (floats), and disp_idx, vel_idx, acc_idx, force_idx
/// (comma-separated zero-based integers, may be empty).
LoadedModel load_model(const std::filesystem::path& manifest_path);

/// Writes a manifest plus the five Matrix Market block files next to it.
void save_model(const std::filesystem::path& manifest_path, const CoupledSystem& sys,
                const SelectionConfig& selection);

}  // namespace vibroid
