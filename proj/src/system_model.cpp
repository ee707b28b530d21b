#include "vibroid/system_model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vibroid/matrix_market.hpp"

namespace vibroid {

namespace {

constexpr double kSymmetryTol = 1e-10;

void require_square_symmetric(const Matrix& m, const std::string& name) {
    if (m.rows() != m.cols()) {
        throw std::runtime_error(name + " must be square, got " + std::to_string(m.rows()) +
                                 "x" + std::to_string(m.cols()));
    }
    if (!is_symmetric(m, kSymmetryTol)) {
        throw std::runtime_error(name + " is not symmetric to relative tolerance 1e-10");
    }
}

/// Assembles 1-D two-node element matrices along a chain of n_elems elements.
Matrix assemble_chain(int n_elems, const Eigen::Matrix2d& elem) {
    const Index n = n_elems + 1;
    Matrix m = Matrix::Zero(n, n);
    for (int e = 0; e < n_elems; ++e) {
        m.block<2, 2>(e, e) += elem;
    }
    return m;
}

Matrix drop_rows_cols(const Matrix& m, const std::vector<Index>& keep_rows,
                      const std::vector<Index>& keep_cols) {
    Matrix out(static_cast<Index>(keep_rows.size()), static_cast<Index>(keep_cols.size()));
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j) out(i, j) = m(keep_rows[i], keep_cols[j]);
    return out;
}

std::vector<Index> kept_indices(Index n, bool drop_first, bool drop_last) {
    std::vector<Index> keep;
    for (Index i = 0; i < n; ++i) {
        if (drop_first && i == 0) continue;
        if (drop_last && i == n - 1) continue;
        keep.push_back(i);
    }
    return keep;
}

}  // namespace

void CoupledSystem::validate() const {
    require_square_symmetric(Ms, "Ms");
    require_square_symmetric(Ks, "Ks");
    require_square_symmetric(Mf, "Mf");
    require_square_symmetric(Kf, "Kf");
    if (Ks.rows() != Ms.rows()) throw std::runtime_error("Ks size does not match Ms");
    if (Kf.rows() != Mf.rows()) throw std::runtime_error("Kf size does not match Mf");
    if (C.rows() != n_struct() || C.cols() != n_fluid()) {
        throw std::runtime_error("C must be " + std::to_string(n_struct()) + "x" +
                                 std::to_string(n_fluid()) + ", got " +
                                 std::to_string(C.rows()) + "x" + std::to_string(C.cols()));
    }
    if (!(rho_f > 0.0)) throw std::runtime_error("rho_f must be positive");
    if (!(c > 0.0)) throw std::runtime_error("c (speed of sound) must be positive");
    Eigen::LLT<Matrix> llt(Ms);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("Ms is not positive definite");
    }
}

AssembledSystem assemble_blocks(const CoupledSystem& sys) {
    sys.validate();
    const Index ns = sys.n_struct();
    const Index nf = sys.n_fluid();
    const Index n = ns + nf;

    AssembledSystem out;
    out.n_struct = ns;
    out.n_fluid = nf;
    out.mass = Matrix::Zero(n, n);
    out.stiffness = Matrix::Zero(n, n);

    out.mass.topLeftCorner(ns, ns) = sys.Ms;
    out.mass.bottomLeftCorner(nf, ns) = sys.rho_f * sys.c * sys.c * sys.C.transpose();
    out.mass.bottomRightCorner(nf, nf) = sys.Mf;

    out.stiffness.topLeftCorner(ns, ns) = sys.Ks;
    out.stiffness.topRightCorner(ns, nf) = -sys.C;
    out.stiffness.bottomRightCorner(nf, nf) = sys.Kf;
    return out;
}

void SelectionConfig::validate(Index n_total) const {
    auto check_list = [n_total](const std::vector<Index>& idx, const char* name) {
        std::set<Index> seen;
        for (Index i : idx) {
            if (i < 0 || i >= n_total) {
                throw std::runtime_error(std::string(name) + " index " + std::to_string(i) +
                                         " out of range [0, " + std::to_string(n_total) + ")");
            }
            if (!seen.insert(i).second) {
                throw std::runtime_error(std::string(name) + " contains duplicate index " +
                                         std::to_string(i));
            }
        }
    };
    check_list(disp_idx, "disp_idx");
    check_list(vel_idx, "vel_idx");
    check_list(acc_idx, "acc_idx");
    check_list(force_idx, "force_idx");
}

Matrix SelectionConfig::selection_matrix(const std::vector<Index>& idx, Index n_total) {
    Matrix s = Matrix::Zero(static_cast<Index>(idx.size()), n_total);
    for (Index r = 0; r < s.rows(); ++r) s(r, idx[r]) = 1.0;
    return s;
}

Matrix SelectionConfig::force_matrix(Index n_total) const {
    return selection_matrix(force_idx, n_total).transpose();
}

void ToyModelSpec::validate() const {
    if (n_struct_elems < 2 || n_fluid_elems < 2)
        throw std::runtime_error("toy model element counts must be >= 2");
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::runtime_error(std::string(name) + " must be positive");
    };
    positive(youngs_modulus, "youngs_modulus");
    positive(rho_struct, "rho_struct");
    positive(area, "area");
    positive(len_struct, "len_struct");
    positive(len_fluid, "len_fluid");
    positive(rho_fluid, "rho_fluid");
    positive(sound_speed, "sound_speed");
}

CoupledSystem generate_toy(const ToyModelSpec& spec) {
    spec.validate();

    const double le_s = spec.len_struct / spec.n_struct_elems;
    const double le_f = spec.len_fluid / spec.n_fluid_elems;
    const double ea = spec.youngs_modulus * spec.area;
    const double c2 = spec.sound_speed * spec.sound_speed;

    Eigen::Matrix2d k_unit;
    k_unit << 1.0, -1.0, -1.0, 1.0;
    Eigen::Matrix2d m_consistent;
    m_consistent << 2.0, 1.0, 1.0, 2.0;
    Eigen::Matrix2d m_lumped;
    m_lumped << 1.0, 0.0, 0.0, 1.0;

    const bool lumped = spec.kind == ToyKind::spring_mass_chain;
    const Eigen::Matrix2d& m_shape = lumped ? m_lumped : m_consistent;
    const double m_scale_s = lumped ? spec.rho_struct * spec.area * le_s / 2.0
                                    : spec.rho_struct * spec.area * le_s / 6.0;
    const double m_scale_f = lumped ? spec.area * le_f / 2.0 : spec.area * le_f / 6.0;

    // Structure: axial rod / spring-mass chain.
    Matrix ks_full = assemble_chain(spec.n_struct_elems, (ea / le_s) * k_unit);
    Matrix ms_full = assemble_chain(spec.n_struct_elems, m_scale_s * m_shape);

    // Fluid: acoustic column in pressure unknowns. The pressure "mass" is the
    // plain consistent matrix and the "stiffness" carries the c^2 factor, so
    // the assembled blocks match the coupled block pattern with the
    // rho_f c^2 C^T coupling scale and the decoupled tube keeps its analytic
    // frequencies (first nonzero mode of a closed-closed column: pi c / L).
    Matrix kf_full = assemble_chain(spec.n_fluid_elems, (c2 * spec.area / le_f) * k_unit);
    Matrix mf_full = assemble_chain(spec.n_fluid_elems, m_scale_f * m_shape);

    // Piston coupling: one entry of magnitude `area` tying the rod's right
    // end node to the column's left node.
    Matrix c_full = Matrix::Zero(ms_full.rows(), mf_full.rows());
    if (spec.ends.piston_coupled) {
        c_full(ms_full.rows() - 1, 0) = spec.area;
    }

    // Boundary conditions by row/column elimination.
    const auto keep_s = kept_indices(ms_full.rows(), spec.ends.fix_struct_left,
                                     spec.ends.fix_struct_right);
    const auto keep_f = kept_indices(mf_full.rows(), spec.ends.open_fluid_left,
                                     spec.ends.open_fluid_right);
    if (keep_s.size() < 1 || keep_f.size() < 1)
        throw std::runtime_error("boundary elimination removed all DOFs");

    CoupledSystem sys;
    sys.Ms = drop_rows_cols(ms_full, keep_s, keep_s);
    sys.Ks = drop_rows_cols(ks_full, keep_s, keep_s);
    sys.Mf = drop_rows_cols(mf_full, keep_f, keep_f);
    sys.Kf = drop_rows_cols(kf_full, keep_f, keep_f);
    sys.C = drop_rows_cols(c_full, keep_s, keep_f);
    sys.rho_f = spec.rho_fluid;
    sys.c = spec.sound_speed;
    sys.validate();
    return sys;
}

namespace {

std::map<std::string, std::string> parse_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("manifest: " + path.string() + ":" +
                                         std::to_string(lineno) + ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& key) {
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        item = item.substr(b, e - b + 1);
        try {
            size_t pos = 0;
            const long long v = std::stoll(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(static_cast<Index>(v));
        } catch (const std::exception&) {
            throw std::runtime_error("manifest: bad integer '" + item + "' in " + key);
        }
    }
    return out;
}

}  // namespace

LoadedModel load_model(const std::filesystem::path& manifest_path) {
    const auto kv = parse_key_values(manifest_path);
    const auto dir = manifest_path.parent_path();

    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error("manifest: " + manifest_path.string() +
                                     ": missing required key '" + key + "'");
        return it->second;
    };
    auto read_block = [&](const std::string& key) { return mm::read_matrix(dir / require(key)); };

    LoadedModel model;
    model.system.Ms = read_block("Ms");
    model.system.Ks = read_block("Ks");
    model.system.Mf = read_block("Mf");
    model.system.Kf = read_block("Kf");
    model.system.C = read_block("C");

    auto parse_double = [&](const std::string& key) {
        const std::string& text = require(key);
        try {
            size_t pos = 0;
            const double v = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("manifest: bad float '" + text + "' for " + key);
        }
    };
    model.system.rho_f = parse_double("rho_f");
    model.system.c = parse_double("c");

    auto read_idx = [&](const std::string& key) {
        auto it = kv.find(key);
        return it == kv.end() ? std::vector<Index>{} : parse_index_list(it->second, key);
    };
    model.selection.disp_idx = read_idx("disp_idx");
    model.selection.vel_idx = read_idx("vel_idx");
    model.selection.acc_idx = read_idx("acc_idx");
    model.selection.force_idx = read_idx("force_idx");

    try {
        model.system.validate();
        model.selection.validate(model.system.n_total());
    } catch (const std::exception& e) {
        throw std::runtime_error("manifest: " + manifest_path.string() +
                                 ": invariant check failed: " + e.what());
    }
    return model;
}

namespace {

std::string join_indices(const std::vector<Index>& idx) {
    std::string out;
    for (size_t i = 0; i < idx.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(idx[i]);
    }
    return out;
}

}  // namespace

void save_model(const std::filesystem::path& manifest_path, const CoupledSystem& sys,
                const SelectionConfig& selection) {
    sys.validate();
    selection.validate(sys.n_total());
    const auto dir = manifest_path.parent_path();
    const std::string stem = manifest_path.stem().string();

    struct Block {
        const char* key;
        const Matrix* m;
    };
    const Block blocks[] = {{"Ms", &sys.Ms}, {"Ks", &sys.Ks}, {"Mf", &sys.Mf},
                            {"Kf", &sys.Kf}, {"C", &sys.C}};

    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("manifest: cannot write " + manifest_path.string());
    out << "# coupled vibroacoustic model manifest (all indices zero-based)\n";
    for (const auto& b : blocks) {
        const std::string file = stem + "_" + b.key + ".mtx";
        mm::write_matrix(dir / file, *b.m, std::string(b.key));
        out << b.key << " = " << file << "\n";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", sys.rho_f);
    out << "rho_f = " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", sys.c);
    out << "c = " << buf << "\n";
    out << "disp_idx = " << join_indices(selection.disp_idx) << "\n";
    out << "vel_idx = " << join_indices(selection.vel_idx) << "\n";
    out << "acc_idx = " << join_indices(selection.acc_idx) << "\n";
    out << "force_idx = " << join_indices(selection.force_idx) << "\n";
    if (!out) throw std::runtime_error("manifest: write failed for " + manifest_path.string());
}

}  // namespace vibroid
