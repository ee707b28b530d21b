#include "vibroid/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace vibroid {

namespace {

// Nearest power of two bringing `x` into [0.5, 1): exact to apply and undo.
double pow2_inverse_scale(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) return 1.0;
    int exponent = 0;
    std::frexp(x, &exponent);
    return std::ldexp(1.0, -exponent);
}

}  // namespace

void EquilibratedLU::compute(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::runtime_error("equilibrated lu: matrix must be square");
    }
    const Index n = m.rows();
    row_scale_.resize(n);
    for (Index i = 0; i < n; ++i) {
        row_scale_(i) = pow2_inverse_scale(m.row(i).cwiseAbs().maxCoeff());
    }
    Matrix scaled = row_scale_.asDiagonal() * m;
    col_scale_.resize(n);
    for (Index j = 0; j < n; ++j) {
        col_scale_(j) = pow2_inverse_scale(scaled.col(j).cwiseAbs().maxCoeff());
    }
    scaled = scaled * col_scale_.asDiagonal();
    lu_.compute(scaled);
}

double symmetry_defect(const Matrix& m) {
    const double norm = m.norm();
    if (norm == 0.0) return 0.0;
    return (m - m.transpose()).norm() / norm;
}

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return symmetry_defect(m) <= rel_tol;
}

void normalize_column_signs(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        const double peak = m.col(j).cwiseAbs().maxCoeff();
        if (peak == 0.0) continue;
        for (Index i = 0; i < m.rows(); ++i) {
            const double x = m(i, j);
            if (std::abs(x) > 1e-9 * peak) {
                if (x < 0.0) m.col(j) = -m.col(j);
                break;
            }
        }
    }
}

}  // namespace vibroid
