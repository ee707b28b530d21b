#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>

namespace vibroid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// LU factorization with power-of-two row/column equilibration.
///
/// Coupled vibroacoustic operators are strongly graded: the velocity-pressure
/// coupling block carries a rho*c^2 factor that the displacement rows lack, so
/// a normwise condition number of the raw matrix can reach 1e15 even though
/// row-wise the system is perfectly solvable. Scaling each row and then each
/// column by a power of two (exact in floating point) removes the grading
/// before pivoting, and makes the reciprocal condition estimate meaningful:
/// genuine rank deficiency survives any diagonal scaling, while pure grading
/// does not.
class EquilibratedLU {
public:
    EquilibratedLU() = default;
    explicit EquilibratedLU(const Matrix& m) { compute(m); }

    void compute(const Matrix& m);

    /// Reciprocal condition estimate of the equilibrated matrix.
    double rcond() const { return lu_.rcond(); }

    template <typename Derived>
    auto solve(const Eigen::MatrixBase<Derived>& b) const {
        return (col_scale_.asDiagonal() *
                lu_.solve((row_scale_.asDiagonal() * b.derived()).eval()))
            .eval();
    }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    Vector row_scale_;  // multiplies the right-hand side
    Vector col_scale_;  // multiplies the solution
};

/// ||M - M^T|| / ||M||, with 0 for the zero matrix.
double symmetry_defect(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol);

/// Flips column signs so the first non-negligible entry of each column is positive.
/// Keeps eigenvector bases reproducible across runs and platforms.
void normalize_column_signs(Matrix& m);

}  // namespace vibroid
