#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace epsweep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance used by every rank decision in the library.
inline constexpr double kRankTolerance = 1e-10;

/// Numerical rank: singular values below tol * (largest singular value) count
/// as zero. An all-zero or empty matrix has rank 0.
std::size_t numeric_rank(const Matrix& a, double tol = kRankTolerance);

/// Reduced row echelon form by Gauss-Jordan elimination with partial
/// pivoting. Entries below tol * max|a| are treated as zero.
struct RowEchelon {
    Matrix rref;
    std::vector<Eigen::Index> pivot_columns;
};
RowEchelon row_echelon(const Matrix& a, double tol = kRankTolerance);

/// Basis of ker(a), one column per free variable of the row echelon form.
/// For integer-valued input the result is exact in practice.
Matrix nullspace(const Matrix& a, double tol = kRankTolerance);

/// A-weighted inner product <u, A v> for a diagonal A given by its diagonal.
double weighted_dot(const Vector& u, const Vector& diag, const Vector& v);

/// sqrt(<x, Q x>) for an SPD matrix Q.
double metric_norm(const Vector& x, const Matrix& q);

/// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& a);

}  // namespace epsweep
