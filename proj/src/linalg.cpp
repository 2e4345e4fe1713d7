#include "epsweep/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace epsweep {

std::size_t numeric_rank(const Matrix& a, double tol) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cutoff = tol * sv(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rank;
    }
    return rank;
}

double max_abs(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

RowEchelon row_echelon(const Matrix& a, double tol) {
    RowEchelon out{a, {}};
    Matrix& r = out.rref;
    const double zero = tol * std::max(1.0, max_abs(a));
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < r.cols() && row < r.rows(); ++col) {
        Eigen::Index pivot = row;
        double best = 0.0;
        for (Eigen::Index i = row; i < r.rows(); ++i) {
            if (std::abs(r(i, col)) > best) {
                best = std::abs(r(i, col));
                pivot = i;
            }
        }
        if (best <= zero) {
            r.block(row, col, r.rows() - row, 1).setZero();
            continue;
        }
        r.row(pivot).swap(r.row(row));
        r.row(row) /= r(row, col);
        r(row, col) = 1.0;
        for (Eigen::Index i = 0; i < r.rows(); ++i) {
            if (i == row || r(i, col) == 0.0) continue;
            r.row(i) -= r(i, col) * r.row(row);
            r(i, col) = 0.0;
        }
        out.pivot_columns.push_back(col);
        ++row;
    }
    // flush round-off left behind by elimination
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j)
            if (std::abs(r(i, j)) <= zero) r(i, j) = 0.0;
    return out;
}

Matrix nullspace(const Matrix& a, double tol) {
    const RowEchelon ech = row_echelon(a, tol);
    const Eigen::Index n = a.cols();
    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (auto c : ech.pivot_columns) is_pivot[static_cast<std::size_t>(c)] = true;

    std::vector<Eigen::Index> free_cols;
    for (Eigen::Index j = 0; j < n; ++j)
        if (!is_pivot[static_cast<std::size_t>(j)]) free_cols.push_back(j);

    Matrix basis = Matrix::Zero(n, static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
        const Eigen::Index f = free_cols[k];
        const auto col = static_cast<Eigen::Index>(k);
        basis(f, col) = 1.0;
        for (std::size_t p = 0; p < ech.pivot_columns.size(); ++p) {
            basis(ech.pivot_columns[p], col) = 0.0 - ech.rref(static_cast<Eigen::Index>(p), f);
        }
    }
    return basis;
}

double weighted_dot(const Vector& u, const Vector& diag, const Vector& v) {
    return u.dot(diag.cwiseProduct(v));
}

double metric_norm(const Vector& x, const Matrix& q) {
    return std::sqrt(std::max(0.0, x.dot(q * x)));
}

}  // namespace epsweep
