#include "epsweep/lp.hpp"

#include "epsweep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace epsweep::lp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kMaxPivots = 50000;

struct Tableau {
    Matrix a;  ///< constraint rows, last column is the right-hand side
    std::vector<Eigen::Index> basis;

    Eigen::Index rows() const { return a.rows(); }
    Eigen::Index vars() const { return a.cols() - 1; }
    double rhs(Eigen::Index i) const { return a(i, a.cols() - 1); }

    void pivot(Eigen::Index r, Eigen::Index c, Vector& obj) {
        a.row(r) /= a(r, c);
        a(r, c) = 1.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (i == r || a(i, c) == 0.0) continue;
            a.row(i) -= a(i, c) * a.row(r);
            a(i, c) = 0.0;
        }
        if (obj(c) != 0.0) {
            obj -= obj(c) * a.row(r).transpose();
            obj(c) = 0.0;
        }
        basis[static_cast<std::size_t>(r)] = c;
    }

    /// Reduced-cost row for costs `cost` (size vars()+1, last entry 0).
    Vector reduced(const Vector& cost) const {
        Vector obj = cost;
        for (Eigen::Index i = 0; i < rows(); ++i) {
            const double cb = cost(basis[static_cast<std::size_t>(i)]);
            if (cb != 0.0) obj -= cb * a.row(i).transpose();
        }
        return obj;
    }

    /// Bland's rule. Returns false when unbounded. Columns >= `limit` never enter.
    bool optimise(Vector& obj, Eigen::Index limit) {
        for (int iter = 0; iter < kMaxPivots; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < limit; ++j) {
                if (obj(j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index i = 0; i < rows(); ++i) {
                if (a(i, enter) <= kPivotTol) continue;
                const double ratio = rhs(i) / a(i, enter);
                if (leave < 0 || ratio < best - 1e-14 ||
                    (ratio <= best + 1e-14 &&
                     basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter, obj);
        }
        throw SolverError("simplex pivot limit exceeded");
    }
};

}  // namespace

Result minimize(const Vector& c, const Matrix& g, const Vector& b) {
    const Eigen::Index d = g.cols();
    const Eigen::Index p = g.rows();
    Result out;
    if (p == 0) {
        out.x = Vector::Zero(d);
        out.status = c.isZero() ? Status::Optimal : Status::Unbounded;
        return out;
    }

    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < p; ++i)
        if (b(i) < 0.0) ++n_art;
    const Eigen::Index n_struct = 2 * d + p;
    const Eigen::Index n_vars = n_struct + n_art;

    Tableau t{Matrix::Zero(p, n_vars + 1), std::vector<Eigen::Index>(static_cast<std::size_t>(p))};
    Eigen::Index art = n_struct;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
        t.a.block(i, 0, 1, d) = sgn * g.row(i);
        t.a.block(i, d, 1, d) = -sgn * g.row(i);
        t.a(i, 2 * d + i) = sgn;
        t.a(i, n_vars) = sgn * b(i);
        if (sgn < 0.0) {
            t.a(i, art) = 1.0;
            t.basis[static_cast<std::size_t>(i)] = art++;
        } else {
            t.basis[static_cast<std::size_t>(i)] = 2 * d + i;
        }
    }

    if (n_art > 0) {
        Vector cost = Vector::Zero(n_vars + 1);
        cost.segment(n_struct, n_art).setOnes();
        Vector obj = t.reduced(cost);
        t.optimise(obj, n_vars);
        double infeas = 0.0;
        for (Eigen::Index i = 0; i < p; ++i)
            if (t.basis[static_cast<std::size_t>(i)] >= n_struct) infeas += t.rhs(i);
        const double scale = 1.0 + b.cwiseAbs().maxCoeff();
        if (infeas > 1e-9 * scale) {
            out.status = Status::Infeasible;
            return out;
        }
        // drive artificials out of the basis; drop rows that turn out redundant
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            if (t.basis[static_cast<std::size_t>(i)] < n_struct) {
                keep.push_back(i);
                continue;
            }
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < n_struct; ++j) {
                if (std::abs(t.a(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                Vector dummy = Vector::Zero(n_vars + 1);
                t.pivot(i, col, dummy);
                keep.push_back(i);
            }
        }
        Tableau reduced{Matrix(static_cast<Eigen::Index>(keep.size()), n_struct + 1), {}};
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const auto i = keep[r];
            reduced.a.row(static_cast<Eigen::Index>(r)) << t.a.row(i).head(n_struct),
                t.a(i, n_vars);
            reduced.basis.push_back(t.basis[static_cast<std::size_t>(i)]);
        }
        t = std::move(reduced);
    }

    Vector cost = Vector::Zero(t.vars() + 1);
    cost.head(d) = c;
    cost.segment(d, d) = -c;
    Vector obj = t.reduced(cost);
    if (!t.optimise(obj, t.vars())) {
        out.status = Status::Unbounded;
        return out;
    }

    Vector y = Vector::Zero(t.vars());
    for (Eigen::Index i = 0; i < t.rows(); ++i) y(t.basis[static_cast<std::size_t>(i)]) = t.rhs(i);
    out.x = y.head(d) - y.segment(d, d);
    out.objective = c.dot(out.x);
    out.status = Status::Optimal;
    return out;
}

}  // namespace epsweep::lp
