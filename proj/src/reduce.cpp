#include "epsweep/reduce.hpp"

#include "epsweep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epsweep {

namespace {

double residual_scale(const Matrix& a) { return std::max(1.0, max_abs(a)); }

void require_zero(const Matrix& product, double scale, const std::string& what) {
    if (product.size() && max_abs(product) > 1e-10 * scale)
        throw InputError(what + " does not hold (residual " + std::to_string(max_abs(product)) + ")");
}

}  // namespace

Matrix compute_M(const Matrix& D, const Matrix& R) {
    const Eigen::Index n = D.cols();
    const Eigen::Index q = R.cols();
    const Eigen::Index target = n - q - 1;
    if (target < 0)
        throw PreconditionError("too many displacement loadings: n - q - 1 = " +
                                std::to_string(target));
    const Matrix kernel = nullspace(R.transpose() * D);

    Matrix kept(n, 0);
    for (Eigen::Index j = 0; j < kernel.cols() && kept.cols() < target; ++j) {
        Matrix trial(n, kept.cols() + 1);
        trial << kept, kernel.col(j);
        if (numeric_rank(D * trial) == static_cast<std::size_t>(trial.cols())) kept = trial;
    }
    if (kept.cols() != target)
        throw PreconditionError("could not build M with rank(D M) = n - q - 1 = " +
                                std::to_string(target) +
                                " (rank condition on the loadings or connectivity violated)");
    return kept;
}

Matrix compute_V_basis(const Matrix& U_basis, const Vector& stiffness, Eigen::Index expected_dim) {
    const Matrix v = nullspace(U_basis.transpose() * stiffness.asDiagonal());
    if (v.cols() != expected_dim)
        throw PreconditionError("dim V = " + std::to_string(v.cols()) + " but m - n + q + 1 = " +
                                std::to_string(expected_dim));
    return v;
}

Matrix compute_D_perp(const Matrix& D) {
    const Eigen::Index m = D.rows(), n = D.cols();
    if (numeric_rank(D) != static_cast<std::size_t>(n - 1))
        throw PreconditionError("rank D != n - 1: the spring graph is disconnected");
    Matrix dp = nullspace(D.transpose());
    if (dp.cols() != m - n + 1)
        throw PreconditionError("cycle space has unexpected dimension " + std::to_string(dp.cols()));
    return dp;
}

Matrix stack_W(const Matrix& R, const Matrix& D_perp) {
    Matrix w(R.cols() + D_perp.cols(), R.rows());
    w << R.transpose(), D_perp.transpose();
    return w;
}

namespace {

Eigen::FullPivLU<Matrix> factor_WV(const Matrix& W, const Matrix& V_basis) {
    const Matrix wv = W * V_basis;
    if (wv.rows() != wv.cols())
        throw PreconditionError("W V_basis is not square (" + std::to_string(wv.rows()) + "x" +
                                std::to_string(wv.cols()) + ")");
    if (numeric_rank(wv) != static_cast<std::size_t>(wv.rows()))
        throw PreconditionError("W V_basis is singular");
    return Eigen::FullPivLU<Matrix>(wv);
}

}  // namespace

Matrix compute_L_bar(const Matrix& W, const Matrix& V_basis, Eigen::Index q) {
    const auto lu = factor_WV(W, V_basis);
    Matrix rhs = Matrix::Zero(W.rows(), q);
    rhs.topRows(q).setIdentity();
    return lu.solve(rhs);
}

Matrix compute_normals(const Matrix& W, const Matrix& V_basis) {
    const auto lu = factor_WV(W, V_basis);
    return V_basis * lu.solve(W);
}

DerivedSystem derive(const SpringNetwork& network, const BasisChoice& bases) {
    DerivedSystem d;
    d.m = network.m();
    d.n = network.n();
    d.q = network.q();
    d.D = build_incidence(network);
    d.R = network.loading_matrix();
    d.stiffness = network.stiffness();
    d.c_minus = network.c_minus();
    d.c_plus = network.c_plus();
    d.dim_U = d.n - d.q - 1;
    d.dim_V = d.m - d.n + d.q + 1;

    if (!(d.stiffness.array() > 0.0).all()) throw PreconditionError("stiffness must be positive");
    if (numeric_rank(d.D) != static_cast<std::size_t>(d.n - 1))
        throw PreconditionError("rank D != n - 1: the spring graph is disconnected");
    if (d.q > 0 && numeric_rank(d.D.transpose() * d.R) != static_cast<std::size_t>(d.q))
        throw PreconditionError("rank(D^T R) != q: displacement loadings contradict one another");

    const auto a = d.stiffness.asDiagonal();

    if (bases.M) {
        d.M = *bases.M;
        if (d.M.rows() != d.n || d.M.cols() != d.dim_U)
            throw InputError("supplied M must be n x (n - q - 1)");
        require_zero(d.R.transpose() * d.D * d.M, residual_scale(d.M), "R^T D M = 0");
        if (numeric_rank(d.D * d.M) != static_cast<std::size_t>(d.dim_U))
            throw InputError("supplied M: rank(D M) != n - q - 1");
    } else {
        d.M = compute_M(d.D, d.R);
    }
    d.U_basis = d.D * d.M;

    if (bases.V_basis) {
        d.V_basis = *bases.V_basis;
        if (d.V_basis.rows() != d.m || d.V_basis.cols() != d.dim_V)
            throw InputError("supplied V_basis must be m x (m - n + q + 1)");
        require_zero(d.U_basis.transpose() * a * d.V_basis,
                     residual_scale(d.U_basis) * residual_scale(d.V_basis) * d.stiffness.maxCoeff(),
                     "U_basis^T A V_basis = 0");
        if (numeric_rank(d.V_basis) != static_cast<std::size_t>(d.dim_V))
            throw InputError("supplied V_basis columns are dependent");
    } else {
        d.V_basis = compute_V_basis(d.U_basis, d.stiffness, d.dim_V);
    }

    if (bases.D_perp) {
        d.D_perp = *bases.D_perp;
        if (d.D_perp.rows() != d.m || d.D_perp.cols() != d.m - d.n + 1)
            throw InputError("supplied D_perp must be m x (m - n + 1)");
        require_zero(d.D_perp.transpose() * d.D, residual_scale(d.D_perp), "D_perp^T D = 0");
        if (numeric_rank(d.D_perp) != static_cast<std::size_t>(d.m - d.n + 1))
            throw InputError("supplied D_perp is rank deficient");
    } else {
        d.D_perp = compute_D_perp(d.D);
    }

    d.W = stack_W(d.R, d.D_perp);
    d.L_bar = compute_L_bar(d.W, d.V_basis, d.q);
    d.normals = compute_normals(d.W, d.V_basis);
    d.reduced_rows = d.normals.transpose() * a * d.V_basis;
    d.gram = d.V_basis.transpose() * a * d.V_basis;
    d.gram = 0.5 * (d.gram + d.gram.transpose()).eval();
    return d;
}

Projectors a_orthogonal_projectors(const DerivedSystem& d) {
    const auto a = d.stiffness.asDiagonal();
    const Matrix& u = d.U_basis;
    Projectors p;
    if (u.cols() == 0) {
        p.P_U = Matrix::Zero(d.m, d.m);
    } else {
        const Matrix uau = u.transpose() * a * u;
        p.P_U = u * uau.ldlt().solve(u.transpose() * a);
    }
    p.P_V = Matrix::Identity(d.m, d.m) - p.P_U;
    return p;
}

PiecewiseLinearSignal compute_g(const DerivedSystem& d, const PiecewiseLinearSignal& l) {
    if (l.dimension() != d.q)
        throw InputError("loading signal has dimension " + std::to_string(l.dimension()) +
                         ", expected q = " + std::to_string(d.q));
    return l.transformed(d.drift());
}

PiecewiseLinearSignal compute_h(const DerivedSystem& d, const PiecewiseLinearSignal& H) {
    if (H.dimension() != d.dim_U)
        throw InputError("H signal has dimension " + std::to_string(H.dimension()) +
                         ", expected n - q - 1 = " + std::to_string(d.dim_U));
    return H.transformed(d.U_basis);
}

PiecewiseLinearSignal stress_to_H(const DerivedSystem& d, const PiecewiseLinearSignal& f) {
    if (f.dimension() != d.n)
        throw InputError("f signal has dimension " + std::to_string(f.dimension()) +
                         ", expected n = " + std::to_string(d.n));
    if (d.dim_U == 0) throw InputError("stress_to_H: dim U = 0, H has no coordinates");

    const Matrix dt = d.D.transpose();
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(dt);
    for (const auto& p : f.breakpoints()) {
        const Vector hbar = cod.solve(-p.value);
        const double scale = std::max(1.0, p.value.cwiseAbs().maxCoeff());
        if ((dt * hbar + p.value).cwiseAbs().maxCoeff() > kRankTolerance * scale)
            throw InputError("nodal forces are not balanced at t = " + std::to_string(p.t));
    }
    // H = (U^T A U)^-1 U^T A (A^-1 hbar) with hbar = -pinv(D^T) f
    const Matrix& u = d.U_basis;
    const Matrix uau = u.transpose() * d.stiffness.asDiagonal() * u;
    const Matrix pinv = cod.pseudoInverse();
    const Matrix map = uau.ldlt().solve(u.transpose() * (-pinv));
    return f.transformed(map);
}

qp::StaticPolytope MovingPolytope::at(double t) const {
    const Vector o = offset.evaluate(t);
    return {rows, base_lower + o, base_upper + o, metric};
}

std::vector<double> MovingPolytope::breakpoint_times(double t0, double t1) const {
    return offset.breakpoint_times(t0, t1);
}

MovingPolytope assemble_polytope(const DerivedSystem& d, const PiecewiseLinearSignal& g,
                                 const PiecewiseLinearSignal& h) {
    if (g.dimension() != d.m || h.dimension() != d.m)
        throw InputError("assemble_polytope: g and h must have dimension m");
    const Vector& a = d.stiffness;
    // offset_i = a_i h_i(t) - <n_i, A g(t)>
    Matrix map(d.m, 2 * d.m);
    map << Matrix(a.asDiagonal()), -(d.normals.transpose() * a.asDiagonal());
    const PiecewiseLinearSignal* parts[] = {&h, &g};
    MovingPolytope p;
    p.rows = d.reduced_rows;
    p.metric = d.gram;
    p.base_lower = d.c_minus;
    p.base_upper = d.c_plus;
    p.offset = stack(parts).transformed(map);
    p.embedding = Embedding{d.V_basis, d.stiffness, h, g};
    return p;
}

PiecewiseLinearSignal offset_h(const SpringNetwork& network, const DerivedSystem& d) {
    const auto& off = network.offset;
    switch (off.kind) {
        case OffsetInput::Kind::ControlH:
            return compute_h(d, off.signal);
        case OffsetInput::Kind::NodalForces:
            if (d.dim_U == 0) return PiecewiseLinearSignal::constant(Vector::Zero(d.m), off.signal.period());
            return compute_h(d, stress_to_H(d, off.signal));
        case OffsetInput::Kind::None:
            break;
    }
    return PiecewiseLinearSignal::constant(Vector::Zero(d.m));
}

PiecewiseLinearSignal drift_g(const SpringNetwork& network, const DerivedSystem& d) {
    if (d.q == 0) return PiecewiseLinearSignal::constant(Vector::Zero(d.m));
    return compute_g(d, network.loading_signal());
}

MovingPolytope assemble_polytope(const SpringNetwork& network, const DerivedSystem& d) {
    return assemble_polytope(d, drift_g(network, d), offset_h(network, d));
}

std::vector<MergedConstraint> merge_parallel(const qp::StaticPolytope& p, double angle_tol) {
    std::vector<MergedConstraint> out;
    std::vector<Vector> dirs;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const Vector r = p.rows.row(i).transpose();
        const double norm = r.norm();
        if (norm == 0.0) continue;
        bool placed = false;
        for (std::size_t g = 0; g < out.size(); ++g) {
            const double c = dirs[g].dot(r) / norm;
            if (std::abs(c) < 1.0 - angle_tol) continue;
            auto& mc = out[g];
            const double alpha = r.dot(mc.row) / mc.row.squaredNorm();  // r = alpha * row
            const double lo = alpha > 0 ? p.lower(i) / alpha : p.upper(i) / alpha;
            const double hi = alpha > 0 ? p.upper(i) / alpha : p.lower(i) / alpha;
            mc.lower = std::max(mc.lower, lo);
            mc.upper = std::min(mc.upper, hi);
            mc.members.push_back(i);
            placed = true;
            break;
        }
        if (!placed) {
            dirs.push_back(r / norm);
            out.push_back({r, p.lower(i), p.upper(i), {i}});
        }
    }
    return out;
}

std::vector<SafeLoadSample> safe_load_check(const MovingPolytope& p, std::vector<double> grid) {
    if (grid.empty()) {
        grid = p.breakpoint_times(0.0, p.period());
        grid.push_back(0.0);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    std::vector<SafeLoadSample> out;
    out.reserve(grid.size());
    for (double t : grid) {
        const auto res = qp::feasible(p.at(t));
        out.push_back({t, res.feasible, res.witness});
    }
    return out;
}

}  // namespace epsweep
