#pragma once

#include "epsweep/linalg.hpp"
#include "epsweep/model.hpp"
#include "epsweep/qp.hpp"
#include "epsweep/signal.hpp"

#include <optional>
#include <vector>

namespace epsweep {

/// Optional caller-supplied bases. Each one is checked against its defining
/// equations; the derived normals, drift and feasible sets do not depend on
/// the choice.
struct BasisChoice {
    std::optional<Matrix> M;
    std::optional<Matrix> V_basis;
    std::optional<Matrix> D_perp;
};

/// Every quantity needed to write the network's stress evolution as a
/// sweeping process on the subspace V. Computed once per parameter set.
struct DerivedSystem {
    int m = 0, n = 0, q = 0;
    Matrix D;  ///< m x n incidence
    Matrix R;  ///< m x q loading incidence vectors
    Vector stiffness;
    Vector c_minus, c_plus;

    Matrix M;        ///< n x dim_U, R^T D M = 0
    Matrix U_basis;  ///< m x dim_U, = D M
    Matrix V_basis;  ///< m x dim_V, U_basis^T A V_basis = 0
    Matrix D_perp;   ///< m x (m-n+1), D_perp^T D = 0
    Matrix W;        ///< (q+m-n+1) x m, R^T stacked over D_perp^T
    Matrix L_bar;    ///< dim_V x q
    Matrix normals;  ///< m x m, column i is n_i = V (W V)^-1 W e_i
    Matrix reduced_rows;  ///< m x dim_V, row i is r_i = (A V)^T n_i
    Matrix gram;     ///< dim_V x dim_V, V^T A V
    int dim_U = 0, dim_V = 0;

    Vector normal(int i) const { return normals.col(i); }
    /// Drift of the moving set per unit loading: g(t) = drift() * l(t).
    Matrix drift() const { return V_basis * L_bar; }
};

/// Basis of ker(R^T D) modulo ker D: n x (n-q-1). Throws PreconditionError
/// when the dimension count fails (rank condition or connectivity broken).
Matrix compute_M(const Matrix& D, const Matrix& R);
/// Columns spanning { x : U_basis^T A x = 0 }; `expected_dim` is checked.
Matrix compute_V_basis(const Matrix& U_basis, const Vector& stiffness, Eigen::Index expected_dim);
/// Basis of ker(D^T) (the cycle space); requires rank D = n - 1.
Matrix compute_D_perp(const Matrix& D);
Matrix stack_W(const Matrix& R, const Matrix& D_perp);
/// (W V)^-1 (I_q ; 0). Throws PreconditionError if W V is singular.
Matrix compute_L_bar(const Matrix& W, const Matrix& V_basis, Eigen::Index q);
/// V (W V)^-1 W; column i is the normal n_i.
Matrix compute_normals(const Matrix& W, const Matrix& V_basis);

/// Runs the full derivation. Throws PreconditionError on violated
/// assumptions and InputError on malformed bases.
DerivedSystem derive(const SpringNetwork& network, const BasisChoice& bases = {});

/// A-orthogonal projectors onto span(U_basis) and span(V_basis).
struct Projectors {
    Matrix P_U;
    Matrix P_V;
};
Projectors a_orthogonal_projectors(const DerivedSystem& d);

/// g(t) = V_basis L_bar l(t).
PiecewiseLinearSignal compute_g(const DerivedSystem& d, const PiecewiseLinearSignal& l);
/// h(t) = U_basis H(t).
PiecewiseLinearSignal compute_h(const DerivedSystem& d, const PiecewiseLinearSignal& H);
/// Coordinates H with U_basis H = P_U A^-1 hbar where D^T hbar = -f.
/// Requires dim_U > 0. Throws InputError when f is not balanced.
PiecewiseLinearSignal stress_to_H(const DerivedSystem& d, const PiecewiseLinearSignal& f);

/// The image in full coordinates of the reduced state: y = V v and the
/// signals needed to recover stresses s = A (y - h + g).
struct Embedding {
    Matrix V_basis;
    Vector stiffness;
    PiecewiseLinearSignal h;
    PiecewiseLinearSignal g;
};

/// { v : base_lower + offset(t) <= rows v <= base_upper + offset(t) }.
/// Rows and metric are fixed; only the offsets move.
struct MovingPolytope {
    Matrix rows;    ///< k x dim
    Matrix metric;  ///< dim x dim SPD
    Vector base_lower;
    Vector base_upper;
    PiecewiseLinearSignal offset;  ///< dimension k
    std::optional<Embedding> embedding;

    Eigen::Index dim() const { return rows.cols(); }
    Eigen::Index size() const { return rows.rows(); }
    double period() const { return offset.period(); }

    Vector lower(double t) const { return base_lower + offset.evaluate(t); }
    Vector upper(double t) const { return base_upper + offset.evaluate(t); }
    qp::StaticPolytope at(double t) const;
    /// Offset breakpoints in [t0, t1] (times where the motion changes slope).
    std::vector<double> breakpoint_times(double t0, double t1) const;
};

/// Polytope for explicit g(t), h(t) (both dimension m). Parallel rows are
/// stored separately; merging them is left to the solver and to analysis.
MovingPolytope assemble_polytope(const DerivedSystem& d, const PiecewiseLinearSignal& g,
                                 const PiecewiseLinearSignal& h);
/// Polytope for the network's own loadings and offset input.
MovingPolytope assemble_polytope(const SpringNetwork& network, const DerivedSystem& d);

/// h(t) for the network's offset input (H, f, or zero).
PiecewiseLinearSignal offset_h(const SpringNetwork& network, const DerivedSystem& d);
/// g(t) for the network's loadings (zero when q = 0).
PiecewiseLinearSignal drift_g(const SpringNetwork& network, const DerivedSystem& d);

/// Groups parallel rows and intersects their intervals. Each merged row is
/// the first member's row; bounds are rescaled onto it.
struct MergedConstraint {
    Vector row;
    double lower;
    double upper;
    std::vector<Eigen::Index> members;
};
std::vector<MergedConstraint> merge_parallel(const qp::StaticPolytope& p, double angle_tol = 1e-12);

struct SafeLoadSample {
    double t = 0.0;
    bool feasible = false;
    Vector witness;
};
/// Feasibility of the moving set at each grid time. Because bounds are
/// affine in t between breakpoints, checking one period's breakpoints
/// (the default grid) decides the condition for all t.
std::vector<SafeLoadSample> safe_load_check(const MovingPolytope& p, std::vector<double> grid = {});

}  // namespace epsweep
