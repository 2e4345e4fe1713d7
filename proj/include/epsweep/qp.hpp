#pragma once

#include "epsweep/linalg.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace epsweep::qp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// { v : lower <= R v <= upper } with a metric Q for projections.
/// Bounds may be infinite for one-sided constraints.
struct StaticPolytope {
    Matrix rows;  ///< k x d
    Vector lower;
    Vector upper;
    Matrix metric;  ///< d x d, symmetric positive definite

    Eigen::Index dim() const { return rows.cols(); }
    Eigen::Index size() const { return rows.rows(); }

    /// Largest constraint violation at v (0 when feasible).
    double violation(const Vector& v) const;
    bool contains(const Vector& v, double tol = 1e-10) const;
    /// Throws InputError on shape mismatch, lower > upper or a non-SPD metric.
    void check() const;
};

enum class Side { Lower, Upper };

struct ProjectionResult {
    Vector point;
    /// Multipliers per original constraint; supported on active sides only.
    Vector lambda_upper;
    Vector lambda_lower;
    /// Active one-sided constraints as (index, side), sorted.
    std::vector<std::pair<Eigen::Index, Side>> active;
    int iterations = 0;
};

/// Q-metric projection onto polytopes that share rows and metric but whose
/// bounds vary (the catch-up setting). Parallel rows are grouped once at
/// construction and their intervals intersected before each solve; the
/// solve itself is a dual active-set (Goldfarb-Idnani) iteration started from
/// the unconstrained minimiser, which is the point being projected.
///
/// Instances are immutable after construction; concurrent calls are safe.
class Projector {
public:
    Projector(const Matrix& rows, const Matrix& metric);

    /// Throws PreconditionError if the constraint set is empty and
    /// SolverError when the iteration cap (100 * one-sided constraints) is hit.
    ProjectionResult project(const Vector& v0, const Vector& lower, const Vector& upper) const;
    ProjectionResult project(const Vector& v0, const StaticPolytope& p) const {
        return project(v0, p.lower, p.upper);
    }

    const Matrix& rows() const { return rows_; }
    const Matrix& metric() const { return metric_; }

private:
    struct Member {
        Eigen::Index index;
        double scale;  ///< rows_.row(index) == scale * direction
    };
    struct Group {
        Vector direction;  ///< unit Euclidean norm
        std::vector<Member> members;
    };

    Matrix rows_;
    Matrix metric_;
    Matrix metric_inv_;
    std::vector<Group> groups_;
    std::vector<Eigen::Index> zero_rows_;
};

/// One-shot projection.
ProjectionResult project(const Vector& v0, const StaticPolytope& p);

/// Largest violation of the KKT conditions of the projection of v0 onto p:
/// stationarity Q(v0 - v) = sum lambda+ r - sum lambda- r, primal
/// feasibility, dual sign and complementary slackness.
double kkt_violation(const StaticPolytope& p, const Vector& v0, const ProjectionResult& r);

struct FeasibilityResult {
    bool feasible = false;
    Vector witness;  ///< valid when feasible
};

/// Linear feasibility of the constraint system (phase-one simplex).
FeasibilityResult feasible(const StaticPolytope& p);

/// True iff dropping the one-sided constraint (i, side) strictly enlarges the
/// set: the optimum of r_i.v (max for Upper, min for Lower) over the other
/// constraints beats the bound by more than `margin`, or is unbounded.
/// Returns false for an infinite bound. Throws PreconditionError when p is
/// empty.
bool is_facet(const StaticPolytope& p, Eigen::Index i, Side side, double margin = 1e-9);

}  // namespace epsweep::qp
