#pragma once

#include "epsweep/qp.hpp"
#include "epsweep/reduce.hpp"

#include <optional>
#include <vector>

namespace epsweep {

/// Catch-up samples of a sweeping-process solution. `y` and `stresses` are
/// filled only for polytopes that carry a network embedding.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> v;
    std::vector<Vector> y;
    std::vector<Vector> stresses;
    double dt = 0.0;

    std::size_t size() const { return times.size(); }
};

struct IntegrateOptions {
    int decimate = 1;             ///< keep every j-th step (first and last always kept)
    bool check_invariants = true; ///< feasibility + KKT certificate at every step
    double tolerance = 1e-9;
};

/// A feasible starting point at t0: the hint if it is feasible, otherwise
/// its Q-projection (the origin when no hint is given). Throws
/// PreconditionError if the set is empty at t0.
Vector initial_point(const MovingPolytope& p, double t0, const std::optional<Vector>& hint = {});

/// Uniform grid t0, t0+dt, ... ending exactly at t1, with the given
/// breakpoints merged in (duplicates within 1e-9 * max(1, |t|) dropped).
std::vector<double> time_grid(double t0, double t1, double dt, std::vector<double> breakpoints = {});

/// Catch-up scheme v_{k+1} = proj_Q(v_k, polytope(t_{k+1})) on a
/// breakpoint-aligned grid. Throws PreconditionError with the offending time
/// when the set is empty, SolverError when a step certificate fails.
Trajectory integrate(const MovingPolytope& p, const Vector& v0, double t0, double t1, double dt,
                     const IntegrateOptions& options = {});

/// The moving set C + c(t) for a fixed shape C.
MovingPolytope translated_polytope(const qp::StaticPolytope& shape, const PiecewiseLinearSignal& c);

Trajectory integrate_direct(const qp::StaticPolytope& shape, const PiecewiseLinearSignal& c,
                            const Vector& v0, double t0, double t1, double dt,
                            const IntegrateOptions& options = {});

/// s = A (y - h(t) + g(t)).
Vector recover_stress(const Embedding& e, double t, const Vector& y);
/// Fills `y` and `stresses` of a trajectory from its reduced samples.
void recover_stress(const Embedding& e, Trajectory& trajectory);

/// One period of the catch-up map with the grid and the bounds along it
/// precomputed. Reused by orbit searches that apply the same map many times.
class PeriodMap {
public:
    PeriodMap(const MovingPolytope& p, double t0, double period, double dt,
              bool check_invariants = true);

    struct Outcome {
        Vector end;
        double path_length = 0.0;  ///< sum of Q-norm step lengths
    };
    Outcome advance(const Vector& v) const;

    /// Calls visit(t, v) at every grid time, including the starting one.
    template <typename Visit>
    Vector advance(const Vector& v, Visit&& visit) const {
        Vector cur = v;
        visit(grid_.front(), cur);
        for (std::size_t k = 1; k < grid_.size(); ++k) {
            cur = step(cur, k);
            visit(grid_[k], cur);
        }
        return cur;
    }

    const std::vector<double>& grid() const { return grid_; }
    const Matrix& metric() const { return projector_.metric(); }

private:
    Vector step(const Vector& v, std::size_t k) const;

    qp::Projector projector_;
    std::vector<double> grid_;
    std::vector<Vector> lower_, upper_;
    bool check_;
};

}  // namespace epsweep
