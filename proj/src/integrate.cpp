#include "epsweep/integrate.hpp"

#include "epsweep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace epsweep {

namespace {

double bound_scale(const Vector& v, const Vector& lower, const Vector& upper) {
    double s = 1.0;
    if (v.size()) s = std::max(s, v.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (std::isfinite(lower(i))) s = std::max(s, std::abs(lower(i)));
        if (std::isfinite(upper(i))) s = std::max(s, std::abs(upper(i)));
    }
    return s;
}

std::string time_string(double t) {
    std::ostringstream os;
    os.precision(17);
    os << t;
    return os.str();
}

Vector catch_up_step(const qp::Projector& proj, const Vector& v, const Vector& lower,
                     const Vector& upper, double t, bool check, double tol) {
    qp::ProjectionResult res;
    try {
        res = proj.project(v, lower, upper);
    } catch (const PreconditionError& e) {
        throw PreconditionError("safe load condition violated at t = " + time_string(t) + ": " +
                                e.what());
    }
    if (check) {
        const qp::StaticPolytope p{proj.rows(), lower, upper, proj.metric()};
        const double scale = bound_scale(v, lower, upper);
        if (p.violation(res.point) > tol * scale)
            throw SolverError("catch-up step left the feasible set at t = " + time_string(t));
        if (qp::kkt_violation(p, v, res) > tol * scale)
            throw SolverError("invalid KKT certificate for the projection at t = " + time_string(t));
    }
    return res.point;
}

}  // namespace

Vector initial_point(const MovingPolytope& p, double t0, const std::optional<Vector>& hint) {
    const qp::StaticPolytope at = p.at(t0);
    const Vector start = hint ? *hint : Vector::Zero(p.dim());
    if (start.size() != p.dim()) throw InputError("initial point has the wrong dimension");
    if (hint && at.contains(*hint, 1e-10)) return *hint;
    try {
        return qp::project(start, at).point;
    } catch (const PreconditionError& e) {
        throw PreconditionError("safe load condition violated at t = " + time_string(t0) + ": " +
                                e.what());
    }
}

std::vector<double> time_grid(double t0, double t1, double dt, std::vector<double> breakpoints) {
    if (!(dt > 0.0)) throw InputError("time step must be positive");
    if (t1 < t0) throw InputError("time interval is reversed");
    const auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
    };

    // exact times: endpoints and breakpoints strictly inside
    std::vector<double> pinned{t0};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double b : breakpoints)
        if (b > t0 && b < t1 && !close(b, pinned.back()) && !close(b, t1)) pinned.push_back(b);
    if (t1 > t0) pinned.push_back(t1);

    const auto steps = static_cast<long long>(std::ceil((t1 - t0) / dt - 1e-9));
    std::vector<double> grid = pinned;
    auto next = pinned.begin();
    for (long long k = 1; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        while (next != pinned.end() && *next < t && !close(*next, t)) ++next;
        if (next != pinned.end() && close(*next, t)) continue;
        if (next != pinned.begin() && close(*(next - 1), t)) continue;
        grid.push_back(t);
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

Vector recover_stress(const Embedding& e, double t, const Vector& y) {
    return e.stiffness.cwiseProduct(y - e.h.evaluate(t) + e.g.evaluate(t));
}

void recover_stress(const Embedding& e, Trajectory& trajectory) {
    trajectory.y.clear();
    trajectory.stresses.clear();
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        const Vector y = e.V_basis * trajectory.v[k];
        trajectory.stresses.push_back(recover_stress(e, trajectory.times[k], y));
        trajectory.y.push_back(y);
    }
}

Trajectory integrate(const MovingPolytope& p, const Vector& v0, double t0, double t1, double dt,
                     const IntegrateOptions& options) {
    if (options.decimate < 1) throw InputError("decimation must be >= 1");
    if (v0.size() != p.dim()) throw InputError("initial point has the wrong dimension");
    const qp::StaticPolytope start = p.at(t0);
    if (!start.contains(v0, options.tolerance * bound_scale(v0, start.lower, start.upper)))
        throw PreconditionError("initial point is not in the moving set at t = " + time_string(t0));

    const qp::Projector proj(p.rows, p.metric);
    const auto grid = time_grid(t0, t1, dt, p.breakpoint_times(t0, t1));

    Trajectory traj;
    traj.dt = dt;
    Vector v = v0;
    const double c_tol = options.tolerance;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        if (k > 0) v = catch_up_step(proj, v, p.lower(t), p.upper(t), t, options.check_invariants, c_tol);
        if (k % static_cast<std::size_t>(options.decimate) == 0 || k + 1 == grid.size()) {
            traj.times.push_back(t);
            traj.v.push_back(v);
        }
    }

    if (p.embedding) {
        recover_stress(*p.embedding, traj);
        if (options.check_invariants) {
            for (std::size_t k = 0; k < traj.size(); ++k) {
                const Vector& s = traj.stresses[k];
                const Vector lo = p.base_lower, hi = p.base_upper;
                const double scale = bound_scale(s, lo, hi);
                if (((lo - s).array() > c_tol * scale).any() || ((s - hi).array() > c_tol * scale).any())
                    throw SolverError("recovered stress leaves the elastic limits at t = " +
                                      time_string(traj.times[k]));
            }
        }
    }
    return traj;
}

MovingPolytope translated_polytope(const qp::StaticPolytope& shape, const PiecewiseLinearSignal& c) {
    shape.check();
    if (c.dimension() != shape.dim())
        throw InputError("translation signal dimension does not match the shape");
    MovingPolytope p;
    p.rows = shape.rows;
    p.metric = shape.metric;
    p.base_lower = shape.lower;
    p.base_upper = shape.upper;
    p.offset = c.transformed(shape.rows);
    return p;
}

Trajectory integrate_direct(const qp::StaticPolytope& shape, const PiecewiseLinearSignal& c,
                            const Vector& v0, double t0, double t1, double dt,
                            const IntegrateOptions& options) {
    return integrate(translated_polytope(shape, c), v0, t0, t1, dt, options);
}

PeriodMap::PeriodMap(const MovingPolytope& p, double t0, double period, double dt,
                     bool check_invariants)
    : projector_(p.rows, p.metric),
      grid_(time_grid(t0, t0 + period, dt, p.breakpoint_times(t0, t0 + period))),
      check_(check_invariants) {
    lower_.reserve(grid_.size());
    upper_.reserve(grid_.size());
    for (double t : grid_) {
        lower_.push_back(p.lower(t));
        upper_.push_back(p.upper(t));
    }
}

Vector PeriodMap::step(const Vector& v, std::size_t k) const {
    return catch_up_step(projector_, v, lower_[k], upper_[k], grid_[k], check_, 1e-9);
}

PeriodMap::Outcome PeriodMap::advance(const Vector& v) const {
    Outcome out;
    Vector prev = v;
    const Matrix& q = projector_.metric();
    out.end = advance(v, [&](double, const Vector& cur) {
        out.path_length += metric_norm(cur - prev, q);
        prev = cur;
    });
    return out;
}

}  // namespace epsweep
