#pragma once

#include "epsweep/linalg.hpp"

#include <span>
#include <vector>

namespace epsweep {

/// Periodic, continuous, piecewise-linear vector signal.
///
/// Breakpoints live in [0, period) and are strictly increasing. Between the
/// last breakpoint and `period` the signal interpolates back to the first
/// value, so value(period) == value(0). A single breakpoint gives a constant.
class PiecewiseLinearSignal {
public:
    struct Breakpoint {
        double t;
        Vector value;
    };

    PiecewiseLinearSignal() = default;

    /// Throws InputError on any violated invariant.
    PiecewiseLinearSignal(double period, std::vector<Breakpoint> breakpoints);

    static PiecewiseLinearSignal constant(const Vector& value, double period = 1.0);
    /// Scalar convenience: breakpoints (t_i, v_i).
    static PiecewiseLinearSignal scalar(double period, std::span<const double> ts,
                                        std::span<const double> vs);

    double period() const { return period_; }
    Eigen::Index dimension() const { return dim_; }
    const std::vector<Breakpoint>& breakpoints() const { return points_; }
    bool empty() const { return points_.empty(); }

    /// All breakpoint values equal: the signal does not depend on t.
    bool is_constant() const;

    Vector evaluate(double t) const;

    /// Largest |slope| over all segments (infinity-norm of the vector slope).
    double lipschitz_constant() const;

    /// Breakpoint times shifted by whole periods that fall in [t0, t1].
    std::vector<double> breakpoint_times(double t0, double t1) const;

    /// Pointwise linear image t -> map * value(t); same breakpoint grid.
    PiecewiseLinearSignal transformed(const Matrix& map) const;

private:
    double period_ = 1.0;
    Eigen::Index dim_ = 0;
    std::vector<Breakpoint> points_;
};

/// Common period of a family of signals. Constant signals adapt to any
/// period; the non-constant ones must agree (relative 1e-12). Throws
/// InputError otherwise. Returns `fallback` when every signal is constant.
double common_period(std::span<const PiecewiseLinearSignal* const> signals,
                     double fallback = 1.0);

/// Stacks signals into one whose value is the concatenation of the parts,
/// sampled on the union of the breakpoint grids. Exact for piecewise-linear
/// inputs sharing a common period.
PiecewiseLinearSignal stack(std::span<const PiecewiseLinearSignal* const> signals);

/// a(t) + b(t) on the union grid.
PiecewiseLinearSignal add(const PiecewiseLinearSignal& a, const PiecewiseLinearSignal& b);

}  // namespace epsweep
