#include "epsweep/signal.hpp"

#include "epsweep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epsweep {

PiecewiseLinearSignal::PiecewiseLinearSignal(double period, std::vector<Breakpoint> breakpoints)
    : period_(period), points_(std::move(breakpoints)) {
    if (!(period_ > 0.0) || !std::isfinite(period_))
        throw InputError("signal period must be a positive finite number");
    if (points_.empty()) throw InputError("signal needs at least one breakpoint");
    dim_ = points_.front().value.size();
    if (dim_ == 0) throw InputError("signal values must have positive dimension");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (p.value.size() != dim_)
            throw InputError("signal breakpoint " + std::to_string(i) + " has dimension " +
                             std::to_string(p.value.size()) + ", expected " +
                             std::to_string(dim_));
        if (!(p.t >= 0.0 && p.t < period_))
            throw InputError("signal breakpoint time " + std::to_string(p.t) +
                             " outside [0, period)");
        if (i > 0 && !(p.t > points_[i - 1].t))
            throw InputError("signal breakpoint times must be strictly increasing");
        if (!p.value.allFinite()) throw InputError("signal values must be finite");
    }
}

PiecewiseLinearSignal PiecewiseLinearSignal::constant(const Vector& value, double period) {
    return PiecewiseLinearSignal(period, {{0.0, value}});
}

PiecewiseLinearSignal PiecewiseLinearSignal::scalar(double period, std::span<const double> ts,
                                                    std::span<const double> vs) {
    if (ts.size() != vs.size()) throw InputError("scalar signal: times/values size mismatch");
    std::vector<Breakpoint> pts;
    pts.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) pts.push_back({ts[i], Vector::Constant(1, vs[i])});
    return PiecewiseLinearSignal(period, std::move(pts));
}

bool PiecewiseLinearSignal::is_constant() const {
    for (const auto& p : points_)
        if (p.value != points_.front().value) return false;
    return true;
}

Vector PiecewiseLinearSignal::evaluate(double t) const {
    if (points_.size() == 1) return points_.front().value;
    double tau = std::fmod(t, period_);
    if (tau < 0.0) tau += period_;

    auto it = std::upper_bound(points_.begin(), points_.end(), tau,
                               [](double x, const Breakpoint& b) { return x < b.t; });
    const Breakpoint* left;
    const Breakpoint* right;
    double t_left, t_right;
    if (it == points_.begin()) {
        left = &points_.back();
        right = &points_.front();
        t_left = left->t - period_;
        t_right = right->t;
    } else if (it == points_.end()) {
        left = &points_.back();
        right = &points_.front();
        t_left = left->t;
        t_right = right->t + period_;
    } else {
        left = &*(it - 1);
        right = &*it;
        t_left = left->t;
        t_right = right->t;
    }
    const double w = (tau - t_left) / (t_right - t_left);
    return (1.0 - w) * left->value + w * right->value;
}

double PiecewiseLinearSignal::lipschitz_constant() const {
    if (points_.size() < 2) return 0.0;
    double best = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& a = points_[i];
        const auto& b = points_[(i + 1) % points_.size()];
        const double dt = (i + 1 < points_.size()) ? b.t - a.t : b.t + period_ - a.t;
        best = std::max(best, (b.value - a.value).cwiseAbs().maxCoeff() / dt);
    }
    return best;
}

std::vector<double> PiecewiseLinearSignal::breakpoint_times(double t0, double t1) const {
    std::vector<double> out;
    if (points_.size() < 2 || t1 < t0) return out;
    const auto k0 = static_cast<long long>(std::floor(t0 / period_)) - 1;
    const auto k1 = static_cast<long long>(std::ceil(t1 / period_)) + 1;
    for (long long k = k0; k <= k1; ++k) {
        for (const auto& p : points_) {
            const double t = p.t + static_cast<double>(k) * period_;
            if (t >= t0 && t <= t1) out.push_back(t);
        }
    }
    return out;
}

PiecewiseLinearSignal PiecewiseLinearSignal::transformed(const Matrix& map) const {
    if (map.cols() != dim_)
        throw InputError("signal transform: matrix has " + std::to_string(map.cols()) +
                         " columns, signal dimension is " + std::to_string(dim_));
    std::vector<Breakpoint> pts;
    pts.reserve(points_.size());
    for (const auto& p : points_) pts.push_back({p.t, map * p.value});
    return PiecewiseLinearSignal(period_, std::move(pts));
}

double common_period(std::span<const PiecewiseLinearSignal* const> signals, double fallback) {
    double period = 0.0;
    for (const auto* s : signals) {
        if (s->is_constant()) continue;
        if (period == 0.0) {
            period = s->period();
        } else if (std::abs(s->period() - period) > 1e-12 * period) {
            throw InputError("non-constant signals have different periods (" +
                             std::to_string(period) + " vs " + std::to_string(s->period()) + ")");
        }
    }
    return period == 0.0 ? fallback : period;
}

PiecewiseLinearSignal stack(std::span<const PiecewiseLinearSignal* const> signals) {
    if (signals.empty()) throw InputError("stack: no signals");
    double fallback = signals.front()->period();
    const double period = common_period(signals, fallback);

    std::vector<double> grid;
    Eigen::Index dim = 0;
    for (const auto* s : signals) {
        dim += s->dimension();
        if (s->is_constant()) continue;
        for (const auto& p : s->breakpoints()) grid.push_back(p.t);
    }
    if (grid.empty()) grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    std::vector<double> unique;
    for (double t : grid)
        if (unique.empty() || t - unique.back() > 1e-12 * period) unique.push_back(t);

    std::vector<PiecewiseLinearSignal::Breakpoint> pts;
    pts.reserve(unique.size());
    for (double t : unique) {
        Vector v(dim);
        Eigen::Index off = 0;
        for (const auto* s : signals) {
            v.segment(off, s->dimension()) = s->evaluate(t);
            off += s->dimension();
        }
        pts.push_back({t, std::move(v)});
    }
    return PiecewiseLinearSignal(period, std::move(pts));
}

PiecewiseLinearSignal add(const PiecewiseLinearSignal& a, const PiecewiseLinearSignal& b) {
    if (a.dimension() != b.dimension()) throw InputError("add: signal dimension mismatch");
    const PiecewiseLinearSignal* parts[] = {&a, &b};
    const PiecewiseLinearSignal both = stack(parts);
    const Eigen::Index d = a.dimension();
    Matrix sum(d, 2 * d);
    sum << Matrix::Identity(d, d), Matrix::Identity(d, d);
    return both.transformed(sum);
}

}  // namespace epsweep
