#include "epsweep/qp.hpp"

#include "epsweep/errors.hpp"
#include "epsweep/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epsweep::qp {

double StaticPolytope::violation(const Vector& v) const {
    const Vector rv = rows * v;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rv.size(); ++i) {
        worst = std::max(worst, lower(i) - rv(i));
        worst = std::max(worst, rv(i) - upper(i));
    }
    return worst;
}

bool StaticPolytope::contains(const Vector& v, double tol) const { return violation(v) <= tol; }

void StaticPolytope::check() const {
    if (lower.size() != rows.rows() || upper.size() != rows.rows())
        throw InputError("polytope bounds do not match the number of rows");
    if (metric.rows() != rows.cols() || metric.cols() != rows.cols())
        throw InputError("polytope metric does not match the dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (lower(i) > upper(i))
            throw InputError("polytope row " + std::to_string(i + 1) + " has lower > upper");
    if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + max_abs(metric)))
        throw InputError("polytope metric is not symmetric");
    Eigen::LLT<Matrix> llt(metric);
    if (llt.info() != Eigen::Success) throw InputError("polytope metric is not positive definite");
}

Projector::Projector(const Matrix& rows, const Matrix& metric) : rows_(rows), metric_(metric) {
    const Eigen::Index d = rows.cols();
    if (metric.rows() != d || metric.cols() != d)
        throw InputError("projector: metric does not match the row dimension");
    Eigen::LLT<Matrix> llt(metric);
    if (llt.info() != Eigen::Success) throw InputError("projector: metric is not positive definite");
    metric_inv_ = llt.solve(Matrix::Identity(d, d));
    metric_inv_ = 0.5 * (metric_inv_ + metric_inv_.transpose()).eval();

    const double zero = 1e-14 * std::max(1.0, max_abs(rows));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const Vector r = rows.row(i).transpose();
        const double norm = r.norm();
        if (norm <= zero) {
            zero_rows_.push_back(i);
            continue;
        }
        const Vector u = r / norm;
        bool placed = false;
        for (auto& g : groups_) {
            if (std::abs(g.direction.dot(u)) >= 1.0 - 1e-12) {
                g.members.push_back({i, r.dot(g.direction)});
                placed = true;
                break;
            }
        }
        if (!placed) groups_.push_back({u, {{i, norm}}});
    }
}

namespace {

struct OneSided {
    Vector normal;  ///< constraint normal . x >= bound
    double bound;
    std::size_t group;
    Side side;  ///< side of the group direction
    Eigen::Index member;
    double scale;
};

}  // namespace

ProjectionResult Projector::project(const Vector& v0, const Vector& lower,
                                    const Vector& upper) const {
    const Eigen::Index k = rows_.rows();
    if (v0.size() != rows_.cols() || lower.size() != k || upper.size() != k)
        throw InputError("projector: dimension mismatch");

    double scale = 1.0 + (v0.size() ? v0.cwiseAbs().maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::isfinite(lower(i))) scale = std::max(scale, 1.0 + std::abs(lower(i)));
        if (std::isfinite(upper(i))) scale = std::max(scale, 1.0 + std::abs(upper(i)));
    }
    const double tol = 1e-12 * scale;

    for (auto i : zero_rows_) {
        if (lower(i) > tol || upper(i) < -tol)
            throw PreconditionError("constraint set is empty (zero row " + std::to_string(i + 1) +
                                    " excludes the origin)");
    }

    std::vector<OneSided> cons;
    std::size_t finite_sides = 0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        const auto& g = groups_[gi];
        double lo = -kInf, hi = kInf;
        Eigen::Index lo_src = -1, hi_src = -1;
        double lo_scale = 0.0, hi_scale = 0.0;
        for (const auto& mem : g.members) {
            const double a = mem.scale;
            const double l = lower(mem.index), u = upper(mem.index);
            if (std::isfinite(l)) ++finite_sides;
            if (std::isfinite(u)) ++finite_sides;
            const double mapped_lo = a > 0.0 ? l / a : u / a;
            const double mapped_hi = a > 0.0 ? u / a : l / a;
            if (mapped_lo > lo) {
                lo = mapped_lo;
                lo_src = mem.index;
                lo_scale = a;
            }
            if (mapped_hi < hi) {
                hi = mapped_hi;
                hi_src = mem.index;
                hi_scale = a;
            }
        }
        if (lo > hi + tol)
            throw PreconditionError("constraint set is empty (parallel constraints " +
                                    std::to_string(lo_src + 1) + " and " +
                                    std::to_string(hi_src + 1) + " do not overlap)");
        if (lo > hi) lo = hi;
        if (std::isfinite(lo)) cons.push_back({g.direction, lo, gi, Side::Lower, lo_src, lo_scale});
        if (std::isfinite(hi))
            cons.push_back({-g.direction, -hi, gi, Side::Upper, hi_src, hi_scale});
    }

    ProjectionResult out;
    out.point = v0;
    out.lambda_upper = Vector::Zero(k);
    out.lambda_lower = Vector::Zero(k);

    const Matrix& h = metric_inv_;
    Vector x = v0;
    std::vector<std::size_t> active;
    std::vector<double> mult;
    const int cap = 100 * static_cast<int>(std::max<std::size_t>(1, finite_sides));
    int iterations = 0;

    for (;;) {
        // most violated inactive constraint; smallest index on ties
        std::size_t p = cons.size();
        double worst = -tol;
        for (std::size_t j = 0; j < cons.size(); ++j) {
            if (std::find(active.begin(), active.end(), j) != active.end()) continue;
            const double s = cons[j].normal.dot(x) - cons[j].bound;
            if (s < worst) {
                worst = s;
                p = j;
            }
        }
        if (p == cons.size()) break;

        double u_p = 0.0;
        for (;;) {
            if (++iterations > cap)
                throw SolverError("projection: active-set iteration cap reached (" +
                                  std::to_string(cap) + ")");
            const Vector& np = cons[p].normal;
            const Vector hn = h * np;
            Vector z = hn;
            Vector r;
            if (!active.empty()) {
                Matrix n(np.size(), static_cast<Eigen::Index>(active.size()));
                for (std::size_t a = 0; a < active.size(); ++a)
                    n.col(static_cast<Eigen::Index>(a)) = cons[active[a]].normal;
                const Matrix hn_mat = h * n;
                const Matrix s = n.transpose() * hn_mat;
                r = s.ldlt().solve(hn_mat.transpose() * np);
                z -= hn_mat * r;
            }

            double t1 = kInf;
            std::size_t drop = active.size();
            for (std::size_t a = 0; a < active.size(); ++a) {
                const double ra = r(static_cast<Eigen::Index>(a));
                if (ra <= 1e-14) continue;
                const double ratio = mult[a] / ra;
                if (ratio < t1) {
                    t1 = ratio;
                    drop = a;
                }
            }
            const double zn = z.dot(np);
            const double s_p = np.dot(x) - cons[p].bound;
            const double t2 = zn > 1e-12 * np.dot(hn) ? -s_p / zn : kInf;

            if (!std::isfinite(t1) && !std::isfinite(t2))
                throw PreconditionError("constraint set is empty (projection found no feasible point)");

            const double t = std::min(t1, t2);
            if (std::isfinite(t2)) x += t * z;
            for (std::size_t a = 0; a < active.size(); ++a)
                mult[a] -= t * r(static_cast<Eigen::Index>(a));
            u_p += t;

            if (t2 <= t1) {
                active.push_back(p);
                mult.push_back(u_p);
                break;
            }
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
            mult.erase(mult.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }

    out.point = x;
    out.iterations = iterations;
    for (std::size_t a = 0; a < active.size(); ++a) {
        const auto& c = cons[active[a]];
        const double u = std::max(0.0, mult[a]);
        const double mag = u / std::abs(c.scale);
        // a member with negative scale flips which of its own sides is hit
        const bool member_upper = (c.side == Side::Upper) == (c.scale > 0.0);
        if (member_upper) {
            out.lambda_upper(c.member) += mag;
            out.active.emplace_back(c.member, Side::Upper);
        } else {
            out.lambda_lower(c.member) += mag;
            out.active.emplace_back(c.member, Side::Lower);
        }
    }
    std::sort(out.active.begin(), out.active.end());
    return out;
}

ProjectionResult project(const Vector& v0, const StaticPolytope& p) {
    return Projector(p.rows, p.metric).project(v0, p.lower, p.upper);
}

double kkt_violation(const StaticPolytope& p, const Vector& v0, const ProjectionResult& r) {
    const Vector& v = r.point;
    Vector stat = p.metric * (v0 - v);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        stat -= (r.lambda_upper(i) - r.lambda_lower(i)) * p.rows.row(i).transpose();
    double worst = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    worst = std::max(worst, p.violation(v));
    const Vector rv = p.rows * v;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double lu = r.lambda_upper(i), ll = r.lambda_lower(i);
        worst = std::max({worst, -lu, -ll});
        if (lu != 0.0)
            worst = std::max(worst, std::isfinite(p.upper(i)) ? lu * std::abs(p.upper(i) - rv(i)) : kInf);
        if (ll != 0.0)
            worst = std::max(worst, std::isfinite(p.lower(i)) ? ll * std::abs(rv(i) - p.lower(i)) : kInf);
    }
    return worst;
}

namespace {

// Finite one-sided constraints as G x <= b, skipping (skip_row, skip_side).
void inequality_form(const StaticPolytope& p, Matrix& g, Vector& b, Eigen::Index skip_row = -1,
                     Side skip_side = Side::Upper) {
    std::vector<std::pair<Vector, double>> rows;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const Vector r = p.rows.row(i).transpose();
        if (std::isfinite(p.upper(i)) && !(i == skip_row && skip_side == Side::Upper))
            rows.emplace_back(r, p.upper(i));
        if (std::isfinite(p.lower(i)) && !(i == skip_row && skip_side == Side::Lower))
            rows.emplace_back(-r, -p.lower(i));
    }
    g.resize(static_cast<Eigen::Index>(rows.size()), p.dim());
    b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        g.row(static_cast<Eigen::Index>(j)) = rows[j].first.transpose();
        b(static_cast<Eigen::Index>(j)) = rows[j].second;
    }
}

}  // namespace

FeasibilityResult feasible(const StaticPolytope& p) {
    FeasibilityResult out;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p.lower(i) > p.upper(i)) return out;
    Matrix g;
    Vector b;
    inequality_form(p, g, b);
    const auto res = lp::minimize(Vector::Zero(p.dim()), g, b);
    if (res.status != lp::Status::Optimal) return out;
    out.feasible = true;
    out.witness = res.x;
    return out;
}

bool is_facet(const StaticPolytope& p, Eigen::Index i, Side side, double margin) {
    const double bound = side == Side::Upper ? p.upper(i) : p.lower(i);
    if (!std::isfinite(bound)) return false;
    if (!feasible(p).feasible) throw PreconditionError("is_facet: constraint set is empty");
    Matrix g;
    Vector b;
    inequality_form(p, g, b, i, side);
    const Vector r = p.rows.row(i).transpose();
    const Vector c = side == Side::Upper ? Vector(-r) : r;
    const auto res = lp::minimize(c, g, b);
    if (res.status == lp::Status::Unbounded) return true;
    if (res.status == lp::Status::Infeasible)
        throw SolverError("is_facet: relaxed constraint set reported empty");
    if (side == Side::Upper) return -res.objective > bound + margin;
    return res.objective < bound - margin;
}

}  // namespace epsweep::qp
