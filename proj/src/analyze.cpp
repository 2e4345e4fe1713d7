#include "epsweep/analyze.hpp"

#include "epsweep/errors.hpp"
#include "epsweep/lp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace epsweep {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

PeriodicOrbit find_periodic_orbit(const PeriodMap& map, const Vector& v0, int max_periods,
                                  double tol) {
    PeriodicOrbit orbit;
    Vector v = v0;
    for (int k = 1; k <= max_periods; ++k) {
        const auto out = map.advance(v);
        const double inc = metric_norm(out.end - v, map.metric());
        orbit.increments.push_back(inc);
        orbit.path_length = out.path_length;
        orbit.periods = k;
        v = out.end;
        if (inc < tol) {
            orbit.converged = true;
            break;
        }
    }
    orbit.representative = v;
    return orbit;
}

PeriodicOrbit find_periodic_orbit(const MovingPolytope& p, const Vector& v0, double period,
                                  double dt, int max_periods, double tol, double t0) {
    const PeriodMap map(p, t0, period, dt);
    return find_periodic_orbit(map, v0, max_periods, tol);
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Singleton: return "singleton";
        case Classification::Family: return "family";
        case Classification::Undecided: break;
    }
    return "undecided";
}

AttractorReport attractor_census(const MovingPolytope& p, std::span<const Vector> starts,
                                 double period, const CensusOptions& options) {
    AttractorReport report;
    report.convergence_tol = options.convergence_tol;
    report.distinctness_tol = options.distinctness_tol;
    report.runs.resize(starts.size());

    const PeriodMap map(p, options.t0, period, options.dt);
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        AttractorRun run;
        run.v0 = initial_point(p, options.t0, starts[i]);
        const auto orbit =
            find_periodic_orbit(map, run.v0, options.max_periods, options.convergence_tol);
        run.representative = orbit.representative;
        run.periods = orbit.periods;
        run.converged = orbit.converged;
        run.path_length = orbit.path_length;
        report.runs[i] = std::move(run);
    });

    bool all_converged = !report.runs.empty();
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        all_converged = all_converged && report.runs[i].converged;
        for (std::size_t j = i + 1; j < report.runs.size(); ++j) {
            const Vector diff = report.runs[i].representative - report.runs[j].representative;
            report.orbit_spread = std::max(report.orbit_spread, metric_norm(diff, p.metric));
        }
    }
    if (!all_converged) report.classification = Classification::Undecided;
    else if (report.orbit_spread > options.distinctness_tol) report.classification = Classification::Family;
    else report.classification = Classification::Singleton;
    return report;
}

std::vector<Vector> census_grid(const MovingPolytope& p, double t0, int points) {
    const qp::StaticPolytope at = p.at(t0);
    const Eigen::Index d = at.dim();
    const auto feas = qp::feasible(at);
    if (!feas.feasible) throw PreconditionError("census grid: the moving set is empty at t0");

    // bounding box by linear programs over each coordinate
    Matrix g;
    Vector b;
    {
        std::vector<std::pair<Vector, double>> rows;
        for (Eigen::Index i = 0; i < at.size(); ++i) {
            const Vector r = at.rows.row(i).transpose();
            if (std::isfinite(at.upper(i))) rows.emplace_back(r, at.upper(i));
            if (std::isfinite(at.lower(i))) rows.emplace_back(-r, -at.lower(i));
        }
        g.resize(static_cast<Eigen::Index>(rows.size()), d);
        b.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            g.row(static_cast<Eigen::Index>(j)) = rows[j].first.transpose();
            b(static_cast<Eigen::Index>(j)) = rows[j].second;
        }
    }
    Vector lo(d), hi(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Vector c = Vector::Zero(d);
        c(j) = 1.0;
        const auto mn = lp::minimize(c, g, b);
        const auto mx = lp::minimize(-c, g, b);
        lo(j) = mn.status == lp::Status::Optimal ? mn.x(j) : feas.witness(j) - 1.0;
        hi(j) = mx.status == lp::Status::Optimal ? mx.x(j) : feas.witness(j) + 1.0;
    }

    const int per_axis = std::max(
        2, static_cast<int>(std::lround(std::pow(static_cast<double>(points), 1.0 / static_cast<double>(d)))));
    std::vector<Vector> out;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    const qp::Projector proj(at.rows, at.metric);
    for (;;) {
        Vector v(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double frac = (idx[static_cast<std::size_t>(j)] + 0.5) / per_axis;
            v(j) = lo(j) + frac * (hi(j) - lo(j));
        }
        out.push_back(proj.project(v, at).point);
        Eigen::Index j = 0;
        while (j < d && ++idx[static_cast<std::size_t>(j)] == per_axis) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == d) break;
    }
    return out;
}

ShakedownReport shakedown_check(const DerivedSystem& d, const PiecewiseLinearSignal& l) {
    ShakedownReport rep;
    const Vector delta = d.c_minus - d.c_plus;
    rep.lhs_sq = delta.dot(delta.cwiseQuotient(d.stiffness));

    const auto& pts = l.breakpoints();
    if (d.q == 1) {
        const Vector drift = d.drift().col(0);
        rep.drift_norm_sq = weighted_dot(drift, d.stiffness, drift);
        rep.threshold_sq = *rep.drift_norm_sq > 0.0
                               ? rep.lhs_sq / *rep.drift_norm_sq
                               : std::numeric_limits<double>::infinity();
        double best = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double diff = pts[i].value(0) - pts[j].value(0);
                if (diff * diff > best) {
                    best = diff * diff;
                    rep.witness = {pts[i].t, pts[j].t};
                }
            }
        }
        rep.max_amplitude_sq = best;
        rep.max_drift_sq = best * *rep.drift_norm_sq;
        rep.holds = best > *rep.threshold_sq;
        return rep;
    }

    const Matrix drift = d.drift();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const Vector diff = drift * (pts[i].value - pts[j].value);
            const double sq = weighted_dot(diff, d.stiffness, diff);
            if (sq > rep.max_drift_sq) {
                rep.max_drift_sq = sq;
                rep.witness = {pts[i].t, pts[j].t};
            }
        }
    }
    rep.holds = rep.max_drift_sq > rep.lhs_sq;
    return rep;
}

namespace {

double angle_between(const Vector& u, const Vector& w) {
    return 2.0 * std::atan2((u - w).norm(), (u + w).norm());
}

}  // namespace

std::vector<SweepingPair> detect_sweeping_pair(const qp::StaticPolytope& p, const Vector& drift,
                                               double angle_tol) {
    std::vector<SweepingPair> out;
    if (drift.norm() == 0.0) return out;
    const Vector dir = drift.normalized();
    const Eigen::LLT<Matrix> llt(p.metric);

    struct Face {
        FaceRef ref;
        Vector outward;
    };
    std::vector<Face> aligned;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const Vector r = p.rows.row(i).transpose();
        if (r.norm() == 0.0) continue;
        for (auto side : {qp::Side::Lower, qp::Side::Upper}) {
            if (!qp::is_facet(p, i, side)) continue;
            const Vector outward = (side == qp::Side::Upper ? r : Vector(-r)).normalized();
            const Vector mapped = llt.solve(outward).normalized();
            if (std::min(angle_between(mapped, dir), angle_between(mapped, -dir)) < angle_tol)
                aligned.push_back({{i, side}, outward});
        }
    }
    for (std::size_t a = 0; a < aligned.size(); ++a)
        for (std::size_t b = a + 1; b < aligned.size(); ++b)
            if (angle_between(aligned[a].outward, -aligned[b].outward) < angle_tol)
                out.push_back({aligned[a].ref, aligned[b].ref});
    return out;
}

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

SpringNetwork perturb(const SpringNetwork& base, double epsilon, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto jitter = [&](double x) { return x * (1.0 + epsilon * unit(rng)); };

    SpringNetwork net = base;
    for (auto& s : net.springs) {
        s.stiffness = jitter(s.stiffness);
        s.c_minus = jitter(s.c_minus);
        s.c_plus = jitter(s.c_plus);
    }
    if (net.offset.kind != OffsetInput::Kind::None) {
        auto pts = net.offset.signal.breakpoints();
        for (auto& p : pts) {
            for (Eigen::Index j = 0; j < p.value.size(); ++j) p.value(j) = jitter(p.value(j));
            // nodal forces must stay balanced
            if (net.offset.kind == OffsetInput::Kind::NodalForces)
                p.value.array() -= p.value.mean();
        }
        net.offset.signal = PiecewiseLinearSignal(net.offset.signal.period(), std::move(pts));
    }
    return net;
}

SweepReport stability_sweep(const SpringNetwork& base, const SweepOptions& options) {
    if (!(options.epsilon >= 0.0)) throw InputError("sweep: epsilon must be >= 0");
    if (options.trials < 1) throw InputError("sweep: trials must be >= 1");

    SweepReport report;
    report.epsilon = options.epsilon;
    report.seed = options.seed;
    report.trials.resize(static_cast<std::size_t>(options.trials));

    CensusOptions census = options.census;
    census.threads = 1;  // parallelism is spent on trials
    parallel_for(report.trials.size(), options.census.threads, [&](std::size_t k) {
        SweepTrial trial;
        trial.index = static_cast<int>(k);
        auto rng = trial_rng(options.seed, trial.index);
        trial.network = perturb(base, options.epsilon, rng);
        try {
            const auto& net = trial.network;
            if (net.q() != 1) throw InputError("sweep supports exactly one displacement loading");
            const DerivedSystem d = derive(net);
            const MovingPolytope poly = assemble_polytope(net, d);
            const auto pairs = detect_sweeping_pair(poly.at(census.t0), d.L_bar.col(0));
            trial.facet_pair_found = !pairs.empty();
            trial.shakedown_ok = shakedown_check(d, net.loading_signal()).holds;
            const auto starts = census_grid(poly, census.t0, options.grid_points);
            const auto rep = attractor_census(poly, starts, poly.period(), census);
            trial.classification = rep.classification;
            trial.orbit_spread = rep.orbit_spread;
        } catch (const std::exception& e) {
            trial.error = e.what();
        }
        report.trials[k] = std::move(trial);
    });

    const auto persistent = std::count_if(report.trials.begin(), report.trials.end(),
                                          [](const SweepTrial& t) { return t.persistent(); });
    report.persistence_fraction =
        static_cast<double>(persistent) / static_cast<double>(report.trials.size());
    return report;
}

}  // namespace epsweep
