#pragma once

#include "epsweep/integrate.hpp"
#include "epsweep/model.hpp"
#include "epsweep/qp.hpp"
#include "epsweep/reduce.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace epsweep {

/// Result of iterating the period map until two consecutive phase-0
/// samples agree.
struct PeriodicOrbit {
    Vector representative;  ///< v((k+1)T) at convergence, last iterate otherwise
    bool converged = false;
    int periods = 0;                 ///< periods integrated
    std::vector<double> increments;  ///< ||v((k+1)T) - v(kT)||_Q per period
    double path_length = 0.0;        ///< Q-length of the last period's path
};

PeriodicOrbit find_periodic_orbit(const PeriodMap& map, const Vector& v0, int max_periods,
                                  double tol);
PeriodicOrbit find_periodic_orbit(const MovingPolytope& p, const Vector& v0, double period,
                                  double dt, int max_periods, double tol, double t0 = 0.0);

enum class Classification { Singleton, Family, Undecided };
const char* to_string(Classification c);

struct CensusOptions {
    double dt = 0.05;
    int max_periods = 50;
    double convergence_tol = 1e-8;
    double distinctness_tol = 1e-3;
    double t0 = 0.0;
    unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct AttractorRun {
    Vector v0;  ///< feasible start actually used
    Vector representative;
    int periods = 0;
    bool converged = false;
    double path_length = 0.0;
};

struct AttractorReport {
    std::vector<AttractorRun> runs;
    Classification classification = Classification::Undecided;
    double orbit_spread = 0.0;  ///< max pairwise Q-distance of representatives
    double convergence_tol = 0.0;
    double distinctness_tol = 0.0;
};

/// Runs find_periodic_orbit from every start (infeasible starts are
/// projected first) and classifies the limit set. Runs are independent and
/// may execute concurrently; results keep the input order.
AttractorReport attractor_census(const MovingPolytope& p, std::span<const Vector> starts,
                                 double period, const CensusOptions& options);

/// About `points` feasible starts: a regular grid over the bounding box of
/// the set at t0, projected onto the set.
std::vector<Vector> census_grid(const MovingPolytope& p, double t0, int points = 16);

/// Test for the absence of constant solutions under the given loading.
struct ShakedownReport {
    double lhs_sq = 0.0;  ///< <c- - c+, A^-1 (c- - c+)>
    std::optional<double> drift_norm_sq;    ///< ||V L_bar||_A^2 (q = 1)
    std::optional<double> threshold_sq;     ///< lhs_sq / drift_norm_sq (q = 1)
    std::optional<double> max_amplitude_sq; ///< max (l(t1) - l(t2))^2 (q = 1)
    double max_drift_sq = 0.0;  ///< max ||g(t1) - g(t2)||_A^2 over breakpoint pairs
    bool holds = false;
    std::pair<double, double> witness{0.0, 0.0};
};
ShakedownReport shakedown_check(const DerivedSystem& d, const PiecewiseLinearSignal& l);

struct FaceRef {
    Eigen::Index index = 0;
    qp::Side side = qp::Side::Upper;
    bool operator==(const FaceRef&) const = default;
};
struct SweepingPair {
    FaceRef first;
    FaceRef second;
};

/// Pairs of facets with anti-parallel outward normals whose Q^-1-mapped
/// normal is parallel to `drift`: the sides that can push a state back and
/// forth along the drift without sliding it.
std::vector<SweepingPair> detect_sweeping_pair(const qp::StaticPolytope& p, const Vector& drift,
                                               double angle_tol = 1e-7);

struct SweepOptions {
    double epsilon = 0.01;
    int trials = 50;
    std::uint64_t seed = 0;
    int grid_points = 16;
    CensusOptions census;
};

struct SweepTrial {
    int index = 0;
    SpringNetwork network;  ///< perturbed parameters
    bool facet_pair_found = false;
    bool shakedown_ok = false;
    Classification classification = Classification::Undecided;
    double orbit_spread = 0.0;
    std::string error;  ///< non-empty when the trial failed to derive or run

    bool persistent() const {
        return error.empty() && facet_pair_found && shakedown_ok &&
               classification == Classification::Family;
    }
};

struct SweepReport {
    std::vector<SweepTrial> trials;
    double persistence_fraction = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

/// x -> x (1 + eps u), u ~ U[-1, 1], independently for every stiffness,
/// elastic limit and offset-signal breakpoint value.
SpringNetwork perturb(const SpringNetwork& base, double epsilon, std::mt19937_64& rng);

/// Per-trial generator derived from the master seed and the trial index.
std::mt19937_64 trial_rng(std::uint64_t seed, int trial);

/// Re-derives the sweeping process for perturbed parameters and checks that
/// the opposite facet pair, the shakedown inequality and the family of
/// periodic orbits all survive.
SweepReport stability_sweep(const SpringNetwork& base, const SweepOptions& options);

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace epsweep
