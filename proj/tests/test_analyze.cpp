#include "epsweep/analyze.hpp"
#include "epsweep/errors.hpp"
#include "epsweep/integrate.hpp"
#include "epsweep/network_io.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <atomic>

using namespace epsweep;

TEST_SUITE("analyze") {

TEST_CASE("periodic orbit of the play operator") {
    qp::StaticPolytope shape;
    shape.rows = Matrix::Identity(1, 1);
    shape.lower = Vector::Constant(1, -1.0);
    shape.upper = Vector::Constant(1, 1.0);
    shape.metric = Matrix::Identity(1, 1);
    using BP = PiecewiseLinearSignal::Breakpoint;
    const PiecewiseLinearSignal c(4.0, {BP{0.0, Vector::Zero(1)}, BP{1.0, Vector::Constant(1, 2.0)},
                                        BP{3.0, Vector::Constant(1, -2.0)}});
    const auto p = translated_polytope(shape, c);
    const auto orbit = find_periodic_orbit(p, Vector::Constant(1, 0.5), 4.0, 0.01, 10, 1e-10);
    CHECK(orbit.converged);
    CHECK(orbit.representative(0) == doctest::Approx(-1.0));
    CHECK(orbit.path_length == doctest::Approx(4.0));
}

TEST_CASE("census on the worked example finds a family of moving orbits") {
    const auto net = fixtures::five_spring();
    const auto d = derive(net);
    const auto p = assemble_polytope(net, d);
    CensusOptions opt;
    opt.dt = 0.5;
    const auto starts = census_grid(p, 0.0, 16);
    CHECK(starts.size() == 16);
    for (const auto& s : starts) CHECK(p.at(0.0).contains(s, 1e-9));
    const auto rep = attractor_census(p, starts, 108.0, opt);
    CHECK(rep.classification == Classification::Family);
    CHECK(rep.orbit_spread > 0.1);
    for (const auto& r : rep.runs) {
        CHECK(r.converged);
        CHECK(r.path_length > 1.0);
    }
}

TEST_CASE("census preserves input order regardless of threads") {
    const auto net = fixtures::five_spring();
    const auto p = assemble_polytope(net, derive(net));
    const auto starts = census_grid(p, 0.0, 9);
    CensusOptions one, many;
    one.dt = many.dt = 1.0;
    one.threads = 1;
    many.threads = 4;
    const auto a = attractor_census(p, starts, 108.0, one);
    const auto b = attractor_census(p, starts, 108.0, many);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].v0 == starts[i]);
        CHECK(a.runs[i].representative == b.runs[i].representative);
    }
}

TEST_CASE("shakedown threshold for the worked example") {
    const auto net = fixtures::five_spring_unit();
    const auto d = derive(net);
    const auto rep = shakedown_check(d, net.loading_signal());
    CHECK(rep.lhs_sq == doctest::Approx(20.0).epsilon(1e-12));
    REQUIRE(rep.drift_norm_sq.has_value());
    CHECK(*rep.drift_norm_sq == doctest::Approx(0.375).epsilon(1e-12));
    REQUIRE(rep.threshold_sq.has_value());
    CHECK(*rep.threshold_sq == doctest::Approx(160.0 / 3.0).epsilon(1e-12));
    CHECK(rep.holds);

    // a small load amplitude admits constant solutions
    auto small = net;
    const std::vector<double> ts{0.0, 54.0}, vs{0.0, 1.0};
    small.displacement_loadings[0].signal = PiecewiseLinearSignal::scalar(108.0, ts, vs);
    CHECK_FALSE(shakedown_check(d, small.loading_signal()).holds);
}

TEST_CASE("sweeping pair of the worked example") {
    const auto net = fixtures::five_spring_unit();
    const auto d = derive(net);
    const auto p = assemble_polytope(net, d).at(0.0);
    const auto pairs = detect_sweeping_pair(p, d.L_bar.col(0));
    REQUIRE(pairs.size() == 1);
    // v1 >= 0 comes from spring 4's lower limit, v1 <= 0.5 from spring 1's upper
    const FaceRef lo{3, qp::Side::Lower}, hi{0, qp::Side::Upper};
    const bool match = (pairs[0].first == lo && pairs[0].second == hi) ||
                       (pairs[0].first == hi && pairs[0].second == lo);
    CHECK(match);
}

TEST_CASE("perturbations are seeded and keep the network valid") {
    const auto net = fixtures::five_spring();
    auto r1 = trial_rng(42, 3), r2 = trial_rng(42, 3), r3 = trial_rng(42, 4);
    const auto a = perturb(net, 0.01, r1);
    const auto b = perturb(net, 0.01, r2);
    const auto c = perturb(net, 0.01, r3);
    CHECK(network_to_json(a) == network_to_json(b));
    CHECK(network_to_json(a) != network_to_json(c));
    CHECK(validate(a).ok());
    for (std::size_t i = 0; i < net.springs.size(); ++i) {
        CHECK(std::abs(a.springs[i].stiffness / net.springs[i].stiffness - 1.0) <= 0.01);
        CHECK(std::abs(a.springs[i].c_plus / net.springs[i].c_plus - 1.0) <= 0.01);
    }
}

TEST_CASE("small sweep is deterministic") {
    const auto net = fixtures::five_spring();
    SweepOptions opt;
    opt.trials = 3;
    opt.seed = 17;
    opt.grid_points = 2;
    opt.census.dt = 1.0;
    const auto a = stability_sweep(net, opt);
    const auto b = stability_sweep(net, opt);
    REQUIRE(a.trials.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.trials[i].error.empty());
        CHECK(a.trials[i].orbit_spread == b.trials[i].orbit_spread);
        CHECK(network_to_json(a.trials[i].network) == network_to_json(b.trials[i].network));
    }
}

TEST_CASE("parallel_for runs every index once and rethrows") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 5) throw SolverError("boom");
                                 }),
                    SolverError);
}

}  // TEST_SUITE
