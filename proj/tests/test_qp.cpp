#include "epsweep/errors.hpp"
#include "epsweep/lp.hpp"
#include "epsweep/qp.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace epsweep;
using qp::kInf;

namespace {

struct Instance {
    qp::StaticPolytope poly;
    Vector v0;
};

// Random polytope around a random interior point, with some one-sided and
// some duplicated (parallel) rows.
Instance random_instance(std::mt19937_64& rng, int d, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance in;
    auto& p = in.poly;
    p.rows = Matrix(k, d);
    p.lower = Vector(k);
    p.upper = Vector(k);
    const Vector center = fixtures::random_vector(d, rng);
    for (int i = 0; i < k; ++i) {
        Vector r = fixtures::random_vector(d, rng);
        if (i > 0 && u(rng) < 0.2) r = (u(rng) < 0.5 ? -2.0 : 0.5) * p.rows.row(i - 1).transpose();
        p.rows.row(i) = r.transpose();
        const double c = r.dot(center);
        p.lower(i) = u(rng) < 0.25 ? -kInf : c - 0.1 - u(rng);
        p.upper(i) = u(rng) < 0.25 ? kInf : c + 0.1 + u(rng);
    }
    p.metric = fixtures::random_spd(d, rng);
    in.v0 = center + fixtures::random_vector(d, rng, 3.0);
    return in;
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("projection matches brute-force enumeration") {
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 3;
        const int k = 1 + (trial / 3) % 6;
        const auto in = random_instance(rng, d, k);
        CAPTURE(trial);
        const auto expected = oracle::brute_force_projection(in.poly.rows, in.poly.lower,
                                                              in.poly.upper, in.poly.metric, in.v0);
        REQUIRE(expected.has_value());
        const auto r = qp::project(in.v0, in.poly);
        CHECK(metric_norm(r.point - *expected, in.poly.metric) < 1e-9);
        CHECK(qp::kkt_violation(in.poly, in.v0, r) < 1e-9);
        ++checked;
    }
    CHECK(checked == 300);
}

TEST_CASE("interior points are fixed and projection is idempotent") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = random_instance(rng, 3, 5);
        const auto r = qp::project(in.v0, in.poly);
        const auto again = qp::project(r.point, in.poly);
        CHECK((again.point - r.point).norm() < 1e-10);
    }
}

TEST_CASE("projection is non-expansive in the metric") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_instance(rng, 3, 6);
        const Vector w0 = in.v0 + fixtures::random_vector(3, rng, 2.0);
        const auto a = qp::project(in.v0, in.poly);
        const auto b = qp::project(w0, in.poly);
        CHECK(metric_norm(a.point - b.point, in.poly.metric) <=
              metric_norm(in.v0 - w0, in.poly.metric) + 1e-10);
    }
}

TEST_CASE("empty sets are reported as precondition failures") {
    qp::StaticPolytope p;
    p.rows = Matrix(2, 1);
    p.rows << 1, 2;
    p.lower = Vector(2);
    p.upper = Vector(2);
    p.lower << 0, 3;
    p.upper << 1, 4;  // x in [0,1] and x in [1.5, 2]
    p.metric = Matrix::Identity(1, 1);
    CHECK_THROWS_AS(qp::project(Vector::Zero(1), p), PreconditionError);
    CHECK_FALSE(qp::feasible(p).feasible);

    qp::StaticPolytope tri;
    tri.rows = Matrix(3, 2);
    tri.rows << 1, 0,
                0, 1,
                1, 1;
    tri.lower = Vector::Constant(3, -kInf);
    tri.upper = Vector::Constant(3, kInf);
    tri.lower(0) = 0;
    tri.lower(1) = 0;
    tri.upper(2) = -0.5;
    tri.metric = Matrix::Identity(2, 2);
    CHECK_FALSE(qp::feasible(tri).feasible);
    CHECK_THROWS_AS(qp::project(Vector::Zero(2), tri), PreconditionError);
    CHECK_THROWS_AS(qp::is_facet(tri, 0, qp::Side::Lower), PreconditionError);
}

TEST_CASE("feasibility agrees with the brute-force oracle") {
    std::mt19937_64 rng(77);
    int empty = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + trial % 3;
        const int k = 2 + trial % 5;
        qp::StaticPolytope p;
        p.rows = Matrix(k, d);
        p.lower = Vector(k);
        p.upper = Vector(k);
        for (int i = 0; i < k; ++i) {
            p.rows.row(i) = fixtures::random_vector(d, rng).transpose();
            const Vector b = fixtures::random_vector(2, rng);
            p.lower(i) = std::min(b(0), b(1));
            p.upper(i) = std::max(b(0), b(1));
        }
        p.metric = Matrix::Identity(d, d);
        const auto fr = qp::feasible(p);
        const auto expected =
            oracle::brute_force_projection(p.rows, p.lower, p.upper, p.metric, Vector::Zero(d));
        CAPTURE(trial);
        CHECK(fr.feasible == expected.has_value());
        if (fr.feasible) CHECK(p.contains(fr.witness, 1e-8));
        empty += !fr.feasible;
    }
    CHECK(empty > 0);
}

TEST_CASE("facets of a pentagon") {
    qp::StaticPolytope p;
    p.rows = Matrix(5, 2);
    p.rows << 1, 0,
              0, 1,
              1, 1,
              1, -1,
              1, 0;
    p.lower = Vector(5);
    p.upper = Vector(5);
    p.lower << -1, -1, -kInf, -kInf, -5;
    p.upper << kInf, 1, 2, 2, 10;
    p.metric = Matrix::Identity(2, 2);
    CHECK(qp::is_facet(p, 0, qp::Side::Lower));
    CHECK_FALSE(qp::is_facet(p, 0, qp::Side::Upper));
    CHECK(qp::is_facet(p, 1, qp::Side::Lower));
    CHECK(qp::is_facet(p, 1, qp::Side::Upper));
    CHECK(qp::is_facet(p, 2, qp::Side::Upper));
    CHECK(qp::is_facet(p, 3, qp::Side::Upper));
    CHECK_FALSE(qp::is_facet(p, 4, qp::Side::Lower));
    CHECK_FALSE(qp::is_facet(p, 4, qp::Side::Upper));
}

TEST_CASE("linear programs") {
    // min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0
    Matrix g(4, 2);
    g << 1, 2,
         3, 1,
         -1, 0,
         0, -1;
    Vector b(4);
    b << 4, 6, 0, 0;
    Vector c(2);
    c << -1, -1;
    auto r = lp::minimize(c, g, b);
    REQUIRE(r.status == lp::Status::Optimal);
    CHECK(r.x(0) == doctest::Approx(1.6));
    CHECK(r.x(1) == doctest::Approx(1.2));
    CHECK(r.objective == doctest::Approx(-2.8));

    c << 1, 0;
    r = lp::minimize(c, g.topRows(2), b.head(2));
    CHECK(r.status == lp::Status::Unbounded);

    b << 4, 6, -5, 0;  // x >= 5 contradicts x + 2y <= 4 with y >= 0
    r = lp::minimize(c, g, b);
    CHECK(r.status == lp::Status::Infeasible);
}

}  // TEST_SUITE
