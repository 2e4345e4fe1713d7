#include "epsweep/errors.hpp"
#include "epsweep/model.hpp"
#include "epsweep/network_io.hpp"
#include "epsweep/signal.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace epsweep;

TEST_SUITE("model") {

TEST_CASE("signal evaluation wraps around the period") {
    const std::vector<double> ts{0.0, 54.0};
    const std::vector<double> vs{0.0, 54.0};
    const auto l = PiecewiseLinearSignal::scalar(108.0, ts, vs);
    CHECK(l.evaluate(0.0)(0) == doctest::Approx(0.0));
    CHECK(l.evaluate(27.0)(0) == doctest::Approx(27.0));
    CHECK(l.evaluate(54.0)(0) == doctest::Approx(54.0));
    CHECK(l.evaluate(81.0)(0) == doctest::Approx(27.0));
    CHECK(l.evaluate(108.0)(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(l.evaluate(108.0 + 27.0)(0) == doctest::Approx(27.0));
    CHECK(l.evaluate(-27.0)(0) == doctest::Approx(27.0));
    CHECK(l.lipschitz_constant() == doctest::Approx(1.0));
    CHECK_FALSE(l.is_constant());
}

TEST_CASE("signal invariants are enforced") {
    using BP = PiecewiseLinearSignal::Breakpoint;
    CHECK_THROWS_AS(PiecewiseLinearSignal(0.0, {BP{0.0, Vector::Zero(1)}}), InputError);
    CHECK_THROWS_AS(PiecewiseLinearSignal(1.0, {BP{0.5, Vector::Zero(1)}, BP{0.2, Vector::Zero(1)}}),
                    InputError);
    CHECK_THROWS_AS(PiecewiseLinearSignal(1.0, {BP{0.0, Vector::Zero(1)}, BP{0.5, Vector::Zero(2)}}),
                    InputError);
    CHECK_THROWS_AS(PiecewiseLinearSignal(1.0, {BP{1.0, Vector::Zero(1)}}), InputError);
}

TEST_CASE("stacking and adding signals is exact on the union grid") {
    const std::vector<double> t1{0.0, 1.0}, v1{0.0, 2.0};
    const std::vector<double> t2{0.0, 3.0}, v2{1.0, -1.0};
    const auto a = PiecewiseLinearSignal::scalar(4.0, t1, v1);
    const auto b = PiecewiseLinearSignal::scalar(4.0, t2, v2);
    const PiecewiseLinearSignal* parts[] = {&a, &b};
    const auto s = stack(parts);
    const auto sum = add(a, b);
    for (double t = -3.0; t < 9.0; t += 0.37) {
        CHECK(s.evaluate(t)(0) == doctest::Approx(a.evaluate(t)(0)));
        CHECK(s.evaluate(t)(1) == doctest::Approx(b.evaluate(t)(0)));
        CHECK(sum.evaluate(t)(0) == doctest::Approx(a.evaluate(t)(0) + b.evaluate(t)(0)));
    }
    const auto c = PiecewiseLinearSignal::scalar(5.0, t1, v1);
    const PiecewiseLinearSignal* bad[] = {&a, &c};
    CHECK_THROWS_AS(common_period(bad), InputError);
}

TEST_CASE("incidence matrix of the five-spring network") {
    const auto net = fixtures::five_spring();
    const Matrix d = build_incidence(net);
    Matrix expected(5, 5);
    expected << -1, 1, 0, 0, 0,
                0, -1, 1, 0, 0,
                0, 0, -1, 1, 0,
                0, 0, 0, -1, 1,
                0, -1, 0, 1, 0;
    CHECK(d == expected);
    CHECK((d * Vector::Ones(5)).norm() == 0.0);
    Vector r(5);
    r << 1, 1, 1, 1, 0;
    CHECK(net.loading_matrix().col(0) == r);
}

TEST_CASE("validation accepts the worked example") {
    const auto rep = validate(fixtures::five_spring());
    CHECK(rep.ok());
    CHECK(rep.summary() == "balance: n/a (H given); rank: 1 = q");
    CHECK(rep.rank_loading == 1);
    CHECK(rep.connected);
}

TEST_CASE("validation reports violations by category") {
    SUBCASE("disconnected graph") {
        auto net = fixtures::five_spring();
        net.nodes = 6;
        net.offset = {};
        const auto rep = validate(net);
        CHECK_FALSE(rep.ok());
        CHECK(rep.has(ValidationReport::Category::Precondition));
    }
    SUBCASE("non-positive stiffness") {
        auto net = fixtures::five_spring();
        net.springs[2].stiffness = 0.0;
        const auto rep = validate(net);
        CHECK(rep.has(ValidationReport::Category::Input));
    }
    SUBCASE("inverted elastic limits") {
        auto net = fixtures::five_spring();
        net.springs[0].c_minus = 2.0;
        CHECK(validate(net).has(ValidationReport::Category::Input));
    }
    SUBCASE("chain that is not a path") {
        auto net = fixtures::five_spring();
        net.displacement_loadings[0] =
            DisplacementLoading::from_chain({1, 3}, 5, net.displacement_loadings[0].signal);
        CHECK_FALSE(validate(net).ok());
    }
    SUBCASE("dependent loadings break the rank condition") {
        auto net = fixtures::five_spring();
        net.offset = {};
        net.displacement_loadings.push_back(net.displacement_loadings[0]);
        const auto rep = validate(net);
        CHECK(rep.rank_loading == 1);
        CHECK(rep.q == 2);
        CHECK(rep.has(ValidationReport::Category::Precondition));
    }
    SUBCASE("wrong control dimension") {
        auto net = fixtures::five_spring();
        net.offset.signal = PiecewiseLinearSignal::constant(Vector::Zero(2), 108.0);
        CHECK(validate(net).has(ValidationReport::Category::Input));
    }
    SUBCASE("unbalanced nodal forces") {
        auto net = fixtures::five_spring();
        Vector f(5);
        f << 1, 0, 0, 0, 0;
        net.offset = {OffsetInput::Kind::NodalForces, PiecewiseLinearSignal::constant(f, 108.0)};
        const auto rep = validate(net);
        CHECK(rep.balance == ValidationReport::Balance::Violated);
        CHECK(rep.has(ValidationReport::Category::Precondition));
    }
}

TEST_CASE("chains compile to signed incidence vectors") {
    const auto sig = PiecewiseLinearSignal::constant(Vector::Zero(1));
    const auto l = DisplacementLoading::from_chain({1, -5, 4}, 5, sig);
    Vector expected(5);
    expected << 1, 0, 0, 1, -1;
    CHECK(l.incidence == expected);
    CHECK_THROWS_AS(DisplacementLoading::from_chain({1, 1}, 5, sig), InputError);
    CHECK_THROWS_AS(DisplacementLoading::from_chain({7}, 5, sig), InputError);
}

TEST_CASE("network documents round-trip") {
    const auto net = fixtures::five_spring();
    const auto again = parse_network(network_to_json(net));
    CHECK(network_to_json(again) == network_to_json(net));
    CHECK(build_incidence(again) == build_incidence(net));
}

TEST_CASE("malformed documents name the offending field") {
    Json doc = network_to_json(fixtures::five_spring());
    doc["springs"][1]["a"] = "abc";
    try {
        parse_network(doc);
        FAIL("expected an InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("springs[1].a") != std::string::npos);
    }
    doc = network_to_json(fixtures::five_spring());
    doc["springs"][0]["c_plus"] = "3/4";
    CHECK(parse_network(doc).springs[0].c_plus == doctest::Approx(0.75));
}

}  // TEST_SUITE
