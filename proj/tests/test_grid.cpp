#include <doctest.h>

#include "support.hpp"
#include "v2gq/case_io.hpp"
#include "v2gq/errors.hpp"
#include "v2gq/grid.hpp"

using namespace v2gq;

TEST_CASE("bundled 33-bus case has the standard topology") {
    const auto c = load_case(test::case_path("bus33.grid"));
    CHECK(c.network.bus_count() == 33);
    CHECK(c.network.branch_count() == 32);
    CHECK(c.network.bus(c.network.slack_index()).id == 1);
    CHECK(c.network.radial());
}

TEST_CASE("case values are converted to per-unit on the system base") {
    const auto c = load_case(test::case_path("bus33.grid"));
    const auto& net = c.network;
    const double z_base = 12.66 * 12.66 / 10.0;
    CHECK(net.base().impedance_ohm() == doctest::Approx(z_base));
    CHECK(net.bus(net.index_of(2)).p_load == doctest::Approx(100.0 / 10000.0));
    CHECK(net.bus(net.index_of(30)).q_load == doctest::Approx(600.0 / 10000.0));
    CHECK(net.branch(0).resistance == doctest::Approx(0.0922 / z_base));
    CHECK(net.branch(0).reactance == doctest::Approx(0.0470 / z_base));
    CHECK(net.branch(0).current_cap == doctest::Approx(400.0 / net.base().current_amp()));
}

TEST_CASE("minimal two-bus network") {
    const auto net = test::two_bus(0.01, 0.02, 0.1, 0.05);
    CHECK(net.bus_count() == 2);
    CHECK(net.branch_count() == 1);
    CHECK(net.index_of(2) == 1);
    CHECK_FALSE(net.has_bus(3));
}

TEST_CASE("branch to a nonexistent bus names that bus") {
    try {
        Network({{1, BusKind::slack, 0, 0}, {2, BusKind::load, 0.1, 0}}, {{1, 99, 0.1, 0.1, 1.0}});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
}

TEST_CASE("structural invariants are enforced") {
    const Bus slack{1, BusKind::slack, 0, 0};
    const Bus load{2, BusKind::load, 0.1, 0.05};
    const Branch line{1, 2, 0.01, 0.02, 1.0};
    CHECK_THROWS_AS(Network({load, {3, BusKind::load, 0, 0}}, {{2, 3, 0.1, 0.1, 1}}), ValidationError);
    CHECK_THROWS_AS(Network({slack, {2, BusKind::slack, 0, 0}}, {line}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load, {2, BusKind::load, 0, 0}}, {line}), ValidationError);
    CHECK_THROWS_AS(Network({slack, {2, BusKind::load, 0, 0, 1.05, 0.95}}, {line}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load}, {{1, 2, 0.01, 0.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load}, {{1, 2, -0.01, 0.02, 1.0}}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load}, {{1, 2, 0.01, 0.02, 0.0}}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load}, {{1, 1, 0.01, 0.02, 1.0}}), ValidationError);
    CHECK_THROWS_AS(Network({slack, load, {3, BusKind::load, 0, 0}}, {line}, {}, false), ValidationError);
    CHECK_THROWS_AS(Network({slack, load}, {line, line}), ValidationError);
    CHECK_NOTHROW(Network({slack, load}, {line, line}, {}, false));
}

TEST_CASE("admittance of a lossless line") {
    const auto y = build_ybus(test::two_bus(0.0, 0.1, 0, 0));
    CHECK(y(0, 1).real() == doctest::Approx(0.0));
    CHECK(y(0, 1).imag() == doctest::Approx(10.0));
    CHECK(y(0, 0).imag() == doctest::Approx(-10.0));
    CHECK(y(1, 1) == y(0, 0));
}

TEST_CASE("admittance of a resistive-reactive line") {
    const auto y = build_ybus(test::two_bus(0.05, 0.1, 0, 0));
    CHECK(y(0, 1).real() == doctest::Approx(-4.0));
    CHECK(y(0, 1).imag() == doctest::Approx(8.0));
    CHECK(y.magnitude(0, 1) == doctest::Approx(std::sqrt(80.0)));
}

TEST_CASE("33-bus admittance matrix is symmetric with zero row sums") {
    const auto c = load_case(test::case_path("bus33.grid"));
    const auto y = build_ybus(c.network);
    REQUIRE(y.size() == 33);
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < 33; ++i) {
        Complex sum{};
        for (std::size_t j = 0; j < 33; ++j) {
            CHECK(std::abs(y(i, j) - y(j, i)) < 1e-12);
            sum += y(i, j);
        }
        CHECK(std::abs(sum) < 1e-9);
        nonzero += y.row(i).size();
    }
    CHECK(nonzero == 33 + 2 * 32);
}

TEST_CASE("scaled loads keep topology") {
    const auto net = test::chain3(0.1, 0.05, 0.2, 0.1);
    const auto half = net.scaled_loads(0.5);
    CHECK(half.bus(2).p_load == doctest::Approx(0.1));
    CHECK(half.branch_count() == net.branch_count());
    CHECK_FALSE(half == net);
    CHECK(net.scaled_loads(1.0) == net);
}
