#include <doctest.h>

#include <cmath>
#include <sstream>

#include "v2gq/devices.hpp"
#include "v2gq/errors.hpp"

using namespace v2gq;

TEST_CASE("capability range from the rating and dc-link circles") {
    const Converter conv{1.0, 0.05, 1.1, true};
    const auto r = q_capability(conv, 0.5, 1.0);
    REQUIRE(r);
    CHECK(r->q_max == doctest::Approx(std::sqrt(0.75)));
    CHECK(r->q_min == doctest::Approx(-std::sqrt(0.75)));
    const double dc_bound = std::sqrt(22.0 * 22.0 - 0.25) - 20.0;
    CHECK(dc_bound == doctest::Approx(1.994).epsilon(1e-3));
    CHECK(r->q_max < dc_bound);
}

TEST_CASE("full active output leaves no reactive room") {
    const auto r = q_capability({0.4, 0.05, 1.1, true}, 0.4, 1.0);
    REQUIRE(r);
    CHECK(r->q_min == doctest::Approx(0.0));
    CHECK(r->q_max == doctest::Approx(0.0));
}

TEST_CASE("with no active power and a loose dc link the range is +-S") {
    const auto r = q_capability({0.3, 0.05, 100.0, true}, 0.0, 1.0);
    REQUIRE(r);
    CHECK(r->q_max == doctest::Approx(0.3));
    CHECK(r->q_min == doctest::Approx(-0.3));
    const auto no_link = q_capability({0.3, 0.05, 1.0, false}, 0.0, 1.0);
    CHECK(no_link->q_max == doctest::Approx(0.3));
}

TEST_CASE("dc link binds when the converter voltage headroom is small") {
    const Converter conv{1.0, 1.0, 1.02, true};
    const auto r = q_capability(conv, 0.1, 1.0);
    REQUIRE(r);
    // (Q + 1)^2 <= 1.02^2 - 0.01
    CHECK(r->q_max == doctest::Approx(std::sqrt(1.0404 - 0.01) - 1.0));
    CHECK(capability_violation(conv, 0.1, r->q_max, 1.0) < 1e-12);
    CHECK(capability_violation(conv, 0.1, r->q_max + 1e-3, 1.0) > 0.0);
}

TEST_CASE("empty capability set is reported as such") {
    CHECK_FALSE(q_capability({0.05, 0.05, 0.5, true}, 0.01, 1.0).has_value());
    CHECK_FALSE(q_capability({1.0, 0.05, 0.01, true}, 0.5, 1.0).has_value());
}

TEST_CASE("capability arguments are checked") {
    const Converter conv{0.5, 0.05, 1.1, true};
    CHECK_THROWS_AS(q_capability(conv, 0.6, 1.0), ArgumentError);
    CHECK_THROWS_AS(q_capability(conv, -0.1, 1.0), ArgumentError);
    CHECK_THROWS_AS(q_capability(conv, 0.1, 0.0), ArgumentError);
    CHECK_THROWS_AS(Converter({0.0, 0.05, 1.1, true}).validate(), ValidationError);
}

TEST_CASE("load composition") {
    CHECK(compose_load({0.1, 0.06}, {}).p == doctest::Approx(0.1));
    const DeviceOutput lot{DeviceKind::pev_lot, 0.2, 0.0};
    const auto with_lot = compose_load({0.1, 0.06}, std::span(&lot, 1));
    CHECK(with_lot.p == doctest::Approx(0.3));
    CHECK(with_lot.q == doctest::Approx(0.06));
    const DeviceOutput pv{DeviceKind::pv, 0.15, -0.02};
    const auto with_pv = compose_load({0.1, 0.0}, std::span(&pv, 1));
    CHECK(with_pv.p == doctest::Approx(-0.05));
    CHECK(with_pv.q == doctest::Approx(-0.02));
}

TEST_CASE("synthetic profiles") {
    const auto flat = synth_profile(ProfileShape::flat, 5, 0.1);
    for (double v : flat.values) CHECK(v == 0.1);
    const auto pv = synth_profile(ProfileShape::pv_bell, 3);
    CHECK(pv[0] == 0.0);
    CHECK(pv[23] == 0.0);
    CHECK(pv.peak() <= 1.0);
    CHECK(pv.peak() > 0.5);
    CHECK(synth_profile(ProfileShape::pev_evening_peak, 9) == synth_profile(ProfileShape::pev_evening_peak, 9));
    CHECK_FALSE(synth_profile(ProfileShape::pev_evening_peak, 9) == synth_profile(ProfileShape::pev_evening_peak, 10));
    const auto pev = synth_profile(ProfileShape::pev_evening_peak, 9, 0.8);
    const auto busiest = std::max_element(pev.values.begin(), pev.values.end()) - pev.values.begin();
    CHECK(busiest >= 17);
    CHECK(busiest <= 21);
    const auto load = synth_profile(ProfileShape::load_double_peak, 1, 0.7);
    CHECK(load.peak() <= 0.7);
    CHECK(load[20] > load[4]);
    CHECK(parse_shape("pv-bell") == ProfileShape::pv_bell);
    CHECK(std::string(to_string(ProfileShape::load_double_peak)) == "load-double-peak");
    CHECK_THROWS_AS(parse_shape("sawtooth"), ArgumentError);
    CHECK_THROWS_AS(synth_profile(ProfileShape::flat, 0, -1.0), ArgumentError);
}

TEST_CASE("profile file round trip and errors") {
    ProfileSet set;
    set.emplace("a", synth_profile(ProfileShape::pv_bell, 4, 0.9, "a"));
    set.emplace("b", synth_profile(ProfileShape::flat, 0, 0.25, "b"));
    std::ostringstream os;
    write_profiles(os, set);
    std::istringstream is("# comment\n" + os.str() + "\n");
    CHECK(parse_profiles(is) == set);

    std::string header = "profile_id";
    for (int h = 0; h < kHours; ++h) header += ",h" + std::to_string(h);
    std::string row = "x";
    for (int h = 0; h < kHours; ++h) row += ",0.5";

    std::istringstream missing_header(row + "\n");
    CHECK_THROWS_AS(parse_profiles(missing_header), ParseError);
    std::istringstream short_row(header + "\nx,1,2\n");
    CHECK_THROWS_AS(parse_profiles(short_row), ParseError);
    std::istringstream bad_number(header + "\n" + row.substr(0, row.size() - 3) + "abc\n");
    CHECK_THROWS_AS(parse_profiles(bad_number), ParseError);
    std::istringstream negative(header + "\n" + row.substr(0, row.size() - 3) + "-0.5\n");
    CHECK_THROWS_AS(parse_profiles(negative), Error);
    std::istringstream dup(header + "\n" + row + "\n" + row + "\n");
    CHECK_THROWS_AS(parse_profiles(dup), ParseError);
    CHECK_THROWS_AS(read_profiles("/nonexistent/profiles.csv"), IoError);
}

TEST_CASE("device validation") {
    PevLot lot;
    lot.bus = 5;
    lot.converter = {0.04, 0.05, 1.1, true};
    lot.charge_profile.fill(0.03);
    CHECK_NOTHROW(lot.validate());
    CHECK(lot.cost() == 1.0);
    lot.charge_profile[7] = 0.05;
    CHECK_THROWS_AS(lot.validate(), ValidationError);
    lot.charge_profile[7] = 0.0;
    lot.n_pev = 0;
    CHECK_THROWS_AS(lot.validate(), ValidationError);

    PvUnit pv;
    pv.bus = 3;
    pv.converter = {0.05, 0.05, 1.1, true};
    pv.p_profile.fill(0.01);
    CHECK_NOTHROW(pv.validate());
    pv.p_profile[0] = -0.01;
    CHECK_THROWS_AS(pv.validate(), ValidationError);
}
