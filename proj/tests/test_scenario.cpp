#include <doctest.h>

#include <random>

#include "support.hpp"
#include "v2gq/case_io.hpp"
#include "v2gq/errors.hpp"
#include "v2gq/scenario.hpp"

using namespace v2gq;

namespace {

Study bundled_study(SupportMode mode) {
    const auto c = load_case(test::case_path("bus33.grid"));
    Scenario sc;
    sc.mode = mode;
    return Study(c.network, resolve_fleet(c, read_profiles(c.resolved_profiles_path())), sc);
}

// One lot on the far end of a heavily loaded chain, nothing else.
Study single_lot_study(SupportMode mode, double charge) {
    const Network net({{1, BusKind::slack, 0, 0}, {2, BusKind::load, 0.3, 0.2}, {3, BusKind::load, 0.3, 0.2}},
                      {{1, 2, 0.05, 0.08, 10}, {2, 3, 0.05, 0.08, 10}});
    Fleet fleet;
    fleet.load_shape = synth_profile(ProfileShape::flat, 0, 1.0, "constant");
    PevLot lot;
    lot.bus = 3;
    lot.converter = {0.1, 0.5, 1.1, true};
    lot.charge_profile.fill(charge);
    fleet.lots.push_back(lot);
    Scenario sc;
    sc.mode = mode;
    return Study(net, fleet, sc);
}

}  // namespace

TEST_CASE("default weights") {
    const Weights w;
    CHECK(w.voltage == 0.6);
    CHECK(w.loss == 0.1);
    CHECK(w.cost == 0.3);
}

TEST_CASE("weighted objective arithmetic") {
    const auto o = ObjectiveBreakdown::from_parts(0.5, 0.2, 2.0 * 1.0, Weights{});
    CHECK(o.scalar == doctest::Approx(0.92).epsilon(1e-12));
    CHECK(o.recompute({1, 0, 0}) == 0.5);
    CHECK_THROWS_AS(Weights({-0.1, 0.1, 0.1}).validate(), ArgumentError);
}

TEST_CASE("mode tags") {
    CHECK(parse_mode("none") == SupportMode::none);
    CHECK(parse_mode("dgq") == SupportMode::dgq);
    CHECK(parse_mode("dgq-v2gq") == SupportMode::dgq_v2gq);
    CHECK(parse_mode("dgq+v2gq") == SupportMode::dgq_v2gq);
    CHECK(std::string(to_string(SupportMode::dgq_v2gq)) == "dgq-v2gq");
    CHECK_THROWS_AS(parse_mode("all"), ArgumentError);
}

TEST_CASE("mode none keeps every device at Q = 0") {
    const auto study = bundled_study(SupportMode::none);
    for (int h : {3, 12, 19}) {
        const auto d = dispatch_q(study, study.fleet(), h);
        for (double q : d.q) CHECK(q == 0.0);
        CHECK(d.objective == d.base_objective);
        CHECK(d.solves == 1);
    }
}

TEST_CASE("a lot under low voltage generates reactive power") {
    const auto study = single_lot_study(SupportMode::dgq_v2gq, 0.05);
    const auto d = dispatch_q(study, study.fleet(), 12);
    REQUIRE(d.q.size() == 1);
    CHECK(d.solution.min_voltage() > 0.0);
    CHECK(d.q[0] < 0.0);
    CHECK(d.objective < d.base_objective);
    CHECK(capability_violation(d.devices[0].converter, d.devices[0].p, d.q[0], d.solution.v_mag[2]) < 1e-10);
}

TEST_CASE("a lot charging at full rating has no reactive room") {
    const auto study = single_lot_study(SupportMode::dgq_v2gq, 0.1);
    const auto d = dispatch_q(study, study.fleet(), 0);
    CHECK(d.q[0] == 0.0);
}

TEST_CASE("lots are ignored in dgq mode") {
    const auto study = single_lot_study(SupportMode::dgq, 0.05);
    const auto d = dispatch_q(study, study.fleet(), 0);
    CHECK(d.q[0] == 0.0);
}

TEST_CASE("more support never hurts on the bundled case") {
    const auto none = bundled_study(SupportMode::none);
    const auto dgq = bundled_study(SupportMode::dgq);
    const auto both = bundled_study(SupportMode::dgq_v2gq);
    for (int h : {0, 11, 19, 20}) {
        const double a = dispatch_q(none, none.fleet(), h).objective;
        const double b = dispatch_q(dgq, dgq.fleet(), h).objective;
        const double c = dispatch_q(both, both.fleet(), h).objective;
        CHECK(b <= a);
        CHECK(c <= b);
    }
}

TEST_CASE("day simulation bookkeeping") {
    const auto study = bundled_study(SupportMode::dgq_v2gq);
    const auto sim = simulate_day(study, study.fleet());
    REQUIRE(sim.hours.size() == 24);
    double v_dev = 0.0, loss = 0.0;
    for (const auto& h : sim.hours) {
        REQUIRE(h.solved);
        for (double v : h.dispatch.solution.v_mag) v_dev += std::abs(1.0 - v);
        loss += h.dispatch.solution.total_losses;
    }
    CHECK(sim.objective.v_dev == doctest::Approx(v_dev).epsilon(1e-12));
    CHECK(sim.objective.loss == doctest::Approx(loss).epsilon(1e-12));
    CHECK(sim.objective.cost == doctest::Approx(study.fleet().cost()));
    CHECK(sim.objective.scalar == doctest::Approx(sim.objective.recompute(Weights{})).epsilon(1e-12));
    CHECK(sim.min_voltage <= sim.max_voltage);
}

TEST_CASE("zero-load network with no lots scores zero") {
    const auto net = test::chain3(0, 0, 0, 0);
    Fleet fleet;
    fleet.load_shape = synth_profile(ProfileShape::flat, 0, 1.0, "constant");
    const Study study(net, fleet, Scenario{});
    const auto o = evaluate_objective(study, {});
    CHECK(o.v_dev == 0.0);
    CHECK(o.loss == 0.0);
    CHECK(o.cost == 0.0);
    CHECK(o.scalar == 0.0);
    CHECK(o.feasible);
}

TEST_CASE("placing lots validates the genome") {
    const auto study = bundled_study(SupportMode::dgq_v2gq);
    CHECK(study.fleet_with_lots({5, 9}).lots[1].bus == 9);
    CHECK_THROWS_AS(study.fleet_with_lots({5}), ArgumentError);
    CHECK_THROWS_AS(study.fleet_with_lots({1, 5}), ArgumentError);
    CHECK_THROWS_AS(study.fleet_with_lots({5, 5}), ArgumentError);
    CHECK_THROWS_AS(study.fleet_with_lots({5, 77}), ArgumentError);
}

TEST_CASE("lot count adjustment") {
    const auto study = bundled_study(SupportMode::dgq_v2gq);
    CHECK(with_lot_count(study.fleet(), 1).lots.size() == 1);
    const auto four = with_lot_count(study.fleet(), 4);
    CHECK(four.lots.size() == 4);
    CHECK(four.lots[3].n_pev == four.lots[0].n_pev);
    Fleet none;
    CHECK_THROWS_AS(with_lot_count(none, 2), InfeasibleError);
}
