#include "v2gq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/tools/minima.hpp>

#include "v2gq/errors.hpp"

namespace v2gq {

namespace {

constexpr double kCapabilityTol = 1e-10;
constexpr double kRejected = 1e12;

}  // namespace

SupportMode parse_mode(std::string_view tag) {
    if (tag == "none") return SupportMode::none;
    if (tag == "dgq") return SupportMode::dgq;
    if (tag == "dgq-v2gq" || tag == "dgq+v2gq") return SupportMode::dgq_v2gq;
    throw ArgumentError("unknown scenario mode '" + std::string(tag) + "' (expected none, dgq, dgq-v2gq)");
}

const char* to_string(SupportMode mode) {
    switch (mode) {
        case SupportMode::none:
            return "none";
        case SupportMode::dgq:
            return "dgq";
        case SupportMode::dgq_v2gq:
            break;
    }
    return "dgq-v2gq";
}

void Weights::validate() const {
    for (double w : {voltage, loss, cost}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("objective weights must be finite and nonnegative");
    }
}

void Scenario::validate(const Network& net) const {
    weights.validate();
    if (!(v_ref > 0.0)) throw ArgumentError("reference voltage must be positive");
    if (!v_ref_per_bus.empty() && v_ref_per_bus.size() != net.bus_count())
        throw ArgumentError("per-bus reference voltages do not match the bus count");
    if (dispatch.max_sweeps < 1) throw ArgumentError("dispatch needs at least one sweep");
}

ObjectiveBreakdown ObjectiveBreakdown::from_parts(double v_dev, double loss, double cost, const Weights& w) {
    ObjectiveBreakdown o;
    o.v_dev = v_dev;
    o.loss = loss;
    o.cost = cost;
    o.scalar = o.recompute(w);
    return o;
}

Study::Study(Network net, Fleet fleet, Scenario scenario)
    : solver_(net, scenario.solver), fleet_(std::move(fleet)), scenario_(std::move(scenario)) {
    scenario_.validate(solver_.network());
    const auto& n = solver_.network();
    auto check = [&](int bus, const char* what) {
        if (!n.has_bus(bus)) throw ValidationError(std::string(what) + " on nonexistent bus " + std::to_string(bus));
        if (n.bus(n.index_of(bus)).kind == BusKind::slack)
            throw ValidationError(std::string(what) + " on the slack bus " + std::to_string(bus));
    };
    for (const auto& pv : fleet_.pvs) {
        check(pv.bus, "pv");
        pv.validate();
    }
    for (const auto& lot : fleet_.lots) {
        check(lot.bus, "pev lot");
        lot.validate();
    }
}

Fleet Study::fleet_with_lots(const std::vector<int>& lot_buses) const {
    const auto& net = network();
    if (lot_buses.size() != fleet_.lots.size())
        throw ArgumentError("placement has " + std::to_string(lot_buses.size()) + " buses for " +
                            std::to_string(fleet_.lots.size()) + " lots");
    std::set<int> seen;
    for (int b : lot_buses) {
        if (!net.has_bus(b)) throw ArgumentError("placement uses nonexistent bus " + std::to_string(b));
        if (net.bus(net.index_of(b)).kind == BusKind::slack)
            throw ArgumentError("placement uses the slack bus " + std::to_string(b));
        if (!seen.insert(b).second) throw ArgumentError("placement repeats bus " + std::to_string(b));
    }
    Fleet f = fleet_;
    for (std::size_t i = 0; i < lot_buses.size(); ++i) f.lots[i].bus = lot_buses[i];
    return f;
}

Fleet with_lot_count(Fleet fleet, std::size_t lots) {
    if (lots > 0 && fleet.lots.empty()) throw InfeasibleError("case defines no parking lot to replicate");
    if (lots <= fleet.lots.size()) {
        fleet.lots.resize(lots);
    } else {
        const auto tmpl = fleet.lots.front();
        fleet.lots.resize(lots, tmpl);
    }
    return fleet;
}

std::vector<ActiveDevice> active_devices(const Network& net, const Fleet& fleet, int hour) {
    if (hour < 0 || hour >= kHours) throw ArgumentError("hour " + std::to_string(hour) + " outside 0..23");
    std::vector<ActiveDevice> out;
    out.reserve(fleet.pvs.size() + fleet.lots.size());
    const auto h = static_cast<std::size_t>(hour);
    for (std::size_t i = 0; i < fleet.pvs.size(); ++i) {
        const auto& pv = fleet.pvs[i];
        out.push_back({DeviceKind::pv, i, pv.bus, net.index_of(pv.bus), pv.converter, pv.p_profile[h]});
    }
    for (std::size_t i = 0; i < fleet.lots.size(); ++i) {
        const auto& lot = fleet.lots[i];
        out.push_back({DeviceKind::pev_lot, i, lot.bus, net.index_of(lot.bus), lot.converter, lot.charge_profile[h]});
    }
    return out;
}

InjectionSet hour_injections(const Network& net, const Fleet& fleet, int hour,
                             const std::vector<ActiveDevice>& devices, const std::vector<double>& q) {
    const double scale = fleet.load_shape[hour];
    std::vector<BusLoad> loads(net.bus_count());
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        loads[i] = {scale * net.bus(i).p_load, scale * net.bus(i).q_load};
    for (std::size_t k = 0; k < devices.size(); ++k) {
        const auto& d = devices[k];
        const DeviceOutput out{d.kind, d.p, q[k]};
        loads[d.bus_index] = compose_load(loads[d.bus_index], std::span(&out, 1));
    }
    InjectionSet inj(net.bus_count());
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        inj.p[i] = -loads[i].p;
        inj.q[i] = -loads[i].q;
    }
    return inj;
}

double hour_objective(const Network& net, const Scenario& scenario, const PowerFlowSolution& sol) {
    double dev = 0.0;
    for (std::size_t i = 0; i < net.bus_count(); ++i) dev += std::abs(scenario.reference(i) - sol.v_mag[i]);
    return scenario.weights.voltage * dev + scenario.weights.loss * sol.total_losses;
}

HourDispatch dispatch_q(const Study& study, const Fleet& fleet, int hour) {
    const auto& net = study.network();
    const auto& sc = study.scenario();
    const auto& solver = study.solver();

    HourDispatch hd;
    hd.hour = hour;
    hd.devices = active_devices(net, fleet, hour);
    const auto n_dev = hd.devices.size();
    hd.q.assign(n_dev, 0.0);

    hd.solution = solver.solve(hour_injections(net, fleet, hour, hd.devices, hd.q));
    hd.solves = 1;
    hd.base_objective = hour_objective(net, sc, hd.solution);
    hd.objective = hd.base_objective;
    if (sc.mode == SupportMode::none || n_dev == 0) return hd;

    std::vector<bool> held(n_dev, false);
    std::vector<std::size_t> pv_only, everyone;
    for (std::size_t k = 0; k < n_dev; ++k) {
        if (!q_capability(hd.devices[k].converter, hd.devices[k].p, hd.solution.v_mag[hd.devices[k].bus_index])) {
            held[k] = true;
            hd.capability_infeasible.push_back(k);
            continue;
        }
        everyone.push_back(k);
        if (hd.devices[k].kind == DeviceKind::pv) pv_only.push_back(k);
    }
    std::vector<std::vector<std::size_t>> phases{pv_only};
    if (sc.mode == SupportMode::dgq_v2gq) phases.push_back(everyone);

    // Devices with nonzero Q must stay inside their own range at the new voltages.
    auto within_capability = [&](const std::vector<double>& q, const PowerFlowSolution& sol) {
        for (std::size_t d = 0; d < n_dev; ++d) {
            if (q[d] == 0.0) continue;
            const auto& dev = hd.devices[d];
            if (capability_violation(dev.converter, dev.p, q[d], sol.v_mag[dev.bus_index]) > kCapabilityTol)
                return false;
        }
        return true;
    };

    for (const auto& phase : phases) {
        for (int sweep = 0; sweep < sc.dispatch.max_sweeps; ++sweep) {
            const double sweep_start = hd.objective;
            for (const auto k : phase) {
                if (held[k]) continue;
                const auto& dev = hd.devices[k];
                const auto range = q_capability(dev.converter, dev.p, hd.solution.v_mag[dev.bus_index]);
                if (!range || range->q_max - range->q_min <= 0.0) continue;

                struct Best {
                    double f;
                    double q;
                    PowerFlowSolution sol;
                } best{hd.objective, hd.q[k], {}};
                bool improved = false;
                auto trial_q = hd.q;
                auto trial = [&](double qk) {
                    trial_q[k] = qk;
                    PowerFlowSolution sol;
                    try {
                        sol = solver.solve(hour_injections(net, fleet, hour, hd.devices, trial_q), hd.solution.voltage);
                    } catch (const ConvergenceError&) {
                        hd.fallback = true;
                        return kRejected;
                    }
                    ++hd.solves;
                    const double f = hour_objective(net, sc, sol);
                    if (!within_capability(trial_q, sol)) return f + kRejected;
                    if (f < best.f) {
                        best = {f, qk, std::move(sol)};
                        improved = true;
                    }
                    return f;
                };
                std::uintmax_t max_iter = static_cast<std::uintmax_t>(sc.dispatch.search_max_iterations);
                boost::math::tools::brent_find_minima(trial, range->q_min, range->q_max, sc.dispatch.search_bits,
                                                      max_iter);
                if (improved) {
                    hd.q[k] = best.q;
                    hd.objective = best.f;
                    hd.solution = std::move(best.sol);
                }
            }
            if (sweep_start - hd.objective < sc.dispatch.min_improvement) break;
        }
    }
    return hd;
}

SimulationResult simulate_day(const Study& study, const Fleet& fleet) {
    const auto& net = study.network();
    const auto& sc = study.scenario();
    SimulationResult res;
    res.hours.reserve(kHours);
    res.min_voltage = std::numeric_limits<double>::infinity();
    res.max_voltage = -std::numeric_limits<double>::infinity();

    double v_dev = 0.0, loss = 0.0, violation = 0.0;
    for (int h = 0; h < kHours; ++h) {
        HourRecord rec;
        try {
            rec.dispatch = dispatch_q(study, fleet, h);
        } catch (const ConvergenceError&) {
            rec.solved = false;
            rec.dispatch.hour = h;
            violation += kDivergencePenalty;
            res.hours.push_back(std::move(rec));
            continue;
        }
        const auto& sol = rec.dispatch.solution;
        rec.limits = check_limits(net, sol);
        for (std::size_t k = 0; k < rec.dispatch.devices.size(); ++k) {
            const auto& d = rec.dispatch.devices[k];
            const double excess = capability_violation(d.converter, d.p, rec.dispatch.q[k], sol.v_mag[d.bus_index]);
            if (excess > kCapabilityTol) rec.capability_excess += excess;
        }
        for (std::size_t i = 0; i < net.bus_count(); ++i) v_dev += std::abs(sc.reference(i) - sol.v_mag[i]);
        loss += sol.total_losses;
        violation += rec.limits.total_violation() + rec.capability_excess;
        res.min_voltage = std::min(res.min_voltage, sol.min_voltage());
        res.max_voltage = std::max(res.max_voltage, sol.max_voltage());
        res.hours.push_back(std::move(rec));
    }
    res.total_losses = loss;
    res.objective = ObjectiveBreakdown::from_parts(v_dev, loss, fleet.cost(), sc.weights);
    res.objective.violation_penalty = violation;
    res.objective.feasible = violation == 0.0;
    return res;
}

ObjectiveBreakdown evaluate_objective(const Study& study, const std::vector<int>& lot_buses) {
    return simulate_day(study, study.fleet_with_lots(lot_buses)).objective;
}

}  // namespace v2gq
