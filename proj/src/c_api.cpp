#include "v2gq/v2gq.h"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "v2gq/case_io.hpp"
#include "v2gq/errors.hpp"
#include "v2gq/placement.hpp"
#include "v2gq/power_flow.hpp"
#include "v2gq/results.hpp"
#include "v2gq/scenario.hpp"
#include "v2gq/two_bus.hpp"

struct v2gq_case {
    v2gq::Case data;
    std::optional<v2gq::ProfileSet> profiles;
};

struct v2gq_solution {
    v2gq::Network network;
    v2gq::PowerFlowSolution solution;
    v2gq::LimitReport limits;
};

struct v2gq_simulation {
    v2gq::Network network;
    v2gq::SimulationResult result;
};

struct v2gq_placement {
    v2gq::PlacementResult result;
};

namespace {

thread_local std::string last_error;

v2gq_status status_for(v2gq::ErrorKind kind) {
    switch (kind) {
        case v2gq::ErrorKind::io:
            return V2GQ_ERR_IO;
        case v2gq::ErrorKind::parse:
            return V2GQ_ERR_PARSE;
        case v2gq::ErrorKind::validation:
            return V2GQ_ERR_VALIDATION;
        case v2gq::ErrorKind::convergence:
            return V2GQ_ERR_CONVERGENCE;
        case v2gq::ErrorKind::infeasible:
            return V2GQ_ERR_INFEASIBLE;
        case v2gq::ErrorKind::argument:
            return V2GQ_ERR_ARGUMENT;
    }
    return V2GQ_ERR_INTERNAL;
}

template <typename F>
v2gq_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return V2GQ_OK;
    } catch (const v2gq::ConvergenceError& e) {
        std::ostringstream os;
        os << e.what() << " (iterations " << e.iterations() << ", final mismatch " << e.final_mismatch()
           << (e.diverged() ? ", diverged" : "") << ")";
        last_error = os.str();
        return V2GQ_ERR_CONVERGENCE;
    } catch (const v2gq::Error& e) {
        last_error = e.what();
        return status_for(e.kind());
    } catch (const std::exception& e) {
        last_error = e.what();
        return V2GQ_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return V2GQ_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw v2gq::ArgumentError(std::string(what) + " is NULL");
}

v2gq::Fleet fleet_of(const v2gq_case* c) {
    if (!c->profiles) {
        if (!c->data.devices.empty() || !c->data.load_profile_id.empty())
            throw v2gq::ArgumentError("case references profiles but none are loaded");
        return v2gq::resolve_fleet(c->data, {});
    }
    return v2gq::resolve_fleet(c->data, *c->profiles);
}

v2gq::Scenario to_scenario(const v2gq_scenario* sc) {
    v2gq_scenario defaults;
    v2gq_scenario_defaults(&defaults);
    if (!sc) sc = &defaults;
    v2gq::Scenario s;
    switch (sc->mode) {
        case V2GQ_MODE_NONE:
            s.mode = v2gq::SupportMode::none;
            break;
        case V2GQ_MODE_DGQ:
            s.mode = v2gq::SupportMode::dgq;
            break;
        case V2GQ_MODE_DGQ_V2GQ:
            s.mode = v2gq::SupportMode::dgq_v2gq;
            break;
        default:
            throw v2gq::ArgumentError("unknown scenario mode");
    }
    s.weights = {sc->weight_voltage, sc->weight_loss, sc->weight_cost};
    s.v_ref = sc->v_ref;
    s.solver = {sc->tolerance, sc->max_iterations};
    return s;
}

v2gq_objective to_c(const v2gq::ObjectiveBreakdown& o) {
    return {o.v_dev, o.loss, o.cost, o.scalar, o.feasible ? 1 : 0, o.violation_penalty};
}

void ensure_dir(const char* dir) {
    require(dir, "output directory");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw v2gq::IoError(std::string("cannot create directory ") + dir + ": " + ec.message());
}

}  // namespace

extern "C" {

const char* v2gq_version(void) { return "1.0.0"; }

const char* v2gq_last_error(void) { return last_error.c_str(); }

const char* v2gq_status_name(v2gq_status status) {
    switch (status) {
        case V2GQ_OK:
            return "ok";
        case V2GQ_ERR_IO:
            return "io";
        case V2GQ_ERR_PARSE:
            return "parse";
        case V2GQ_ERR_VALIDATION:
            return "validation";
        case V2GQ_ERR_CONVERGENCE:
            return "convergence";
        case V2GQ_ERR_INFEASIBLE:
            return "infeasible";
        case V2GQ_ERR_ARGUMENT:
            return "argument";
        case V2GQ_ERR_INTERNAL:
            break;
    }
    return "internal";
}

v2gq_status v2gq_case_load(const char* path, const char* format, v2gq_case** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        const auto fmt = v2gq::case_format_for(path, format ? format : "");
        *out = new v2gq_case{v2gq::load_case(path, fmt), std::nullopt};
    });
}

v2gq_status v2gq_case_load_profiles(v2gq_case* c, const char* path) {
    return guarded([&] {
        require(c, "case");
        const std::string resolved = path ? std::string(path) : c->data.resolved_profiles_path();
        if (resolved.empty()) throw v2gq::ArgumentError("no profile file given and the case names none");
        auto set = v2gq::read_profiles(resolved);
        v2gq::resolve_fleet(c->data, set);  // surfaces unknown ids and rating violations now
        c->profiles = std::move(set);
    });
}

v2gq_status v2gq_case_write(const v2gq_case* c, const char* path, const char* format) {
    return guarded([&] {
        require(c, "case");
        require(path, "path");
        std::ostringstream os;
        if (v2gq::case_format_for(path, format ? format : "") == v2gq::CaseFormat::json)
            v2gq::write_case_json(os, c->data);
        else
            v2gq::write_case_text(os, c->data);
        v2gq::write_file_atomic(path, os.str());
    });
}

void v2gq_case_free(v2gq_case* c) { delete c; }

size_t v2gq_case_bus_count(const v2gq_case* c) { return c ? c->data.network.bus_count() : 0; }
size_t v2gq_case_branch_count(const v2gq_case* c) { return c ? c->data.network.branch_count() : 0; }

int v2gq_case_bus_id(const v2gq_case* c, size_t index) {
    if (!c || index >= c->data.network.bus_count()) return -1;
    return c->data.network.bus(index).id;
}

size_t v2gq_case_pv_count(const v2gq_case* c) {
    if (!c) return 0;
    return static_cast<size_t>(std::count_if(c->data.devices.begin(), c->data.devices.end(),
                                             [](const auto& d) { return d.kind == v2gq::DeviceKind::pv; }));
}

size_t v2gq_case_lot_count(const v2gq_case* c) {
    if (!c) return 0;
    return c->data.devices.size() - v2gq_case_pv_count(c);
}

int v2gq_case_has_profiles(const v2gq_case* c) { return c && c->profiles ? 1 : 0; }

void v2gq_solver_defaults(v2gq_solver_options* opts) {
    if (!opts) return;
    const v2gq::SolverSettings s;
    opts->tolerance = s.tolerance;
    opts->max_iterations = s.max_iterations;
}

v2gq_status v2gq_solve(const v2gq_case* c, int hour, const v2gq_solver_options* opts, v2gq_solution** out) {
    return guarded([&] {
        require(c, "case");
        require(out, "out");
        *out = nullptr;
        v2gq::SolverSettings settings;
        if (opts) settings = {opts->tolerance, opts->max_iterations};
        const auto& net = c->data.network;
        v2gq::PowerFlowSolver solver(net, settings);
        v2gq::PowerFlowSolution sol;
        if (hour < 0) {
            sol = solver.solve(v2gq::InjectionSet::from_loads(net));
        } else {
            const auto fleet = fleet_of(c);
            const auto devices = v2gq::active_devices(net, fleet, hour);
            sol = solver.solve(
                v2gq::hour_injections(net, fleet, hour, devices, std::vector<double>(devices.size(), 0.0)));
        }
        auto limits = v2gq::check_limits(net, sol);
        *out = new v2gq_solution{net, std::move(sol), std::move(limits)};
    });
}

void v2gq_solution_free(v2gq_solution* s) { delete s; }

size_t v2gq_solution_bus_count(const v2gq_solution* s) { return s ? s->solution.v_mag.size() : 0; }

v2gq_status v2gq_solution_bus(const v2gq_solution* s, size_t index, int* bus_id, double* v_pu, double* angle_rad) {
    return guarded([&] {
        require(s, "solution");
        if (index >= s->solution.v_mag.size()) throw v2gq::ArgumentError("bus index out of range");
        if (bus_id) *bus_id = s->network.bus(index).id;
        if (v_pu) *v_pu = s->solution.v_mag[index];
        if (angle_rad) *angle_rad = s->solution.angle[index];
    });
}

int v2gq_solution_iterations(const v2gq_solution* s) { return s ? s->solution.iterations : 0; }
double v2gq_solution_mismatch(const v2gq_solution* s) { return s ? s->solution.max_mismatch : 0.0; }
double v2gq_solution_losses(const v2gq_solution* s) { return s ? s->solution.total_losses : 0.0; }

void v2gq_solution_violations(const v2gq_solution* s, size_t* voltage, size_t* thermal) {
    if (voltage) *voltage = s ? s->limits.voltage.size() : 0;
    if (thermal) *thermal = s ? s->limits.thermal.size() : 0;
}

v2gq_status v2gq_solution_write(const v2gq_solution* s, const char* path) {
    return guarded([&] {
        require(s, "solution");
        std::ostringstream os;
        v2gq::write_solution_table(os, s->network, s->solution);
        if (path)
            v2gq::write_file_atomic(path, os.str());
        else
            std::cout << os.str() << std::flush;
    });
}

v2gq_status v2gq_two_bus_transfer(const v2gq_two_bus* s, int reactive_line, double* p12, double* q12) {
    return guarded([&] {
        require(s, "two-bus state");
        const auto state = reactive_line ? v2gq::two_bus::State::from_rx(s->v1, s->delta1, s->v2, s->delta2, 0.0, s->x)
                                         : v2gq::two_bus::State::from_rx(s->v1, s->delta1, s->v2, s->delta2, s->r, s->x);
        const auto t = reactive_line ? v2gq::two_bus::transfer_power_reactive_line(state)
                                     : v2gq::two_bus::transfer_power_general(state);
        if (p12) *p12 = t.p12;
        if (q12) *q12 = t.q12;
    });
}

v2gq_status v2gq_two_bus_direction(const v2gq_two_bus* s, int* active, int* reactive) {
    return guarded([&] {
        require(s, "two-bus state");
        const auto state = v2gq::two_bus::State::from_rx(s->v1, s->delta1, s->v2, s->delta2, s->r, s->x);
        const auto d = v2gq::two_bus::classify_direction(state);
        auto code = [](v2gq::two_bus::Direction dir) {
            return dir == v2gq::two_bus::Direction::one_to_two ? 1
                   : dir == v2gq::two_bus::Direction::two_to_one ? -1
                                                                 : 0;
        };
        if (active) *active = code(d.active);
        if (reactive) *reactive = code(d.reactive);
    });
}

void v2gq_scenario_defaults(v2gq_scenario* sc) {
    if (!sc) return;
    const v2gq::Scenario s;
    sc->mode = V2GQ_MODE_DGQ_V2GQ;
    sc->weight_voltage = s.weights.voltage;
    sc->weight_loss = s.weights.loss;
    sc->weight_cost = s.weights.cost;
    sc->v_ref = s.v_ref;
    sc->tolerance = s.solver.tolerance;
    sc->max_iterations = s.solver.max_iterations;
}

v2gq_status v2gq_simulate(const v2gq_case* c, const v2gq_scenario* sc, v2gq_simulation** out) {
    return guarded([&] {
        require(c, "case");
        require(out, "out");
        *out = nullptr;
        const v2gq::Study study(c->data.network, fleet_of(c), to_scenario(sc));
        auto result = v2gq::simulate_day(study, study.fleet());
        *out = new v2gq_simulation{c->data.network, std::move(result)};
    });
}

void v2gq_simulation_free(v2gq_simulation* sim) { delete sim; }

void v2gq_simulation_summary(const v2gq_simulation* sim, v2gq_summary* out) {
    if (!sim || !out) return;
    out->objective = to_c(sim->result.objective);
    out->min_voltage = sim->result.min_voltage;
    out->max_voltage = sim->result.max_voltage;
    out->total_losses = sim->result.total_losses;
}

v2gq_status v2gq_simulation_hour(const v2gq_simulation* sim, int hour, double* objective, double* base_objective,
                                 double* min_voltage) {
    return guarded([&] {
        require(sim, "simulation");
        if (hour < 0 || hour >= v2gq::kHours) throw v2gq::ArgumentError("hour outside 0..23");
        const auto& rec = sim->result.hours[static_cast<std::size_t>(hour)];
        if (!rec.solved) throw v2gq::ConvergenceError("hour " + std::to_string(hour) + " did not solve", 0, 0.0, true);
        if (objective) *objective = rec.dispatch.objective;
        if (base_objective) *base_objective = rec.dispatch.base_objective;
        if (min_voltage) *min_voltage = rec.dispatch.solution.min_voltage();
    });
}

v2gq_status v2gq_simulation_write(const v2gq_simulation* sim, const char* out_dir) {
    return guarded([&] {
        require(sim, "simulation");
        ensure_dir(out_dir);
        const std::filesystem::path dir(out_dir);
        std::ostringstream volts, dispatch;
        v2gq::write_voltages_csv(volts, sim->network, sim->result);
        v2gq::write_dispatch_csv(dispatch, sim->result);
        v2gq::write_file_atomic((dir / "voltages.csv").string(), volts.str());
        v2gq::write_file_atomic((dir / "dispatch.csv").string(), dispatch.str());
    });
}

void v2gq_ga_defaults(v2gq_ga_options* opts) {
    if (!opts) return;
    const v2gq::GaParams p;
    opts->population = p.population;
    opts->generations = p.generations;
    opts->seed = p.seed;
    opts->mutation_rate = p.mutation_rate;
    opts->lots = 0;
    opts->candidates = nullptr;
    opts->candidate_count = 0;
    opts->threads = p.threads;
}

v2gq_status v2gq_optimize(const v2gq_case* c, const v2gq_scenario* sc, const v2gq_ga_options* opts,
                          v2gq_placement** out) {
    return guarded([&] {
        require(c, "case");
        require(out, "out");
        *out = nullptr;
        v2gq_ga_options o;
        v2gq_ga_defaults(&o);
        if (opts) o = *opts;
        if (o.lots < 0) throw v2gq::ArgumentError("lot count must be nonnegative");
        if (o.candidate_count > 0) require(o.candidates, "candidates");

        auto fleet = fleet_of(c);
        if (o.lots > 0) fleet = v2gq::with_lot_count(std::move(fleet), static_cast<std::size_t>(o.lots));
        const v2gq::Study study(c->data.network, std::move(fleet), to_scenario(sc));

        v2gq::GaParams params;
        params.population = o.population;
        params.generations = o.generations;
        params.seed = o.seed;
        params.mutation_rate = o.mutation_rate;
        params.threads = o.threads;
        params.candidates.assign(o.candidates, o.candidates + o.candidate_count);
        *out = new v2gq_placement{v2gq::optimize_placement(study, params)};
    });
}

void v2gq_placement_free(v2gq_placement* p) { delete p; }

size_t v2gq_placement_lot_count(const v2gq_placement* p) { return p ? p->result.best.genome.lot_buses.size() : 0; }

v2gq_status v2gq_placement_best(const v2gq_placement* p, int* buses, size_t capacity, v2gq_objective* objective) {
    return guarded([&] {
        require(p, "placement");
        const auto& g = p->result.best.genome.lot_buses;
        if (capacity > 0) require(buses, "buses");
        for (size_t i = 0; i < g.size() && i < capacity; ++i) buses[i] = g[i];
        if (objective) *objective = to_c(p->result.best.objective);
    });
}

size_t v2gq_placement_archive_size(const v2gq_placement* p) { return p ? p->result.archive.entries.size() : 0; }
size_t v2gq_placement_evaluations(const v2gq_placement* p) { return p ? p->result.evaluations : 0; }

v2gq_status v2gq_placement_write(const v2gq_placement* p, const char* out_dir) {
    return guarded([&] {
        require(p, "placement");
        ensure_dir(out_dir);
        std::ostringstream os;
        v2gq::write_placements_csv(os, p->result);
        v2gq::write_file_atomic((std::filesystem::path(out_dir) / "placements.csv").string(), os.str());
    });
}

}  // extern "C"
