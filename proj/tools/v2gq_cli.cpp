// v2gq command-line front end. Talks to the library only through v2gq.h.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "v2gq/v2gq.h"

namespace {

enum Exit {
    kOk = 0,
    kIo = 1,
    kUsage = 2,
    kParse = 3,
    kValidation = 4,
    kConvergence = 5,
    kInfeasible = 6,
    kInternal = 7,
};

constexpr const char* kExitHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  file missing or unwritable\n"
    "  2  bad command line or argument\n"
    "  3  malformed case or profile file\n"
    "  4  input violates a model invariant\n"
    "  5  power flow failed to converge\n"
    "  6  infeasible request (e.g. more lots than candidate buses)\n"
    "  7  internal error\n";

int exit_for(v2gq_status s) {
    switch (s) {
        case V2GQ_OK:
            return kOk;
        case V2GQ_ERR_IO:
            return kIo;
        case V2GQ_ERR_PARSE:
            return kParse;
        case V2GQ_ERR_VALIDATION:
            return kValidation;
        case V2GQ_ERR_CONVERGENCE:
            return kConvergence;
        case V2GQ_ERR_INFEASIBLE:
            return kInfeasible;
        case V2GQ_ERR_ARGUMENT:
            return kUsage;
        case V2GQ_ERR_INTERNAL:
            break;
    }
    return kInternal;
}

struct Failure {
    int code;
};

void check(v2gq_status s) {
    if (s == V2GQ_OK) return;
    std::cerr << "v2gq: " << v2gq_status_name(s) << " error: " << v2gq_last_error() << '\n';
    throw Failure{exit_for(s)};
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};

using CaseHandle = Handle<v2gq_case, v2gq_case_free>;
using SolutionHandle = Handle<v2gq_solution, v2gq_solution_free>;
using SimulationHandle = Handle<v2gq_simulation, v2gq_simulation_free>;
using PlacementHandle = Handle<v2gq_placement, v2gq_placement_free>;

struct RunConfig {
    std::string case_path;
    std::string profiles_path;
    std::string format;
    std::string mode = "dgq-v2gq";
    std::vector<double> weights{0.6, 0.1, 0.3};
    double v_ref = 1.0;
    double tol = 1e-8;
    int max_iter = 50;
    int hour = -1;
    int lots = 0;
    std::vector<int> candidates;
    int pop = 40;
    int gens = 60;
    std::uint64_t seed = 1;
    double mutation = 0.1;
    unsigned threads = 1;
    std::string out;
    std::string write_case;
    // two-bus
    double v1 = 1.0, d1 = 0.0, v2 = 1.0, d2 = 0.0, r = 0.0, x = 0.1;
    bool reactive_line = false;
};

void load(const RunConfig& cfg, CaseHandle& c, bool need_profiles) {
    check(v2gq_case_load(cfg.case_path.c_str(), cfg.format.empty() ? nullptr : cfg.format.c_str(), &c.p));
    if (!cfg.profiles_path.empty()) {
        check(v2gq_case_load_profiles(c.p, cfg.profiles_path.c_str()));
    } else if (need_profiles) {
        check(v2gq_case_load_profiles(c.p, nullptr));
    }
}

v2gq_scenario scenario_of(const RunConfig& cfg) {
    v2gq_scenario sc;
    v2gq_scenario_defaults(&sc);
    if (cfg.mode == "none")
        sc.mode = V2GQ_MODE_NONE;
    else if (cfg.mode == "dgq")
        sc.mode = V2GQ_MODE_DGQ;
    else
        sc.mode = V2GQ_MODE_DGQ_V2GQ;
    sc.weight_voltage = cfg.weights[0];
    sc.weight_loss = cfg.weights[1];
    sc.weight_cost = cfg.weights[2];
    sc.v_ref = cfg.v_ref;
    sc.tolerance = cfg.tol;
    sc.max_iterations = cfg.max_iter;
    return sc;
}

int cmd_solve(const RunConfig& cfg) {
    CaseHandle c;
    load(cfg, c, cfg.hour >= 0);
    v2gq_solver_options opts{cfg.tol, cfg.max_iter};
    SolutionHandle sol;
    check(v2gq_solve(c.p, cfg.hour, &opts, &sol.p));
    if (cfg.out.empty()) {
        check(v2gq_solution_write(sol.p, nullptr));
    } else {
        check(v2gq_solution_write(sol.p, cfg.out.c_str()));
    }
    std::size_t nv = 0, nt = 0;
    v2gq_solution_violations(sol.p, &nv, &nt);
    std::fprintf(stderr, "converged in %d iterations, mismatch %.3e pu, losses %.6f pu, %zu voltage and %zu thermal violations\n",
                 v2gq_solution_iterations(sol.p), v2gq_solution_mismatch(sol.p), v2gq_solution_losses(sol.p), nv, nt);
    return kOk;
}

int cmd_twobus(const RunConfig& cfg) {
    constexpr double deg = std::numbers::pi / 180.0;
    const v2gq_two_bus s{cfg.v1, cfg.d1 * deg, cfg.v2, cfg.d2 * deg, cfg.r, cfg.x};
    double p = 0.0, q = 0.0;
    int dp = 0, dq = 0;
    check(v2gq_two_bus_transfer(&s, cfg.reactive_line ? 1 : 0, &p, &q));
    check(v2gq_two_bus_direction(&s, &dp, &dq));
    auto dir = [](int d) { return d > 0 ? "1->2" : d < 0 ? "2->1" : "none"; };
    std::printf("p12_pu,q12_pu,active_dir,reactive_dir\n%.12g,%.12g,%s,%s\n", p, q, dir(dp), dir(dq));
    return kOk;
}

void print_objective(const char* label, const v2gq_objective& o) {
    std::printf("%s v_dev=%.9g loss=%.9g cost=%.9g scalar=%.9g feasible=%s violation=%.6g\n", label, o.v_dev, o.loss,
                o.cost, o.scalar, o.feasible ? "yes" : "no", o.violation);
}

int cmd_simulate(const RunConfig& cfg) {
    CaseHandle c;
    load(cfg, c, true);
    const auto sc = scenario_of(cfg);
    SimulationHandle sim;
    check(v2gq_simulate(c.p, &sc, &sim.p));
    check(v2gq_simulation_write(sim.p, cfg.out.empty() ? "." : cfg.out.c_str()));
    v2gq_summary s;
    v2gq_simulation_summary(sim.p, &s);
    std::printf("mode=%s min_v=%.9f max_v=%.9f total_losses=%.9g\n", cfg.mode.c_str(), s.min_voltage, s.max_voltage,
                s.total_losses);
    print_objective("objective", s.objective);
    return kOk;
}

int cmd_optimize(const RunConfig& cfg) {
    CaseHandle c;
    load(cfg, c, true);
    const auto sc = scenario_of(cfg);
    v2gq_ga_options ga;
    v2gq_ga_defaults(&ga);
    ga.population = cfg.pop;
    ga.generations = cfg.gens;
    ga.seed = cfg.seed;
    ga.mutation_rate = cfg.mutation;
    ga.lots = cfg.lots;
    ga.candidates = cfg.candidates.empty() ? nullptr : cfg.candidates.data();
    ga.candidate_count = cfg.candidates.size();
    ga.threads = cfg.threads;
    PlacementHandle pl;
    check(v2gq_optimize(c.p, &sc, &ga, &pl.p));
    check(v2gq_placement_write(pl.p, cfg.out.empty() ? "." : cfg.out.c_str()));
    std::vector<int> buses(v2gq_placement_lot_count(pl.p));
    v2gq_objective obj;
    check(v2gq_placement_best(pl.p, buses.data(), buses.size(), &obj));
    std::printf("best lots at buses");
    for (int b : buses) std::printf(" %d", b);
    std::printf("\n");
    print_objective("objective", obj);
    std::printf("archive=%zu evaluations=%zu\n", v2gq_placement_archive_size(pl.p), v2gq_placement_evaluations(pl.p));
    return kOk;
}

int cmd_validate(const RunConfig& cfg) {
    CaseHandle c;
    load(cfg, c, !cfg.profiles_path.empty());
    std::printf("%zu buses, %zu branches, %zu pv units, %zu parking lots, profiles %s\n", v2gq_case_bus_count(c.p),
                v2gq_case_branch_count(c.p), v2gq_case_pv_count(c.p), v2gq_case_lot_count(c.p),
                v2gq_case_has_profiles(c.p) ? "loaded" : "not loaded");
    if (!cfg.write_case.empty()) check(v2gq_case_write(c.p, cfg.write_case.c_str(), nullptr));
    return kOk;
}

// `key = value` lines become `--key value` arguments placed ahead of the real
// ones, so the command line wins on conflicts.
std::vector<std::string> config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "v2gq: io error: cannot open config file " << path << '\n';
        throw Failure{kIo};
    }
    std::vector<std::string> args;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::cerr << "v2gq: parse error: " << path << ":" << line_no << ": expected key = value\n";
            throw Failure{kParse};
        }
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") {
            std::cerr << "v2gq: parse error: " << path << ":" << line_no << ": invalid key\n";
            throw Failure{kParse};
        }
        if (value == "true") {
            args.push_back("--" + key);
        } else {
            args.push_back("--" + key);
            args.push_back(value);
        }
    }
    return args;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> injected;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
        } else {
            continue;
        }
        auto more = config_args(path);
        injected.insert(injected.end(), more.begin(), more.end());
        --i;
    }
    if (!injected.empty()) {
        // Config options belong to the subcommand, which is the first positional word.
        const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
        if (sub == args.end()) {
            std::cerr << "v2gq: --config needs a subcommand\n";
            return kUsage;
        }
        args.insert(sub + 1, injected.begin(), injected.end());
    }

    CLI::App app{"Reactive support from PV inverters and EV parking lots on radial feeders"};
    app.footer(kExitHelp);
    app.set_version_flag("--version", std::string(v2gq_version()));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--config", "Read `key = value` defaults from a file (keys are long flag names)");

    RunConfig cfg;
    auto add_case = [&](CLI::App* sub) {
        sub->add_option("--case", cfg.case_path, "Case file (.grid text or .json)")->required();
        sub->add_option("--profiles", cfg.profiles_path, "Profile file (default: the one named in the case)");
        sub->add_option("--format", cfg.format, "Case format: text or json (default by extension)")
            ->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--tol", cfg.tol, "Power-flow mismatch tolerance, per-unit")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", cfg.max_iter, "Power-flow iteration limit")->check(CLI::PositiveNumber);
    };
    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("--mode", cfg.mode, "Reactive support: none, dgq, dgq-v2gq")
            ->check(CLI::IsMember({"none", "dgq", "dgq-v2gq", "dgq+v2gq"}));
        sub->add_option("--weights", cfg.weights, "Objective weights a,b,c (voltage, loss, cost)")
            ->delimiter(',')
            ->expected(3)
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--vref", cfg.v_ref, "Reference voltage, per-unit")->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.out, "Output directory (default: current directory)");
    };

    auto* solve = app.add_subcommand("solve", "Power flow at nominal loads or for one hour of the day");
    add_case(solve);
    solve->add_option("--hour", cfg.hour, "Hour 0..23 (loads and device P from profiles, Q = 0)")
        ->check(CLI::Range(0, 23));
    solve->add_option("--out", cfg.out, "Write the tables to this file instead of stdout");

    auto* twobus = app.add_subcommand("twobus", "Power transfer between two buses");
    twobus->add_option("--v1", cfg.v1, "Sending-end magnitude, per-unit");
    twobus->add_option("--d1", cfg.d1, "Sending-end angle, degrees");
    twobus->add_option("--v2", cfg.v2, "Receiving-end magnitude, per-unit");
    twobus->add_option("--d2", cfg.d2, "Receiving-end angle, degrees");
    twobus->add_option("--r", cfg.r, "Line resistance, per-unit");
    twobus->add_option("--x", cfg.x, "Line reactance, per-unit");
    twobus->add_flag("--reactive-line", cfg.reactive_line, "Use the X >> R approximation");

    auto* simulate = app.add_subcommand("simulate", "24-hour dispatch for one support mode");
    add_case(simulate);
    add_scenario(simulate);

    auto* optimize = app.add_subcommand("optimize", "Search parking-lot placements");
    add_case(optimize);
    add_scenario(optimize);
    optimize->add_option("--lots", cfg.lots, "Number of lots (default: as listed in the case)")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--candidates", cfg.candidates, "Candidate buses, comma separated (default: all load buses)")
        ->delimiter(',');
    optimize->add_option("--pop", cfg.pop, "Population size (even, >= 4)");
    optimize->add_option("--gens", cfg.gens, "Generations")->check(CLI::NonNegativeNumber);
    optimize->add_option("--seed", cfg.seed, "Random seed");
    optimize->add_option("--mutation", cfg.mutation, "Per-gene mutation probability")->check(CLI::Range(0.0, 1.0));
    optimize->add_option("--threads", cfg.threads, "Evaluation threads (0: all cores)");

    auto* validate = app.add_subcommand("validate", "Load a case and its profiles and report what was found");
    add_case(validate);
    validate->add_option("--write", cfg.write_case, "Also write the case back out (.json or text)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (*solve) return cmd_solve(cfg);
    if (*twobus) return cmd_twobus(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*optimize) return cmd_optimize(cfg);
    return cmd_validate(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "v2gq: internal error: " << e.what() << '\n';
        return kInternal;
    }
}
