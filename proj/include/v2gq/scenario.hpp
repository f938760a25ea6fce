#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "v2gq/case_io.hpp"
#include "v2gq/devices.hpp"
#include "v2gq/power_flow.hpp"

namespace v2gq {

// Which converters may exchange reactive power with the grid.
enum class SupportMode {
    none,      // every device at Q = 0
    dgq,       // PV inverters only
    dgq_v2gq,  // PV inverters and parking-lot chargers
};

// Accepts none, dgq, dgq-v2gq (and dgq+v2gq).
SupportMode parse_mode(std::string_view tag);
const char* to_string(SupportMode mode);

struct Weights {
    double voltage = 0.6;  // a
    double loss = 0.1;     // b
    double cost = 0.3;     // c

    void validate() const;
};

struct DispatchSettings {
    int max_sweeps = 10;
    double min_improvement = 1e-6;  // stop once a full sweep gains less than this
    int search_bits = 24;           // precision of the bounded scalar search
    int search_max_iterations = 60;
};

struct Scenario {
    SupportMode mode = SupportMode::dgq_v2gq;
    Weights weights;
    double v_ref = 1.0;
    std::vector<double> v_ref_per_bus;  // by bus position; overrides v_ref when non-empty
    SolverSettings solver;
    DispatchSettings dispatch;

    double reference(std::size_t bus_index) const {
        return v_ref_per_bus.empty() ? v_ref : v_ref_per_bus[bus_index];
    }
    void validate(const Network& net) const;
};

// The three raw terms of the placement objective and their weighted sum.
struct ObjectiveBreakdown {
    double v_dev = 0.0;  // sum over hours and buses of |V_ref - V|
    double loss = 0.0;   // sum over hours of network losses, per-unit
    double cost = 0.0;   // sum over placed lots of n_pev * cost_per_pev
    double scalar = 0.0;
    bool feasible = true;
    double violation_penalty = 0.0;  // total constraint excess; 0 when feasible

    static ObjectiveBreakdown from_parts(double v_dev, double loss, double cost, const Weights& w);
    double recompute(const Weights& w) const { return w.voltage * v_dev + w.loss * loss + w.cost * cost; }
};

// One Q-capable device in one hour, in system per-unit.
struct ActiveDevice {
    DeviceKind kind = DeviceKind::pv;
    std::size_t source = 0;  // position within Fleet::pvs or Fleet::lots
    int bus = 0;
    std::size_t bus_index = 0;
    Converter converter;
    double p = 0.0;
};

struct HourDispatch {
    int hour = 0;
    std::vector<ActiveDevice> devices;  // PV units first, then lots
    std::vector<double> q;              // dispatched reactive power, parallel to devices
    PowerFlowSolution solution;
    double objective = 0.0;             // a * sum |V_ref - V| + b * P_loss at the dispatched setting
    double base_objective = 0.0;        // same with every Q = 0
    std::vector<std::size_t> capability_infeasible;  // devices held at Q = 0 for lack of a feasible range
    bool fallback = false;              // a trial diverged and the last good setting was kept
    int solves = 0;
};

// A network, its installed devices, and the rules for one study.
class Study {
  public:
    Study(Network net, Fleet fleet, Scenario scenario);

    const Network& network() const { return solver_.network(); }
    const Fleet& fleet() const { return fleet_; }
    const Scenario& scenario() const { return scenario_; }
    const PowerFlowSolver& solver() const { return solver_; }

    // Same study with the lots moved to the given buses (lot i -> lot_buses[i]).
    Fleet fleet_with_lots(const std::vector<int>& lot_buses) const;

  private:
    PowerFlowSolver solver_;
    Fleet fleet_;
    Scenario scenario_;
};

// Keeps the first `lots` lots, or repeats the first lot's parameters to reach
// that count. Throws InfeasibleError when the fleet has no lot to copy.
Fleet with_lot_count(Fleet fleet, std::size_t lots);

std::vector<ActiveDevice> active_devices(const Network& net, const Fleet& fleet, int hour);

// Bus injections for the hour with the given device reactive settings.
InjectionSet hour_injections(const Network& net, const Fleet& fleet, int hour,
                             const std::vector<ActiveDevice>& devices, const std::vector<double>& q);

// Hourly partial objective a * sum_i |V_ref,i - V_i| + b * P_loss.
double hour_objective(const Network& net, const Scenario& scenario, const PowerFlowSolution& sol);

// Coordinate descent over device reactive settings. Each device in turn gets
// a bounded scalar search inside its capability range with a fresh power flow
// per trial; a move is kept only if it lowers the hour objective and leaves
// every device inside its capability range at the new voltages. In dgq-v2gq
// mode the PV-only sweep runs first, then all devices are swept together.
// Throws ConvergenceError when the Q = 0 power flow itself fails.
HourDispatch dispatch_q(const Study& study, const Fleet& fleet, int hour);

struct HourRecord {
    HourDispatch dispatch;
    LimitReport limits;
    double capability_excess = 0.0;
    bool solved = true;
};

struct SimulationResult {
    std::vector<HourRecord> hours;  // empty dispatch for hours whose base power flow failed
    ObjectiveBreakdown objective;
    double min_voltage = 0.0;
    double max_voltage = 0.0;
    double total_losses = 0.0;
};

inline constexpr double kDivergencePenalty = 1e6;

// Runs dispatch_q and the limit checks for every hour of the day.
SimulationResult simulate_day(const Study& study, const Fleet& fleet);

ObjectiveBreakdown evaluate_objective(const Study& study, const std::vector<int>& lot_buses);

}  // namespace v2gq
