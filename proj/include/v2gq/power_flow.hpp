#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "v2gq/grid.hpp"

namespace v2gq {

// Net injection P_G - P_L and Q_G - Q_L per bus position, per-unit. The
// slack entry is ignored: its injection is a solver output.
struct InjectionSet {
    std::vector<double> p;
    std::vector<double> q;

    explicit InjectionSet(std::size_t n = 0) : p(n, 0.0), q(n, 0.0) {}

    // Injections equal to minus the nominal bus loads.
    static InjectionSet from_loads(const Network& net);
};

struct SolverSettings {
    double tolerance = 1e-8;
    int max_iterations = 50;
};

struct BranchFlow {
    Complex current;  // from -> to
    Complex s_from;   // power entering the branch at the from end
    Complex s_to;     // power entering the branch at the to end
    double i_mag = 0.0;
    double loss_p = 0.0;  // I^2 R
    double loss_q = 0.0;  // I^2 X
};

struct PowerFlowSolution {
    std::vector<Complex> voltage;
    std::vector<double> v_mag;
    std::vector<double> angle;  // radians
    std::vector<BranchFlow> branches;
    Complex slack_power;
    double total_losses = 0.0;
    int iterations = 0;
    double max_mismatch = 0.0;
    bool converged = false;

    double min_voltage() const;
    double max_voltage() const;
};

// Newton-Raphson in polar coordinates on the bus power-balance equations.
// Caches the admittance matrix of one network; solve() is const and reentrant.
class PowerFlowSolver {
  public:
    explicit PowerFlowSolver(const Network& net, SolverSettings settings = {});

    const Network& network() const { return net_; }
    const AdmittanceMatrix& ybus() const { return ybus_; }
    const SolverSettings& settings() const { return settings_; }

    // Flat start. Throws ConvergenceError (or SingularJacobianError) on failure.
    PowerFlowSolution solve(const InjectionSet& inj) const;

    // Starts from the given bus voltages; the slack entry is overridden.
    PowerFlowSolution solve(const InjectionSet& inj, std::span<const Complex> initial) const;

  private:
    struct Block {
        int row, col;  // unknown indices
        Eigen::Matrix2d value;  // [dP/dth dP/dV; dQ/dth dQ/dV]
    };

    void jacobian(const std::vector<Complex>& v, const std::vector<double>& vm, const std::vector<Complex>& current,
                  std::vector<Block>& blocks) const;
    bool tree_step(const std::vector<Block>& blocks, const Eigen::VectorXd& f, Eigen::VectorXd& dx) const;
    bool sparse_step(const std::vector<Block>& blocks, const Eigen::VectorXd& f, Eigen::VectorXd& dx) const;
    double step_residual(const std::vector<Block>& blocks, const Eigen::VectorXd& f, const Eigen::VectorXd& dx) const;
    PowerFlowSolution finish(std::vector<Complex> v, int iterations, double mismatch) const;
    double mismatch(const std::vector<Complex>& v, const InjectionSet& inj, Eigen::VectorXd& f,
                    std::vector<Complex>& current) const;

    Network net_;
    AdmittanceMatrix ybus_;
    SolverSettings settings_;
    std::vector<std::size_t> pq_;   // non-slack bus positions
    std::vector<int> unknown_of_;   // bus position -> unknown index, -1 for slack
    std::vector<int> tree_order_;   // unknowns, leaves first; empty for meshed networks
    std::vector<int> tree_parent_;  // parent unknown, -1 when the parent is the slack
};

PowerFlowSolution solve(const Network& net, const InjectionSet& inj, SolverSettings settings = {});

// Sum of I^2 R over branches. Throws ArgumentError for a non-converged solution.
double compute_losses(const Network& net, const PowerFlowSolution& sol);

struct VoltageViolation {
    int bus = 0;
    double v = 0.0;
    double bound = 0.0;
    bool upper = false;
};

struct ThermalViolation {
    std::size_t branch = 0;  // 0-based position in Network::branches()
    int from_bus = 0;
    int to_bus = 0;
    double current = 0.0;
    double cap = 0.0;
};

struct LimitReport {
    std::vector<VoltageViolation> voltage;
    std::vector<ThermalViolation> thermal;
    double worst_voltage_margin = 0.0;  // min over buses of distance to the nearest bound; < 0 when violated
    double worst_thermal_margin = 0.0;  // min over branches of I_CAP - I

    bool ok() const { return voltage.empty() && thermal.empty(); }
    // Sum of per-unit excursions beyond the bounds.
    double total_violation() const;
};

LimitReport check_limits(const Network& net, const PowerFlowSolution& sol);

// Bus table (bus,v_pu,angle_deg), a blank line, then the branch table
// (branch,from,to,i_pu,p_from_pu,q_from_pu,loss_pu).
void write_solution_table(std::ostream& out, const Network& net, const PowerFlowSolution& sol);

}  // namespace v2gq
