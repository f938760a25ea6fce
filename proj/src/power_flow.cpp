#include "v2gq/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/SparseLU>

#include "v2gq/errors.hpp"

namespace v2gq {

namespace {

constexpr double kDivergenceMismatch = 1e6;

constexpr double kSingularStepResidual = 1e-6;

}  // namespace

InjectionSet InjectionSet::from_loads(const Network& net) {
    InjectionSet inj(net.bus_count());
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        inj.p[i] = -net.bus(i).p_load;
        inj.q[i] = -net.bus(i).q_load;
    }
    return inj;
}

double PowerFlowSolution::min_voltage() const { return *std::min_element(v_mag.begin(), v_mag.end()); }
double PowerFlowSolution::max_voltage() const { return *std::max_element(v_mag.begin(), v_mag.end()); }

PowerFlowSolver::PowerFlowSolver(const Network& net, SolverSettings settings)
    : net_(net), ybus_(build_ybus(net)), settings_(settings), unknown_of_(net.bus_count(), -1) {
    if (!(settings_.tolerance > 0.0)) throw ArgumentError("solver tolerance must be positive");
    if (settings_.max_iterations < 1) throw ArgumentError("solver needs at least one iteration");
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        if (i == net.slack_index()) continue;
        unknown_of_[i] = static_cast<int>(pq_.size());
        pq_.push_back(i);
    }
    if (net.branch_count() + 1 != net.bus_count()) return;

    std::vector<std::vector<std::size_t>> adjacent(net.bus_count());
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        adjacent[net.from_index(k)].push_back(net.to_index(k));
        adjacent[net.to_index(k)].push_back(net.from_index(k));
    }
    tree_parent_.assign(pq_.size(), -1);
    std::vector<bool> seen(net.bus_count(), false);
    std::vector<std::size_t> queue{net.slack_index()};
    seen[net.slack_index()] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto i = queue[head];
        for (auto j : adjacent[i]) {
            if (seen[j]) continue;
            seen[j] = true;
            tree_parent_[static_cast<std::size_t>(unknown_of_[j])] = unknown_of_[i];
            queue.push_back(j);
        }
    }
    for (auto it = queue.rbegin(); it != queue.rend(); ++it)
        if (*it != net.slack_index()) tree_order_.push_back(unknown_of_[*it]);
}

void PowerFlowSolver::jacobian(const std::vector<Complex>& v, const std::vector<double>& vm,
                               const std::vector<Complex>& current, std::vector<Block>& blocks) const {
    blocks.clear();
    for (std::size_t r = 0; r < pq_.size(); ++r) {
        const auto i = pq_[r];
        const Complex vi = v[i];
        const Complex ui = vi / vm[i];
        for (const auto& e : ybus_.row(i)) {
            const auto j = e.column;
            const int c = unknown_of_[j];
            if (c < 0) continue;
            Complex ds_dang, ds_dmag;
            if (j == i) {
                const Complex yv = e.value * vi;
                ds_dang = Complex{0.0, 1.0} * vi * std::conj(current[i] - yv);
                ds_dmag = vi * std::conj(e.value * ui) + std::conj(current[i]) * ui;
            } else {
                const Complex uj = v[j] / vm[j];
                ds_dang = Complex{0.0, -1.0} * vi * std::conj(e.value * v[j]);
                ds_dmag = vi * std::conj(e.value * uj);
            }
            Eigen::Matrix2d b;
            b << ds_dang.real(), ds_dmag.real(), ds_dang.imag(), ds_dmag.imag();
            blocks.push_back({static_cast<int>(r), c, b});
        }
    }
}

// Block elimination from the leaves toward the slack. A radial feeder gives no
// fill-in, so this costs one 2x2 inverse per bus.
bool PowerFlowSolver::tree_step(const std::vector<Block>& blocks, const Eigen::VectorXd& f,
                                Eigen::VectorXd& dx) const {
    const auto m = pq_.size();
    const auto mi = static_cast<Eigen::Index>(m);
    std::vector<Eigen::Matrix2d> diag(m, Eigen::Matrix2d::Zero()), up(m, Eigen::Matrix2d::Zero()),
        down(m, Eigen::Matrix2d::Zero()), inv(m);
    for (const auto& b : blocks) {
        const auto r = static_cast<std::size_t>(b.row), c = static_cast<std::size_t>(b.col);
        if (r == c)
            diag[r] = b.value;
        else if (tree_parent_[r] == b.col)
            up[r] = b.value;  // row child, column parent
        else
            down[c] = b.value;  // row parent, column child
    }
    std::vector<Eigen::Vector2d> rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        rhs[k] = {-f[ki], -f[mi + ki]};
    }
    for (int k : tree_order_) {
        const auto ku = static_cast<std::size_t>(k);
        const auto& d = diag[ku];
        const double det = d.determinant();
        if (!(std::abs(det) > 1e-14 * d.squaredNorm())) return false;
        inv[ku] = d.inverse();
        const int p = tree_parent_[ku];
        if (p < 0) continue;
        const auto pu = static_cast<std::size_t>(p);
        const Eigen::Matrix2d g = down[ku] * inv[ku];
        diag[pu] -= g * up[ku];
        rhs[pu] -= g * rhs[ku];
    }
    std::vector<Eigen::Vector2d> x(m);
    for (auto it = tree_order_.rbegin(); it != tree_order_.rend(); ++it) {
        const auto ku = static_cast<std::size_t>(*it);
        const int p = tree_parent_[ku];
        Eigen::Vector2d b = rhs[ku];
        if (p >= 0) b -= up[ku] * x[static_cast<std::size_t>(p)];
        x[ku] = inv[ku] * b;
    }
    dx.resize(2 * mi);
    for (std::size_t k = 0; k < m; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        dx[ki] = x[k][0];
        dx[mi + ki] = x[k][1];
    }
    return true;
}

bool PowerFlowSolver::sparse_step(const std::vector<Block>& blocks, const Eigen::VectorXd& f,
                                  Eigen::VectorXd& dx) const {
    const auto m = static_cast<Eigen::Index>(pq_.size());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(4 * blocks.size());
    for (const auto& b : blocks) {
        entries.emplace_back(b.row, b.col, b.value(0, 0));
        entries.emplace_back(b.row, m + b.col, b.value(0, 1));
        entries.emplace_back(m + b.row, b.col, b.value(1, 0));
        entries.emplace_back(m + b.row, m + b.col, b.value(1, 1));
    }
    Eigen::SparseMatrix<double> jac(2 * m, 2 * m);
    jac.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) return false;
    dx = lu.solve(-f);
    return true;
}

double PowerFlowSolver::step_residual(const std::vector<Block>& blocks, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& dx) const {
    const auto m = static_cast<Eigen::Index>(pq_.size());
    Eigen::VectorXd r = f;
    for (const auto& b : blocks) {
        const Eigen::Vector2d x{dx[b.col], dx[m + b.col]};
        const Eigen::Vector2d y = b.value * x;
        r[b.row] += y[0];
        r[m + b.row] += y[1];
    }
    const double res = r.norm() / f.norm();
    return std::isfinite(res) ? res : std::numeric_limits<double>::infinity();
}

PowerFlowSolution PowerFlowSolver::solve(const InjectionSet& inj) const {
    std::vector<Complex> flat(net_.bus_count(), Complex{1.0, 0.0});
    return solve(inj, flat);
}

double PowerFlowSolver::mismatch(const std::vector<Complex>& v, const InjectionSet& inj, Eigen::VectorXd& f,
                                 std::vector<Complex>& current) const {
    const auto m = pq_.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
        Complex sum{};
        for (const auto& e : ybus_.row(i)) sum += e.value * v[e.column];
        current[i] = sum;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const auto i = pq_[k];
        const Complex s = v[i] * std::conj(current[i]);
        f[static_cast<Eigen::Index>(k)] = s.real() - inj.p[i];
        f[static_cast<Eigen::Index>(m + k)] = s.imag() - inj.q[i];
        worst = std::max({worst, std::abs(s.real() - inj.p[i]), std::abs(s.imag() - inj.q[i])});
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return std::numeric_limits<double>::infinity();
    }
    return worst;
}

PowerFlowSolution PowerFlowSolver::solve(const InjectionSet& inj, std::span<const Complex> initial) const {
    const auto n = net_.bus_count();
    if (inj.p.size() != n || inj.q.size() != n) throw ArgumentError("injection set does not match bus count");
    if (initial.size() != n) throw ArgumentError("initial voltage vector does not match bus count");
    for (auto i : pq_) {
        if (!std::isfinite(inj.p[i]) || !std::isfinite(inj.q[i]))
            throw ArgumentError("non-finite injection at bus " + std::to_string(net_.bus(i).id));
    }

    std::vector<Complex> v(initial.begin(), initial.end());
    v[net_.slack_index()] = net_.slack_voltage();
    std::vector<double> vm(n), va(n);
    for (std::size_t i = 0; i < n; ++i) {
        vm[i] = std::abs(v[i]);
        va[i] = std::arg(v[i]);
    }

    const auto m = static_cast<Eigen::Index>(pq_.size());
    Eigen::VectorXd f(2 * m);
    std::vector<Block> blocks;
    std::vector<Complex> current(n);

    double worst = mismatch(v, inj, f, current);
    int iter = 0;
    while (worst > settings_.tolerance) {
        if (iter >= settings_.max_iterations)
            throw ConvergenceError("power flow did not converge in " + std::to_string(iter) + " iterations",
                                   iter, worst, false);
        if (!std::isfinite(worst) || worst > kDivergenceMismatch)
            throw ConvergenceError("power flow diverged at iteration " + std::to_string(iter), iter, worst, true);

        jacobian(v, vm, current, blocks);
        Eigen::VectorXd dx;
        double residual = std::numeric_limits<double>::infinity();
        if (!tree_order_.empty() && tree_step(blocks, f, dx)) residual = step_residual(blocks, f, dx);
        if (!(residual <= kSingularStepResidual) && sparse_step(blocks, f, dx))
            residual = step_residual(blocks, f, dx);
        if (!(residual <= kSingularStepResidual))
            throw SingularJacobianError("singular Jacobian at iteration " + std::to_string(iter), iter, worst,
                                        residual);
        ++iter;

        for (Eigen::Index k = 0; k < m; ++k) {
            const auto i = pq_[static_cast<std::size_t>(k)];
            va[i] += dx[k];
            vm[i] += dx[m + k];
            if (!(vm[i] > 0.0))
                throw ConvergenceError("voltage collapsed at bus " + std::to_string(net_.bus(i).id), iter, worst,
                                       true);
            v[i] = std::polar(vm[i], va[i]);
        }
        worst = mismatch(v, inj, f, current);
    }
    return finish(std::move(v), iter, worst);
}

PowerFlowSolution PowerFlowSolver::finish(std::vector<Complex> v, int iterations, double mismatch) const {
    PowerFlowSolution sol;
    const auto n = v.size();
    sol.v_mag.resize(n);
    sol.angle.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.v_mag[i] = std::abs(v[i]);
        sol.angle[i] = std::arg(v[i]);
    }
    const auto s = net_.slack_index();
    Complex slack_current{};
    for (const auto& e : ybus_.row(s)) slack_current += e.value * v[e.column];
    sol.slack_power = v[s] * std::conj(slack_current);

    sol.branches.reserve(net_.branch_count());
    for (std::size_t k = 0; k < net_.branch_count(); ++k) {
        const auto& br = net_.branch(k);
        const auto vf = v[net_.from_index(k)];
        const auto vt = v[net_.to_index(k)];
        BranchFlow flow;
        flow.current = (vf - vt) * br.admittance();
        flow.i_mag = std::abs(flow.current);
        flow.s_from = vf * std::conj(flow.current);
        flow.s_to = -vt * std::conj(flow.current);
        flow.loss_p = flow.i_mag * flow.i_mag * br.resistance;
        flow.loss_q = flow.i_mag * flow.i_mag * br.reactance;
        sol.total_losses += flow.loss_p;
        sol.branches.push_back(flow);
    }
    sol.voltage = std::move(v);
    sol.iterations = iterations;
    sol.max_mismatch = mismatch;
    sol.converged = true;
    return sol;
}

PowerFlowSolution solve(const Network& net, const InjectionSet& inj, SolverSettings settings) {
    return PowerFlowSolver(net, settings).solve(inj);
}

double compute_losses(const Network& net, const PowerFlowSolution& sol) {
    if (!sol.converged) throw ArgumentError("losses requested for a non-converged power-flow solution");
    if (sol.branches.size() != net.branch_count())
        throw ArgumentError("solution does not belong to this network");
    double total = 0.0;
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const double i = sol.branches[k].i_mag;
        total += i * i * net.branch(k).resistance;
    }
    return total;
}

double LimitReport::total_violation() const {
    double total = 0.0;
    for (const auto& v : voltage) total += std::abs(v.v - v.bound);
    for (const auto& t : thermal) total += t.current - t.cap;
    return total;
}

LimitReport check_limits(const Network& net, const PowerFlowSolution& sol) {
    if (!sol.converged) throw ArgumentError("limit check requested for a non-converged power-flow solution");
    if (sol.v_mag.size() != net.bus_count() || sol.branches.size() != net.branch_count())
        throw ArgumentError("solution does not belong to this network");
    LimitReport report;
    report.worst_voltage_margin = std::numeric_limits<double>::infinity();
    report.worst_thermal_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& b = net.bus(i);
        const double v = sol.v_mag[i];
        report.worst_voltage_margin = std::min({report.worst_voltage_margin, v - b.v_min, b.v_max - v});
        if (v < b.v_min) report.voltage.push_back({b.id, v, b.v_min, false});
        if (v > b.v_max) report.voltage.push_back({b.id, v, b.v_max, true});
    }
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branch(k);
        const double i = sol.branches[k].i_mag;
        report.worst_thermal_margin = std::min(report.worst_thermal_margin, br.current_cap - i);
        if (i > br.current_cap) report.thermal.push_back({k, br.from_bus, br.to_bus, i, br.current_cap});
    }
    return report;
}

void write_solution_table(std::ostream& out, const Network& net, const PowerFlowSolution& sol) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::fixed;
    out << "bus,v_pu,angle_deg\n";
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        out << net.bus(i).id << ',' << std::setprecision(8) << sol.v_mag[i] << ',' << std::setprecision(6)
            << sol.angle[i] * 180.0 / std::numbers::pi << '\n';
    }
    out << "\nbranch,from,to,i_pu,p_from_pu,q_from_pu,loss_pu\n" << std::setprecision(8);
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branch(k);
        const auto& fl = sol.branches[k];
        out << k + 1 << ',' << br.from_bus << ',' << br.to_bus << ',' << fl.i_mag << ',' << fl.s_from.real() << ','
            << fl.s_from.imag() << ',' << fl.loss_p << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace v2gq
