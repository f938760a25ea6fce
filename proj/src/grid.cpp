#include "v2gq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2gq/errors.hpp"

namespace v2gq {

namespace {

std::string branch_name(const Branch& br) {
    return "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus);
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

}  // namespace

double SystemBase::current_amp() const { return mva * 1e6 / (std::sqrt(3.0) * kv * 1e3); }

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, SystemBase base, bool radial,
                 Complex slack_voltage)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      base_(base),
      radial_(radial),
      slack_voltage_(slack_voltage) {
    if (buses_.empty()) throw ValidationError("network has no buses");
    if (!(base_.mva > 0.0) || !(base_.kv > 0.0)) throw ValidationError("system base must be positive");
    if (!(std::abs(slack_voltage_) > 0.0)) throw ValidationError("slack voltage must be nonzero");

    int max_id = 0;
    for (const auto& b : buses_) {
        if (b.id <= 0) throw ValidationError("bus id " + std::to_string(b.id) + " is not positive");
        max_id = std::max(max_id, b.id);
    }
    index_by_id_.assign(static_cast<std::size_t>(max_id) + 1, -1);

    int slack_count = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const auto& b = buses_[i];
        auto& slot = index_by_id_[static_cast<std::size_t>(b.id)];
        if (slot >= 0) throw ValidationError("duplicate bus id " + std::to_string(b.id));
        slot = static_cast<int>(i);
        if (!std::isfinite(b.p_load) || !std::isfinite(b.q_load))
            throw ValidationError("bus " + std::to_string(b.id) + " has a non-finite load");
        if (!(b.v_min < b.v_max))
            throw ValidationError("bus " + std::to_string(b.id) + " has v_min >= v_max");
        if (b.kind == BusKind::slack) {
            ++slack_count;
            slack_index_ = i;
        }
    }
    if (slack_count != 1)
        throw ValidationError("network must have exactly one slack bus, found " + std::to_string(slack_count));

    std::vector<std::size_t> parent(buses_.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    branch_ends_.reserve(branches_.size());
    for (const auto& br : branches_) {
        for (int end : {br.from_bus, br.to_bus}) {
            if (!has_bus(end))
                throw ValidationError(branch_name(br) + " references nonexistent bus " + std::to_string(end));
        }
        if (br.from_bus == br.to_bus) throw ValidationError(branch_name(br) + " is a self-loop");
        if (!(br.resistance >= 0.0)) throw ValidationError(branch_name(br) + " has negative resistance");
        if (!(br.reactance > 0.0)) throw ValidationError(branch_name(br) + " has nonpositive reactance");
        if (!(br.current_cap > 0.0)) throw ValidationError(branch_name(br) + " has nonpositive current capacity");
        const auto f = index_of(br.from_bus);
        const auto t = index_of(br.to_bus);
        branch_ends_.emplace_back(f, t);
        parent[find_root(parent, f)] = find_root(parent, t);
    }

    const auto root = find_root(parent, 0);
    for (std::size_t i = 1; i < buses_.size(); ++i) {
        if (find_root(parent, i) != root)
            throw ValidationError("network is disconnected: bus " + std::to_string(buses_[i].id) +
                                  " is not reachable from bus " + std::to_string(buses_[0].id));
    }
    if (radial_ && branches_.size() + 1 != buses_.size())
        throw ValidationError("radial network needs " + std::to_string(buses_.size() - 1) + " branches, found " +
                              std::to_string(branches_.size()));
}

bool Network::has_bus(int bus_id) const {
    return bus_id > 0 && static_cast<std::size_t>(bus_id) < index_by_id_.size() &&
           index_by_id_[static_cast<std::size_t>(bus_id)] >= 0;
}

std::size_t Network::index_of(int bus_id) const {
    if (!has_bus(bus_id)) throw ValidationError("unknown bus " + std::to_string(bus_id));
    return static_cast<std::size_t>(index_by_id_[static_cast<std::size_t>(bus_id)]);
}

Network Network::scaled_loads(double factor) const {
    auto buses = buses_;
    for (auto& b : buses) {
        b.p_load *= factor;
        b.q_load *= factor;
    }
    return Network(std::move(buses), branches_, base_, radial_, slack_voltage_);
}

bool Network::operator==(const Network& other) const {
    return buses_ == other.buses_ && branches_ == other.branches_ && base_ == other.base_ &&
           radial_ == other.radial_ && slack_voltage_ == other.slack_voltage_;
}

void AdmittanceMatrix::add(std::size_t i, std::size_t j, Complex value) {
    dense_[i * n_ + j] += value;
    auto& row = rows_[i];
    auto it = std::find_if(row.begin(), row.end(), [j](const Entry& e) { return e.column == j; });
    if (it == row.end())
        row.push_back({j, value});
    else
        it->value += value;
}

AdmittanceMatrix build_ybus(const Network& net) {
    AdmittanceMatrix y(net.bus_count());
    for (std::size_t i = 0; i < net.bus_count(); ++i) y.add(i, i, 0.0);
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto ys = net.branch(k).admittance();
        const auto f = net.from_index(k);
        const auto t = net.to_index(k);
        y.add(f, f, ys);
        y.add(t, t, ys);
        y.add(f, t, -ys);
        y.add(t, f, -ys);
    }
    return y;
}

}  // namespace v2gq
