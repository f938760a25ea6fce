#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace v2gq {

using Complex = std::complex<double>;

enum class BusKind { slack, load };

// All electrical quantities are per-unit on the network's system base.
struct Bus {
    int id = 0;
    BusKind kind = BusKind::load;
    double p_load = 0.0;  // nominal active load P_NL
    double q_load = 0.0;  // nominal reactive load Q_NL
    double v_min = 0.95;
    double v_max = 1.05;

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double resistance = 0.0;
    double reactance = 0.0;
    double current_cap = 0.0;

    Complex impedance() const { return {resistance, reactance}; }
    Complex admittance() const { return 1.0 / impedance(); }

    bool operator==(const Branch&) const = default;
};

struct SystemBase {
    double mva = 10.0;
    double kv = 12.66;  // line-to-line

    double impedance_ohm() const { return kv * kv / mva; }
    double current_amp() const;
    double power_kva() const { return mva * 1000.0; }

    bool operator==(const SystemBase&) const = default;
};

// Immutable network model. The constructor enforces every structural
// invariant and throws ValidationError naming the offending element.
class Network {
  public:
    Network(std::vector<Bus> buses, std::vector<Branch> branches, SystemBase base = {}, bool radial = true,
            Complex slack_voltage = {1.0, 0.0});

    std::span<const Bus> buses() const { return buses_; }
    std::span<const Branch> branches() const { return branches_; }
    const Bus& bus(std::size_t index) const { return buses_[index]; }
    const Branch& branch(std::size_t index) const { return branches_[index]; }
    std::size_t bus_count() const { return buses_.size(); }
    std::size_t branch_count() const { return branches_.size(); }

    const SystemBase& base() const { return base_; }
    bool radial() const { return radial_; }
    Complex slack_voltage() const { return slack_voltage_; }
    std::size_t slack_index() const { return slack_index_; }

    // Position of a bus id in buses(); throws ValidationError for unknown ids.
    std::size_t index_of(int bus_id) const;
    bool has_bus(int bus_id) const;

    // Bus positions of each branch endpoint, parallel to branches().
    std::size_t from_index(std::size_t branch) const { return branch_ends_[branch].first; }
    std::size_t to_index(std::size_t branch) const { return branch_ends_[branch].second; }

    // Same topology and parameters with every nominal load multiplied by factor.
    Network scaled_loads(double factor) const;

    bool operator==(const Network& other) const;

  private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<std::pair<std::size_t, std::size_t>> branch_ends_;
    std::vector<int> index_by_id_;  // bus id -> position, -1 when absent
    SystemBase base_;
    bool radial_;
    Complex slack_voltage_;
    std::size_t slack_index_ = 0;
};

// Bus admittance matrix. Stored densely (feeders here are small) with a
// per-row sparsity list for the solver's inner loops.
class AdmittanceMatrix {
  public:
    struct Entry {
        std::size_t column;
        Complex value;
    };

    explicit AdmittanceMatrix(std::size_t n) : n_(n), dense_(n * n), rows_(n) {}

    std::size_t size() const { return n_; }
    Complex operator()(std::size_t i, std::size_t j) const { return dense_[i * n_ + j]; }
    double magnitude(std::size_t i, std::size_t j) const { return std::abs((*this)(i, j)); }
    double angle(std::size_t i, std::size_t j) const { return std::arg((*this)(i, j)); }

    // Nonzero entries of row i, diagonal included.
    std::span<const Entry> row(std::size_t i) const { return rows_[i]; }

    void add(std::size_t i, std::size_t j, Complex value);

  private:
    std::size_t n_;
    std::vector<Complex> dense_;
    std::vector<std::vector<Entry>> rows_;
};

// Y[i][j] = -y_series for each branch (i, j); Y[i][i] = sum of attached series admittances.
AdmittanceMatrix build_ybus(const Network& net);

}  // namespace v2gq
