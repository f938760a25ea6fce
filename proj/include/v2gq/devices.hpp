#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace v2gq {

inline constexpr int kHours = 24;

struct HourlyProfile {
    std::string id;
    std::array<double, kHours> values{};

    double operator[](int hour) const { return values[static_cast<std::size_t>(hour)]; }
    double peak() const;

    // Throws ValidationError unless every value is finite and nonnegative.
    void validate() const;

    bool operator==(const HourlyProfile&) const = default;
};

using ProfileSet = std::map<std::string, HourlyProfile, std::less<>>;

// Profile file: header `profile_id,h0,...,h23`, one profile per line,
// `#` comments and blank lines ignored.
ProfileSet parse_profiles(std::istream& in, const std::string& source = "<profiles>");
ProfileSet read_profiles(const std::string& path);
void write_profiles(std::ostream& out, const ProfileSet& profiles);

enum class ProfileShape { pv_bell, pev_evening_peak, load_double_peak, flat };

// Accepts the tags pv-bell, pev-evening-peak, load-double-peak, flat.
ProfileShape parse_shape(std::string_view tag);
const char* to_string(ProfileShape shape);

// Deterministic synthetic day profile with maximum value at most `level`.
// pv-bell is zero from 18:00 through 06:00; pev-evening-peak peaks around 19:00;
// load-double-peak has a late-morning and a larger evening peak; flat ignores the seed.
HourlyProfile synth_profile(ProfileShape shape, std::uint64_t seed, double level = 1.0, std::string id = {});

// Converter limits, per-unit on the system base. x_coupling is the coupling
// reactance between the converter terminal and the bus.
struct Converter {
    double s_rated = 0.0;
    double x_coupling = 0.05;
    double vc_max = 1.1;
    bool dc_link_limit = true;  // apply the dc-link voltage circle as well as the rating circle

    void validate() const;
};

struct QRange {
    double q_min = 0.0;
    double q_max = 0.0;

    bool contains(double q) const { return q >= q_min && q <= q_max; }
};

// Reactive range (consumption positive) allowed at active power p and bus
// voltage v by the rating circle Q^2 <= S^2 - P^2 and the dc-link circle
// (Q + V^2/X)^2 <= (Vc V / X)^2 - P^2. nullopt when the two sets do not meet.
// Throws ArgumentError unless 0 <= p <= s_rated and v > 0.
std::optional<QRange> q_capability(const Converter& conv, double p, double v);

// Largest excess of either capability inequality at (p, q, v); 0 when both hold.
double capability_violation(const Converter& conv, double p, double q, double v);

enum class DeviceKind { pv, pev_lot };

const char* to_string(DeviceKind kind);

struct PvUnit {
    int bus = 0;
    Converter converter;
    std::array<double, kHours> p_profile{};  // generated active power, per-unit
    std::string profile_id;

    void validate() const;
};

struct PevLot {
    int bus = 0;
    Converter converter;
    std::array<double, kHours> charge_profile{};  // charging demand P_L^PEV, per-unit
    int n_pev = 1;
    double cost_per_pev = 1.0;
    std::string profile_id;

    double cost() const { return n_pev * cost_per_pev; }
    void validate() const;
};

struct BusLoad {
    double p = 0.0;
    double q = 0.0;
};

// Active power and dispatched reactive power of one device in one hour.
// p is the device's own magnitude (PV generation or lot charging demand).
struct DeviceOutput {
    DeviceKind kind = DeviceKind::pev_lot;
    double p = 0.0;
    double q = 0.0;  // > 0 consumes reactive power
};

// Total bus load: lot charging adds to P, PV generation subtracts, device
// reactive power adds with its own sign.
BusLoad compose_load(BusLoad normal, std::span<const DeviceOutput> devices);

}  // namespace v2gq
