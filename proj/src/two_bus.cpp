#include "v2gq/two_bus.hpp"

#include <cmath>
#include <numbers>

#include "v2gq/errors.hpp"

namespace v2gq::two_bus {

namespace {

Direction compare(double side1, double side2) {
    if (side1 > side2) return Direction::one_to_two;
    if (side1 < side2) return Direction::two_to_one;
    return Direction::none;
}

}  // namespace

void State::validate() const {
    if (!(v1 > 0.0) || !(v2 > 0.0)) throw ArgumentError("two-bus voltages must be positive");
    if (!(z_mag > 0.0)) throw ArgumentError("two-bus impedance magnitude must be positive");
    if (!(gamma >= 0.0 && gamma <= std::numbers::pi / 2)) throw ArgumentError("impedance angle must lie in [0, pi/2]");
}

State State::from_rx(double v1, double delta1, double v2, double delta2, double r, double x) {
    State s{v1, delta1, v2, delta2, std::hypot(r, x), std::atan2(x, r)};
    s.validate();
    return s;
}

Transfer transfer_power_general(const State& s) {
    s.validate();
    const double self = s.v1 * s.v1 / s.z_mag;
    const double mutual = s.v1 * s.v2 / s.z_mag;
    const double phi = s.gamma + s.delta1 - s.delta2;
    return {self * std::cos(s.gamma) - mutual * std::cos(phi), self * std::sin(s.gamma) - mutual * std::sin(phi)};
}

Transfer transfer_power_reactive_line(const State& s) {
    s.validate();
    const double x = s.z_mag;
    const double d = s.delta1 - s.delta2;
    return {s.v1 * s.v2 * std::sin(d) / x, s.v1 / x * (s.v1 - s.v2 * std::cos(d))};
}

FlowDirection classify_direction(const State& s) {
    s.validate();
    return {compare(s.delta1, s.delta2), compare(s.v1, s.v2)};
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::one_to_two:
            return "1->2";
        case Direction::two_to_one:
            return "2->1";
        case Direction::none:
            break;
    }
    return "none";
}

}  // namespace v2gq::two_bus
