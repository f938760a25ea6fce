#pragma once

namespace v2gq::two_bus {

// Two ideal sources V1∠delta1 and V2∠delta2 joined by a series impedance
// z_mag∠gamma (tan gamma = X / R). Angles in radians.
struct State {
    double v1 = 1.0;
    double delta1 = 0.0;
    double v2 = 1.0;
    double delta2 = 0.0;
    double z_mag = 1.0;
    double gamma = 0.0;

    // Throws ArgumentError unless v1, v2, z_mag > 0 and 0 <= gamma <= pi/2.
    void validate() const;

    static State from_rx(double v1, double delta1, double v2, double delta2, double r, double x);
};

struct Transfer {
    double p12 = 0.0;
    double q12 = 0.0;
};

enum class Direction { none, one_to_two, two_to_one };

struct FlowDirection {
    Direction active = Direction::none;
    Direction reactive = Direction::none;
};

// Power sent from bus 1 towards bus 2, exact for any impedance angle.
Transfer transfer_power_general(const State& s);

// X >> R limit: P12 = V1 V2 sin(d1 - d2) / X, Q12 = V1 (V1 - V2 cos(d1 - d2)) / X,
// with X taken as z_mag.
Transfer transfer_power_reactive_line(const State& s);

// Direction rules for a predominantly reactive line: active power follows the
// angle difference, reactive power follows the magnitude difference.
FlowDirection classify_direction(const State& s);

const char* to_string(Direction d);

}  // namespace v2gq::two_bus
