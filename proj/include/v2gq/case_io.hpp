#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "v2gq/devices.hpp"
#include "v2gq/grid.hpp"

namespace v2gq {

// One DEVICE row as written in a case file, before profiles are attached.
struct DeviceSpec {
    int bus = 0;
    DeviceKind kind = DeviceKind::pv;
    double s_rated_kva = 0.0;
    double x_coupling_pu = 0.05;  // on the device's own kVA rating
    double vc_max_pu = 1.1;
    std::string profile_id;
    int n_pev = 1;
    double cost_per_pev = 1.0;
    bool dc_link_limit = true;

    bool operator==(const DeviceSpec&) const = default;
};

struct Case {
    Network network;
    std::vector<DeviceSpec> devices;
    std::string load_profile_id;  // hourly multiplier on every nominal load; empty = constant 1
    std::string profiles_path;    // as written in the file (relative to the case file)
    std::string source_path;      // where the case was read from, empty for in-memory cases

    // profiles_path resolved against the case file's directory; empty when unset.
    std::string resolved_profiles_path() const;
};

enum class CaseFormat { text, json };

// Format from a tag ("text", "json") or, with an empty tag, from the extension.
CaseFormat case_format_for(const std::string& path, const std::string& tag = {});

Case parse_case_text(std::istream& in, const std::string& source = "<case>");
Case parse_case_json(std::istream& in, const std::string& source = "<case>");
Case load_case(const std::string& path, CaseFormat format);
Case load_case(const std::string& path);

void write_case_text(std::ostream& out, const Case& c);
void write_case_json(std::ostream& out, const Case& c);

// Devices with profiles attached and ratings converted to system per-unit.
struct Fleet {
    std::vector<PvUnit> pvs;
    std::vector<PevLot> lots;
    HourlyProfile load_shape;  // multiplier on nominal loads per hour

    double cost() const;
};

// Throws ValidationError for unknown profile ids, devices on unknown or slack
// buses, and profiles exceeding a device rating.
Fleet resolve_fleet(const Case& c, const ProfileSet& profiles);

}  // namespace v2gq
