#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "v2gq/grid.hpp"

namespace test {

inline std::string case_path(const std::string& name) { return std::string(V2GQ_CASES) + "/" + name; }

// Writes `content` to a fresh file under the system temp directory.
inline std::string temp_file(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "v2gq_unit";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << content;
    return path.string();
}

inline v2gq::Network two_bus(double r, double x, double p, double q) {
    return v2gq::Network({{1, v2gq::BusKind::slack, 0, 0}, {2, v2gq::BusKind::load, p, q}}, {{1, 2, r, x, 10.0}});
}

// Three-bus chain 1-2-3 with loads at 2 and 3.
inline v2gq::Network chain3(double p2, double q2, double p3, double q3) {
    return v2gq::Network({{1, v2gq::BusKind::slack, 0, 0}, {2, v2gq::BusKind::load, p2, q2}, {3, v2gq::BusKind::load, p3, q3}},
                         {{1, 2, 0.02, 0.04, 10.0}, {2, 3, 0.03, 0.05, 10.0}});
}

}  // namespace test
