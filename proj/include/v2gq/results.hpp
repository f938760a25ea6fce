#pragma once

#include <iosfwd>
#include <string>

#include "v2gq/placement.hpp"
#include "v2gq/scenario.hpp"

namespace v2gq {

// rank,lot_buses,v_dev,loss,cost,scalar,feasible,best  (lot_buses joined with ';')
void write_placements_csv(std::ostream& out, const PlacementResult& result);

// hour,device,bus,p_pu,q_pu  (device labels pv1.., lot1..; q > 0 consumes)
void write_dispatch_csv(std::ostream& out, const SimulationResult& sim);

// hour,bus,v_pu
void write_voltages_csv(std::ostream& out, const Network& net, const SimulationResult& sim);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace v2gq
