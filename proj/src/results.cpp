#include "v2gq/results.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "v2gq/errors.hpp"

namespace v2gq {

void write_placements_csv(std::ostream& out, const PlacementResult& result) {
    out << "rank,lot_buses,v_dev,loss,cost,scalar,feasible,best\n" << std::setprecision(12);
    for (const auto& e : result.archive.entries) {
        out << e.rank << ',';
        for (std::size_t i = 0; i < e.genome.lot_buses.size(); ++i) out << (i ? ";" : "") << e.genome.lot_buses[i];
        out << ',' << e.objective.v_dev << ',' << e.objective.loss << ',' << e.objective.cost << ','
            << e.objective.scalar << ',' << (e.objective.feasible ? 1 : 0) << ','
            << (e.genome == result.best.genome ? 1 : 0) << '\n';
    }
}

void write_dispatch_csv(std::ostream& out, const SimulationResult& sim) {
    out << "hour,device,bus,p_pu,q_pu\n" << std::setprecision(12);
    for (const auto& rec : sim.hours) {
        const auto& d = rec.dispatch;
        for (std::size_t k = 0; k < d.devices.size(); ++k) {
            const auto& dev = d.devices[k];
            out << d.hour << ',' << (dev.kind == DeviceKind::pv ? "pv" : "lot") << dev.source + 1 << ',' << dev.bus
                << ',' << dev.p << ',' << d.q[k] << '\n';
        }
    }
}

void write_voltages_csv(std::ostream& out, const Network& net, const SimulationResult& sim) {
    out << "hour,bus,v_pu\n" << std::setprecision(12);
    for (const auto& rec : sim.hours) {
        if (!rec.solved) continue;
        const auto& sol = rec.dispatch.solution;
        for (std::size_t i = 0; i < net.bus_count(); ++i)
            out << rec.dispatch.hour << ',' << net.bus(i).id << ',' << sol.v_mag[i] << '\n';
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

}  // namespace v2gq
