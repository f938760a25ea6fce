#include "v2gq/case_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"
#include "v2gq/errors.hpp"

namespace v2gq {

namespace {

using json = nlohmann::json;

enum class Section { none, system, bus, branch, device };

struct TableSchema {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const TableSchema& schema_for(Section s) {
    static const TableSchema system{{"key", "value"}, {}};
    static const TableSchema bus{{"id", "kind", "p_load_kw", "q_load_kvar"}, {"v_min_pu", "v_max_pu"}};
    static const TableSchema branch{{"from", "to", "r_ohm", "x_ohm", "i_cap_a"}, {}};
    static const TableSchema device{{"bus", "type", "s_rated_kva", "x_coupling_pu", "vc_max_pu", "profile_id"},
                                    {"n_pev", "cost_per_pev", "dc_link_limit"}};
    switch (s) {
        case Section::system:
            return system;
        case Section::bus:
            return bus;
        case Section::branch:
            return branch;
        default:
            return device;
    }
}

// Column name -> position for the current section, built from its header line.
class Row {
  public:
    Row(const std::map<std::string, std::size_t>& columns, std::vector<std::string> cells, const std::string& source,
        int line)
        : columns_(columns), cells_(std::move(cells)), source_(source), line_(line) {}

    bool has(const std::string& name) const { return columns_.count(name) != 0; }
    const std::string& str(const std::string& name) const { return cells_[columns_.at(name)]; }
    double num(const std::string& name) const { return text::to_double(str(name), source_, line_); }
    int integer(const std::string& name) const { return text::to_int(str(name), source_, line_); }
    bool flag(const std::string& name) const { return parse_bool(str(name)); }

    bool parse_bool(const std::string& s) const {
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ParseError(source_, line_, "invalid boolean '" + s + "'");
    }

  private:
    const std::map<std::string, std::size_t>& columns_;
    std::vector<std::string> cells_;
    const std::string& source_;
    int line_;
};

std::string format_number(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

DeviceKind parse_kind(const std::string& s, const std::string& source, int line) {
    if (s == "pv") return DeviceKind::pv;
    if (s == "pevlot") return DeviceKind::pev_lot;
    throw ParseError(source, line, "unknown device type '" + s + "' (expected pv or pevlot)");
}

struct Raw {
    SystemBase base;
    bool radial = true;
    double slack_v = 1.0;
    double slack_angle_deg = 0.0;
    std::string load_profile;
    std::string profiles;
    std::vector<Bus> buses;  // engineering units until the base is known
    std::vector<Branch> branches;
    std::vector<DeviceSpec> devices;
};

Case finish(Raw raw, const std::string& source) {
    const double kva = raw.base.power_kva();
    const double zb = raw.base.impedance_ohm();
    const double ib = raw.base.current_amp();
    for (auto& b : raw.buses) {
        b.p_load /= kva;
        b.q_load /= kva;
    }
    for (auto& br : raw.branches) {
        br.resistance /= zb;
        br.reactance /= zb;
        br.current_cap /= ib;
    }
    const Complex slack = std::polar(raw.slack_v, raw.slack_angle_deg * std::numbers::pi / 180.0);
    Network net(std::move(raw.buses), std::move(raw.branches), raw.base, raw.radial, slack);
    for (const auto& d : raw.devices) {
        if (!net.has_bus(d.bus)) throw ValidationError("device references nonexistent bus " + std::to_string(d.bus));
    }
    return Case{std::move(net), std::move(raw.devices), std::move(raw.load_profile), std::move(raw.profiles), source};
}

void apply_system_key(Raw& raw, const std::string& key, const std::string& value, const Row& row,
                      const std::string& source, int line) {
    if (key == "base_mva")
        raw.base.mva = text::to_double(value, source, line);
    else if (key == "base_kv")
        raw.base.kv = text::to_double(value, source, line);
    else if (key == "radial")
        raw.radial = row.parse_bool(value);
    else if (key == "slack_v_pu")
        raw.slack_v = text::to_double(value, source, line);
    else if (key == "slack_angle_deg")
        raw.slack_angle_deg = text::to_double(value, source, line);
    else if (key == "load_profile")
        raw.load_profile = value;
    else if (key == "profiles")
        raw.profiles = value;
    else
        throw ParseError(source, line, "unknown system key '" + key + "'");
}

}  // namespace

std::string Case::resolved_profiles_path() const {
    if (profiles_path.empty()) return {};
    std::filesystem::path p(profiles_path);
    if (p.is_absolute() || source_path.empty()) return p.string();
    return (std::filesystem::path(source_path).parent_path() / p).string();
}

CaseFormat case_format_for(const std::string& path, const std::string& tag) {
    if (tag == "text") return CaseFormat::text;
    if (tag == "json") return CaseFormat::json;
    if (!tag.empty()) throw ArgumentError("unknown case format '" + tag + "'");
    return std::filesystem::path(path).extension() == ".json" ? CaseFormat::json : CaseFormat::text;
}

Case parse_case_text(std::istream& in, const std::string& source) {
    Raw raw;
    Section section = Section::none;
    bool need_header = false;
    std::map<std::string, std::size_t> columns;
    bool seen_bus = false, seen_branch = false;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::strip_comment(line);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (need_header) throw ParseError(source, line_no, "section without header line");
            if (body == "[SYSTEM]")
                section = Section::system;
            else if (body == "[BUS]")
                section = Section::bus, seen_bus = true;
            else if (body == "[BRANCH]")
                section = Section::branch, seen_branch = true;
            else if (body == "[DEVICE]")
                section = Section::device;
            else
                throw ParseError(source, line_no, "unknown section " + std::string(body));
            need_header = true;
            continue;
        }
        if (section == Section::none) throw ParseError(source, line_no, "data before the first section");

        auto cells = text::split_csv(body);
        if (need_header) {
            const auto& schema = schema_for(section);
            columns.clear();
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const auto& name = cells[i];
                const bool known = std::count(schema.required.begin(), schema.required.end(), name) ||
                                   std::count(schema.optional.begin(), schema.optional.end(), name);
                if (!known) throw ParseError(source, line_no, "unknown column '" + name + "'");
                if (!columns.emplace(name, i).second) throw ParseError(source, line_no, "duplicate column " + name);
            }
            for (const auto& name : schema.required) {
                if (!columns.count(name)) throw ParseError(source, line_no, "header is missing column " + name);
            }
            need_header = false;
            continue;
        }
        if (cells.size() != columns.size())
            throw ParseError(source, line_no,
                             "expected " + std::to_string(columns.size()) + " columns, found " +
                                 std::to_string(cells.size()));
        const Row row(columns, std::move(cells), source, line_no);

        switch (section) {
            case Section::system:
                apply_system_key(raw, row.str("key"), row.str("value"), row, source, line_no);
                break;
            case Section::bus: {
                Bus b;
                b.id = row.integer("id");
                const auto& kind = row.str("kind");
                if (kind == "slack")
                    b.kind = BusKind::slack;
                else if (kind == "load")
                    b.kind = BusKind::load;
                else
                    throw ParseError(source, line_no, "unknown bus kind '" + kind + "'");
                b.p_load = row.num("p_load_kw");
                b.q_load = row.num("q_load_kvar");
                if (row.has("v_min_pu")) b.v_min = row.num("v_min_pu");
                if (row.has("v_max_pu")) b.v_max = row.num("v_max_pu");
                raw.buses.push_back(b);
                break;
            }
            case Section::branch:
                raw.branches.push_back(
                    {row.integer("from"), row.integer("to"), row.num("r_ohm"), row.num("x_ohm"), row.num("i_cap_a")});
                break;
            case Section::device: {
                DeviceSpec d;
                d.bus = row.integer("bus");
                d.kind = parse_kind(row.str("type"), source, line_no);
                d.s_rated_kva = row.num("s_rated_kva");
                d.x_coupling_pu = row.num("x_coupling_pu");
                d.vc_max_pu = row.num("vc_max_pu");
                d.profile_id = row.str("profile_id");
                if (row.has("n_pev")) d.n_pev = row.integer("n_pev");
                if (row.has("cost_per_pev")) d.cost_per_pev = row.num("cost_per_pev");
                if (row.has("dc_link_limit")) d.dc_link_limit = row.flag("dc_link_limit");
                raw.devices.push_back(d);
                break;
            }
            case Section::none:
                break;
        }
    }
    if (need_header) throw ParseError(source, line_no, "section without header line");
    if (!seen_bus) throw ParseError(source, line_no, "missing [BUS] section");
    if (!seen_branch) throw ParseError(source, line_no, "missing [BRANCH] section");
    return finish(std::move(raw), source);
}

Case parse_case_json(std::istream& in, const std::string& source) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        SystemBase base{j.at("base").at("mva").get<double>(), j.at("base").at("kv").get<double>()};
        const auto slack = j.value("slack_voltage", std::vector<double>{1.0, 0.0});
        if (slack.size() != 2) throw ParseError(source, 0, "slack_voltage must be [re, im]");

        std::vector<Bus> buses;
        for (const auto& b : j.at("buses")) {
            const auto kind = b.at("kind").get<std::string>();
            if (kind != "slack" && kind != "load") throw ParseError(source, 0, "unknown bus kind '" + kind + "'");
            buses.push_back({b.at("id").get<int>(), kind == "slack" ? BusKind::slack : BusKind::load,
                             b.at("p").get<double>(), b.at("q").get<double>(), b.value("v_min", 0.95),
                             b.value("v_max", 1.05)});
        }
        std::vector<Branch> branches;
        for (const auto& br : j.at("branches")) {
            branches.push_back({br.at("from").get<int>(), br.at("to").get<int>(), br.at("r").get<double>(),
                                br.at("x").get<double>(), br.at("i_cap").get<double>()});
        }
        std::vector<DeviceSpec> devices;
        for (const auto& d : j.value("devices", json::array())) {
            DeviceSpec s;
            s.bus = d.at("bus").get<int>();
            s.kind = parse_kind(d.at("type").get<std::string>(), source, 0);
            s.s_rated_kva = d.at("s_rated_kva").get<double>();
            s.x_coupling_pu = d.value("x_coupling_pu", 0.05);
            s.vc_max_pu = d.value("vc_max_pu", 1.1);
            s.profile_id = d.at("profile_id").get<std::string>();
            s.n_pev = d.value("n_pev", 1);
            s.cost_per_pev = d.value("cost_per_pev", 1.0);
            s.dc_link_limit = d.value("dc_link_limit", true);
            devices.push_back(s);
        }
        Network net(std::move(buses), std::move(branches), base, j.value("radial", true), {slack[0], slack[1]});
        for (const auto& d : devices) {
            if (!net.has_bus(d.bus))
                throw ValidationError("device references nonexistent bus " + std::to_string(d.bus));
        }
        return Case{std::move(net), std::move(devices), j.value("load_profile", std::string{}),
                    j.value("profiles", std::string{}), source};
    } catch (const json::exception& e) {
        throw ParseError(source, 0, e.what());
    }
}

Case load_case(const std::string& path, CaseFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open case file " + path);
    return format == CaseFormat::json ? parse_case_json(in, path) : parse_case_text(in, path);
}

Case load_case(const std::string& path) { return load_case(path, case_format_for(path)); }

void write_case_text(std::ostream& out, const Case& c) {
    const auto& net = c.network;
    const auto& base = net.base();
    const double kva = base.power_kva();
    const double zb = base.impedance_ohm();
    const double ib = base.current_amp();
    const auto slack = net.slack_voltage();

    out << "[SYSTEM]\nkey,value\n";
    out << "base_mva," << format_number(base.mva) << '\n';
    out << "base_kv," << format_number(base.kv) << '\n';
    out << "radial," << (net.radial() ? "true" : "false") << '\n';
    out << "slack_v_pu," << format_number(std::abs(slack)) << '\n';
    out << "slack_angle_deg," << format_number(std::arg(slack) * 180.0 / std::numbers::pi) << '\n';
    if (!c.load_profile_id.empty()) out << "load_profile," << c.load_profile_id << '\n';
    if (!c.profiles_path.empty()) out << "profiles," << c.profiles_path << '\n';

    out << "\n[BUS]\nid,kind,p_load_kw,q_load_kvar,v_min_pu,v_max_pu\n";
    for (const auto& b : net.buses()) {
        out << b.id << ',' << (b.kind == BusKind::slack ? "slack" : "load") << ',' << format_number(b.p_load * kva)
            << ',' << format_number(b.q_load * kva) << ',' << format_number(b.v_min) << ','
            << format_number(b.v_max) << '\n';
    }
    out << "\n[BRANCH]\nfrom,to,r_ohm,x_ohm,i_cap_a\n";
    for (const auto& br : net.branches()) {
        out << br.from_bus << ',' << br.to_bus << ',' << format_number(br.resistance * zb) << ','
            << format_number(br.reactance * zb) << ',' << format_number(br.current_cap * ib) << '\n';
    }
    if (!c.devices.empty()) {
        out << "\n[DEVICE]\nbus,type,s_rated_kva,x_coupling_pu,vc_max_pu,profile_id,n_pev,cost_per_pev,dc_link_limit\n";
        for (const auto& d : c.devices) {
            out << d.bus << ',' << to_string(d.kind) << ',' << format_number(d.s_rated_kva) << ','
                << format_number(d.x_coupling_pu) << ',' << format_number(d.vc_max_pu) << ',' << d.profile_id << ','
                << d.n_pev << ',' << format_number(d.cost_per_pev) << ',' << (d.dc_link_limit ? "true" : "false")
                << '\n';
        }
    }
}

void write_case_json(std::ostream& out, const Case& c) {
    const auto& net = c.network;
    json j;
    j["base"] = {{"mva", net.base().mva}, {"kv", net.base().kv}};
    j["radial"] = net.radial();
    j["slack_voltage"] = {net.slack_voltage().real(), net.slack_voltage().imag()};
    if (!c.load_profile_id.empty()) j["load_profile"] = c.load_profile_id;
    if (!c.profiles_path.empty()) j["profiles"] = c.profiles_path;
    j["buses"] = json::array();
    for (const auto& b : net.buses()) {
        j["buses"].push_back({{"id", b.id},
                              {"kind", b.kind == BusKind::slack ? "slack" : "load"},
                              {"p", b.p_load},
                              {"q", b.q_load},
                              {"v_min", b.v_min},
                              {"v_max", b.v_max}});
    }
    j["branches"] = json::array();
    for (const auto& br : net.branches()) {
        j["branches"].push_back(
            {{"from", br.from_bus}, {"to", br.to_bus}, {"r", br.resistance}, {"x", br.reactance}, {"i_cap", br.current_cap}});
    }
    j["devices"] = json::array();
    for (const auto& d : c.devices) {
        j["devices"].push_back({{"bus", d.bus},
                                {"type", to_string(d.kind)},
                                {"s_rated_kva", d.s_rated_kva},
                                {"x_coupling_pu", d.x_coupling_pu},
                                {"vc_max_pu", d.vc_max_pu},
                                {"profile_id", d.profile_id},
                                {"n_pev", d.n_pev},
                                {"cost_per_pev", d.cost_per_pev},
                                {"dc_link_limit", d.dc_link_limit}});
    }
    out << j.dump(2) << '\n';
}

double Fleet::cost() const {
    double total = 0.0;
    for (const auto& lot : lots) total += lot.cost();
    return total;
}

Fleet resolve_fleet(const Case& c, const ProfileSet& profiles) {
    const auto& net = c.network;
    const double kva = net.base().power_kva();
    const auto find = [&](const std::string& id, const std::string& who) -> const HourlyProfile& {
        const auto it = profiles.find(id);
        if (it == profiles.end()) throw ValidationError(who + " references unknown profile '" + id + "'");
        return it->second;
    };

    Fleet fleet;
    if (c.load_profile_id.empty()) {
        fleet.load_shape = synth_profile(ProfileShape::flat, 0, 1.0, "constant");
    } else {
        fleet.load_shape = find(c.load_profile_id, "load profile");
    }

    for (const auto& d : c.devices) {
        const std::string who = std::string(to_string(d.kind)) + " at bus " + std::to_string(d.bus);
        if (!net.has_bus(d.bus)) throw ValidationError(who + " references nonexistent bus");
        if (net.bus(net.index_of(d.bus)).kind == BusKind::slack) throw ValidationError(who + " sits on the slack bus");
        if (!(d.s_rated_kva > 0.0)) throw ValidationError(who + " needs s_rated_kva > 0");
        if (!(d.x_coupling_pu > 0.0)) throw ValidationError(who + " needs x_coupling_pu > 0");

        Converter conv;
        conv.s_rated = d.s_rated_kva / kva;
        conv.x_coupling = d.x_coupling_pu * kva / d.s_rated_kva;  // own rating -> system base
        conv.vc_max = d.vc_max_pu;
        conv.dc_link_limit = d.dc_link_limit;

        const auto& shape = find(d.profile_id, who);
        std::array<double, kHours> power{};
        for (int h = 0; h < kHours; ++h) {
            const double fraction = shape[h];
            if (fraction > 1.0)
                throw ValidationError(who + " profile '" + d.profile_id + "' exceeds the rating at hour " +
                                      std::to_string(h));
            power[static_cast<std::size_t>(h)] = fraction * conv.s_rated;
        }

        if (d.kind == DeviceKind::pv) {
            PvUnit pv{d.bus, conv, power, d.profile_id};
            pv.validate();
            fleet.pvs.push_back(pv);
        } else {
            PevLot lot{d.bus, conv, power, d.n_pev, d.cost_per_pev, d.profile_id};
            lot.validate();
            fleet.lots.push_back(lot);
        }
    }
    return fleet;
}

}  // namespace v2gq
