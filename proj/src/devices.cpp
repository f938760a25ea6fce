#include "v2gq/devices.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "v2gq/errors.hpp"
#include "text_util.hpp"

namespace v2gq {

namespace {

// mt19937_64 output is fixed by the standard; the std distributions are not,
// so the unit draw is done by hand to keep profiles identical across libraries.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double circular_distance(int hour, double center) {
    const double d = std::abs(hour - center);
    return std::min(d, kHours - d);
}

double gaussian(double d, double width) { return std::exp(-d * d / (2.0 * width * width)); }

void check_profile_bound(const std::array<double, kHours>& values, double cap, const std::string& what) {
    for (int h = 0; h < kHours; ++h) {
        const double p = values[static_cast<std::size_t>(h)];
        if (!std::isfinite(p) || p < 0.0 || p > cap * (1.0 + 1e-12))
            throw ValidationError(what + " hour " + std::to_string(h) + " power " + std::to_string(p) +
                                  " outside [0, " + std::to_string(cap) + "]");
    }
}

}  // namespace

double HourlyProfile::peak() const { return *std::max_element(values.begin(), values.end()); }

void HourlyProfile::validate() const {
    for (int h = 0; h < kHours; ++h) {
        const double x = values[static_cast<std::size_t>(h)];
        if (!std::isfinite(x) || x < 0.0)
            throw ValidationError("profile '" + id + "' hour " + std::to_string(h) + " is negative or not finite");
    }
}

ProfileSet parse_profiles(std::istream& in, const std::string& source) {
    ProfileSet set;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::strip_comment(line);
        if (body.empty()) continue;
        const auto cols = text::split_csv(body);
        if (!have_header) {
            if (cols.size() != kHours + 1 || cols[0] != "profile_id")
                throw ParseError(source, line_no, "expected header profile_id,h0..h23");
            for (int h = 0; h < kHours; ++h) {
                if (cols[static_cast<std::size_t>(h) + 1] != "h" + std::to_string(h))
                    throw ParseError(source, line_no, "expected column h" + std::to_string(h));
            }
            have_header = true;
            continue;
        }
        if (cols.size() != kHours + 1)
            throw ParseError(source, line_no, "expected 25 columns, found " + std::to_string(cols.size()));
        HourlyProfile p;
        p.id = cols[0];
        if (p.id.empty()) throw ParseError(source, line_no, "empty profile_id");
        for (int h = 0; h < kHours; ++h)
            p.values[static_cast<std::size_t>(h)] = text::to_double(cols[static_cast<std::size_t>(h) + 1], source, line_no);
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (!set.emplace(p.id, p).second) throw ParseError(source, line_no, "duplicate profile_id " + p.id);
    }
    if (!have_header) throw ParseError(source, line_no, "missing header line");
    return set;
}

ProfileSet read_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile file " + path);
    return parse_profiles(in, path);
}

void write_profiles(std::ostream& out, const ProfileSet& profiles) {
    out << "profile_id";
    for (int h = 0; h < kHours; ++h) out << ",h" << h;
    out << '\n' << std::setprecision(17);
    for (const auto& [id, p] : profiles) {
        out << id;
        for (double x : p.values) out << ',' << x;
        out << '\n';
    }
}

ProfileShape parse_shape(std::string_view tag) {
    if (tag == "pv-bell") return ProfileShape::pv_bell;
    if (tag == "pev-evening-peak") return ProfileShape::pev_evening_peak;
    if (tag == "load-double-peak") return ProfileShape::load_double_peak;
    if (tag == "flat") return ProfileShape::flat;
    throw ArgumentError("unknown profile shape '" + std::string(tag) + "'");
}

const char* to_string(ProfileShape shape) {
    switch (shape) {
        case ProfileShape::pv_bell:
            return "pv-bell";
        case ProfileShape::pev_evening_peak:
            return "pev-evening-peak";
        case ProfileShape::load_double_peak:
            return "load-double-peak";
        case ProfileShape::flat:
            break;
    }
    return "flat";
}

HourlyProfile synth_profile(ProfileShape shape, std::uint64_t seed, double level, std::string id) {
    if (!std::isfinite(level) || level < 0.0) throw ArgumentError("profile level must be finite and nonnegative");
    HourlyProfile p;
    p.id = id.empty() ? to_string(shape) : std::move(id);
    std::mt19937_64 rng(seed);
    auto& v = p.values;

    switch (shape) {
        case ProfileShape::flat:
            v.fill(level);
            break;
        case ProfileShape::pv_bell:
            for (int h = 0; h < kHours; ++h) {
                const double cloud = 1.0 - 0.2 * unit_draw(rng);
                const bool daylight = h > 6 && h < 18;
                v[static_cast<std::size_t>(h)] =
                    daylight ? level * std::sin(std::numbers::pi * (h - 6) / 12.0) * cloud : 0.0;
            }
            break;
        case ProfileShape::pev_evening_peak:
            for (int h = 0; h < kHours; ++h) {
                const double jitter = 1.0 - 0.1 * unit_draw(rng);
                v[static_cast<std::size_t>(h)] =
                    level * (0.15 + 0.85 * gaussian(circular_distance(h, 19.0), 2.5)) * jitter;
            }
            break;
        case ProfileShape::load_double_peak: {
            std::array<double, kHours> base{};
            for (int h = 0; h < kHours; ++h) {
                base[static_cast<std::size_t>(h)] = 0.4 + 0.45 * gaussian(circular_distance(h, 11.0), 2.0) +
                                                    0.6 * gaussian(circular_distance(h, 20.0), 2.0);
            }
            const double top = *std::max_element(base.begin(), base.end());
            for (int h = 0; h < kHours; ++h) {
                const double jitter = 1.0 - 0.05 * unit_draw(rng);
                v[static_cast<std::size_t>(h)] = level * base[static_cast<std::size_t>(h)] / top * jitter;
            }
            break;
        }
    }
    return p;
}

void Converter::validate() const {
    if (!(s_rated > 0.0) || !std::isfinite(s_rated)) throw ValidationError("converter rating must be positive");
    if (!(x_coupling > 0.0)) throw ValidationError("converter coupling reactance must be positive");
    if (!(vc_max > 0.0)) throw ValidationError("converter maximum voltage must be positive");
}

std::optional<QRange> q_capability(const Converter& conv, double p, double v) {
    if (!(p >= 0.0) || p > conv.s_rated * (1.0 + 1e-12))
        throw ArgumentError("active power " + std::to_string(p) + " outside [0, S_rated]");
    if (!(v > 0.0)) throw ArgumentError("bus voltage must be positive");
    p = std::min(p, conv.s_rated);

    const double rating = std::sqrt((conv.s_rated - p) * (conv.s_rated + p));
    QRange r{-rating, rating};
    if (conv.dc_link_limit) {
        // (Q + c)^2 <= R with c = V^2/X and R = (Vc V / X)^2 - P^2.
        const double x = conv.x_coupling;
        const double c = v * v / x;
        const double vc = conv.vc_max * v / x;
        const double radius_sq = (vc - p) * (vc + p);
        if (radius_sq < 0.0) return std::nullopt;
        const double radius = std::sqrt(radius_sq);
        // radius - c evaluated without cancellation.
        const double upper = ((v / x) * (v / x) * (conv.vc_max - v) * (conv.vc_max + v) - p * p) / (radius + c);
        const double lower = -radius - c;
        r.q_max = std::min(r.q_max, upper);
        r.q_min = std::max(r.q_min, lower);
    }
    if (r.q_min > r.q_max) return std::nullopt;
    return r;
}

double capability_violation(const Converter& conv, double p, double q, double v) {
    double worst = q * q - (conv.s_rated * conv.s_rated - p * p);
    if (conv.dc_link_limit) {
        const double c = v * v / conv.x_coupling;
        const double vc = conv.vc_max * v / conv.x_coupling;
        worst = std::max(worst, (q + c) * (q + c) - (vc * vc - p * p));
    }
    return std::max(0.0, worst);
}

const char* to_string(DeviceKind kind) { return kind == DeviceKind::pv ? "pv" : "pevlot"; }

void PvUnit::validate() const {
    converter.validate();
    check_profile_bound(p_profile, converter.s_rated, "pv at bus " + std::to_string(bus));
}

void PevLot::validate() const {
    converter.validate();
    check_profile_bound(charge_profile, converter.s_rated, "pev lot at bus " + std::to_string(bus));
    if (n_pev <= 0) throw ValidationError("pev lot at bus " + std::to_string(bus) + " needs n_pev > 0");
    if (!(cost_per_pev > 0.0))
        throw ValidationError("pev lot at bus " + std::to_string(bus) + " needs cost_per_pev > 0");
}

BusLoad compose_load(BusLoad normal, std::span<const DeviceOutput> devices) {
    for (const auto& d : devices) {
        normal.p += d.kind == DeviceKind::pev_lot ? d.p : -d.p;
        normal.q += d.q;
    }
    return normal;
}

}  // namespace v2gq
