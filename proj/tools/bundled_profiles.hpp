#pragma once

#include "v2gq/devices.hpp"

namespace v2gq::tools {

// Seeds and levels behind cases/bus33.profiles.
inline ProfileSet bundled_profiles() {
    ProfileSet set;
    for (auto p : {synth_profile(ProfileShape::load_double_peak, 101, 0.75, "load"),
                   synth_profile(ProfileShape::pv_bell, 202, 1.0, "pv"),
                   synth_profile(ProfileShape::pev_evening_peak, 303, 0.9, "pev")})
        set.emplace(p.id, p);
    return set;
}

}  // namespace v2gq::tools
