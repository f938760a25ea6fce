// Regenerates the profile file shipped with the 33-bus case.
#include <fstream>
#include <iostream>

#include "bundled_profiles.hpp"
#include "v2gq/devices.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_profiles OUTPUT\n";
        return 2;
    }
    std::ofstream out(argv[1]);
    v2gq::write_profiles(out, v2gq::tools::bundled_profiles());
    return out ? 0 : 1;
}
