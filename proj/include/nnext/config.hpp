#pragma once

#include "nnext/common.hpp"

#include <string>

namespace nnext {

/// Tunable constants. The desk profile (the defaults below) keeps quadtree
/// depth small enough for interactive runs; `paper_profile()` switches to the
/// conservative constants the underlying estimates are stated with.
struct Config {
    int k0 = 4;                  // subset-size parameter; depth sets hold <= 48*k0 points
    double C0 = 4.0;             // stopping threshold: squares stop once diam >= C0 * side
    double C_T = 10.0;           // budget factor of the feasible-jet program
    double cushion = 1.0;        // reserved scale for cushion-based bounds
    double norm_cap = 1.0;       // cap of the admissible-jet body (value and gradient)
    int direction_samples = 256; // sphere directions for diameter evaluation
    double qp_tol = 1e-9;        // convex-solve certification slack
    double grid_eps = 1e-9;      // graph/degeneracy tolerance in straightened coords
    double unit_scale = 1.0;     // side of the root squares
    int max_depth = 40;          // refinement levels below unit scale before erroring
    int body_point_cap = 64;     // nearest constraint points retained per jet body

    void validate() const;

    static Config desk_profile() { return Config{}; }
    static Config paper_profile() {
        Config c;
        c.C0 = 1000.0;
        return c;
    }
};

Config config_from_json(const std::string& text);
std::string config_to_json(const Config& c);
Config load_config_file(const std::string& path);

} // namespace nnext
