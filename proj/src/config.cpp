#include "nnext/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nnext {

void Config::validate() const {
    if (k0 < 1) throw input_error("config: k0 must be >= 1");
    if (C0 <= 0.0) throw input_error("config: C0 must be > 0");
    if (C_T <= 0.0) throw input_error("config: C_T must be > 0");
    if (cushion <= 0.0) throw input_error("config: cushion must be > 0");
    if (norm_cap <= 0.0) throw input_error("config: norm_cap must be > 0");
    if (direction_samples < 6) throw input_error("config: direction_samples must be >= 6");
    if (qp_tol <= 0.0) throw input_error("config: qp_tol must be > 0");
    if (grid_eps <= 0.0) throw input_error("config: grid_eps must be > 0");
    if (unit_scale <= 0.0) throw input_error("config: unit_scale must be > 0");
    if (max_depth < 1) throw input_error("config: max_depth must be >= 1");
    if (body_point_cap < 8) throw input_error("config: body_point_cap must be >= 8");
}

Config config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw input_error(std::string("config: invalid JSON: ") + e.what());
    }
    Config c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("k0", c.k0);
    get("C0", c.C0);
    get("C_T", c.C_T);
    get("cushion", c.cushion);
    get("norm_cap", c.norm_cap);
    get("direction_samples", c.direction_samples);
    get("qp_tol", c.qp_tol);
    get("grid_eps", c.grid_eps);
    get("unit_scale", c.unit_scale);
    get("max_depth", c.max_depth);
    get("body_point_cap", c.body_point_cap);
    c.validate();
    return c;
}

std::string config_to_json(const Config& c) {
    nlohmann::json j;
    j["k0"] = c.k0;
    j["C0"] = c.C0;
    j["C_T"] = c.C_T;
    j["cushion"] = c.cushion;
    j["norm_cap"] = c.norm_cap;
    j["direction_samples"] = c.direction_samples;
    j["qp_tol"] = c.qp_tol;
    j["grid_eps"] = c.grid_eps;
    j["unit_scale"] = c.unit_scale;
    j["max_depth"] = c.max_depth;
    j["body_point_cap"] = c.body_point_cap;
    return j.dump(2);
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

} // namespace nnext
