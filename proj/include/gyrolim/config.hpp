#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gyrolim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run configuration, parsed from a flat key = value file (UTF-8, one pair per
// line, '#' comments). Unknown keys and duplicate keys are errors.
struct RunConfig {
    std::string kind; // euler | nbody | sweep | quantize-check | coercivity
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out = "runs/out";
    double grid_half_width = 2.0;
    int grid_n = 256;
    long n_particles = 64;
    double eps = 0.1;
    double hbar = -1.0; // < 0 means "use the scaling rule"
    double hbar_rule_k = 2.0;
    double dt = 1e-3;
    double t_final = 1.0;
    int stride = 100;
    bool magnetic = true;
    bool confinement = false;
    std::string velocity_init = "monokinetic"; // monokinetic | rotating-frame
    double min_separation = 1e-8;
    std::string scheme = "strang"; // strang | rk4
    std::vector<long> sweep_n = {1024, 4096, 16384};
    std::vector<double> sweep_eps = {0.2, 0.1, 0.05};
    long blobs = 4096;
    double euler_dt = 5e-3;
    int trunc_m = 16;
    std::vector<double> qc_eps = {0.2, 0.1, 0.05};
    std::string s5_density = "flat-top"; // flat-top | chi-gauss
    std::vector<long> coer_n = {64, 256, 1024};
    int coer_seeds = 20;
    int jobs = 1;

    double hbar_for(double e) const {
        if (hbar >= 0.0) return hbar;
        double v = 1.0;
        // eps^k for possibly fractional k
        if (hbar_rule_k == 2.0) v = e * e;
        else v = std::pow(e, hbar_rule_k);
        return v;
    }
};

namespace detail {

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("invalid integer for key '" + key + "': '" + v + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("invalid number for key '" + key + "': '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("invalid boolean for key '" + key + "': '" + v + "'");
}

template <class T, class Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, Fn&& one) {
    std::vector<T> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        // trim
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty element in list for key '" + key + "'");
        out.push_back(one(key, item.substr(b, e - b + 1)));
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline RunConfig parse_config_text(const std::string& text, const std::string& source_name) {
    RunConfig cfg;
    std::map<std::string, int> seen; // key -> first line number
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source_name + ":" + std::to_string(lineno) + ": empty key");
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                              "' (first set at line " + std::to_string(it->second) + ")");
        seen[key] = lineno;

        using namespace detail;
        try {
            if (key == "kind") cfg.kind = val;
            else if (key == "seed") { cfg.seed = static_cast<std::uint64_t>(parse_long(key, val)); cfg.seed_set = true; }
            else if (key == "out") cfg.out = val;
            else if (key == "grid_L") cfg.grid_half_width = parse_double(key, val);
            else if (key == "grid_n") cfg.grid_n = static_cast<int>(parse_long(key, val));
            else if (key == "N") cfg.n_particles = parse_long(key, val);
            else if (key == "eps") cfg.eps = parse_double(key, val);
            else if (key == "hbar") cfg.hbar = parse_double(key, val);
            else if (key == "hbar_rule_k") cfg.hbar_rule_k = parse_double(key, val);
            else if (key == "dt") cfg.dt = parse_double(key, val);
            else if (key == "T") cfg.t_final = parse_double(key, val);
            else if (key == "stride") cfg.stride = static_cast<int>(parse_long(key, val));
            else if (key == "magnetic") cfg.magnetic = parse_bool(key, val);
            else if (key == "confinement") cfg.confinement = parse_bool(key, val);
            else if (key == "velocity_init") cfg.velocity_init = val;
            else if (key == "min_sep") cfg.min_separation = parse_double(key, val);
            else if (key == "scheme") cfg.scheme = val;
            else if (key == "sweep_N") cfg.sweep_n = parse_list<long>(key, val, parse_long);
            else if (key == "sweep_eps") cfg.sweep_eps = parse_list<double>(key, val, parse_double);
            else if (key == "blobs") cfg.blobs = parse_long(key, val);
            else if (key == "euler_dt") cfg.euler_dt = parse_double(key, val);
            else if (key == "trunc_M") cfg.trunc_m = static_cast<int>(parse_long(key, val));
            else if (key == "qc_eps") cfg.qc_eps = parse_list<double>(key, val, parse_double);
            else if (key == "s5_density") cfg.s5_density = val;
            else if (key == "coer_N") cfg.coer_n = parse_list<long>(key, val, parse_long);
            else if (key == "coer_seeds") cfg.coer_seeds = static_cast<int>(parse_long(key, val));
            else if (key == "jobs") cfg.jobs = static_cast<int>(parse_long(key, val));
            else throw ConfigError("unknown key '" + key + "'");
        } catch (const ConfigError& e) {
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

inline void validate_config(const RunConfig& cfg) {
    auto bad = [](const std::string& key, const std::string& why) {
        throw ConfigError("invalid value for key '" + key + "': " + why);
    };
    const bool known_kind = cfg.kind == "euler" || cfg.kind == "nbody" || cfg.kind == "sweep" ||
                            cfg.kind == "quantize-check" || cfg.kind == "coercivity";
    if (!known_kind) bad("kind", "'" + cfg.kind + "' is not one of euler|nbody|sweep|quantize-check|coercivity");
    if (!(cfg.eps > 0.0)) bad("eps", "must be positive");
    if (!(cfg.dt > 0.0)) bad("dt", "must be positive");
    if (cfg.t_final < 0.0) bad("T", "must be nonnegative");
    if (cfg.n_particles < 1) bad("N", "must be >= 1");
    if (cfg.stride < 1) bad("stride", "must be >= 1");
    if (cfg.grid_n < 16 || cfg.grid_n % 2 != 0) bad("grid_n", "must be even and >= 16");
    if (!(cfg.grid_half_width > 0.0)) bad("grid_L", "must be positive");
    if (cfg.blobs < 1) bad("blobs", "must be >= 1");
    if (!(cfg.euler_dt > 0.0)) bad("euler_dt", "must be positive");
    if (cfg.trunc_m < 4) bad("trunc_M", "must be >= 4");
    if (cfg.coer_seeds < 1) bad("coer_seeds", "must be >= 1");
    if (cfg.jobs < 1) bad("jobs", "must be >= 1");
    if (!(cfg.min_separation > 0.0)) bad("min_sep", "must be positive");
    if (cfg.scheme != "strang" && cfg.scheme != "rk4") bad("scheme", "must be strang or rk4");
    if (cfg.velocity_init != "monokinetic" && cfg.velocity_init != "rotating-frame")
        bad("velocity_init", "must be monokinetic or rotating-frame");
    if (cfg.s5_density != "flat-top" && cfg.s5_density != "chi-gauss")
        bad("s5_density", "must be flat-top or chi-gauss");
    for (double e : cfg.sweep_eps)
        if (!(e > 0.0)) bad("sweep_eps", "entries must be positive");
    for (long n : cfg.sweep_n)
        if (n < 1) bad("sweep_N", "entries must be >= 1");
    for (long n : cfg.coer_n)
        if (n < 2) bad("coer_N", "entries must be >= 2");
    const bool stochastic = cfg.kind == "nbody" || cfg.kind == "sweep" || cfg.kind == "coercivity";
    if (stochastic && !cfg.seed_set) bad("seed", "mandatory for stochastic experiments (kind = " + cfg.kind + ")");
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config_text(ss.str(), path);
    validate_config(cfg);
    return cfg;
}

} // namespace gyrolim
