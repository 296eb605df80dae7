#include "app.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <trapfield/errors.hpp>

namespace trapfield::cli {

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s{"chain",    "modes",   "dispersion", "couplings",       "propagator",
                                            "rg-flow",  "rg-critical", "drive",  "dynamics",        "sense-impulsive",
                                            "sense-harmonic"};
    return s;
}

json default_config()
{
    return json::parse(R"({
  "species": {"mass_amu": 170.936323, "charge": 1},
  "trap": {"omega_x_hz": 1.0e5, "omega_y_hz": 1.0e7, "omega_z_hz": 3.75e6, "n_ions": 50,
           "bulk_spacing_override_m": null},
  "source": {"rabi_hz": 1.0e5, "detuning_from_zigzag_hz": [18750.0, 37500.0, 93750.0, 187500.0, 937500.0],
             "k_proj_z_per_m": 3.5395993685e7, "k_proj_x_per_m": 0.0, "carrier_rabi_hz": 0.0},
  "drive": {"delta_eta": 5.33, "omega_d_hz": 1.0e6, "scan_step": 0.05, "scan_max": 12.0},
  "rg": {"lambda0_dimensionless": null, "m0_sq_dimensionless": 0.01, "flow_step": 0.01, "flow_steps": 500},
  "dynamics": {"t_max_s": 0.0, "samples": 8, "fock_cutoff": 6, "oracle_ions": 2,
               "omega_x_hz": 1.0e6, "omega_z_hz": 1.05e6, "detuning_hz": 1.0e5, "margin": 0.05},
  "sense": {"site_i": 24, "site_j": 26, "tau_max_s": 2.0e-6, "samples": 200, "strength_per_m": 3.0e8},
  "output": {"format": "csv", "path": null}
})");
}

namespace {

bool nullable_number(const json& tmpl) { return tmpl.is_null(); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

} // namespace

void validate_keys(const json& cfg, const json& tmpl, const std::string& path)
{
    if (!cfg.is_object())
        throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    for (auto it = tmpl.begin(); it != tmpl.end(); ++it)
        if (!cfg.contains(it.key()))
            throw ConfigError("config: missing key '" + join(path, it.key()) + "'");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string p = join(path, it.key());
        if (!tmpl.contains(it.key()))
            throw ConfigError("config: unknown key '" + p + "'");
        const json& t = tmpl.at(it.key());
        const json& v = it.value();
        if (t.is_object()) {
            validate_keys(v, t, p);
        } else if (t.is_array()) {
            if (!(v.is_number() || (v.is_array() && !v.empty() &&
                                    std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))))
                throw ConfigError("config: '" + p + "' must be a number or a non-empty array of numbers");
        } else if (t.is_number()) {
            if (!v.is_number())
                throw ConfigError("config: '" + p + "' must be a number");
            if (t.is_number_integer() && !v.is_number_integer())
                throw ConfigError("config: '" + p + "' must be an integer");
        } else if (nullable_number(t)) {
            if (!(v.is_null() || v.is_number() || v.is_string()))
                throw ConfigError("config: '" + p + "' must be null or a number");
        }
    }
}

void validate_values(const json& cfg)
{
    auto positive = [&](const char* sec, const char* key) {
        if (!(cfg.at(sec).at(key).get<double>() > 0.0))
            throw ConfigError(std::string("config: '") + sec + "." + key + "' must be > 0");
    };
    positive("species", "mass_amu");
    positive("trap", "omega_x_hz");
    positive("trap", "omega_y_hz");
    positive("trap", "omega_z_hz");
    positive("source", "k_proj_z_per_m");
    positive("drive", "omega_d_hz");
    positive("drive", "scan_step");
    positive("rg", "flow_step");
    positive("dynamics", "omega_x_hz");
    positive("dynamics", "omega_z_hz");
    positive("dynamics", "detuning_hz");
    positive("dynamics", "margin");
    positive("sense", "tau_max_s");
    if (cfg.at("species").at("charge").get<int>() < 1)
        throw ConfigError("config: 'species.charge' must be >= 1");
    if (cfg.at("trap").at("n_ions").get<int>() < 1)
        throw ConfigError("config: 'trap.n_ions' must be >= 1");
    if (cfg.at("rg").at("flow_steps").get<int>() < 1)
        throw ConfigError("config: 'rg.flow_steps' must be >= 1");
    if (cfg.at("dynamics").at("samples").get<int>() < 2)
        throw ConfigError("config: 'dynamics.samples' must be >= 2");
    if (cfg.at("sense").at("samples").get<int>() < 2)
        throw ConfigError("config: 'sense.samples' must be >= 2");
    const int oi = cfg.at("dynamics").at("oracle_ions").get<int>();
    if (oi < 2 || oi > 3)
        throw ConfigError("config: 'dynamics.oracle_ions' must be 2 or 3");
    const int fc = cfg.at("dynamics").at("fock_cutoff").get<int>();
    if (fc < 1 || fc > 12)
        throw ConfigError("config: 'dynamics.fock_cutoff' must be in [1, 12]");
    const auto& det = cfg.at("source").at("detuning_from_zigzag_hz");
    if (det.is_number() ? !(det.get<double>() > 0.0)
                        : std::any_of(det.begin(), det.end(), [](const json& e) { return !(e.get<double>() > 0.0); }))
        throw ConfigError("config: 'source.detuning_from_zigzag_hz' entries must be > 0");
    const auto& ov = cfg.at("trap").at("bulk_spacing_override_m");
    if (!ov.is_null() && !(ov.is_number() && ov.get<double>() > 0.0))
        throw ConfigError("config: 'trap.bulk_spacing_override_m' must be null or > 0");
    const auto& lam = cfg.at("rg").at("lambda0_dimensionless");
    if (!(lam.is_null() || lam.is_number()))
        throw ConfigError("config: 'rg.lambda0_dimensionless' must be null or a number");
    const auto& fmt = cfg.at("output").at("format");
    if (!fmt.is_string() || (fmt != "csv" && fmt != "json"))
        throw ConfigError("config: 'output.format' must be \"csv\" or \"json\"");
    const auto& path = cfg.at("output").at("path");
    if (!(path.is_null() || path.is_string()))
        throw ConfigError("config: 'output.path' must be null or a string");
}

json load_config_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (j.is_object() && j.contains("meta") && j.contains("config"))
        j = j.at("config");
    return j;
}

json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

namespace {

json parse_value(const std::string& v)
{
    try {
        return json::parse(v);
    } catch (const json::parse_error&) {
        return json(v);
    }
}

void set_path(json& cfg, const std::vector<std::string>& keys, const json& value, const std::string& label)
{
    json* node = &cfg;
    for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
        if (!node->is_object() || !node->contains(keys[k]))
            throw ConfigError("override: unknown key '" + label + "'");
        node = &(*node)[keys[k]];
    }
    if (!node->is_object() || !node->contains(keys.back()))
        throw ConfigError("override: unknown key '" + label + "'");
    (*node)[keys.back()] = value;
}

std::vector<std::string> split(const std::string& s, const std::string& sep)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto q = s.find(sep, pos);
        out.push_back(s.substr(pos, q == std::string::npos ? std::string::npos : q - pos));
        if (q == std::string::npos)
            break;
        pos = q + sep.size();
    }
    return out;
}

} // namespace

void apply_override(json& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override: expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    set_path(cfg, split(key, "."), parse_value(assignment.substr(eq + 1)), key);
}

void apply_env(json& cfg, const std::vector<std::string>& entries)
{
    const std::string prefix = kEnvPrefix;
    for (const auto& e : entries) {
        if (e.rfind(prefix, 0) != 0)
            continue;
        const auto eq = e.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = e.substr(prefix.size(), eq - prefix.size());
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        set_path(cfg, split(key, "__"), parse_value(e.substr(eq + 1)), e.substr(0, eq));
    }
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const json& cfg)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
    return buf;
}

} // namespace trapfield::cli
