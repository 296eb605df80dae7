#include "app.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include <trapfield/trapfield.hpp>

namespace trapfield::cli {

namespace {

std::vector<std::string> env_entries(char** envp)
{
    std::vector<std::string> out;
    for (char** e = envp; e && *e; ++e)
        out.emplace_back(*e);
    return out;
}

} // namespace

int main_entry(int argc, char** argv, char** envp)
{
    CLI::App app{"trapfield: trapped-ion crystal field-theory toolkit"};
    app.set_version_flag("--version", TRAPFIELD_VERSION);
    std::string config_path, out_path, format;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "JSON config file (complete key tree)");
    app.add_option("--set", sets, "override, path.key=value (repeatable)");
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.require_subcommand(1);
    static const std::map<std::string, std::string> blurb{
        {"chain", "equilibrium positions"},
        {"modes", "transverse normal-mode frequencies"},
        {"dispersion", "thermodynamic-limit dispersion over the zone"},
        {"couplings", "exact and coarse-grained spin couplings per detuning"},
        {"propagator", "lattice Euclidean Green function vs pole/cut form"},
        {"rg-flow", "Wilsonian flow of (m0^2, lambda0)"},
        {"rg-critical", "critical-point shift of the zigzag mode"},
        {"drive", "dressed shear modulus scan under parametric drive"},
        {"dynamics", "spin-boson oracle vs Ising prediction"},
        {"sense-impulsive", "propagator from impulsive sources"},
        {"sense-harmonic", "spin-echo signal and fitted coupling"},
    };
    for (const auto& s : subcommands())
        app.add_subcommand(s, blurb.count(s) ? blurb.at(s) : "")->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    json cfg;
    try {
        cfg = config_path.empty() ? default_config() : load_config_file(config_path);
        validate_keys(cfg);
        apply_env(cfg, env_entries(envp));
        for (const auto& s : sets)
            apply_override(cfg, s);
        if (!format.empty())
            cfg["output"]["format"] = format;
        if (!out_path.empty())
            cfg["output"]["path"] = out_path;
        validate_keys(cfg);
        validate_values(cfg);

        const RunOutput out = run(sub, cfg);
        std::ostringstream buf;
        if (cfg["output"]["format"] == "json")
            write_json(buf, out, cfg);
        else
            write_csv(buf, out, cfg);
        const auto& path = cfg["output"]["path"];
        if (path.is_string()) {
            std::ofstream f(path.get<std::string>(), std::ios::binary);
            if (!f)
                throw ConfigError("output: cannot write '" + path.get<std::string>() + "'");
            f << buf.str();
        } else {
            std::cout << buf.str();
        }
    } catch (const Error& e) {
        std::cerr << "trapfield " << sub << ": " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "trapfield " << sub << ": internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace trapfield::cli
