#ifndef TRAPFIELD_CLI_APP_HPP
#define TRAPFIELD_CLI_APP_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace trapfield::cli {

using nlohmann::json;

inline constexpr const char* kEnvPrefix = "TRAPFIELD_";

const std::vector<std::string>& subcommands();

// built-in 50-ion Yb configuration
json default_config();

// every template key must be present, no unknown keys, scalar types checked
void validate_keys(const json& cfg, const json& tmpl = default_config(), const std::string& path = "");
void validate_values(const json& cfg);

// file contents -> config tree; accepts a previous JSON output document
json load_config_text(const std::string& text);
json load_config_file(const std::string& path);

// "a.b.c=value" (value parsed as JSON when possible)
void apply_override(json& cfg, const std::string& assignment);
// TRAPFIELD_A__B=value entries from an environment block
void apply_env(json& cfg, const std::vector<std::string>& environ_entries);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const json& cfg);

// tabular output plus a summary object
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunOutput {
    std::string subcommand;
    std::string units;
    json summary = json::object();
    Table table;
};

std::string format_sci(double v);
void write_csv(std::ostream& os, const RunOutput& out, const json& cfg);
void write_json(std::ostream& os, const RunOutput& out, const json& cfg);

// executes one subcommand on a validated config; throws trapfield::Error
RunOutput run(const std::string& subcommand, const json& cfg);

// full command line entry point; returns the process exit code
int main_entry(int argc, char** argv, char** envp);

} // namespace trapfield::cli

#endif
