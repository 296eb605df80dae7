#include "app.hpp"

#include <cmath>
#include <cstdio>

#include <trapfield/trapfield.hpp>

namespace trapfield::cli {

std::string format_sci(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

namespace {

json meta_block(const RunOutput& out, const json& cfg)
{
    return json{{"tool", "trapfield"},
                {"version", TRAPFIELD_VERSION},
                {"subcommand", out.subcommand},
                {"config_hash", config_hash(cfg)},
                {"units", out.units}};
}

} // namespace

void write_csv(std::ostream& os, const RunOutput& out, const json& cfg)
{
    const json meta = meta_block(out, cfg);
    os << "# tool: trapfield " << TRAPFIELD_VERSION << "\n";
    os << "# subcommand: " << out.subcommand << "\n";
    os << "# config_hash: " << meta["config_hash"].get<std::string>() << "\n";
    os << "# units: " << out.units << "\n";
    os << "# summary: " << out.summary.dump() << "\n";
    for (std::size_t c = 0; c < out.table.columns.size(); ++c)
        os << (c ? "," : "") << out.table.columns[c];
    os << "\n";
    for (const auto& row : out.table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << format_sci(row[c]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const RunOutput& out, const json& cfg)
{
    json doc;
    doc["meta"] = meta_block(out, cfg);
    doc["config"] = cfg;
    doc["summary"] = out.summary;
    doc["columns"] = out.table.columns;
    json rows = json::array();
    for (const auto& r : out.table.rows)
        rows.push_back(r);
    doc["rows"] = std::move(rows);
    os << doc.dump(2) << "\n";
}

} // namespace trapfield::cli
