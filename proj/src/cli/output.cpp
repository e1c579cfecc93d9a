#include <charconv>
#include <cmath>
#include <ostream>

#include "monoapprox/cli/cli.hpp"

namespace monoapprox::cli {

std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

namespace {

std::string cell_text(const Cell& c)
{
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double v) const { return format_real(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const
        {
            if (v.find_first_of(",\"\n") == std::string::npos)
                return v;
            std::string out = "\"";
            for (char ch : v) {
                if (ch == '"')
                    out += '"';
                out += ch;
            }
            return out + "\"";
        }
    };
    return std::visit(Visitor{}, c);
}

nlohmann::json cell_json(const Cell& c)
{
    struct Visitor {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(double v) const
        {
            // JSON has no infinity; keep the text form.
            if (!std::isfinite(v))
                return format_real(v);
            return v;
        }
        nlohmann::json operator()(std::int64_t v) const { return v; }
        nlohmann::json operator()(std::uint64_t v) const { return v; }
        nlohmann::json operator()(bool v) const { return v; }
        nlohmann::json operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, c);
}

} // namespace

void write_csv(const Report& report, std::ostream& out)
{
    const auto& cols = report.table.columns;
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& row : report.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << cell_text(row[i]);
        out << '\n';
    }
}

void write_json(const Report& report, const ExperimentConfig& config, std::ostream& out)
{
    nlohmann::json j;
    j["version"] = version();
    j["command"] = report.command;
    j["config"] = config.to_json();
    j["seed_scheme"] = "replication i uses truth seed derive_seed(seed, 2i) and sample seed "
                       "derive_seed(seed, 2i+1), derive_seed(s, t) = splitmix64(s + splitmix64(t)); "
                       "engine mt19937_64";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.table.rows) {
        nlohmann::json r = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size() && i < report.table.columns.size(); ++i)
            r[report.table.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["summary"] = report.summary;
    j["warnings"] = report.warnings;
    out << j.dump(2) << '\n';
}

std::string version() { return MONOAPPROX_VERSION; }

} // namespace monoapprox::cli
