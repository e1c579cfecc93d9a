#ifndef MONOAPPROX_CLI_CLI_HPP
#define MONOAPPROX_CLI_CLI_HPP

// Batch experiment runner: approximate, convergence, bounds, verify.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "monoapprox/approx_mc.hpp"
#include "monoapprox/bounds.hpp"

namespace monoapprox::cli {

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitError = 3;

/// Thrown for malformed or incomplete command lines and config files.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string subcommand;
    std::string algo = "mc";
    Mode mode = Mode::sign;
    unsigned d = 2;
    std::optional<double> eps;
    std::uint64_t m = 8;
    std::optional<std::uint64_t> n;
    std::optional<unsigned> k;
    std::optional<unsigned> r;
    std::uint64_t seed = 1;
    unsigned replications = 1;
    std::string family;
    std::string format = "csv";
    std::string out;
    std::uint64_t probes = 100000;
    std::uint64_t budget_cells = 0; ///< 0: default_cell_budget()
    std::uint64_t sample_budget = kDefaultSampleBudget;
    std::uint64_t coefficient_budget = kDefaultCoefficientBudget;
    std::vector<std::uint64_t> m_values;
    std::vector<std::uint64_t> n_values;
    std::vector<double> eps_values;
    std::vector<unsigned> d_values;
    DetBranch det_branch = DetBranch::halved;
    std::optional<double> upper_constant;
    double c0 = 0.4748;
    std::vector<std::string> only;

    std::uint64_t cell_budget() const;
    nlohmann::json to_json() const;
};

/// Parses `prog <subcommand> [options]`. Options may also come from
/// `--config path`, a file of key=value lines named like the long flags;
/// command-line values take precedence. Throws UsageError.
ExperimentConfig parse_command_line(const std::vector<std::string>& args);

/// Usage text listing every option.
std::string help_text();

/// A cell of an output table; monostate prints as an empty field.
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Report {
    std::string command;
    Table table;
    /// Summary values (fitted slope, means, bound components).
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> warnings;
};

/// Shortest text of v with 17 significant digits, locale independent.
std::string format_real(double v);

void write_csv(const Report& report, std::ostream& out);
void write_json(const Report& report, const ExperimentConfig& config, std::ostream& out);

Report cmd_approximate(const ExperimentConfig& config);
Report cmd_convergence(const ExperimentConfig& config);
Report cmd_bounds(const ExperimentConfig& config);

struct PropertyOutcome {
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::string detail;
};

/// Names accepted by --only.
std::vector<std::string> verify_property_names();

/// Runs the invariant suite (restricted to `config.only` if nonempty),
/// printing one line per property to `out`.
std::vector<PropertyOutcome> cmd_verify(const ExperimentConfig& config, std::ostream& out);

/// Entry point shared by the executable and tests. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Library version string.
std::string version();

} // namespace monoapprox::cli

#endif
