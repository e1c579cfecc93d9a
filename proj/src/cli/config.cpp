#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "monoapprox/cli/cli.hpp"

namespace monoapprox::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

// Accepts decimal reals and fractions a/b.
double parse_real(const std::string& text, const std::string& what)
{
    const auto slash = text.find('/');
    if (slash != std::string::npos)
        return parse_real(text.substr(0, slash), what) / parse_real(text.substr(slash + 1), what);
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw UsageError(what + ": '" + text + "' is not a number");
    return v;
}

template <typename T>
T parse_uint(const std::string& text, const std::string& what)
{
    T v{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw UsageError(what + ": '" + text + "' is not a nonnegative integer");
    return v;
}

struct RawOptions {
    std::string mode = "sign";
    std::string eps;
    std::string m_values, n_values, eps_values, d_values, only;
    std::string det_branch = "halved";
    std::string upper_constant;
    std::optional<std::uint64_t> n;
    std::optional<unsigned> k, r;
};

void define_options(CLI::App& app, ExperimentConfig& c, RawOptions& raw)
{
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--algo", c.algo, "mc | det")->check(CLI::IsMember({"mc", "det"}));
    app.add_option("--mode", raw.mode, "linear | sign | generalized");
    app.add_option("--d", c.d, "dimension");
    app.add_option("--eps", raw.eps, "target error (fractions like 1/15 allowed)");
    app.add_option("--m", c.m, "grid parameter of the deterministic algorithm");
    app.add_option("--n", raw.n, "number of samples (overrides the eps-based choice)");
    app.add_option("--k", raw.k, "maximal number of active variables");
    app.add_option("--r", raw.r, "resolution");
    app.add_option("--seed", c.seed, "master seed");
    app.add_option("--replications", c.replications, "independent replications");
    app.add_option("--family", c.family, "truth family, e.g. levelset:t=2,b=4,p=0.3");
    app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", c.out, "output path (default stdout)");
    app.add_option("--probes", c.probes, "Monte Carlo probes for L1 errors");
    app.add_option("--budget-cells", c.budget_cells, "cell enumeration cap");
    app.add_option("--sample-budget", c.sample_budget, "cap on drawn samples");
    app.add_option("--coefficient-budget", c.coefficient_budget, "cap on stored coefficients");
    app.add_option("--m-values", raw.m_values, "comma list of m for convergence sweeps");
    app.add_option("--n-values", raw.n_values, "comma list of n for convergence sweeps");
    app.add_option("--eps-values", raw.eps_values, "comma list of eps for bounds");
    app.add_option("--d-values", raw.d_values, "comma list of d for bounds");
    app.add_option("--det-branch", raw.det_branch, "halved | plain");
    app.add_option("--upper-constant", raw.upper_constant, "constant C of the upper bound");
    app.add_option("--c0", c.c0, "Berry-Esseen constant");
    app.add_option("--only", raw.only, "comma list of verify properties");
}

constexpr const char* kSubcommands[] = {"approximate", "convergence", "bounds", "verify"};

} // namespace

std::uint64_t ExperimentConfig::cell_budget() const
{
    return budget_cells == 0 ? default_cell_budget() : budget_cells;
}

nlohmann::json ExperimentConfig::to_json() const
{
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["algo"] = algo;
    j["mode"] = std::string(to_string(mode));
    j["d"] = d;
    j["eps"] = eps ? nlohmann::json(*eps) : nlohmann::json();
    j["m"] = m;
    j["n"] = n ? nlohmann::json(*n) : nlohmann::json();
    j["k"] = k ? nlohmann::json(*k) : nlohmann::json();
    j["r"] = r ? nlohmann::json(*r) : nlohmann::json();
    j["seed"] = seed;
    j["replications"] = replications;
    j["family"] = family;
    j["format"] = format;
    j["probes"] = probes;
    j["budget_cells"] = cell_budget();
    j["sample_budget"] = sample_budget;
    j["coefficient_budget"] = coefficient_budget;
    j["m_values"] = m_values;
    j["n_values"] = n_values;
    j["eps_values"] = eps_values;
    j["d_values"] = d_values;
    j["det_branch"] = std::string(to_string(det_branch));
    j["upper_constant"] = upper_constant ? nlohmann::json(*upper_constant) : nlohmann::json();
    j["c0"] = c0;
    j["only"] = only;
    return j;
}

std::string help_text()
{
    ExperimentConfig c;
    RawOptions raw;
    CLI::App app{"Monotone function approximation experiments.\n"
                 "usage: monoapprox <approximate|convergence|bounds|verify> [options]",
                 "monoapprox"};
    define_options(app, c, raw);
    app.add_option("--config", "file of key=value lines mirroring the long options");
    return app.help();
}

ExperimentConfig parse_command_line(const std::vector<std::string>& args)
{
    if (args.size() < 2)
        throw UsageError("missing subcommand (approximate | convergence | bounds | verify)");
    ExperimentConfig c;
    c.subcommand = args[1];
    if (std::find(std::begin(kSubcommands), std::end(kSubcommands), c.subcommand) ==
        std::end(kSubcommands))
        throw UsageError("unknown subcommand '" + c.subcommand + "'");

    std::optional<std::string> config_path;
    std::vector<std::string> user;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw UsageError("--config needs a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            user.push_back(args[i]);
        }
    }

    std::vector<std::string> tokens;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in)
            throw UsageError("cannot read config file '" + *config_path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = trim(line);
            if (line.empty() || line[0] == '#')
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw UsageError(*config_path + ":" + std::to_string(lineno) +
                                 ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            if (key == "config")
                throw UsageError("config files cannot include other config files");
            tokens.push_back("--" + key);
            tokens.push_back(trim(line.substr(eq + 1)));
        }
    }
    tokens.insert(tokens.end(), user.begin(), user.end());

    RawOptions raw;
    CLI::App app{"monoapprox", "monoapprox"};
    app.set_help_flag();
    define_options(app, c, raw);
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    try {
        c.mode = parse_mode(raw.mode);
        c.det_branch = parse_det_branch(raw.det_branch);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    c.n = raw.n;
    c.k = raw.k;
    c.r = raw.r;
    if (!raw.eps.empty())
        c.eps = parse_real(raw.eps, "--eps");
    if (!raw.upper_constant.empty())
        c.upper_constant = parse_real(raw.upper_constant, "--upper-constant");
    for (const auto& s : split_list(raw.m_values))
        c.m_values.push_back(parse_uint<std::uint64_t>(s, "--m-values"));
    for (const auto& s : split_list(raw.n_values))
        c.n_values.push_back(parse_uint<std::uint64_t>(s, "--n-values"));
    for (const auto& s : split_list(raw.eps_values))
        c.eps_values.push_back(parse_real(s, "--eps-values"));
    for (const auto& s : split_list(raw.d_values))
        c.d_values.push_back(parse_uint<unsigned>(s, "--d-values"));
    c.only = split_list(raw.only);
    if (c.d == 0)
        throw UsageError("--d must be positive");
    if (c.replications == 0)
        throw UsageError("--replications must be positive");
    return c;
}

} // namespace monoapprox::cli
