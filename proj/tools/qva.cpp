#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <qva/cli.hpp>

using namespace qva;

namespace {

std::pair<int, int> parse_window(const std::string& s) {
    auto c = s.find(':');
    if (c == std::string::npos) throw ConfigError("window: expected lo:hi, got '" + s + "'");
    try {
        int lo = std::stoi(s.substr(0, c)), hi = std::stoi(s.substr(c + 1));
        if (lo > hi) throw ConfigError("window: lo > hi");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw ConfigError("window: expected integers lo:hi, got '" + s + "'");
    }
}

// window-truncated sum, ordered by (k, m, n)
void print_sum(const std::vector<std::string>& terms) {
    if (terms.empty()) std::cout << "0";
    for (size_t i = 0; i < terms.size(); ++i) std::cout << (i ? "\n + " : "") << terms[i];
    std::cout << "\n";
}

int expand(const std::string& expr, const std::string& dir, const std::string& vars, int order, const std::string& window) {
    auto [lo, hi] = parse_window(window);
    auto comma = vars.find(',');
    if (comma == std::string::npos) {
        auto s = iota_expand_expr1(expr, vars, order);
        std::vector<std::string> terms;
        for (int k = 0; k < order; ++k)
            for (int m = lo; m <= hi; ++m) {
                Rational c = s.ucoeff(m, k);
                if (!c.is_zero()) terms.push_back(c.str() + " * h^" + std::to_string(k) + " * " + vars + "^" + std::to_string(m));
            }
        print_sum(terms);
        return 0;
    }
    std::string xa = vars.substr(0, comma), xb = vars.substr(comma + 1);
    Direction d;
    if (dir == xa)
        d = Direction::FirstDominant;
    else if (dir == xb)
        d = Direction::SecondDominant;
    else
        throw ConfigError("direction: expected '" + xa + "' or '" + xb + "'");
    auto s = iota_expand_expr(expr, xa, xb, d, order);
    std::vector<std::string> terms;
    for (int k = 0; k < order; ++k)
        for (int m = lo; m <= hi; ++m)
            for (int n = lo; n <= hi; ++n) {
                Rational c = s.coeff(m, n, k);
                if (!c.is_zero())
                    terms.push_back(c.str() + " * h^" + std::to_string(k) + " * " + xa + "^" + std::to_string(m) + " * " + xb + "^" +
                                    std::to_string(n));
            }
    print_sum(terms);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Checks identities of deformed vertex algebras on finite windows"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "run a check suite (zf, deformation, yangian, series-selftest) or a preset");
    std::string target, config_path, format = "json", output, window;
    int hbar = 0, depth = -1;
    bool no_timing = false;
    verify->add_option("target", target, "suite or preset name (betagamma, lattice, dy-sl2)")->required();
    verify->add_option("--config", config_path, "JSON config file");
    verify->add_option("--hbar-order,-N", hbar, "truncation order in h");
    verify->add_option("--window", window, "exponent window lo:hi");
    verify->add_option("--depth", depth, "probe depth");
    verify->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    verify->add_option("--output,-o", output, "write the report here instead of stdout");
    verify->add_flag("--no-timing", no_timing, "omit the timing block");

    auto* exp = app.add_subcommand("expand", "expand a rational function in a chosen direction");
    std::string expr, dir, vars = "x,y", ewin = "-4:4";
    int order = 3;
    exp->add_option("--expr", expr, "rational function in the variables and h")->required();
    exp->add_option("--direction", dir, "dominant variable");
    exp->add_option("--vars", vars, "one variable, or two separated by a comma");
    exp->add_option("--order", order, "truncation order in h")->check(CLI::PositiveNumber);
    exp->add_option("--window", ewin, "exponent window lo:hi");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*exp) return expand(expr, dir, vars, order, ewin);

        ScenarioConfig cfg;
        static const std::vector<std::string> suites{"zf", "deformation", "yangian", "series-selftest"};
        bool is_suite = std::find(suites.begin(), suites.end(), target) != suites.end();
        nlohmann::json j = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config: cannot open '" + config_path + "'");
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        }
        if (is_suite)
            cfg = parse_config(j, target);
        else {
            if (!j.contains("preset")) j["preset"] = target;
            cfg = parse_config(j);
        }
        if (hbar) {
            if (hbar < 1) throw ConfigError("hbar_order: must be >= 1");
            cfg.N = hbar;
        }
        if (!window.empty()) std::tie(cfg.lo, cfg.hi) = parse_window(window);
        if (depth >= 0) cfg.depth = depth;
        if (!output.empty()) cfg.output = output;

        Report rep = run_scenario(cfg);
        std::string text = emit_report(rep, format, !no_timing);
        if (cfg.output.empty())
            std::cout << text;
        else {
            std::ofstream out(cfg.output);
            if (!out) throw ConfigError("output: cannot write '" + cfg.output + "'");
            out << text;
        }
        return rep.exit_code();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
