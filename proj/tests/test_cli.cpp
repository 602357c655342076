#include <catch2/catch_amalgamated.hpp>

#include <qva/cli.hpp>

using namespace qva;
using nlohmann::json;

namespace {

std::string config_error(const json& j, const std::string& suite = {}) {
    try {
        parse_config(j, suite);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("config errors name the offending key", "[cli]") {
    CHECK(config_error(json::parse(R"({"q": [["1", "2"], ["1/0", "1"]]})"), "zf").rfind("q[2][1]: invalid rational '1/0'", 0) == 0);
    CHECK(config_error(json::parse(R"({"q": [["1", "2"], ["1/2"]]})"), "zf").rfind("q:", 0) == 0);
    CHECK(config_error(json::parse(R"({"q": [["0"]]})"), "zf").rfind("q:", 0) == 0);
    CHECK(config_error(json::parse(R"({"window": [3, -3]})"), "zf") == "window: lo > hi");
    CHECK(config_error({{"hbar_order", 0}}, "zf").rfind("hbar_order", 0) == 0);
    CHECK(config_error({{"preset", "nope"}}) == "unknown preset 'nope'");
    CHECK(config_error({{"suite", "yangian"}}, "zf").rfind("suite:", 0) == 0);
    CHECK(config_error(json::parse(R"({"p": [["1/(x"]]})"), "deformation").rfind("p:", 0) == 0);
    CHECK(config_error({{"level", "a/b"}}, "yangian").rfind("level: invalid rational", 0) == 0);
    CHECK(config_error(json::array(), "zf") == "config: expected a JSON object");
}

TEST_CASE("presets and overrides", "[cli]") {
    auto c = parse_config({{"preset", "lattice"}, {"hbar_order", 2}});
    CHECK(c.suite == "deformation");
    CHECK(c.q[0][0] == Rational(-1));
    CHECK(c.N == 2);
    auto y = preset_config("dy-sl2");
    CHECK(y.suite == "yangian");
    CHECK(y.level == Rational(1, 2));
    CHECK(y.lo == -3);
    auto z = parse_config(json::parse(R"({"q": [[1, "2"], ["1/2", 1]], "confluence": {"seed": 9, "degrees": [-1, 0]}})"), "zf");
    CHECK(z.q[0][1] == Rational(2));
    CHECK(z.confluence.seed == 9u);
    CHECK(z.confluence.lo == -1);
}

TEST_CASE("empty report is valid JSON", "[cli]") {
    Report r;
    auto text = emit_report(r, "json");
    auto j = json::parse(text);
    CHECK(j["checks"].empty());
    CHECK(j["summary"]["total"] == 0);
    CHECK(j["config"].is_object());
    CHECK(r.exit_code() == 0);
    CHECK_NOTHROW(emit_report(r, "text"));
}

TEST_CASE("failing checks carry a counterexample and set the exit code", "[cli]") {
    Report r;
    CheckReport bad{"claim", "[0,1]", 1, 1};
    Comparer cmp(bad);
    ModuleVector a(1), b(1);
    a.add({}, TruncScalar(Rational(1, 3), 1));
    cmp({0, 1}, "1", a, b);
    r.checks.push_back(bad);
    r.seconds.push_back(0);
    CHECK(r.exit_code() == 1);
    auto j = json::parse(emit_report(r, "json"));
    auto& ce = j["checks"][0]["counterexample"];
    CHECK(ce["exponents"] == json({0, 1}));
    CHECK(ce["lhs"].get<std::string>().find("1/3") != std::string::npos);
    r.checks[0].experimental = true;
    CHECK(r.exit_code() == 0);
}

TEST_CASE("reports are deterministic apart from timing", "[cli]") {
    auto c = parse_config(
        json::parse(R"({"q": [[1, "2"], ["1/2", 1]], "window": [-2, 2], "depth": 1, "confluence": {"random_words": 10}})"), "zf");
    auto a = emit_report(run_scenario(c), "json", false), b = emit_report(run_scenario(c), "json", false);
    CHECK(a == b);
    auto j = json::parse(a);
    CHECK_FALSE(j.contains("timing"));
    CHECK(j["summary"]["failed"] == 0);
    CHECK(json::parse(emit_report(run_scenario(c), "json"))["timing"].size() == j["checks"].size());
}

TEST_CASE("non-reciprocal Q is rejected", "[cli]") {
    CHECK(config_error(json::parse(R"({"q": [[1, 2], [2, 1]]})"), "zf").rfind("q:", 0) == 0);
}

TEST_CASE("series self test passes", "[cli]") {
    auto r = run_scenario(parse_config(json::object(), "series-selftest"));
    REQUIRE(r.checks.size() == 2);
    CHECK(r.exit_code() == 0);
    CHECK(r.checks[0].probes > 0);
}
