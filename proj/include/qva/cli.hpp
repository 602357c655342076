#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deformation.hpp"
#include "yangian.hpp"
#include "zf_algebra.hpp"

namespace qva {

inline constexpr const char* kToolVersion = "0.1.0";

struct ConfluenceOptions {
    int max_length = 3;
    int random_words = 0;
    int random_min = 5, random_max = 6;
    int lo = -2, hi = 1;
    unsigned seed = 1;
};

struct ScenarioConfig {
    std::string suite;
    std::string preset;
    std::vector<std::vector<Rational>> q{{Rational(1)}};
    std::vector<std::vector<std::string>> p;
    Rational level{1, 2};
    int N = 1;
    int lo = -4, hi = 4;
    int depth = 2;
    long fuel = 2000000;
    ConfluenceOptions confluence;
    std::string output;

    nlohmann::ordered_json echo() const {
        nlohmann::ordered_json j;
        j["suite"] = suite;
        if (!preset.empty()) j["preset"] = preset;
        if (suite == "zf" || suite == "deformation") {
            nlohmann::ordered_json qq = nlohmann::ordered_json::array();
            for (auto& row : q) {
                nlohmann::ordered_json r = nlohmann::ordered_json::array();
                for (auto& x : row) r.push_back(x.str());
                qq.push_back(r);
            }
            j["q"] = qq;
        }
        if (suite == "deformation") j["p"] = p;
        if (suite == "yangian") j["level"] = level.str();
        j["hbar_order"] = N;
        j["window"] = {lo, hi};
        j["depth"] = depth;
        j["fuel"] = fuel;
        if (suite == "zf")
            j["confluence"] = {{"max_length", confluence.max_length},
                               {"random_words", confluence.random_words},
                               {"random_length", {confluence.random_min, confluence.random_max}},
                               {"degrees", {confluence.lo, confluence.hi}},
                               {"seed", confluence.seed}};
        return j;
    }
};

namespace detail {

inline Rational parse_rational_at(const nlohmann::json& v, const std::string& key) {
    try {
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (v.is_string()) return Rational::parse(v.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(key + ": invalid rational '" + v.get<std::string>() + "' (" + e.what() + ")");
    }
    throw ConfigError(key + ": expected a rational string \"p/q\" or an integer");
}

inline int int_at(const nlohmann::json& j, const std::string& key, int def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_integer()) throw ConfigError(key + ": expected an integer");
    return j[key].get<int>();
}

inline std::pair<int, int> range_at(const nlohmann::json& j, const std::string& key, std::pair<int, int> def) {
    if (!j.contains(key)) return def;
    auto& v = j[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw ConfigError(key + ": expected [lo, hi]");
    std::pair<int, int> r{v[0].get<int>(), v[1].get<int>()};
    if (r.first > r.second) throw ConfigError(key + ": lo > hi");
    return r;
}

} // namespace detail

inline ScenarioConfig preset_config(const std::string& name) {
    ScenarioConfig c;
    c.preset = name;
    if (name == "betagamma" || name == "lattice") {
        c.suite = "deformation";
        c.q = {{Rational(name == "betagamma" ? 1 : -1)}};
        c.p = {{"(x+h)/x"}};
        c.N = 4;
        c.depth = 2;
    } else if (name == "dy-sl2") {
        c.suite = "yangian";
        c.level = Rational(1, 2);
        c.N = 6;
        c.lo = -3;
        c.hi = 3;
        c.depth = 2;
    } else
        throw ConfigError("unknown preset '" + name + "'");
    return c;
}

inline ScenarioConfig parse_config(const nlohmann::json& j, std::string suite = {}) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ScenarioConfig c;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
        c = preset_config(j["preset"].get<std::string>());
    }
    if (j.contains("suite")) {
        if (!j["suite"].is_string()) throw ConfigError("suite: expected a string");
        c.suite = j["suite"].get<std::string>();
    }
    if (!suite.empty()) {
        if (!j.contains("suite") && c.preset.empty()) c.suite = suite;
        if (c.suite != suite) throw ConfigError("suite: config names '" + c.suite + "' but '" + suite + "' was requested");
    }
    static const std::vector<std::string> suites{"zf", "deformation", "yangian", "series-selftest"};
    if (std::find(suites.begin(), suites.end(), c.suite) == suites.end()) throw ConfigError("suite: unknown suite '" + c.suite + "'");
    if (j.contains("q")) {
        auto& q = j["q"];
        if (!q.is_array() || q.empty()) throw ConfigError("q: expected a square matrix");
        c.q.clear();
        for (size_t i = 0; i < q.size(); ++i) {
            if (!q[i].is_array()) throw ConfigError("q[" + std::to_string(i + 1) + "]: expected a row");
            std::vector<Rational> row;
            for (size_t k = 0; k < q[i].size(); ++k)
                row.push_back(parse_rational_at(q[i][k], "q[" + std::to_string(i + 1) + "][" + std::to_string(k + 1) + "]"));
            c.q.push_back(row);
        }
    }
    try {
        QMatrix check(c.q);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("q: ") + e.what());
    }
    if (j.contains("p")) {
        auto& p = j["p"];
        if (!p.is_array()) throw ConfigError("p: expected a matrix of rational functions");
        c.p.clear();
        for (size_t i = 0; i < p.size(); ++i) {
            std::vector<std::string> row;
            if (!p[i].is_array()) throw ConfigError("p[" + std::to_string(i + 1) + "]: expected a row");
            for (size_t k = 0; k < p[i].size(); ++k) {
                if (!p[i][k].is_string())
                    throw ConfigError("p[" + std::to_string(i + 1) + "][" + std::to_string(k + 1) + "]: expected a string");
                row.push_back(p[i][k].get<std::string>());
            }
            c.p.push_back(row);
        }
    }
    if (c.suite == "deformation") {
        if (c.p.size() != c.q.size()) throw ConfigError("p: size does not match q");
        try {
            DeformationData d(c.p);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("p: ") + e.what());
        }
    }
    if (j.contains("level")) c.level = parse_rational_at(j["level"], "level");
    c.N = int_at(j, "hbar_order", c.N);
    if (c.N < 1) throw ConfigError("hbar_order: must be >= 1");
    std::tie(c.lo, c.hi) = range_at(j, "window", {c.lo, c.hi});
    c.depth = int_at(j, "depth", c.depth);
    if (c.depth < 0) throw ConfigError("depth: must be >= 0");
    if (j.contains("fuel")) {
        if (!j["fuel"].is_number_integer() || j["fuel"].get<long>() <= 0) throw ConfigError("fuel: expected a positive integer");
        c.fuel = j["fuel"].get<long>();
    }
    if (j.contains("confluence")) {
        auto& cf = j["confluence"];
        if (!cf.is_object()) throw ConfigError("confluence: expected an object");
        auto& o = c.confluence;
        o.max_length = int_at(cf, "max_length", o.max_length);
        o.random_words = int_at(cf, "random_words", o.random_words);
        std::tie(o.random_min, o.random_max) = range_at(cf, "random_length", {o.random_min, o.random_max});
        std::tie(o.lo, o.hi) = range_at(cf, "degrees", {o.lo, o.hi});
        o.seed = static_cast<unsigned>(int_at(cf, "seed", static_cast<int>(o.seed)));
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw ConfigError("output: expected a path string");
        c.output = j["output"].get<std::string>();
    }
    return c;
}

struct Report {
    nlohmann::ordered_json config;
    std::vector<CheckReport> checks;
    std::vector<double> seconds;

    int failed() const {
        int n = 0;
        for (auto& c : checks) n += (!c.pass && !c.experimental);
        return n;
    }
    int exit_code() const { return failed() ? 1 : 0; }
};

// Collects checks with their wall-clock time.
class CheckRunner {
public:
    explicit CheckRunner(Report& r) : r_(r) {}

    void run(const std::function<CheckReport()>& f) {
        runs([&] { return std::vector<CheckReport>{f()}; });
    }
    void runs(const std::function<std::vector<CheckReport>()>& f) {
        auto t0 = std::chrono::steady_clock::now();
        auto reps = f();
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (size_t i = 0; i < reps.size(); ++i) {
            r_.checks.push_back(std::move(reps[i]));
            r_.seconds.push_back(i == 0 ? dt : 0.0);
        }
    }

private:
    Report& r_;
};

// Leftmost-first and rightmost-first rewriting agree, and match the module action.
inline CheckReport check_confluence(const ZFAlgebra& A, const ConfluenceOptions& o) {
    std::vector<Mode> alpha;
    for (int i = 1; i <= A.rank(); ++i)
        for (char s : {'X', 'Y'})
            for (int d = o.lo; d <= o.hi; ++d) alpha.push_back({s, i, d});
    CheckReport rep{"straightening confluence", "degrees [" + std::to_string(o.lo) + "," + std::to_string(o.hi) + "]", 1, 0};
    Comparer cmp(rep);
    int nonzero = 0;
    auto test = [&](const std::vector<Mode>& w) {
        ++rep.probes;
        std::string label;
        for (auto& z : w) label += (label.empty() ? "" : " ") + z.str();
        auto l = to_module(A.rewrite_word(w, true), 1), r = to_module(A.rewrite_word(w, false), 1);
        nonzero += !l.is_zero();
        if (!cmp({static_cast<int>(w.size())}, label, l, r)) return false;
        return cmp({static_cast<int>(w.size())}, label + " (module action)", l, to_module(A.apply_word(w), 1));
    };
    std::vector<Mode> w;
    std::function<bool(int)> all = [&](int len) -> bool {
        if (static_cast<int>(w.size()) == len) return test(w);
        for (auto& z : alpha) {
            w.push_back(z);
            bool ok = all(len);
            w.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    for (int len = 1; len <= o.max_length && rep.pass; ++len) all(len);
    std::mt19937 rng(o.seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(alpha.size()) - 1), len(o.random_min, o.random_max);
    for (int i = 0; i < o.random_words && rep.pass; ++i) {
        std::vector<Mode> rw(len(rng));
        for (auto& z : rw) z = alpha[pick(rng)];
        test(rw);
    }
    rep.notes.push_back(std::to_string(rep.probes) + " words, " + std::to_string(nonzero) + " with nonzero normal form");
    return rep;
}

inline std::vector<ModuleVector> zf_probes(const ZFAlgebra& A, int depth, int N) {
    std::vector<ModuleVector> out;
    for (auto& b : A.basis(depth)) out.push_back(ModuleVector::basis(b, N));
    return out;
}

inline DirectedSeries constant_series(const Rational& c, int N) {
    return DirectedSeries(HPoly(c), HPoly(Rational(1)), Direction::Single, N);
}

// classical V_Q: locality and weak associativity of every generator pair
inline void zf_suite(const ScenarioConfig& c, CheckRunner& run) {
    ZFAlgebra A{QMatrix(c.q)};
    run.run([&] { return check_confluence(A, c.confluence); });
    auto P = zf_probes(A, c.depth, 1);
    Window win = Window::cube(2, c.lo, c.hi);
    std::vector<std::pair<Mode, FieldOracle>> gens;
    for (int i = 1; i <= A.rank(); ++i)
        for (char s : {'X', 'Y'}) gens.push_back({Mode{s, i, -1}, A.generator_field(s, i)});
    DOperator D = [A](const ModuleVector& v) { return A.translate(v); };
    for (auto& [m, f] : gens) {
        run.run([&] { return check_vacuum_axioms(f, ModuleVector::basis(Monomial{m}, 1), 1); });
        run.run([&] { return check_d_bracket(f, D, P, 1, Window{{c.lo, c.hi}}); });
    }
    for (auto& [ma, a] : gens)
        for (auto& [mb, b] : gens) {
            Rational s = A.exchange({ma.species, ma.index, -1}, {mb.species, mb.index, -2}).first;
            int k = -1;
            run.run([&] {
                k = find_locality_order(a, b, {{b, a, constant_series(s, 1)}}, 2, 1, win, P);
                auto r = check_s_locality(a, b, {{b, a, constant_series(s, 1)}}, std::max(k, 2), 1, win, P);
                r.notes.push_back("minimal order " + std::to_string(k));
                if (k < 0) r.pass = false;
                return r;
            });
            run.run([&] {
                YEProduct ye(a, b, HPoly(UPoly::monomial(std::max(k, 0))), 1);
                int l = find_associativity_order(ye, P, 4, 1, win);
                auto r = check_weak_associativity(ye, P, std::max(l, 0), 1, win);
                r.notes.push_back("associativity order " + std::to_string(l));
                if (l < 0) r.pass = false;
                return r;
            });
        }
}

// deformed fields: relations, braiding, pseudo-automorphisms, skew symmetry
inline void deformation_suite(const ScenarioConfig& c, CheckRunner& run) {
    Deformation D(ZFAlgebra(QMatrix(c.q)), DeformationData(c.p));
    const ZFAlgebra& A = D.algebra();
    const int N = c.N;
    auto P = zf_probes(A, c.depth, N);
    Window win = Window::cube(2, c.lo, c.hi);
    run.runs([&] { return check_deformed_relations(D, N, win, P); });
    run.run([&] { return check_braid_axioms(D.braid()); });
    std::vector<int> lower;
    for (int n : {1, 2})
        if (n < N) lower.push_back(n);
    if (!lower.empty()) run.runs([&] { return check_tower_coherence(D, lower, N, win, P); });
    auto P3 = zf_probes(A, std::min(c.depth, 2), std::min(N, 3));
    for (int i = 1; i <= A.rank(); ++i) {
        run.run([&] { return check_phi_inverse(D, i, P3, std::min(N, 3)); });
        for (int j = 1; j <= A.rank(); ++j) {
            run.run([&] { return check_phi_commute(D, i, j, P3, std::min(N, 3)); });
            run.run([&] { return check_phi_homomorphism(D, i, j, P3, std::min(N, 3), Window::cube(2, -3, 3)); });
        }
    }
    const int Ns = std::min(N, 3);
    int l = A.rank();
    DOperator Dop = [A](const ModuleVector& v) { return A.translate(v); };
    std::vector<FieldOracle> F;
    std::vector<ModuleVector> S;
    for (char s : {'X', 'Y'})
        for (int i = 1; i <= l; ++i) {
            F.push_back(D.deformed_field(s, i));
            S.push_back(ModuleVector::basis(Monomial{Mode{s, i, -1}}, Ns));
        }
    auto braid = D.braid();
    for (size_t a = 0; a < F.size(); ++a) {
        run.run([&] { return check_vacuum_axioms(F[a], S[a], Ns); });
        run.run([&] { return check_d_bracket(F[a], Dop, zf_probes(A, 1, Ns), Ns, Window{{-3, 3}}); });
        for (size_t b = 0; b < F.size(); ++b)
            run.run([&] {
                auto f = braid.f.at({static_cast<int>(a), static_cast<int>(b)}).expand(Direction::Single, Ns);
                auto r = check_skew_symmetry(F[a], S[b], {SkewTerm{F[b], S[a], f}}, Dop, Ns, 5);
                r.claim += " on " + F[b].label;
                return r;
            });
    }
}

inline void yangian_suite(const ScenarioConfig& c, CheckRunner& run) {
    run.runs([&] { return check_dy_derived(c.N); });
    run.run([] { return compare_with_K(); });
    run.run([&] { return k_jacobi_check(c.lo, c.hi); });
    run.run([&] { return k_affine_check(c.lo, c.hi); });
    KModule V(c.level);
    run.runs([&] { return vk_field_checks(V, c.depth, Window::cube(2, c.lo, c.hi)); });
    run.runs([&] { return dy_module_checks(c.level, 2, c.depth, Window::cube(2, -2, 2), c.fuel); });
}

inline void series_selftest(const ScenarioConfig& c, CheckRunner& run) {
    const int N = std::max(c.N, 2);
    run.run([&] {
        // 1/(x-y-h), x dominant: coefficient of h^n x^(-n-1-i) y^i is binom(n+i, i)
        auto s = iota_expand_expr("1/(x-y-h)", "x", "y", Direction::FirstDominant, N);
        CheckReport r{"geometric expansion of 1/(x-y-h)", "[" + std::to_string(c.lo) + "," + std::to_string(c.hi) + "]", N, 0};
        Comparer cmp(r);
        for (int n = 0; n < N; ++n)
            for (int i = 0; i <= c.hi; ++i) {
                ModuleVector a(1), b(1);
                a.add({}, TruncScalar(s.coeff(-n - 1 - i, i, n), 1));
                b.add({}, TruncScalar(binomial(n + i, i), 1));
                cmp({-n - 1 - i, i}, "scalar", a, b);
                ++r.probes;
            }
        return r;
    });
    run.run([&] {
        // difference of the two expansions of 1/(x-y) is x^-1 delta(y/x)
        auto a = iota_expand_expr("1/(x-y)", "x", "y", Direction::FirstDominant, 1);
        auto b = iota_expand_expr("1/(x-y)", "x", "y", Direction::SecondDominant, 1);
        CheckReport r{"iota difference is the delta distribution", "[" + std::to_string(c.lo) + "," + std::to_string(c.hi) + "]^2", 1,
                      0};
        Comparer cmp(r);
        for (int m = c.lo; m <= c.hi; ++m)
            for (int n = c.lo; n <= c.hi; ++n) {
                ModuleVector l(1), rr(1);
                l.add({}, TruncScalar(a.coeff(m, n, 0) - b.coeff(m, n, 0), 1));
                rr.add({}, TruncScalar(delta_coeff(0, -m - 1, n), 1));
                cmp({m, n}, "scalar", l, rr);
                ++r.probes;
            }
        return r;
    });
}

inline Report run_scenario(const ScenarioConfig& c) {
    Report r;
    r.config = c.echo();
    CheckRunner run(r);
    if (c.suite == "zf")
        zf_suite(c, run);
    else if (c.suite == "deformation")
        deformation_suite(c, run);
    else if (c.suite == "yangian")
        yangian_suite(c, run);
    else if (c.suite == "series-selftest")
        series_selftest(c, run);
    else
        throw ConfigError("suite: unknown suite '" + c.suite + "'");
    return r;
}

inline nlohmann::ordered_json report_json(const Report& r, bool timing = true) {
    nlohmann::ordered_json j;
    j["tool"] = "qva";
    j["version"] = kToolVersion;
    j["config"] = r.config.is_null() ? nlohmann::ordered_json::object() : r.config;
    j["checks"] = nlohmann::ordered_json::array();
    int passed = 0, experimental = 0;
    for (size_t i = 0; i < r.checks.size(); ++i) {
        nlohmann::ordered_json c;
        c["id"] = i + 1;
        auto body = to_json(r.checks[i]);
        for (auto& [k, v] : body.items()) c[k] = v;
        j["checks"].push_back(c);
        passed += r.checks[i].pass;
        experimental += r.checks[i].experimental;
    }
    j["summary"] = {{"total", r.checks.size()}, {"passed", passed}, {"failed", r.failed()}, {"experimental", experimental}};
    if (timing) {
        nlohmann::ordered_json t = nlohmann::ordered_json::array();
        for (size_t i = 0; i < r.seconds.size(); ++i) t.push_back({{"id", i + 1}, {"seconds", r.seconds[i]}});
        j["timing"] = t;
    }
    return j;
}

inline std::string emit_report(const Report& r, const std::string& format, bool timing = true) {
    if (format == "json") return report_json(r, timing).dump(2) + "\n";
    if (format != "text") throw ConfigError("format: expected json or text");
    std::ostringstream os;
    auto pad = [](std::string s, size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    os << pad("id", 5) << pad("status", 8) << pad("N", 4) << pad("probes", 8) << pad("window", 22) << "claim\n";
    for (size_t i = 0; i < r.checks.size(); ++i) {
        auto& c = r.checks[i];
        std::string st = c.status() + (c.experimental ? "*" : "");
        os << pad(std::to_string(i + 1), 5) << pad(st, 8) << pad(std::to_string(c.hbar_order), 4) << pad(std::to_string(c.probes), 8)
           << pad(c.window, 22) << c.claim << "\n";
        if (c.counterexample) {
            auto& x = *c.counterexample;
            std::string e;
            for (int v : x.exponents) e += (e.empty() ? "" : ",") + std::to_string(v);
            os << "     at (" << e << ") h^" << x.hbar << " probe " << x.probe << "\n       lhs " << x.lhs << "\n       rhs " << x.rhs << "\n";
        }
    }
    os << r.checks.size() << " checks, " << r.failed() << " failed";
    int ex = 0;
    for (auto& c : r.checks) ex += c.experimental;
    if (ex) os << " (" << ex << " experimental, marked *)";
    os << "\n";
    return os.str();
}

} // namespace qva
