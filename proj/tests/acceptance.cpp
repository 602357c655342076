// One line per acceptance criterion; exits nonzero if any gating criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include <qva/cli.hpp>

using namespace qva;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

Outcome all_pass(const std::vector<CheckReport>& reps, bool gate_experimental = true) {
    Outcome o;
    int failed = 0;
    for (auto& r : reps)
        if (!r.pass && (gate_experimental || !r.experimental)) {
            if (failed++ == 0) o.detail = "first failure: " + r.claim;
            o.pass = false;
        }
    if (o.pass) o.detail = std::to_string(reps.size()) + " checks";
    return o;
}

std::vector<ModuleVector> probes(const ZFAlgebra& A, int depth, int N) { return zf_probes(A, depth, N); }

Outcome relations(const char* preset) {
    auto D = preset_deformation(preset);
    auto reps = check_deformed_relations(D, 4, Window::cube(2, -4, 4), probes(D.algebra(), 2, 4));
    auto o = all_pass(reps);
    for (auto& r : reps)
        if (r.claim.find("anticommutator") != std::string::npos) o.detail += ", incl. " + r.claim;
    return o;
}

} // namespace

int main() {
    int gating_failures = 0;
    auto criterion = [&](int id, const std::string& what, bool gating, const std::function<Outcome()>& f) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (gating && !o.pass) ++gating_failures;
        std::printf("criterion %2d: %s  %s (%s) [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", what.c_str(), o.detail.c_str(), dt);
        std::fflush(stdout);
    };

    criterion(1, "straightening confluence, l=2", true, [] {
        ZFAlgebra A{QMatrix({{Rational(1), Rational(2)}, {Rational(1, 2), Rational(1)}})};
        ConfluenceOptions o;
        o.max_length = 4;
        o.random_words = 200;
        o.random_min = 5;
        o.random_max = 6;
        o.lo = -2;
        o.hi = 1;
        o.seed = 20240601;
        auto t0 = std::chrono::steady_clock::now();
        auto r = check_confluence(A, o);
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        Outcome out = all_pass({r});
        out.detail = r.notes.back();
        if (dt >= 30) {
            out.pass = false;
            out.detail += ", over 30 s";
        }
        return out;
    });

    criterion(2, "classical Weyl and Clifford axioms, depth 3, N=1", true, [] {
        std::vector<CheckReport> all;
        for (int q : {1, -1}) {
            ScenarioConfig c;
            c.suite = "zf";
            c.q = {{Rational(q)}};
            c.N = 1;
            c.lo = -4;
            c.hi = 4;
            c.depth = 3;
            c.confluence.max_length = 2;
            auto r = run_scenario(c);
            all.insert(all.end(), r.checks.begin(), r.checks.end());
        }
        return all_pass(all);
    });

    criterion(3, "deformed betagamma relations mod h^4", true, [] { return relations("betagamma"); });
    criterion(4, "deformed lattice relations mod h^4", true, [] { return relations("lattice"); });

    criterion(5, "braid unitarity", true, [] {
        return all_pass({check_braid_axioms(preset_deformation("betagamma").braid()),
                         check_braid_axioms(preset_deformation("lattice").braid())});
    });

    criterion(6, "betagamma skew symmetry mod h^3, x-degree <= 5", true, [] {
        auto D = preset_deformation("betagamma");
        const ZFAlgebra& A = D.algebra();
        const int N = 3;
        DOperator Dop = [A](const ModuleVector& v) { return A.translate(v); };
        std::vector<FieldOracle> F{D.deformed_field('X', 1), D.deformed_field('Y', 1)};
        std::vector<ModuleVector> S{ModuleVector::basis(Monomial{Mode{'X', 1, -1}}, N), ModuleVector::basis(Monomial{Mode{'Y', 1, -1}}, N)};
        std::vector<CheckReport> reps;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                auto f = D.braid().f.at({a, b}).expand(Direction::Single, N);
                reps.push_back(check_skew_symmetry(F[a], S[b], {SkewTerm{F[b], S[a], f}}, Dop, N, 5));
            }
        return all_pass(reps);
    });

    criterion(7, "double Yangian derived relations mod h^6", true, [] { return all_pass(check_dy_derived(6)); });

    criterion(8, "classical limit, Jacobi and affine dictionary on [-3,3]", true,
              [] { return all_pass({compare_with_K(), k_jacobi_check(-3, 3), k_affine_check(-3, 3)}); });

    criterion(9, "V_K at level 1/2, depth 2, [-3,3]^2", true,
              [] { return all_pass(vk_field_checks(KModule(Rational(1, 2)), 2, Window::cube(2, -3, 3))); });

    criterion(10, "experimental module at level 1/2, N=2 (report only)", false, [] {
        auto reps = dy_module_checks(Rational(1, 2), 2, 2, Window::cube(2, -2, 2));
        Outcome o;
        int failed = 0;
        for (auto& r : reps) failed += !r.pass;
        o.pass = !reps.empty();
        o.detail = failed ? "structured non-confluence report, " + std::to_string(failed) + " of " + std::to_string(reps.size()) +
                                " residuals nonzero"
                          : "all " + std::to_string(reps.size()) + " residuals vanish";
        return o;
    });

    criterion(11, "truncation tower N=1,2 against N=4", true, [] {
        std::vector<CheckReport> all;
        for (auto name : {"betagamma", "lattice"}) {
            auto D = preset_deformation(name);
            auto r = check_tower_coherence(D, {1, 2}, 4, Window::cube(2, -4, 4), probes(D.algebra(), 2, 4));
            all.insert(all.end(), r.begin(), r.end());
        }
        return all_pass(all);
    });

    std::printf("%s\n", gating_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED");
    return gating_failures ? 1 : 0;
}
