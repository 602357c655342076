#include <catch_amalgamated.hpp>

#include <qva/yangian.hpp>

using namespace qva;

namespace {

ModuleVector mono(std::initializer_list<Mode> ms, int N = 1) { return ModuleVector::basis(Monomial(ms), N); }

} // namespace

TEST_CASE("ring inverse and reflection", "[yangian]") {
    const int P = 5;
    auto d = RElem::linear(1, Rational(-2), Rational(0), P); // u - 2h
    auto inv = d.inverse();
    // 1/(u - 2h) = sum 2^n u^{-n-1} h^n
    for (int n = 0; n < P; ++n) CHECK(inv.terms().at({n, -n - 1, 0}) == rpow(Rational(2), n));
    CHECK(d * inv == RElem::constant(1, P));
    CHECK(d.reflected().reflected() == d);
    CHECK_THROWS_AS(RElem::monomial(1, 1, 0, 0, P).inverse(), DYInconsistent);
}

TEST_CASE("delta canonical form", "[yangian]") {
    FWExpr e(3);
    // u D1 = D0, u^2 D1 = 0
    e.add_delta(1, {}, RElem::monomial(1, 0, 1, 0, 3));
    CHECK(e.deltas().size() == 1);
    CHECK(e.deltas().begin()->first.first == 0);
    FWExpr z(3);
    z.add_delta(1, {}, RElem::monomial(1, 0, 2, 0, 3));
    CHECK(z.is_zero());
    CHECK_THROWS_AS(z.add_delta(0, {}, RElem::monomial(1, 0, -1, 0, 3)), UnsupportedProduct);
    // a(y) D1 = a(x) D1 - a'(x) D0
    FWExpr t(3);
    t.add_delta(1, {Sym{'E', 1}}, RElem::constant(1, 3));
    CHECK(t.deltas().at({1, {Sym{'E', 0, 0}}}) == RElem::constant(1, 3));
    CHECK(t.deltas().at({0, {Sym{'E', 0, 1}}}) == RElem::constant(-1, 3));
    // swapping twice is the identity
    auto s = t.swapped().swapped();
    CHECK((s - t).is_zero());
}

TEST_CASE("primed rule mod h matches the hand computation", "[yangian]") {
    DYEngine eng(DYPresentation::Tilde, 2);
    // h-'(x) e(y) = R e(y) h-'(x) + 2/(y-x+h) e(y); at order h^0 the single term is -2/u
    auto r = eng.swap_word(Sym{'M', 0}, Sym{'E', 1});
    auto c = r.words().at({Sym{'E', 1}});
    CHECK(c.terms().at({0, -1, 0}) == Rational(-2));
    // next order: 2/(-u+h) = -2/u - 2h/u^2
    CHECK(c.terms().at({1, -2, 0}) == Rational(-2));
}

TEST_CASE("derived relations vanish mod h^6", "[yangian]") {
    auto reps = check_dy_derived(6);
    CHECK(reps.size() >= 14);
    for (auto& r : reps) {
        INFO(r.claim << " " << (r.counterexample ? r.counterexample->lhs : "") << (r.notes.empty() ? "" : r.notes[0]));
        CHECK(r.pass);
    }
}

TEST_CASE("a wrong relation leaves a residual", "[yangian]") {
    const int P = 4;
    DYEngine eng(DYPresentation::Tilde, 3);
    // h-'(x)e(y) without its inhomogeneous term
    auto R = detail::ratio({{-1, -1, 0}}, {{-1, 1, 0}}, 1, P);
    auto e = fw_term({{'M', 0}, {'E', 1}}, RElem::constant(1, P)) - fw_term({{'E', 1}, {'M', 0}}, R);
    CHECK_FALSE(eng.normalize(e).is_zero());
}

TEST_CASE("classical limit is K", "[yangian]") {
    auto r = compare_with_K();
    INFO((r.counterexample ? r.counterexample->probe : ""));
    CHECK(r.pass);
    CHECK(r.probes == 16);
}

TEST_CASE("mode brackets of K", "[yangian]") {
    using KB = KBasis;
    for (int m = -3; m <= 3; ++m)
        for (int n = -3; n <= 3; ++n) {
            KElement ie = k_bracket(KB{'I', m}, KB{'E', n});
            KElement je = k_bracket(KB{'J', m}, KB{'E', n});
            if (m >= 0) {
                CHECK(ie == KElement{{KB{'E', m + n}, Rational(2)}});
                CHECK(je.empty());
            } else {
                CHECK(ie.empty());
                CHECK(je == KElement{{KB{'E', m + n}, Rational(2)}});
            }
            KElement ij = k_bracket(KB{'I', m}, KB{'J', n});
            if (m >= 1 && m + n == 0)
                CHECK(ij == KElement{{KB{'c', 0}, Rational(2 * m)}});
            else
                CHECK(ij.empty());
            KElement ef = k_bracket(KB{'E', m}, KB{'F', n});
            KElement want{{KB{'I', m + n}, 1}, {KB{'J', m + n}, 1}};
            if (m + n == 0 && m != 0) want[KB{'c', 0}] = Rational(m);
            CHECK(ef == want);
        }
    CHECK(k_jacobi_check(-3, 3).pass);
    CHECK(k_affine_check(-3, 3).pass);
}

TEST_CASE("vacuum module of K", "[yangian]") {
    KModule V(Rational(1, 2));
    auto vac = ModuleVector::vacuum(1);
    // E_1 F_{-1} 1 = (I_0 + J_0 + c) 1 = l
    CHECK(V.apply_mode({'E', 1, 1}, mono({{'F', 1, -1}}), 1) == Rational(1, 2) * vac);
    // I_1 J_{-1} 1 = 2l
    CHECK(V.apply_mode({'I', 1, 1}, mono({{'J', 1, -1}}), 1) == Rational(1) * vac);
    // I_0 E_{-1} 1 = 2 E_{-1} 1
    CHECK(V.apply_mode({'I', 1, 0}, mono({{'E', 1, -1}}), 1) == Rational(2) * mono({{'E', 1, -1}}));
    CHECK(dy_basis(2).size() == 1 + 4 + 4 + 10);
    for (auto& r : vk_field_checks(V, 2, Window::cube(2, -3, 3))) {
        INFO(r.claim);
        CHECK(r.pass);
    }
    // wrong level is caught by the bracket check
    KModule W(Rational(1));
    auto probes = dy_probes(1, 1);
    CHECK_FALSE(check_ef_bracket(W.field('E'), W.field('F'), W.field('I'), W.field('J'), Rational(1, 2), 1, Window::cube(2, -2, 2),
                                 probes)
                    .pass);
}

TEST_CASE("experimental straightened module", "[yangian]") {
    const Rational l(1, 2);
    DYModule M(l, 2);
    auto vac = ModuleVector::vacuum(2);
    // e_0 f_{-1} 1 = (I_{-1} + J_{-1} + l h I_{-2}) 1
    auto got = M.apply_mode({'E', 1, 0}, ModuleVector::basis(Monomial{{'F', 1, -1}}, 2), 2);
    ModuleVector want = ModuleVector::basis(Monomial{{'I', 1, -1}}, 2) + ModuleVector::basis(Monomial{{'J', 1, -1}}, 2);
    want.add_scaled(ModuleVector::basis(Monomial{{'I', 1, -2}}, 2), TruncScalar::hbar_pow(1, 2, l));
    CHECK(got == want);
    auto reps = dy_module_checks(l, 2, 2, Window::cube(2, -2, 2));
    REQUIRE(reps.size() >= 2);
    for (auto& r : reps) {
        CHECK(r.experimental);
        INFO(r.claim << " " << r.status());
    }
    CHECK(reps[0].pass); // N = 1 coherence with V_K
}

TEST_CASE("I and E are not mutually local", "[yangian]") {
    KModule V(Rational(1, 2));
    auto I = V.field('I'), E = V.field('E');
    DirectedSeries one(HPoly(Rational(1)), HPoly(Rational(1)), Direction::Single, 1);
    CHECK(find_locality_order(I, E, {{E, I, one}}, 3, 1, Window::cube(2, -3, 3), dy_probes(2, 1)) == -1);
}
