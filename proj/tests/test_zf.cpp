#include <catch_amalgamated.hpp>

#include <random>

#include <qva/zf_algebra.hpp>

using namespace qva;

namespace {

ModuleVector mono(std::initializer_list<Mode> ms, int N = 1) { return ModuleVector::basis(Monomial(ms), N); }

std::vector<Mode> alphabet(int l, int lo, int hi) {
    std::vector<Mode> a;
    for (int i = 1; i <= l; ++i)
        for (char s : {'X', 'Y'})
            for (int d = lo; d <= hi; ++d) a.push_back({s, i, d});
    return a;
}

} // namespace

TEST_CASE("apply_mode examples", "[zf]") {
    ZFAlgebra weyl(QMatrix::scalar(1)), cliff(QMatrix::scalar(-1));
    auto vac = ModuleVector::vacuum(1);
    CHECK(weyl.apply_mode({'X', 1, 5}, vac).is_zero());
    CHECK(weyl.apply_mode({'X', 1, -1}, vac) == mono({{'X', 1, -1}}));
    CHECK(weyl.apply_mode({'X', 1, 0}, mono({{'Y', 1, -1}})) == vac);
    CHECK(weyl.apply_mode({'Y', 1, 0}, mono({{'X', 1, -1}})) == Rational(-1) * vac);
    CHECK(cliff.apply_mode({'X', 1, -1}, mono({{'X', 1, -1}})).is_zero());
    // Clifford contraction keeps its sign: X0 Y-1 1 = 1, Y0 X-1 1 = q * (-1) ... solved from X Y + Y X = 1
    CHECK(cliff.apply_mode({'X', 1, 0}, mono({{'Y', 1, -1}})) == vac);
    CHECK(cliff.apply_mode({'Y', 1, 0}, mono({{'X', 1, -1}})) == vac);
}

TEST_CASE("relations hold on the vacuum module", "[zf]") {
    // check X_m Y_n - q_ji Y_n X_m = delta on basis vectors, directly from apply_mode
    QMatrix Q({{Rational(1), Rational(2)}, {Rational(1, 2), Rational(1)}});
    ZFAlgebra A(Q);
    for (auto& b : A.basis(3)) {
        auto w = ModuleVector::basis(b, 1);
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                for (int m = -3; m <= 2; ++m)
                    for (int n = -3; n <= 2; ++n) {
                        auto xy = A.apply_mode({'X', i, m}, A.apply_mode({'Y', j, n}, w));
                        auto yx = A.apply_mode({'Y', j, n}, A.apply_mode({'X', i, m}, w));
                        ModuleVector rhs(1);
                        if (i == j && m + n + 1 == 0) rhs = w;
                        CHECK(xy - Q(j, i) * yx == rhs);
                        auto xx = A.apply_mode({'X', i, m}, A.apply_mode({'X', j, n}, w));
                        auto xx2 = A.apply_mode({'X', j, n}, A.apply_mode({'X', i, m}, w));
                        CHECK(xx == Q(i, j) * xx2);
                        auto yy = A.apply_mode({'Y', i, m}, A.apply_mode({'Y', j, n}, w));
                        auto yy2 = A.apply_mode({'Y', j, n}, A.apply_mode({'Y', i, m}, w));
                        CHECK(yy == Q(i, j) * yy2);
                    }
    }
}

TEST_CASE("vq_basis", "[zf]") {
    ZFAlgebra weyl(QMatrix::scalar(1)), cliff(QMatrix::scalar(-1));
    CHECK(weyl.basis(0) == std::vector<Monomial>{Monomial{}});
    auto b1 = weyl.basis(1);
    REQUIRE(b1.size() == 3);
    CHECK(b1[1] == Monomial{{'X', 1, -1}});
    CHECK(b1[2] == Monomial{{'Y', 1, -1}});
    Monomial sq{{'X', 1, -1}, {'X', 1, -1}};
    auto c2 = cliff.basis(2);
    CHECK(std::find(c2.begin(), c2.end(), sq) == c2.end());
    auto w2 = weyl.basis(2);
    CHECK(std::find(w2.begin(), w2.end(), sq) != w2.end());
    // enumeration oracle: partitions of weight <= 2 into two colours, with and without repetition
    CHECK(w2.size() == 1 + 2 + (2 + 3));
    CHECK(c2.size() == 1 + 2 + (2 + 1));
}

TEST_CASE("straightening confluence on short words", "[zf]") {
    for (auto q : {Rational(1), Rational(-1)}) {
        ZFAlgebra A(QMatrix::scalar(q));
        auto alpha = alphabet(1, -2, 1);
        for (auto& a : alpha)
            for (auto& b : alpha)
                for (auto& c : alpha) {
                    std::vector<Mode> w{a, b, c};
                    auto l = A.rewrite_word(w, true), r = A.rewrite_word(w, false);
                    CHECK(l == r);
                    CHECK(l == A.apply_word(w));
                }
    }
}

TEST_CASE("exchange-only words pick up the inversion scalar", "[zf]") {
    QMatrix Q({{Rational(-1), Rational(3)}, {Rational(1, 3), Rational(1)}});
    ZFAlgebra A(Q);
    std::mt19937 rng(11);
    std::vector<Mode> creators;
    for (int i = 1; i <= 2; ++i)
        for (int d = -3; d <= -1; ++d) creators.push_back({'X', i, d});
    for (int it = 0; it < 300; ++it) {
        std::vector<Mode> w;
        int len = 1 + rng() % 5;
        for (int k = 0; k < len; ++k) w.push_back(creators[rng() % creators.size()]);
        // brute force: bubble sort, multiplying q_ij per swapped adjacent pair
        std::vector<Mode> s = w;
        Rational scalar(1);
        bool zero = false;
        for (size_t p = 0; p < s.size(); ++p)
            for (size_t k = 0; k + 1 < s.size() - p; ++k)
                if (s[k + 1] < s[k]) {
                    scalar *= Q(s[k].index, s[k + 1].index);
                    std::swap(s[k], s[k + 1]);
                }
        for (size_t k = 0; k + 1 < s.size(); ++k)
            if (s[k] == s[k + 1] && Q(s[k].index, s[k].index) == Rational(-1)) zero = true;
        RVec got = A.apply_word(w);
        if (zero) {
            CHECK(got.empty());
        } else {
            REQUIRE(got.size() == 1);
            CHECK(got.begin()->first == Monomial(s.begin(), s.end()));
            CHECK(got.begin()->second == scalar);
        }
    }
}

TEST_CASE("generator fields", "[zf]") {
    ZFAlgebra weyl(QMatrix::scalar(1));
    auto X = weyl.generator_field('X', 1), Y = weyl.generator_field('Y', 1);
    auto vac = ModuleVector::vacuum(1);
    CHECK(X(-1, vac) == mono({{'X', 1, -1}}));
    CHECK(Y.bound(vac, 3) == 0);
    CHECK(X(0, mono({{'Y', 1, -1}})) == vac);
    for (int n = 0; n < 4; ++n) CHECK(X(n, vac).is_zero());
    // bound is respected on deeper vectors
    for (auto& b : weyl.basis(3)) {
        auto w = ModuleVector::basis(b, 1);
        for (int n = X.bound(w, 1); n < X.bound(w, 1) + 4; ++n) {
            CHECK(X(n, w).is_zero());
            CHECK(Y(n, w).is_zero());
        }
    }
    CHECK_THROWS(weyl.generator_field('X', 2));
}
