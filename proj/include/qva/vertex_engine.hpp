#pragma once

#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "delta.hpp"
#include "field.hpp"
#include "report.hpp"
#include "series.hpp"

namespace qva {

using DOperator = std::function<ModuleVector(const ModuleVector&)>;

namespace detail {
inline const ModuleVector& zero_vector(int N) {
    static thread_local std::map<int, ModuleVector> zeros;
    auto it = zeros.find(N);
    if (it == zeros.end()) it = zeros.emplace(N, ModuleVector(N)).first;
    return it->second;
}
constexpr int kFar = INT_MAX / 8;
} // namespace detail

// Coefficients of outer(x_o) inner(x_i) w, with both lower-truncation bounds.
class PairTable {
public:
    PairTable(FieldOracle outer, FieldOracle inner, ModuleVector w, int N)
        : outer_(std::move(outer)), inner_(std::move(inner)), w_(w.truncated(N)), N_(N) {
        inner_low_ = -inner_.bound(w_, N_);
    }

    int order() const { return N_; }
    int inner_low() const { return inner_low_; }

    const ModuleVector& inner_vec(int e) {
        if (e < inner_low_) return detail::zero_vector(N_);
        auto it = inner_cache_.find(e);
        if (it == inner_cache_.end()) it = inner_cache_.emplace(e, inner_.apply(-e - 1, w_, N_)).first;
        return it->second;
    }
    int outer_low(int e_inner) {
        auto it = outer_low_.find(e_inner);
        if (it != outer_low_.end()) return it->second;
        const ModuleVector& v = inner_vec(e_inner);
        int lo = v.is_zero() ? detail::kFar : -outer_.bound(v, N_);
        outer_low_.emplace(e_inner, lo);
        return lo;
    }
    const ModuleVector& at(int eo, int ei) {
        if (ei < inner_low_ || eo < outer_low(ei)) return detail::zero_vector(N_);
        auto key = std::pair(eo, ei);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, outer_.apply(-eo - 1, inner_vec(ei), N_)).first;
        return it->second;
    }

private:
    FieldOracle outer_, inner_;
    ModuleVector w_;
    int N_;
    int inner_low_;
    std::map<int, ModuleVector> inner_cache_;
    std::map<int, int> outer_low_;
    std::map<std::pair<int, int>, ModuleVector> cache_;
};

// Coefficient of x1^m1 x2^m2 in S(x1 - x2) * P, where P is a pair table whose outer variable is x1 iff outer_is_x1.
inline ModuleVector series_pair_coeff(const DirectedSeries& S, PairTable& P, bool outer_is_x1, int m1, int m2) {
    const int N = P.order();
    ModuleVector acc(N);
    auto pick = [&](int e1, int e2) -> const ModuleVector& {
        return outer_is_x1 ? P.at(m1 - e1, m2 - e2) : P.at(m2 - e2, m1 - e1);
    };
    auto scalar = [&](int e1, int e2) {
        TruncScalar c(N);
        for (int k = 0; k < std::min(N, S.order()); ++k) c.set(k, S.coeff(e1, e2, k));
        return c;
    };
    if (S.is_zero()) return acc;
    if (S.polynomial()) {
        for (int n = std::max(0, S.low()); n <= S.high(); ++n)
            for (int t = 0; t <= n; ++t) {
                const ModuleVector& v = pick(n - t, t);
                if (v.is_zero()) continue;
                acc.add_scaled(v, scalar(n - t, t));
            }
        return acc;
    }
    bool x2_nondominant = S.direction() == Direction::FirstDominant;
    if (S.direction() == Direction::Single || x2_nondominant != outer_is_x1)
        throw DirectionError("series direction incompatible with the operator order");
    int m_nd = x2_nondominant ? m2 : m1;
    int m_d = x2_nondominant ? m1 : m2;
    bool fin = S.finite();
    for (int t = 0; m_nd - t >= P.inner_low(); ++t) {
        int ei = m_nd - t;
        int lo = P.outer_low(ei);
        if (lo >= detail::kFar) continue;
        int s_hi = m_d - lo;
        if (fin) s_hi = std::min(s_hi, S.high() - t);
        for (int s = S.low() - t; s <= s_hi; ++s) {
            int e1 = x2_nondominant ? s : t;
            int e2 = x2_nondominant ? t : s;
            TruncScalar c = scalar(e1, e2);
            if (c.is_zero()) continue;
            acc.add_scaled(P.at(m_d - s, ei), c);
        }
    }
    return acc;
}

// x1^m1 ... xr^mr coefficients of a1(x1) ... ar(xr) w, right to left.
inline std::map<std::vector<int>, ModuleVector> product_window(const std::vector<FieldOracle>& fields, const ModuleVector& w,
                                                               const Window& win, int N) {
    if (win.dims() != fields.size()) throw ConfigError("window dimension does not match the number of fields");
    std::map<std::vector<int>, ModuleVector> out;
    std::map<std::vector<int>, ModuleVector> memo; // keyed by suffix exponents
    std::function<ModuleVector(const std::vector<int>&, size_t)> suffix = [&](const std::vector<int>& e, size_t from) {
        if (from == fields.size()) return w.truncated(N);
        std::vector<int> key(e.begin() + from, e.end());
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        ModuleVector inner = suffix(e, from + 1);
        ModuleVector r = inner.is_zero() ? ModuleVector(N) : fields[from].apply(-e[from] - 1, inner, N);
        memo.emplace(key, r);
        return r;
    };
    for_each_point(win, [&](const std::vector<int>& e) {
        out.emplace(e, suffix(e, 0));
        return true;
    });
    return out;
}

// One term f(x2 - x1) b(x2) a(x1) of a braided product.
struct BraidTerm {
    FieldOracle b, a;
    DirectedSeries f; // single variable x standing for x2 - x1
};
using BraidTermList = std::vector<BraidTerm>;

// u^k f(-u), u = x1 - x2, expanded with x2 dominant
inline DirectedSeries braid_series(const DirectedSeries& f, int k) {
    HPoly uk(UPoly::monomial(k));
    return DirectedSeries(uk * f.num().reflect(), f.den().reflect(), Direction::SecondDominant, f.order(), {"x1", "x2"});
}

inline std::string probe_label(const ModuleVector& w) { return w.str(); }

inline CheckReport check_s_locality(const FieldOracle& a, const FieldOracle& b, const BraidTermList& terms, int k, int N,
                                    const Window& win, const std::vector<ModuleVector>& probes) {
    CheckReport rep{"s-locality " + a.label + "," + b.label + " k=" + std::to_string(k), win.str(), N,
                    static_cast<int>(probes.size())};
    Comparer cmp(rep);
    DirectedSeries lhs_s(HPoly(UPoly::monomial(k)), HPoly(Rational(1)), Direction::FirstDominant, N);
    std::vector<DirectedSeries> rhs_s;
    for (auto& t : terms) rhs_s.push_back(braid_series(t.f.with_order(N), k));
    for (auto& w : probes) {
        PairTable A(a, b, w, N);
        std::vector<PairTable> B;
        for (auto& t : terms) B.emplace_back(t.b, t.a, w, N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            ModuleVector lhs = series_pair_coeff(lhs_s, A, true, e[0], e[1]);
            ModuleVector rhs(N);
            for (size_t i = 0; i < terms.size(); ++i) rhs.add(series_pair_coeff(rhs_s[i], B[i], false, e[0], e[1]));
            ok = cmp(e, probe_label(w), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

inline int find_locality_order(const FieldOracle& a, const FieldOracle& b, const BraidTermList& terms, int cap, int N,
                               const Window& win, const std::vector<ModuleVector>& probes) {
    for (int k = 0; k <= cap; ++k)
        if (check_s_locality(a, b, terms, k, N, win, probes).pass) return k;
    return -1;
}

// Y_E(a, x0) b for a multiplier p polynomial in x1 - x2 (and h).
class YEProduct {
public:
    using LowFn = std::function<int(const ModuleVector&, int)>;

    YEProduct(FieldOracle a, FieldOracle b, HPoly p, int N, LowFn x1_low = {}) : impl_(std::make_shared<Impl>()) {
        if (p.part(0).is_zero()) throw std::invalid_argument("invalid multiplier: p(x1, x2, 0) = 0");
        for (int h = 0; h <= p.hdeg(); ++h)
            if (!p.part(h).is_zero() && p.part(h).low() < 0) throw std::invalid_argument("multiplier must be a polynomial");
        auto& I = *impl_;
        I.a = std::move(a);
        I.b = std::move(b);
        I.N = N;
        I.ord = p.part(0).low();
        I.pser = DirectedSeries(p, HPoly(Rational(1)), Direction::FirstDominant, N);
        I.invp = DirectedSeries(HPoly(Rational(1)), p, Direction::Single, N);
        FieldOracle aa = I.a;
        I.x1_low = x1_low ? std::move(x1_low) : LowFn([aa](const ModuleVector& w, int n) { return -aa.bound(w, n); });
    }

    int order() const { return impl_->ord; }
    const FieldOracle& left() const { return impl_->a; }
    const FieldOracle& right() const { return impl_->b; }

    // (a_n b) as a field
    FieldOracle mode(int n) const {
        auto I = impl_;
        std::string label = "(" + I->a.label + "_{" + std::to_string(n) + "}" + I->b.label + ")";
        if (n >= I->ord) return zero_field(label);
        return {[I, n](int q, const ModuleVector& w, int N) {
                    return apply_linear(w, N, [&](const Monomial& m) { return I->mode_apply(n, q, m, N); });
                },
                [I, n](const ModuleVector& w, int N) {
                    int b = INT_MIN / 4;
                    for (auto& [m, c] : w.terms()) {
                        ModuleVector v = ModuleVector::basis(m, N);
                        int L1 = I->x1_low(v, N), L2 = -I->b.bound(v, N);
                        b = std::max(b, -L1 - L2 - n - 1 + I->ord);
                    }
                    return b;
                },
                label};
    }

    // Coefficient of x1^m1 x2^m2 in p(x1 - x2) a(x1) b(x2) w.
    ModuleVector cleared(const ModuleVector& w, int m1, int m2) const {
        int N = impl_->N;
        return apply_linear(w, N, [&](const Monomial& m) {
            std::lock_guard<std::recursive_mutex> lock(impl_->mu);
            return impl_->G(impl_->state(m, N), m1, m2);
        });
    }
    int x1_low(const ModuleVector& w) const { return impl_->x1_low(w, impl_->N); }

    // Spot check that p a(x1) b(x2) w vanishes just below the asserted x1 bound.
    CheckReport check_compatibility(const std::vector<ModuleVector>& probes, int m2_lo, int m2_hi, int depth = 3) const {
        CheckReport rep{"y_e compatibility " + impl_->a.label + "," + impl_->b.label,
                        "x1 in [L1-" + std::to_string(depth) + ",L1-1] x2 in [" + std::to_string(m2_lo) + "," +
                            std::to_string(m2_hi) + "]",
                        impl_->N, static_cast<int>(probes.size())};
        Comparer cmp(rep);
        for (auto& w : probes)
            for (auto& [m, c] : w.terms()) {
                ModuleVector v = ModuleVector::basis(m, impl_->N);
                int L1 = x1_low(v);
                for (int m1 = L1 - depth; m1 < L1; ++m1)
                    for (int m2 = m2_lo; m2 <= m2_hi; ++m2)
                        if (!cmp({m1, m2}, probe_label(v), cleared(v, m1, m2), ModuleVector(impl_->N))) return rep;
            }
        rep.notes.push_back("multiplier order " + std::to_string(impl_->ord));
        return rep;
    }

private:
    struct State {
        std::unique_ptr<PairTable> A;
        int L1 = 0, L2 = 0;
        std::map<std::pair<int, int>, ModuleVector> G, H, modes;
    };
    struct Impl {
        FieldOracle a, b;
        int N = 1, ord = 0;
        DirectedSeries pser, invp;
        LowFn x1_low;
        std::recursive_mutex mu;
        std::map<std::pair<Monomial, int>, std::unique_ptr<State>> states;

        State& state(const Monomial& m, int N) {
            auto key = std::pair(m, N);
            auto it = states.find(key);
            if (it != states.end()) return *it->second;
            auto st = std::make_unique<State>();
            ModuleVector v = ModuleVector::basis(m, N);
            st->A = std::make_unique<PairTable>(a, b, v, N);
            st->L1 = x1_low(v, N);
            st->L2 = -b.bound(v, N);
            return *states.emplace(key, std::move(st)).first->second;
        }
        const ModuleVector& G(State& st, int m1, int m2) {
            auto key = std::pair(m1, m2);
            auto it = st.G.find(key);
            if (it == st.G.end()) {
                DirectedSeries ps = pser.order() == st.A->order() ? pser : pser.with_order(st.A->order());
                it = st.G.emplace(key, series_pair_coeff(ps, *st.A, true, m1, m2)).first;
            }
            return it->second;
        }
        // x0^j x^s coefficient of G(x + x0, x)
        const ModuleVector& H(State& st, int j, int s) {
            auto key = std::pair(j, s);
            auto it = st.H.find(key);
            if (it != st.H.end()) return it->second;
            ModuleVector acc(st.A->order());
            for (int m1 = st.L1; m1 <= s + j - st.L2; ++m1) {
                Rational c = binomial(m1, j);
                if (c.is_zero()) continue;
                const ModuleVector& g = G(st, m1, s - m1 + j);
                if (!g.is_zero()) acc.add_scaled(g, c);
            }
            return st.H.emplace(key, std::move(acc)).first->second;
        }
        ModuleVector mode_apply(int n, int q, const Monomial& m, int N) {
            std::lock_guard<std::recursive_mutex> lock(mu);
            State& st = state(m, N);
            auto key = std::pair(n, q);
            auto it = st.modes.find(key);
            if (it != st.modes.end()) return it->second;
            ModuleVector acc(N);
            for (int i = invp.low(); i <= -n - 1; ++i) {
                TruncScalar c(N);
                for (int k = 0; k < std::min(N, invp.order()); ++k) c.set(k, invp.ucoeff(i, k));
                if (c.is_zero()) continue;
                const ModuleVector& h = H(st, -n - 1 - i, -q - 1);
                if (!h.is_zero()) acc.add_scaled(h, c);
            }
            return st.modes.emplace(key, std::move(acc)).first->second;
        }
    };
    std::shared_ptr<Impl> impl_;
};

// (x0 + x2)^l a(x0 + x2) b(x2) w = (x0 + x2)^l Y_E(a, x0) b (x2) w on a window over (x0, x2)
inline CheckReport check_weak_associativity(const YEProduct& ye, const std::vector<ModuleVector>& probes, int l, int N,
                                            const Window& win) {
    const FieldOracle &a = ye.left(), &b = ye.right();
    CheckReport rep{"weak associativity " + a.label + "," + b.label + " l=" + std::to_string(l), win.str(), N,
                    static_cast<int>(probes.size())};
    Comparer cmp(rep);
    std::map<int, FieldOracle> modes;
    auto ye_mode = [&](int n) -> const FieldOracle& {
        auto it = modes.find(n);
        if (it == modes.end()) it = modes.emplace(n, ye.mode(n)).first;
        return it->second;
    };
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        int Bb = b.bound(w, N);
        std::map<int, ModuleVector> bw;
        auto b_t = [&](int t) -> const ModuleVector& {
            auto it = bw.find(t);
            if (it == bw.end()) it = bw.emplace(t, b.apply(t, w, N)).first;
            return it->second;
        };
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int r = e[0], s = e[1];
            ModuleVector lhs(N), rhs(N);
            for (int n = l - r - Bb - s - 1; n <= l - 1 - r; ++n) {
                int i = l - n - 1 - r, t = i - 1 - s;
                Rational c = binomial(l - n - 1, i);
                if (c.is_zero() || t >= Bb) continue;
                const ModuleVector& v = b_t(t);
                if (v.is_zero()) continue;
                lhs.add_scaled(a.apply(n, v, N), c);
            }
            for (int j = 0; j <= l; ++j) {
                int n = j - r - 1;
                if (n >= ye.order()) continue;
                rhs.add_scaled(ye_mode(n).apply(l - j - s - 1, w, N), binomial(l, j));
            }
            ok = cmp(e, probe_label(w), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

inline int find_associativity_order(const YEProduct& ye, const std::vector<ModuleVector>& probes, int cap, int N,
                                    const Window& win) {
    for (int l = 0; l <= cap; ++l)
        if (check_weak_associativity(ye, probes, l, N, win).pass) return l;
    return -1;
}

// Three-term braided Jacobi identity on a window over (x0, x1, x2).
inline CheckReport check_s_jacobi(const YEProduct& ye, const BraidTermList& terms, const std::vector<ModuleVector>& probes,
                                  int N, const Window& win) {
    const FieldOracle &a = ye.left(), &b = ye.right();
    CheckReport rep{"s-jacobi " + a.label + "," + b.label, win.str(), N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    std::vector<DirectedSeries> fneg;
    for (auto& t : terms) fneg.push_back(t.f.with_order(N).reflected());
    std::map<int, FieldOracle> modes;
    auto ye_mode = [&](int n) -> const FieldOracle& {
        auto it = modes.find(n);
        if (it == modes.end()) it = modes.emplace(n, ye.mode(n)).first;
        return it->second;
    };
    auto tcoeff = [&](const DirectedSeries& f, int e) {
        TruncScalar c(N);
        for (int k = 0; k < N; ++k) c.set(k, f.ucoeff(e, k));
        return c;
    };
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        PairTable A(a, b, w, N);
        std::vector<PairTable> B;
        for (auto& t : terms) B.emplace_back(t.b, t.a, w, N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int r = e[0], p = e[1], q = e[2];
            ModuleVector t1(N), t2(N), t3(N);
            {
                int n = -r - 1;
                for (int t = 0; q - t >= A.inner_low(); ++t) {
                    Rational c = binomial(n, t) * sign_pow(t);
                    if (c.is_zero()) continue;
                    t1.add_scaled(A.at(p - n + t, q - t), c);
                }
            }
            for (size_t i = 0; i < terms.size(); ++i) {
                PairTable& Bi = B[i];
                int x1lo = Bi.inner_low();
                if (x1lo >= detail::kFar) continue;
                int emax = INT_MIN;
                for (int t = 0; p - t >= x1lo; ++t) {
                    int lo = Bi.outer_low(p - t);
                    if (lo >= detail::kFar) continue;
                    emax = std::max(emax, r + 1 + q + t - lo);
                }
                for (int ex = fneg[i].low(); ex <= emax; ++ex) {
                    TruncScalar fc = tcoeff(fneg[i], ex);
                    if (fc.is_zero()) continue;
                    int n = ex - r - 1;
                    Rational sg = sign_pow(n);
                    for (int t = 0; p - t >= x1lo; ++t) {
                        Rational c = binomial(n, t) * sign_pow(t) * sg;
                        if (c.is_zero()) continue;
                        const ModuleVector& v = Bi.at(q - n + t, p - t);
                        if (!v.is_zero()) t2.add_scaled(v, fc * c);
                    }
                }
            }
            for (int t = 0; t <= r + ye.order(); ++t) {
                int j = r - t;
                int n = -j - 1;
                if (n >= ye.order()) continue;
                Rational c = binomial(p + t, t) * sign_pow(t);
                if (c.is_zero()) continue;
                t3.add_scaled(ye_mode(n).apply(-(q + p + t + 1) - 1, w, N), c);
            }
            ok = cmp(e, probe_label(w), t1 - t2, t3);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

inline ModuleVector d_operator(const FieldOracle& field, int N) { return field.apply(-2, ModuleVector::vacuum(N), N); }

// [D, a(x)] w = (d/dx) a(x) w, coefficientwise in x
inline CheckReport check_d_bracket(const FieldOracle& a, const DOperator& D, const std::vector<ModuleVector>& probes, int N,
                                   const Window& win) {
    CheckReport rep{"d-bracket " + a.label, win.str(), N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        ModuleVector Dw = D(w);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int s = e[0];
            ModuleVector lhs = D(a.apply(-s - 1, w, N)) - a.apply(-s - 1, Dw, N);
            ModuleVector rhs = Rational(s + 1) * a.apply(-s - 2, w, N);
            ok = cmp(e, probe_label(w), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

// a(x) 1 has no negative powers of x and a_{-1} 1 = v
inline CheckReport check_vacuum_axioms(const FieldOracle& a, const ModuleVector& v, int N, int scan = 6) {
    CheckReport rep{"vacuum " + a.label, "modes [0," + std::to_string(scan) + ")", N, 1};
    Comparer cmp(rep);
    ModuleVector vac = ModuleVector::vacuum(N);
    for (int n = 0; n < scan; ++n)
        if (!cmp({-n - 1}, "1", a.apply(n, vac, N), ModuleVector(N))) return rep;
    cmp({0}, "1", a.apply(-1, vac, N), v.truncated(N));
    return rep;
}

// Y(1, x) = 1 on probes
inline CheckReport check_identity_field(const FieldOracle& one, const std::vector<ModuleVector>& probes, int N, int lo, int hi) {
    CheckReport rep{"identity field " + one.label, "[" + std::to_string(lo) + "," + std::to_string(hi) + "]", N,
                    static_cast<int>(probes.size())};
    Comparer cmp(rep);
    for (auto& w : probes)
        for (int n = lo; n <= hi; ++n)
            if (!cmp({-n - 1}, probe_label(w), one.apply(n, w, N), n == -1 ? w.truncated(N) : ModuleVector(N))) return rep;
    return rep;
}

// One summand f(x2 - x1) Y(v_i, x2) Y(u_i, x1) of the braided product, for skew symmetry.
struct SkewTerm {
    FieldOracle vfield;
    ModuleVector u;
    DirectedSeries f;
};

// Y(u, x) v = e^{xD} sum_i f_i(-x) Y(v_i, -x) u_i, coefficients of x^s for s up to xdeg
inline CheckReport check_skew_symmetry(const FieldOracle& ufield, const ModuleVector& v, const std::vector<SkewTerm>& terms,
                                       const DOperator& D, int N, int xdeg) {
    ModuleVector vv = v.truncated(N);
    int slo = -ufield.bound(vv, N) - 2;
    CheckReport rep{"skew symmetry " + ufield.label, "x in [" + std::to_string(slo) + "," + std::to_string(xdeg) + "]", N, 1};
    Comparer cmp(rep);
    std::map<std::pair<int, int>, ModuleVector> Dpow; // (term, n, j) flattened via maps below
    for (int s = slo; s <= xdeg; ++s) {
        ModuleVector lhs = ufield.apply(-s - 1, vv, N);
        ModuleVector rhs(N);
        for (size_t ti = 0; ti < terms.size(); ++ti) {
            auto& T = terms[ti];
            ModuleVector u = T.u.truncated(N);
            DirectedSeries fneg = T.f.with_order(N).reflected();
            int Bv = T.vfield.bound(u, N);
            for (int e = fneg.low(); e <= s + Bv; ++e) {
                TruncScalar fc(N);
                for (int k = 0; k < N; ++k) fc.set(k, fneg.ucoeff(e, k));
                if (fc.is_zero()) continue;
                for (int j = 0; j <= s + Bv - e; ++j) {
                    int n = j + e - 1 - s;
                    ModuleVector x = T.vfield.apply(n, u, N);
                    if (x.is_zero()) continue;
                    for (int i = 0; i < j; ++i) x = D(x);
                    rhs.add_scaled(x, fc * (sign_pow(n + 1) / factorial(j)));
                }
            }
        }
        if (!cmp({s}, probe_label(vv), lhs, rhs)) break;
    }
    return rep;
}

// Iterated Y_E products starting from U; fields are deduplicated by their action on the probes.
struct ClosureOptions {
    int fuel = 1;
    int mode_lo = -2, mode_hi = 1;
    int multiplier_power = 1; // locality order assumed between generators
    std::vector<ModuleVector> probes;
    int fp_lo = -3, fp_hi = 2; // fingerprint modes
    int N = 1;
};

struct ClosureResult {
    std::vector<FieldOracle> fields;
    std::vector<int> level;
    std::vector<std::string> warnings;
};

inline std::string field_fingerprint(const FieldOracle& f, const std::vector<ModuleVector>& probes, int lo, int hi, int N) {
    std::string s;
    for (auto& w : probes)
        for (int q = lo; q <= hi; ++q) s += f.apply(q, w, N).str() + "|";
    return s;
}

inline ClosureResult closure_generate(const std::vector<FieldOracle>& U, const ClosureOptions& opt) {
    ClosureResult res;
    std::set<std::string> seen;
    std::string zero_fp;
    for (size_t i = 0; i < opt.probes.size() * static_cast<size_t>(opt.fp_hi - opt.fp_lo + 1); ++i) zero_fp += "0|";
    std::vector<int> korder;
    for (auto& f : U) {
        auto fp = field_fingerprint(f, opt.probes, opt.fp_lo, opt.fp_hi, opt.N);
        if (!seen.insert(fp).second) continue;
        res.fields.push_back(f);
        res.level.push_back(0);
        korder.push_back(opt.multiplier_power);
    }
    size_t zeros = 0;
    for (int round = 1; round <= opt.fuel; ++round) {
        size_t count = res.fields.size();
        for (size_t i = 0; i < count; ++i)
            for (size_t j = 0; j < count; ++j) {
                if (res.level[i] != round - 1 && res.level[j] != round - 1) continue;
                int K = std::max(korder[i], korder[j]);
                if (round > 1) K = korder[i] + korder[j] + opt.N;
                YEProduct ye(res.fields[i], res.fields[j], HPoly(UPoly::monomial(K)), opt.N);
                for (int n = opt.mode_lo; n <= opt.mode_hi; ++n) {
                    FieldOracle f = ye.mode(n);
                    auto fp = field_fingerprint(f, opt.probes, opt.fp_lo, opt.fp_hi, opt.N);
                    if (fp == zero_fp) {
                        ++zeros;
                        continue;
                    }
                    if (!seen.insert(fp).second) continue;
                    res.fields.push_back(f);
                    res.level.push_back(round);
                    korder.push_back(K + std::abs(n) + opt.N);
                }
            }
    }
    if (zeros) res.warnings.push_back(std::to_string(zeros) + " products vanish on the probes");
    if (opt.fuel > 0) res.warnings.push_back("closure truncated at fuel " + std::to_string(opt.fuel));
    return res;
}

} // namespace qva
