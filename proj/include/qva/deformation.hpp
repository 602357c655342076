#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "report.hpp"
#include "series.hpp"
#include "vertex_engine.hpp"
#include "zf_algebra.hpp"

namespace qva {

// Rational function of one variable x and h, stored as num/den in HPoly form.
struct RatFn {
    HPoly num{Rational(1)}, den{Rational(1)};

    static RatFn parse(const std::string& src, const std::string& var = "x") {
        auto rf = parse_rational_function(src, {var, "h"});
        return {rf.num.to_hpoly(0, 1), rf.den.to_hpoly(0, 1)};
    }
    static RatFn constant(const Rational& c) { return {HPoly(c), HPoly(Rational(1))}; }

    RatFn inverse() const { return {den, num}; }
    RatFn reflect() const { return {num.reflect(), den.reflect()}; }
    friend RatFn operator*(const RatFn& a, const RatFn& b) { return {a.num * b.num, a.den * b.den}; }
    friend bool operator==(const RatFn& a, const RatFn& b) { return a.num * b.den == b.num * a.den; }

    DirectedSeries expand(Direction dir, int N, std::vector<std::string> vars = {}) const {
        return DirectedSeries(num, den, dir, N, std::move(vars));
    }
    std::string str() const { return "(" + num.str("x") + ")/(" + den.str("x") + ")"; }
};

namespace detail {
inline Rational eval_upoly(const UPoly& p, const Rational& x) {
    Rational acc;
    for (auto& [e, c] : p.terms()) acc += c * (e >= 0 ? rpow(x, e) : rpow(x, -e).inverse());
    return acc;
}
inline Rational eval_hpoly(const HPoly& p, const Rational& x, const Rational& h) {
    Rational acc;
    for (int k = 0; k <= p.hdeg(); ++k) acc += eval_upoly(p.part(k), x) * rpow(h, k);
    return acc;
}
} // namespace detail

class DeformationData {
public:
    DeformationData() = default;
    explicit DeformationData(std::vector<std::vector<std::string>> src) : src_(std::move(src)) {
        size_t l = src_.size();
        if (l == 0) throw ConfigError("deformation matrix must be nonempty");
        for (size_t i = 0; i < l; ++i) {
            if (src_[i].size() != l) throw ConfigError("deformation row " + std::to_string(i + 1) + " has wrong length");
            std::vector<RatFn> row;
            for (size_t j = 0; j < l; ++j) {
                std::string at = "p_" + std::to_string(i + 1) + std::to_string(j + 1);
                RatFn f;
                try {
                    f = RatFn::parse(src_[i][j]);
                } catch (const std::exception& e) {
                    throw ConfigError("invalid deformation " + at + ": " + e.what());
                }
                const UPoly &n0 = f.num.part(0), &d0 = f.den.part(0);
                if (d0.is_zero() || n0.is_zero()) throw ConfigError("invalid deformation " + at + ": vanishes or has a pole at h=0");
                if (!(n0 == d0)) throw ConfigError("invalid deformation " + at + ": p(x,0) != 1");
                if (d0.terms().size() != 1)
                    throw ConfigError("unsupported deformation " + at + ": den(x,0) must be a monomial in x");
                row.push_back(f);
            }
            p_.push_back(std::move(row));
        }
    }

    int size() const { return static_cast<int>(p_.size()); }
    // 1-based
    const RatFn& p(int i, int j) const { return p_.at(i - 1).at(j - 1); }
    const std::string& source(int i, int j) const { return src_.at(i - 1).at(j - 1); }

private:
    std::vector<std::vector<std::string>> src_;
    std::vector<std::vector<RatFn>> p_;
};

// a(x1) b(x2) ~ f(x2 - x1) b(x2) a(x1) for every ordered generator pair
struct BraidScalar {
    std::vector<std::string> names;
    std::map<std::pair<int, int>, RatFn> f;
};

using PhiMap = std::map<int, ModuleVector>; // x-exponent -> vector

// The pseudo-automorphisms Phi_i(x) of V_Q and the deformed fields built from them.
class Deformation {
public:
    Deformation(ZFAlgebra A, DeformationData d) : A_(std::move(A)), d_(std::move(d)), cache_(std::make_shared<Cache>()) {
        if (A_.rank() != d_.size()) throw ConfigError("deformation size does not match the Q matrix");
    }

    const ZFAlgebra& algebra() const { return A_; }
    const DeformationData& data() const { return d_; }

    PhiMap phi_apply(int i, const ModuleVector& v, int N, bool inverse = false) const {
        if (i < 1 || i > A_.rank()) throw ConfigError("deformation index out of range");
        PhiMap out;
        for (auto& [m, c] : v.terms()) {
            const PhiMap& pm = phi_mono(i, inverse, m, N);
            TruncScalar cc = c.order() == N ? c : c.truncated(N);
            for (auto& [e, w] : pm) {
                auto it = out.try_emplace(e, N).first;
                it->second.add_scaled(w, cc);
            }
        }
        std::erase_if(out, [](auto& kv) { return kv.second.is_zero(); });
        return out;
    }

    // Y_h(u^(i), x) = X_i(x) Phi_i(x), Y_h(v^(i), x) = Y_i(x) Phi_i(x)^{-1}
    FieldOracle deformed_field(char species, int i) const {
        if (species != 'X' && species != 'Y') throw ConfigError("deformed fields exist for X and Y only");
        FieldOracle base = A_.generator_field(species, i);
        Deformation self = *this;
        bool inv = species == 'Y';
        std::string label = std::string(1, species) + std::to_string(i) + "h";
        return {[self, base, i, inv](int m, const ModuleVector& w, int N) {
                    ModuleVector r(N);
                    for (auto& [c, v] : self.phi_apply(i, w, N, inv)) r.add(base.apply(m + c, v, N));
                    return r;
                },
                [self, base, i, inv](const ModuleVector& w, int N) {
                    int b = INT_MIN / 4;
                    for (auto& [c, v] : self.phi_apply(i, w, N, inv)) b = std::max(b, base.bound(v, N) - c);
                    return b;
                },
                label};
    }

    // p_ij(x - x1)^{+-1}, x dominant
    DirectedSeries exchange_series(int i, int j, bool inverse, int N) const {
        std::lock_guard<std::recursive_mutex> lock(cache_->mu);
        auto key = std::tuple(i, j, inverse, N);
        auto it = cache_->series.find(key);
        if (it == cache_->series.end()) {
            RatFn f = inverse ? d_.p(i, j).inverse() : d_.p(i, j);
            it = cache_->series.emplace(key, f.expand(Direction::FirstDominant, N, {"x", "x1"})).first;
        }
        return it->second;
    }

    BraidScalar braid(bool statement_uu = false) const {
        int l = A_.rank();
        const QMatrix& Q = A_.q();
        BraidScalar b;
        for (int i = 1; i <= l; ++i) b.names.push_back("u" + std::to_string(i));
        for (int i = 1; i <= l; ++i) b.names.push_back("v" + std::to_string(i));
        for (int i = 1; i <= l; ++i)
            for (int j = 1; j <= l; ++j) {
                RatFn pij = d_.p(i, j), pji = d_.p(j, i);
                Rational quu = statement_uu ? Q(j, i) : Q(i, j);
                b.f[{i - 1, j - 1}] = RatFn::constant(quu) * pij.reflect() * pji.inverse();
                b.f[{l + i - 1, l + j - 1}] = RatFn::constant(Q(i, j)) * pij.reflect() * pji.inverse();
                b.f[{i - 1, l + j - 1}] = RatFn::constant(Q(j, i)) * pji * pij.reflect().inverse();
                b.f[{l + i - 1, j - 1}] = RatFn::constant(Q(i, j).inverse()) * pji * pij.reflect().inverse();
            }
        return b;
    }

private:
    struct Cache {
        std::recursive_mutex mu;
        std::map<std::tuple<int, bool, Monomial, int>, PhiMap> phi;
        std::map<std::tuple<int, int, bool, int>, DirectedSeries> series;
    };

    const PhiMap& phi_mono(int i, bool inverse, const Monomial& w, int N) const {
        std::lock_guard<std::recursive_mutex> lock(cache_->mu);
        auto key = std::tuple(i, inverse, w, N);
        auto it = cache_->phi.find(key);
        if (it != cache_->phi.end()) return it->second;
        PhiMap out;
        if (w.empty()) {
            out.emplace(0, ModuleVector::vacuum(N));
        } else {
            const Mode& z = w.front();
            Monomial rest(w.begin() + 1, w.end());
            PhiMap inner = phi_apply(i, ModuleVector::basis(rest, N), N, inverse);
            // Phi(x) z(x1) = p(x - x1)^{+-1} z(x1) Phi(x), Y modes take the reciprocal
            bool use_inverse = (z.species == 'Y') != inverse;
            DirectedSeries S = exchange_series(i, z.index, use_inverse, N);
            int depth = 0;
            for (auto& [c, v] : inner) depth = std::max(depth, v.depth());
            for (int b = 0; z.degree + b < depth; ++b) {
                Mode zb = z;
                zb.degree += b;
                for (int n = S.low(); n <= S.high(); ++n) {
                    int a = n - b;
                    TruncScalar coef = S.coeff_all(a, b);
                    if (coef.is_zero()) continue;
                    for (auto& [c, v] : inner) {
                        ModuleVector t = A_.apply_mode(zb, v);
                        if (t.is_zero()) continue;
                        auto jt = out.try_emplace(a + c, N).first;
                        jt->second.add_scaled(t, coef);
                    }
                }
            }
            std::erase_if(out, [](auto& kv) { return kv.second.is_zero(); });
        }
        return cache_->phi.emplace(key, std::move(out)).first->second;
    }

    ZFAlgebra A_;
    DeformationData d_;
    std::shared_ptr<Cache> cache_;
};

inline Deformation preset_deformation(const std::string& name) {
    if (name == "betagamma") return Deformation(ZFAlgebra(QMatrix::scalar(1)), DeformationData({{"(x+h)/x"}}));
    if (name == "lattice") return Deformation(ZFAlgebra(QMatrix::scalar(-1)), DeformationData({{"(x+h)/x"}}));
    throw ConfigError("unknown preset '" + name + "'");
}

// left(x1 - x2) a(x1) b(x2) - right(x1 - x2) b(x2) a(x1) = lambda x2^{-1} delta(x1/x2)
struct ExchangeRelation {
    std::string claim;
    FieldOracle a, b;
    RatFn left, right;
    Rational lambda;
};

inline CheckReport check_exchange_direct(const ExchangeRelation& rel, int N, const Window& win,
                                         const std::vector<ModuleVector>& probes) {
    CheckReport rep{rel.claim, win.str(), N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    DirectedSeries L = rel.left.expand(Direction::FirstDominant, N, {"x1", "x2"});
    DirectedSeries R = rel.right.expand(Direction::SecondDominant, N, {"x1", "x2"});
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        PairTable A(rel.a, rel.b, w, N), B(rel.b, rel.a, w, N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            ModuleVector lhs = series_pair_coeff(L, A, true, e[0], e[1]) - series_pair_coeff(R, B, false, e[0], e[1]);
            ModuleVector rhs(N);
            if (e[0] + e[1] == -1 && !rel.lambda.is_zero()) rhs = rel.lambda * w;
            ok = cmp(e, probe_label(w), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

// Same relation multiplied through by (x1 - x2)^K, which clears every pole mod h^N and kills the delta term.
inline CheckReport check_exchange_cleared(const ExchangeRelation& rel, int N, const Window& win,
                                          const std::vector<ModuleVector>& probes) {
    DirectedSeries L0 = rel.left.expand(Direction::Single, N), R0 = rel.right.expand(Direction::Single, N);
    int K = 1 + std::max(0, -std::min(L0.low(), R0.low()));
    HPoly uK(UPoly::monomial(K));
    DirectedSeries L(uK * rel.left.num, rel.left.den, Direction::FirstDominant, N, {"x1", "x2"});
    DirectedSeries R(uK * rel.right.num, rel.right.den, Direction::SecondDominant, N, {"x1", "x2"});
    CheckReport rep{rel.claim + " (cleared, K=" + std::to_string(K) + ")", win.str(), N, static_cast<int>(probes.size())};
    if (!L.polynomial() || !R.polynomial()) throw UnsupportedProduct("clearing did not produce polynomial coefficients");
    Comparer cmp(rep);
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        PairTable A(rel.a, rel.b, w, N), B(rel.b, rel.a, w, N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            ok = cmp(e, probe_label(w), series_pair_coeff(L, A, true, e[0], e[1]), series_pair_coeff(R, B, false, e[0], e[1]));
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

enum class UUScalar { Statement, Proof }; // q_ji as displayed, or q_ij as derived

inline std::vector<ExchangeRelation> deformed_relations(const Deformation& D, UUScalar uu = UUScalar::Proof) {
    const QMatrix& Q = D.algebra().q();
    int l = Q.size();
    std::vector<ExchangeRelation> out;
    for (int i = 1; i <= l; ++i)
        for (int j = 1; j <= l; ++j) {
            std::string ij = std::to_string(i) + std::to_string(j);
            RatFn pij = D.data().p(i, j), pji = D.data().p(j, i);
            auto u_i = D.deformed_field('X', i), u_j = D.deformed_field('X', j);
            auto v_i = D.deformed_field('Y', i), v_j = D.deformed_field('Y', j);
            Rational quu = uu == UUScalar::Statement ? Q(j, i) : Q(i, j);
            out.push_back({"u-u relation " + ij, u_i, u_j, pij.inverse(), RatFn::constant(quu) * pji.reflect().inverse(), Rational()});
            out.push_back({"v-v relation " + ij, v_i, v_j, pij.inverse(), RatFn::constant(Q(i, j)) * pji.reflect().inverse(), Rational()});
            out.push_back({"u-v relation " + ij + (Q(j, i) == Rational(-1) ? " (anticommutator)" : ""), u_i, v_j, pij, RatFn::constant(Q(j, i)) * pji.reflect(), Rational(i == j ? 1 : 0)});
        }
    return out;
}

inline std::vector<CheckReport> check_deformed_relations(const Deformation& D, int N, const Window& win,
                                                         const std::vector<ModuleVector>& probes, UUScalar uu = UUScalar::Proof) {
    std::vector<CheckReport> out;
    for (auto& rel : deformed_relations(D, uu)) {
        out.push_back(check_exchange_direct(rel, N, win, probes));
        out.push_back(check_exchange_cleared(rel, N, win, probes));
    }
    return out;
}

// Unitarity f_ab(x) f_ba(-x) = 1 exactly; Yang-Baxter for scalar factors by exact evaluation at sample points.
inline CheckReport check_braid_axioms(const BraidScalar& braid) {
    CheckReport rep{"braid unitarity and Yang-Baxter", "exact", 0, static_cast<int>(braid.names.size())};
    int n = static_cast<int>(braid.names.size());
    auto get = [&](int a, int b) -> const RatFn* {
        auto it = braid.f.find({a, b});
        return it == braid.f.end() ? nullptr : &it->second;
    };
    for (int a = 0; a < n && rep.pass; ++a)
        for (int b = 0; b < n; ++b) {
            const RatFn *fab = get(a, b), *fba = get(b, a);
            if (!fab) continue;
            std::string pair = braid.names[a] + "," + braid.names[b];
            if (!fba) {
                rep.pass = false;
                rep.counterexample = Counterexample{{a, b}, 0, pair, fab->str(), "no reciprocal partner"};
                break;
            }
            RatFn prod = *fab * fba->reflect();
            if (!(prod == RatFn::constant(1))) {
                rep.pass = false;
                rep.counterexample = Counterexample{{a, b}, 0, pair, prod.str(), "1"};
                break;
            }
        }
    if (!rep.pass) return rep;
    // S12(x) S13(x+y) S23(y) against S23(y) S13(x+y) S12(x), evaluated at sample points
    const Rational pts[][3] = {{Rational(3), Rational(5), Rational(1, 7)}, {Rational(-2, 3), Rational(11), Rational(2)}};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const RatFn *f12 = get(a, b), *f13 = get(a, c), *f23 = get(b, c);
                if (!f12 || !f13 || !f23) continue;
                for (auto& p : pts) {
                    auto ev = [&](const RatFn& f, const Rational& x) -> std::optional<Rational> {
                        Rational d = detail::eval_hpoly(f.den, x, p[2]);
                        if (d.is_zero()) return std::nullopt;
                        return detail::eval_hpoly(f.num, x, p[2]) / d;
                    };
                    auto s12 = ev(*f12, p[0]), s13 = ev(*f13, p[0] + p[1]), s23 = ev(*f23, p[1]);
                    if (!s12 || !s13 || !s23) continue;
                    if (*s12 * *s13 * *s23 != *s23 * *s13 * *s12) {
                        rep.pass = false;
                        rep.counterexample = Counterexample{{a, b, c}, 0, "", "", ""};
                        return rep;
                    }
                }
            }
    rep.notes.push_back("scalar factors commute, so Yang-Baxter reduces to equal products");
    return rep;
}

// Phi_i(x) Phi_i(x)^{-1} w = w
inline CheckReport check_phi_inverse(const Deformation& D, int i, const std::vector<ModuleVector>& probes, int N) {
    CheckReport rep{"phi inverse " + std::to_string(i), "all x", N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        PhiMap total;
        for (auto& [c2, v] : D.phi_apply(i, w, N, true))
            for (auto& [c1, u] : D.phi_apply(i, v, N)) total.try_emplace(c1 + c2, N).first->second.add(u);
        std::set<int> keys{0};
        for (auto& [c, v] : total) keys.insert(c);
        for (int c : keys) {
            ModuleVector got = total.count(c) ? total.at(c) : ModuleVector(N);
            if (!cmp({c}, probe_label(w), got, c == 0 ? w : ModuleVector(N))) return rep;
        }
    }
    return rep;
}

// Phi_i(x1) Phi_j(x2) w = Phi_j(x2) Phi_i(x1) w
inline CheckReport check_phi_commute(const Deformation& D, int i, int j, const std::vector<ModuleVector>& probes, int N) {
    CheckReport rep{"phi commute " + std::to_string(i) + "," + std::to_string(j), "all x", N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        std::map<std::vector<int>, ModuleVector> lhs, rhs;
        for (auto& [c2, v] : D.phi_apply(j, w, N))
            for (auto& [c1, u] : D.phi_apply(i, v, N)) lhs.try_emplace({c1, c2}, N).first->second.add(u);
        for (auto& [c1, v] : D.phi_apply(i, w, N))
            for (auto& [c2, u] : D.phi_apply(j, v, N)) rhs.try_emplace({c1, c2}, N).first->second.add(u);
        std::set<std::vector<int>> keys;
        for (auto& [k, v] : lhs) keys.insert(k);
        for (auto& [k, v] : rhs) keys.insert(k);
        for (auto& k : keys) {
            ModuleVector l = lhs.count(k) ? lhs.at(k) : ModuleVector(N), r = rhs.count(k) ? rhs.at(k) : ModuleVector(N);
            if (!cmp(k, probe_label(w), l, r)) return rep;
        }
    }
    return rep;
}

// Phi_i(x1) Y(u^(j), x2) w = p_ij(x1 - x2) Y(u^(j), x2) Phi_i(x1) w, x1 dominant, on a window over (x1, x2)
inline CheckReport check_phi_homomorphism(const Deformation& D, int i, int j, const std::vector<ModuleVector>& probes, int N,
                                          const Window& win) {
    CheckReport rep{"phi homomorphism " + std::to_string(i) + "," + std::to_string(j), win.str(), N,
                    static_cast<int>(probes.size())};
    Comparer cmp(rep);
    FieldOracle X = D.algebra().generator_field('X', j);
    DirectedSeries S = D.data().p(i, j).expand(Direction::FirstDominant, N, {"x1", "x2"});
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        PhiMap pw = D.phi_apply(i, w, N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int a = e[0], b = e[1];
            PhiMap l = D.phi_apply(i, X.apply(-b - 1, w, N), N);
            ModuleVector lhs = l.count(a) ? l.at(a) : ModuleVector(N);
            ModuleVector rhs(N);
            for (auto& [c, v] : pw) {
                int B = X.bound(v, N);
                for (int t = 0; b - t >= -B; ++t)
                    for (int n = S.low(); n <= S.high(); ++n) {
                        int s = n - t;
                        if (a - s != c) continue;
                        TruncScalar k = S.coeff_all(s, t);
                        if (!k.is_zero()) rhs.add_scaled(X.apply(-(b - t) - 1, v, N), k);
                    }
            }
            ok = cmp(e, probe_label(w), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

// Relation checks at each lower order keep the status they have at Ntop, and the deformed
// field actions at order n are the order-Ntop actions truncated to h^n.
inline std::vector<CheckReport> check_tower_coherence(const Deformation& D, const std::vector<int>& lower, int Ntop,
                                                      const Window& win, const std::vector<ModuleVector>& probes) {
    std::vector<CheckReport> out;
    auto top = check_deformed_relations(D, Ntop, win, probes);
    const int l = D.algebra().rank();
    for (int n : lower) {
        CheckReport rep{"tower coherence N=" + std::to_string(n) + " against N=" + std::to_string(Ntop), win.str(), n,
                        static_cast<int>(probes.size())};
        auto low = check_deformed_relations(D, n, win, probes);
        for (size_t r = 0; r < low.size(); ++r) {
            rep.notes.push_back(low[r].claim + ": " + low[r].status() + " (N=" + std::to_string(Ntop) + ": " + top[r].status() + ")");
            if (top[r].pass && !low[r].pass) {
                rep.pass = false;
                rep.counterexample = low[r].counterexample;
            }
        }
        Comparer cmp(rep);
        for (char sp : {'X', 'Y'})
            for (int i = 1; i <= l && rep.pass; ++i) {
                FieldOracle F = D.deformed_field(sp, i);
                for (auto& w : probes) {
                    bool ok = true;
                    for (int m = win.ranges[0].first; m <= win.ranges[0].second && ok; ++m)
                        ok = cmp({m}, F.label + " on " + probe_label(w), F.apply(-m - 1, w.truncated(n), n),
                                 F.apply(-m - 1, w.truncated(Ntop), Ntop).truncated(n));
                    if (!ok) break;
                }
            }
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace qva
