#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "delta.hpp"
#include "report.hpp"
#include "vertex_engine.hpp"

namespace qva {

struct DYInconsistent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FuelExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Q[c][u, 1/u] with integer powers of h, truncated at h^prec. u stands for x - y.
class RElem {
public:
    using Key = std::tuple<int, int, int>; // h, u, c
    using Map = std::map<Key, Rational>;

    explicit RElem(int prec = 1) : prec_(prec) {}

    static RElem constant(const Rational& a, int prec) { return monomial(a, 0, 0, 0, prec); }
    static RElem monomial(const Rational& a, int h, int u, int c, int prec) {
        RElem r(prec);
        r.add({h, u, c}, a);
        return r;
    }
    // s u + (a + b c) h
    static RElem linear(int s, const Rational& a, const Rational& b, int prec) {
        RElem r(prec);
        r.add({0, 1, 0}, Rational(s));
        r.add({1, 0, 0}, a);
        r.add({1, 0, 1}, b);
        return r;
    }

    int prec() const { return prec_; }
    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add(const Key& k, const Rational& a) {
        if (a.is_zero() || std::get<0>(k) >= prec_) return;
        auto [it, fresh] = t_.emplace(k, a);
        if (!fresh) {
            it->second += a;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    void absorb(const RElem& o, const Rational& s = Rational(1)) {
        for (auto& [k, a] : o.t_) add(k, a * s);
    }

    friend RElem operator+(const RElem& a, const RElem& b) {
        RElem r(std::min(a.prec_, b.prec_));
        r.absorb(a);
        r.absorb(b);
        return r;
    }
    friend RElem operator-(const RElem& a, const RElem& b) {
        RElem r(std::min(a.prec_, b.prec_));
        r.absorb(a);
        r.absorb(b, Rational(-1));
        return r;
    }
    RElem operator-() const {
        RElem r(prec_);
        r.absorb(*this, Rational(-1));
        return r;
    }
    friend RElem operator*(const RElem& a, const RElem& b) {
        RElem r(std::min(a.prec_, b.prec_));
        for (auto& [ka, x] : a.t_)
            for (auto& [kb, y] : b.t_)
                r.add({std::get<0>(ka) + std::get<0>(kb), std::get<1>(ka) + std::get<1>(kb), std::get<2>(ka) + std::get<2>(kb)}, x * y);
        return r;
    }
    friend RElem operator*(const Rational& s, const RElem& a) {
        RElem r(a.prec_);
        r.absorb(a, s);
        return r;
    }

    int min_h() const {
        int m = prec_;
        for (auto& [k, a] : t_) m = std::min(m, std::get<0>(k));
        return m;
    }

    // needs an h^0 part of the form a u^m
    RElem inverse() const {
        if (t_.empty() || min_h() != 0) throw DYInconsistent("coefficient is not invertible: " + str());
        std::optional<std::pair<Rational, int>> lead;
        for (auto& [k, a] : t_) {
            if (std::get<0>(k) != 0) continue;
            if (lead || std::get<2>(k) != 0) throw DYInconsistent("leading part is not a monomial in u: " + str());
            lead = std::pair(a, std::get<1>(k));
        }
        RElem li = monomial(lead->first.inverse(), 0, -lead->second, 0, prec_);
        RElem q = (*this) * li - constant(Rational(1), prec_);
        RElem sum = constant(Rational(1), prec_), pw = sum;
        for (int j = 1; j < prec_; ++j) {
            pw = pw * (-q);
            if (pw.is_zero()) break;
            sum = sum + pw;
        }
        return sum * li;
    }

    // u -> -u
    RElem reflected() const {
        RElem r(prec_);
        for (auto& [k, a] : t_) r.add(k, a * sign_pow(std::get<1>(k)));
        return r;
    }

    RElem truncated(int p) const {
        RElem r(p);
        r.absorb(*this);
        return r;
    }

    // c := level; u power -> h-graded coefficient
    std::map<int, TruncScalar> specialize(const Rational& level, int N) const {
        std::map<int, TruncScalar> out;
        for (auto& [k, a] : t_) {
            auto [h, u, c] = k;
            if (h < 0) throw DYInconsistent("negative power of h survives");
            if (h >= N) continue;
            auto it = out.try_emplace(u, TruncScalar(N)).first;
            it->second.add_at(h, a * rpow(level, c));
        }
        for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
        return out;
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::string s;
        for (auto& [k, a] : t_) {
            auto [h, u, c] = k;
            std::string t = a.str();
            if (c) t += "*c" + (c == 1 ? std::string() : "^" + std::to_string(c));
            if (u) t += "*u" + (u == 1 ? std::string() : "^" + std::to_string(u));
            if (h) t += "*h" + (h == 1 ? std::string() : "^" + std::to_string(h));
            s += (s.empty() ? "" : " + ") + t;
        }
        return s;
    }

    friend bool operator==(const RElem& a, const RElem& b) { return (a - b).is_zero(); }

private:
    int prec_;
    Map t_;
};

// Symbols: E, F, P = (h+ - 1)/h, M = (1 - h-)/h. var 0 is x, 1 is y.
struct Sym {
    char kind = 'E';
    int var = 0;
    int der = 0;
    friend auto operator<=>(const Sym&, const Sym&) = default;
};
using FWord = std::vector<Sym>;

inline std::string sym_str(const Sym& s) {
    std::string n = s.kind == 'E' ? "e" : s.kind == 'F' ? "f" : s.kind == 'P' ? "h+'" : s.kind == 'M' ? "h-'" : std::string(1, s.kind);
    std::string d = s.der ? "d" + std::to_string(s.der) + " " : "";
    return d + n + (s.var == 0 ? "(x)" : "(y)");
}

inline std::string word_str(const FWord& w) {
    if (w.empty()) return "1";
    std::string s;
    for (auto& x : w) s += (s.empty() ? "" : " ") + sym_str(x);
    return s;
}

// Two-variable field word expression: sum of coeff(u) * word plus sum of coeff * D_k(x, y) * word,
// where D_k = (1/k!) d_y^k x^-1 delta(y/x) and delta words sit at x.
class FWExpr {
public:
    using DKey = std::pair<int, FWord>;

    explicit FWExpr(int prec = 1) : prec_(prec) {}

    int prec() const { return prec_; }
    const std::map<FWord, RElem>& words() const { return w_; }
    const std::map<DKey, RElem>& deltas() const { return d_; }

    void add_word(const FWord& w, const RElem& c) { accumulate(w_, w, c); }

    void add_delta(int k, const FWord& w, const RElem& c) {
        if (w.size() > 1) throw UnsupportedProduct("delta times a product of fields");
        for (auto& [key, a] : c.terms()) {
            auto [h, p, cc] = key;
            if (p < 0) throw UnsupportedProduct("negative power of x-y times a delta");
            int k2 = k - p;
            if (k2 < 0) continue;
            if (w.empty() || w[0].var == 0) {
                accumulate(d_, DKey{k2, w}, RElem::monomial(a, h, 0, cc, prec_));
                continue;
            }
            // a(y) D_k = sum_j (-1)^j/j! a^(j)(x) D_{k-j}
            for (int j = 0; j <= k2; ++j) {
                Sym s{w[0].kind, 0, w[0].der + j};
                accumulate(d_, DKey{k2 - j, {s}}, RElem::monomial(a * sign_pow(j) / factorial(j), h, 0, cc, prec_));
            }
        }
    }

    void add(const FWExpr& o, const RElem& s) {
        for (auto& [w, c] : o.w_) add_word(w, c * s);
        for (auto& [k, c] : o.d_) add_delta(k.first, k.second, c * s);
    }
    void add(const FWExpr& o, const Rational& s = Rational(1)) { add(o, RElem::constant(s, prec_)); }

    friend FWExpr operator+(const FWExpr& a, const FWExpr& b) {
        FWExpr r(std::min(a.prec_, b.prec_));
        r.add(a);
        r.add(b);
        return r;
    }
    friend FWExpr operator-(const FWExpr& a, const FWExpr& b) {
        FWExpr r(std::min(a.prec_, b.prec_));
        r.add(a);
        r.add(b, Rational(-1));
        return r;
    }

    // exchange the names x and y
    FWExpr swapped() const {
        FWExpr r(prec_);
        for (auto& [w, c] : w_) {
            FWord v = w;
            for (auto& s : v) s.var = 1 - s.var;
            r.add_word(v, c.reflected());
        }
        for (auto& [k, c] : d_) {
            FWord v = k.second;
            for (auto& s : v) s.var = 1 - s.var;
            r.add_delta(k.first, v, sign_pow(k.first) * c);
        }
        return r;
    }

    FWExpr truncated(int p) const {
        FWExpr r(p);
        r.add(*this);
        return r;
    }

    int min_h() const {
        int m = prec_;
        for (auto& [w, c] : w_) m = std::min(m, c.min_h());
        for (auto& [k, c] : d_) m = std::min(m, c.min_h());
        return m;
    }

    bool is_zero() const { return w_.empty() && d_.empty(); }

    std::string str() const {
        if (is_zero()) return "0";
        std::string s;
        for (auto& [w, c] : w_) s += (s.empty() ? "" : " + ") + ("(" + c.str() + ") " + word_str(w));
        for (auto& [k, c] : d_)
            s += (s.empty() ? "" : " + ") + ("(" + c.str() + ") D" + std::to_string(k.first) + " " + word_str(k.second));
        return s;
    }

private:
    template <class K>
    void accumulate(std::map<K, RElem>& m, const K& key, const RElem& c) {
        if (c.is_zero()) return;
        auto it = m.try_emplace(key, RElem(prec_)).first;
        it->second.absorb(c);
        if (it->second.is_zero()) m.erase(it);
    }

    int prec_;
    std::map<FWord, RElem> w_;
    std::map<DKey, RElem> d_;
};

// Builds c * word, where p and m in the word denote the unprimed h+ = 1 + h P and h- = 1 - h M.
inline FWExpr fw_term(const std::vector<std::pair<char, int>>& word, const RElem& c) {
    const int P = c.prec();
    std::vector<std::pair<FWord, RElem>> parts{{FWord{}, c}};
    for (auto [k, v] : word) {
        std::vector<std::pair<FWord, RElem>> next;
        for (auto& [w, cc] : parts) {
            if (k == 'p' || k == 'm') {
                next.emplace_back(w, cc);
                FWord w2 = w;
                w2.push_back({k == 'p' ? 'P' : 'M', v});
                next.emplace_back(w2, cc * RElem::monomial(k == 'p' ? 1 : -1, 1, 0, 0, P));
            } else {
                FWord w2 = w;
                w2.push_back({k, v});
                next.emplace_back(w2, cc);
            }
        }
        parts = std::move(next);
    }
    FWExpr e(P);
    for (auto& [w, cc] : parts) e.add_word(w, cc);
    return e;
}

enum class DYPresentation { Tilde, Hat };

// Rewrites two-field words into normal order using the defining relations of one presentation.
// Primed symbols are handled by substituting h+- = 1 +- h(.)' and dividing by h, which must be exact.
class DYEngine {
public:
    DYEngine(DYPresentation p, int N, long fuel = 1000000) : p_(p), N_(N), fuel_(fuel) {}

    int order() const { return N_; }
    DYPresentation presentation() const { return p_; }

    int prio(char k) const {
        static const std::string tilde = "PEFM", hat = "EFMP";
        return static_cast<int>((p_ == DYPresentation::Tilde ? tilde : hat).find(k));
    }
    bool is_normal(const Sym& a, const Sym& b) const {
        int pa = prio(a.kind), pb = prio(b.kind);
        if (pa != pb) return pa < pb;
        return a.var <= b.var;
    }

    // the word a b, rewritten mod h^N
    FWExpr swap_word(const Sym& a, const Sym& b) const {
        auto key = std::pair(a, b);
        {
            std::lock_guard lk(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        const int P = N_ + 2;
        auto [R, Br] = unprimed(a.kind, a.var, b.kind, b.var, P);
        auto primed = [](char k) { return k == 'P' || k == 'M'; };
        auto sgn = [](char k) { return k == 'P' ? 1 : -1; };
        auto alpha = [&](char k) { return primed(k) ? RElem::monomial(Rational(-sgn(k)), -1, 0, 0, P) : RElem(P); };
        auto beta = [&](char k) { return primed(k) ? RElem::monomial(Rational(sgn(k)), -1, 0, 0, P) : RElem::constant(1, P); };
        auto gamma = [&](char k) { return primed(k) ? RElem::constant(1, P) : RElem(P); };
        RElem aA = alpha(a.kind), bA = beta(a.kind), gA = gamma(a.kind);
        RElem aB = alpha(b.kind), bB = beta(b.kind), gB = gamma(b.kind);
        FWExpr out(P);
        out.add_word({}, aA * aB + aA * bB * gB + bA * aB * gA + bA * bB * R * gA * gB);
        out.add_word({b}, aA + bA * R * gA);
        out.add_word({a}, aB + bB * R * gB);
        out.add_word({b, a}, R);
        out.add(Br, bA * bB);
        if (out.min_h() < 0)
            throw DYInconsistent("division by h is not exact for " + sym_str(a) + " " + sym_str(b) + ": " + out.str());
        FWExpr res = out.truncated(N_);
        std::lock_guard lk(mu_);
        cache_.emplace(key, res);
        return res;
    }

    FWExpr normalize(const FWExpr& e) const {
        FWExpr out(N_);
        long steps = 0;
        for (auto& [w, c] : e.words()) {
            if (w.size() > 2) throw UnsupportedProduct("words of three or more fields are not supported");
            if (w.size() == 2 && !is_normal(w[0], w[1])) {
                if (++steps > fuel_) throw FuelExhausted("normalization fuel exhausted");
                out.add(swap_word(w[0], w[1]), c.truncated(N_));
            } else
                out.add_word(w, c);
        }
        for (auto& [k, c] : e.deltas()) out.add_delta(k.first, k.second, c);
        return out;
    }

    // [e(X), f(Y)] in primed symbols, X != Y
    static FWExpr ef_bracket(int X, int Y, int prec) {
        FWExpr r(prec);
        for (int k = 0; k <= prec; ++k) {
            Rational s = X == 0 ? Rational(1) : sign_pow(k);
            r.add_delta(k, {}, RElem::monomial(s, k - 1, 0, k, prec));
            r.add_delta(k, {Sym{'P', X}}, RElem::monomial(s, k, 0, k, prec));
        }
        r.add_delta(0, {}, RElem::monomial(Rational(-1), -1, 0, 0, prec));
        r.add_delta(0, {Sym{'M', Y}}, RElem::constant(1, prec));
        return r;
    }

private:
    // A(a) B(b) = R(a - b) B(b) A(a) + Br for unprimed A, B
    std::pair<RElem, FWExpr> unprimed(char A, int a, char B, int b, int P) const {
        int sigma = a == 0 ? 1 : -1;
        auto tl = [&](int ct, int a0, int a1) { return RElem::linear(ct * sigma, Rational(a0), Rational(a1), P); };
        auto q = [](const RElem& n, const RElem& d) { return n * d.inverse(); };
        RElem one = RElem::constant(1, P);
        RElem e_minus = q(tl(-1, -1, 0), tl(-1, 1, 0)); // (-t - h)/(-t + h)
        RElem f_minus = q(tl(-1, 1, 0), tl(-1, -1, 0)); // (-t + h)/(-t - h)
        std::string k{A, B};
        FWExpr none(P);
        if (k == "PP" || k == "MM") return {one, none};
        if (k == "EE") return {e_minus, none};
        if (k == "FF") return {f_minus, none};
        if (k == "ME") return {e_minus, none};
        if (k == "MF") return {f_minus, none};
        if (k == "FE") {
            FWExpr br(P);
            br.add(ef_bracket(b, a, P), Rational(-1));
            return {one, br};
        }
        if (p_ == DYPresentation::Tilde) {
            RElem fp = q(tl(-1, 1, -1), tl(-1, -1, -1)); // (-t + (1-c)h)/(-t - (1+c)h)
            if (k == "EP") return {e_minus, none};
            if (k == "FP") return {fp, none};
            if (k == "MP") return {e_minus * fp, none};
        } else {
            RElem pe = q(tl(1, 1, 0), tl(1, -1, 0));    // (t + h)/(t - h)
            RElem pf = q(tl(1, -1, -1), tl(1, 1, -1)); // (t - (1+c)h)/(t + (1-c)h)
            if (k == "PE") return {pe, none};
            if (k == "PF") return {pf, none};
            if (k == "PM") return {pe * pf, none};
        }
        throw std::logic_error("no rewriting rule for " + k);
    }

    DYPresentation p_;
    int N_;
    long fuel_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<Sym, Sym>, FWExpr> cache_;
};

inline FWExpr dy_normalize(const FWExpr& e, DYPresentation p, int N) { return DYEngine(p, N).normalize(e); }

namespace detail {

// n * m with n, m given as (ct, a0, a1): ct*u + (a0 + a1 c) h
inline RElem ratio(std::initializer_list<std::tuple<int, int, int>> num, std::initializer_list<std::tuple<int, int, int>> den,
                   const Rational& scale, int P) {
    RElem r = RElem::constant(scale, P);
    for (auto [c, a0, a1] : num) r = r * RElem::linear(c, Rational(a0), Rational(a1), P);
    for (auto [c, a0, a1] : den) r = r * RElem::linear(c, Rational(a0), Rational(a1), P).inverse();
    return r;
}

inline CheckReport residual_report(const std::string& claim, int N, const FWExpr& residual) {
    CheckReport rep{claim, "symbolic", N, 0};
    if (!residual.is_zero()) {
        rep.pass = false;
        rep.counterexample = Counterexample{{}, residual.min_h(), "symbolic", residual.str(), "0"};
    }
    return rep;
}

} // namespace detail

// The inverted relations, the primed relations and the two forms of [e, f], each reduced to zero mod h^N.
inline std::vector<CheckReport> check_dy_derived(int N) {
    using detail::ratio;
    const int P = N + 1;
    DYEngine tilde(DYPresentation::Tilde, N), hat(DYPresentation::Hat, N);
    std::vector<CheckReport> out;
    auto run = [&](const std::string& claim, const DYEngine& eng, const FWExpr& e) {
        try {
            out.push_back(detail::residual_report(claim, N, eng.normalize(e)));
        } catch (const std::exception& ex) {
            CheckReport r{claim, "symbolic", N, 0};
            r.pass = false;
            r.notes.push_back(ex.what());
            out.push_back(r);
        }
    };
    auto one = RElem::constant(1, P);
    auto T = [&](std::vector<std::pair<char, int>> w, const RElem& c) { return fw_term(w, c); };
    const int X = 0, Y = 1;
    // u = x - y; (y - x ...) factors use ct = -1
    RElem Fhh = ratio({{1, -1, 0}, {1, 1, -1}}, {{1, 1, 0}, {1, -1, -1}}, 1, P);

    // inverted forms, hat rules
    run("e(y)h+(x) = (x-y-h)/(x-y+h) h+(x)e(y) [hat]", hat,
        T({{'E', Y}, {'p', X}}, one) - T({{'p', X}, {'E', Y}}, ratio({{1, -1, 0}}, {{1, 1, 0}}, 1, P)));
    run("f(y)h+(x) = (x-y+(1-c)h)/(x-y-(1+c)h) h+(x)f(y) [hat]", hat,
        T({{'F', Y}, {'p', X}}, one) - T({{'p', X}, {'F', Y}}, ratio({{1, 1, -1}}, {{1, -1, -1}}, 1, P)));
    run("h-(y)h+(x) = F(x-y) h+(x)h-(y) [hat]", hat, T({{'m', Y}, {'p', X}}, one) - T({{'p', X}, {'m', Y}}, Fhh));
    // hat forms, tilde rules
    run("h+(x)e(y) = (x-y+h)/(x-y-h) e(y)h+(x) [tilde]", tilde,
        T({{'p', X}, {'E', Y}}, one) - T({{'E', Y}, {'p', X}}, ratio({{1, 1, 0}}, {{1, -1, 0}}, 1, P)));
    run("h+(x)f(y) = (x-y-(1+c)h)/(x-y+(1-c)h) f(y)h+(x) [tilde]", tilde,
        T({{'p', X}, {'F', Y}}, one) - T({{'F', Y}, {'p', X}}, ratio({{1, -1, -1}}, {{1, 1, -1}}, 1, P)));
    run("h+(x)h-(y) = F(x-y)^-1 h-(y)h+(x) [tilde]", tilde, T({{'p', X}, {'m', Y}}, one) - T({{'m', Y}, {'p', X}}, Fhh.inverse()));

    // primed relations
    run("h-'(x)e(y)", tilde,
        T({{'M', X}, {'E', Y}}, one) - T({{'E', Y}, {'M', X}}, ratio({{-1, -1, 0}}, {{-1, 1, 0}}, 1, P)) -
            T({{'E', Y}}, ratio({}, {{-1, 1, 0}}, 2, P)));
    run("h-'(x)f(y)", tilde,
        T({{'M', X}, {'F', Y}}, one) - T({{'F', Y}, {'M', X}}, ratio({{-1, 1, 0}}, {{-1, -1, 0}}, 1, P)) -
            T({{'F', Y}}, ratio({}, {{-1, -1, 0}}, -2, P)));
    run("e(y)h+'(x)", tilde,
        T({{'E', Y}, {'P', X}}, one) - T({{'P', X}, {'E', Y}}, ratio({{1, -1, 0}}, {{1, 1, 0}}, 1, P)) -
            T({{'E', Y}}, ratio({}, {{1, 1, 0}}, -2, P)));
    run("f(y)h+'(x)", tilde,
        T({{'F', Y}, {'P', X}}, one) - T({{'P', X}, {'F', Y}}, ratio({{1, 1, -1}}, {{1, -1, -1}}, 1, P)) -
            T({{'F', Y}}, ratio({}, {{1, -1, -1}}, 2, P)));
    run("[h+'(x), h+'(y)] = 0", tilde, T({{'P', X}, {'P', Y}}, one) - T({{'P', Y}, {'P', X}}, one));
    run("[h-'(x), h-'(y)] = 0", tilde, T({{'M', X}, {'M', Y}}, one) - T({{'M', Y}, {'M', X}}, one));
    {
        RElem g = RElem::monomial(Rational(-2), 0, 0, 1, P) * ratio({}, {{1, 1, 0}, {1, -1, -1}}, 1, P);
        RElem h = RElem::monomial(1, 1, 0, 0, P);
        run("h-'(y)h+'(x)", tilde,
            T({{'M', Y}, {'P', X}}, one) - T({{'P', X}, {'M', Y}}, Fhh) - T({}, g) - T({{'P', X}}, g * h) + T({{'M', Y}}, g * h));
    }
    // [e(x), f(y)] in primed form
    FWExpr ef_rhs(P);
    ef_rhs.add_delta(0, {Sym{'P', X}}, one);
    ef_rhs.add_delta(0, {Sym{'M', X}}, one);
    for (int k = 1; k <= P; ++k) {
        ef_rhs.add_delta(k, {}, RElem::monomial(1, k - 1, 0, k, P));
        ef_rhs.add_delta(k, {Sym{'P', X}}, RElem::monomial(1, k, 0, k, P));
    }
    run("[e(x), f(y)] primed form", tilde, T({{'E', X}, {'F', Y}}, one) - T({{'F', Y}, {'E', X}}, one) - ef_rhs);
    // h times the primed form against the unprimed delta form
    {
        const int Q = N + 1;
        FWExpr orig(Q);
        for (int k = 0; k <= Q; ++k) {
            orig.add_delta(k, {}, RElem::monomial(1, k, 0, k, Q));
            orig.add_delta(k, {Sym{'P', X}}, RElem::monomial(1, k + 1, 0, k, Q));
        }
        orig.add_delta(0, {}, RElem::constant(-1, Q));
        orig.add_delta(0, {Sym{'M', Y}}, RElem::monomial(1, 1, 0, 0, Q));
        FWExpr scaled(Q);
        scaled.add(ef_rhs.truncated(Q), RElem::monomial(1, 1, 0, 0, Q));
        auto res = (orig - scaled).truncated(N + 1);
        out.push_back(detail::residual_report("h[e(x), f(y)]: delta((y+hc)/x) form = primed form", N, res));
    }
    return out;
}

// ---- the Lie algebra K ----

struct KBasis {
    char kind = 'c'; // c, E, F, I, J
    int m = 0;
    friend auto operator<=>(const KBasis&, const KBasis&) = default;
    std::string str() const { return kind == 'c' ? "c" : std::string(1, kind) + "_" + std::to_string(m); }
};
using KElement = std::map<KBasis, Rational>;

inline void k_add(KElement& e, const KBasis& b, const Rational& a) {
    if (a.is_zero()) return;
    auto [it, fresh] = e.emplace(b, a);
    if (!fresh) {
        it->second += a;
        if (it->second.is_zero()) e.erase(it);
    }
}

inline std::string k_str(const KElement& e) {
    if (e.empty()) return "0";
    std::string s;
    for (auto& [b, a] : e) s += (s.empty() ? "" : " + ") + a.str() + "*" + b.str();
    return s;
}

namespace detail {

// [A(x), B(y)] = alpha (x-y)^-pole R(y), expanded with x or y dominant
struct KEntry {
    Rational alpha;
    int pole;
    bool x_dominant;
    char result; // field letter or 'c'
};

inline std::optional<KEntry> k_entry(char A, char B) {
    std::string k{A, B};
    if (k == "IJ") return KEntry{2, 2, true, 'c'};
    if (k == "IE") return KEntry{2, 1, true, 'E'};
    if (k == "IF") return KEntry{-2, 1, true, 'F'};
    if (k == "JE") return KEntry{-2, 1, false, 'E'};
    if (k == "JF") return KEntry{2, 1, false, 'F'};
    return std::nullopt;
}

} // namespace detail

// mode bracket, by coefficient extraction from the generating-function table
inline KElement k_bracket(const KBasis& a, const KBasis& b) {
    KElement r;
    if (a.kind == 'c' || b.kind == 'c') return r;
    const int m = a.m, n = b.m;
    if (a.kind == 'E' && b.kind == 'F') {
        // D0 (I(y) + J(y)) + c d_y D0
        k_add(r, {'I', m + n}, 1);
        k_add(r, {'J', m + n}, 1);
        if (m + n == 0) k_add(r, {'c', 0}, Rational(m));
        return r;
    }
    if (a.kind == 'F' && b.kind == 'E') {
        for (auto& [k, v] : k_bracket(b, a)) k_add(r, k, -v);
        return r;
    }
    auto e = detail::k_entry(a.kind, b.kind);
    if (!e) {
        if (detail::k_entry(b.kind, a.kind))
            for (auto& [k, v] : k_bracket(b, a)) k_add(r, k, -v);
        return r;
    }
    const int p = e->pole;
    if (e->x_dominant) {
        int t = m + 1 - p;
        if (t < 0) return r;
        Rational c = e->alpha * binomial(-p, t) * sign_pow(t);
        if (e->result == 'c') {
            if (t == -n - 1) k_add(r, {'c', 0}, c);
        } else
            k_add(r, {e->result, n + t}, c);
    } else {
        int t = -m - 1;
        if (t < 0) return r;
        Rational c = e->alpha * sign_pow(p) * binomial(-p, t) * sign_pow(t);
        if (e->result == 'c') {
            if (-p - t == -n - 1) k_add(r, {'c', 0}, c);
        } else
            k_add(r, {e->result, n - p - t}, c);
    }
    return r;
}

inline KElement k_bracket(const KElement& x, const KElement& y) {
    KElement r;
    for (auto& [a, s] : x)
        for (auto& [b, t] : y)
            for (auto& [k, v] : k_bracket(a, b)) k_add(r, k, s * t * v);
    return r;
}

// affine sl2 + Cz, z orthogonal to everything, <h,h> = 2, <e,f> = 1
struct ABasis {
    char kind = 'k'; // e, f, h, z, k
    int m = 0;
    friend auto operator<=>(const ABasis&, const ABasis&) = default;
};
using AffElement = std::map<ABasis, Rational>;

inline void a_add(AffElement& e, const ABasis& b, const Rational& a) {
    if (a.is_zero()) return;
    auto [it, fresh] = e.emplace(b, a);
    if (!fresh) {
        it->second += a;
        if (it->second.is_zero()) e.erase(it);
    }
}

inline AffElement aff_bracket(const ABasis& a, const ABasis& b) {
    AffElement r;
    if (a.kind == 'k' || b.kind == 'k') return r;
    std::string k{a.kind, b.kind};
    static const std::map<std::string, std::pair<char, int>> fin{{"he", {'e', 2}},  {"hf", {'f', -2}}, {"ef", {'h', 1}},
                                                                 {"eh", {'e', -2}}, {"fh", {'f', 2}},  {"fe", {'h', -1}}};
    if (auto it = fin.find(k); it != fin.end()) a_add(r, {it->second.first, a.m + b.m}, Rational(it->second.second));
    int form = (k == "hh") ? 2 : (k == "ef" || k == "fe") ? 1 : 0;
    if (form && a.m + b.m == 0) a_add(r, {'k', 0}, Rational(a.m * form));
    return r;
}

// I = h+ + z, J = h- - z
inline AffElement k_to_affine(const KBasis& b) {
    AffElement r;
    switch (b.kind) {
    case 'c': a_add(r, {'k', 0}, 1); break;
    case 'E': a_add(r, {'e', b.m}, 1); break;
    case 'F': a_add(r, {'f', b.m}, 1); break;
    case 'I':
        if (b.m >= 0) a_add(r, {'h', b.m}, 1);
        a_add(r, {'z', b.m}, 1);
        break;
    case 'J':
        if (b.m < 0) a_add(r, {'h', b.m}, 1);
        a_add(r, {'z', b.m}, -1);
        break;
    }
    return r;
}

inline KElement affine_to_k(const ABasis& b) {
    KElement r;
    switch (b.kind) {
    case 'k': k_add(r, {'c', 0}, 1); break;
    case 'e': k_add(r, {'E', b.m}, 1); break;
    case 'f': k_add(r, {'F', b.m}, 1); break;
    case 'h':
        k_add(r, {'I', b.m}, 1);
        k_add(r, {'J', b.m}, 1);
        break;
    case 'z':
        if (b.m < 0)
            k_add(r, {'I', b.m}, 1);
        else
            k_add(r, {'J', b.m}, -1);
        break;
    }
    return r;
}

inline std::vector<KBasis> k_basis(int lo, int hi) {
    std::vector<KBasis> out{{'c', 0}};
    for (char k : {'E', 'F', 'I', 'J'})
        for (int m = lo; m <= hi; ++m) out.push_back({k, m});
    return out;
}

inline CheckReport k_jacobi_check(int lo, int hi) {
    CheckReport rep{"Jacobi identity in K", "[" + std::to_string(lo) + "," + std::to_string(hi) + "]^3", 1, 0};
    auto B = k_basis(lo, hi);
    auto single = [](const KBasis& b) { return KElement{{b, Rational(1)}}; };
    for (size_t i = 0; i < B.size() && rep.pass; ++i)
        for (size_t j = i; j < B.size() && rep.pass; ++j)
            for (size_t k = j; k < B.size() && rep.pass; ++k) {
                auto a = single(B[i]), b = single(B[j]), c = single(B[k]);
                KElement s;
                for (auto& [x, v] : k_bracket(a, k_bracket(b, c))) k_add(s, x, v);
                for (auto& [x, v] : k_bracket(b, k_bracket(c, a))) k_add(s, x, v);
                for (auto& [x, v] : k_bracket(c, k_bracket(a, b))) k_add(s, x, v);
                ++rep.probes;
                if (!s.empty()) {
                    rep.pass = false;
                    rep.counterexample = Counterexample{{B[i].m, B[j].m, B[k].m}, 0, B[i].str() + "," + B[j].str() + "," + B[k].str(),
                                                        k_str(s), "0"};
                }
            }
    return rep;
}

inline CheckReport k_affine_check(int lo, int hi) {
    CheckReport rep{"K brackets against affine sl2 + Cz", "[" + std::to_string(lo) + "," + std::to_string(hi) + "]^2", 1, 0};
    auto B = k_basis(lo, hi);
    for (auto& a : B)
        for (auto& b : B) {
            KElement via;
            for (auto& [x, s] : k_to_affine(a))
                for (auto& [y, t] : k_to_affine(b))
                    for (auto& [z, v] : aff_bracket(x, y))
                        for (auto& [w, u] : affine_to_k(z)) k_add(via, w, s * t * v * u);
            auto direct = k_bracket(a, b);
            ++rep.probes;
            if (direct != via && rep.pass) {
                rep.pass = false;
                rep.counterexample = Counterexample{{a.m, b.m}, 0, a.str() + "," + b.str(), k_str(direct), k_str(via)};
            }
        }
    return rep;
}

// [A(x), B(y)] of K as a symbolic expression, A, B in E, F, P (= I), M (= J)
inline FWExpr k_table_expr(char A, char B) {
    const int P = 1;
    FWExpr r(P);
    std::string k{A, B};
    if (k == "PM") r.add_word({}, RElem::monomial(2, 0, -2, 1, P));
    else if (k == "PE") r.add_word({Sym{'E', 1}}, RElem::monomial(2, 0, -1, 0, P));
    else if (k == "PF") r.add_word({Sym{'F', 1}}, RElem::monomial(-2, 0, -1, 0, P));
    else if (k == "ME") r.add_word({Sym{'E', 1}}, RElem::monomial(-2, 0, -1, 0, P));
    else if (k == "MF") r.add_word({Sym{'F', 1}}, RElem::monomial(2, 0, -1, 0, P));
    else if (k == "EF") {
        r.add_delta(0, {Sym{'P', 1}}, RElem::constant(1, P));
        r.add_delta(0, {Sym{'M', 1}}, RElem::constant(1, P));
        r.add_delta(1, {}, RElem::monomial(1, 0, 0, 1, P));
    } else if (A != B) {
        FWExpr s(P);
        s.add(k_table_expr(B, A).swapped(), Rational(-1));
        return s;
    }
    return r;
}

inline std::string k_name(char s) {
    return s == 'P' ? "I" : s == 'M' ? "J" : std::string(1, s);
}

// commutators of the generating series mod h against the K table, symbol for symbol
inline CheckReport compare_with_K() {
    CheckReport rep{"classical limit of the tilde relations equals K", "symbolic", 1, 0};
    DYEngine eng(DYPresentation::Tilde, 1);
    const RElem one = RElem::constant(1, 1);
    for (char A : {'E', 'F', 'P', 'M'})
        for (char B : {'E', 'F', 'P', 'M'}) {
            FWExpr comm(1);
            comm.add_word({Sym{A, 0}, Sym{B, 1}}, one);
            comm.add_word({Sym{B, 1}, Sym{A, 0}}, -one);
            FWExpr got = eng.normalize(comm), want = k_table_expr(A, B);
            ++rep.probes;
            if (!(got - want).is_zero()) {
                std::string pair = "[" + k_name(A) + "(x), " + k_name(B) + "(y)]";
                rep.notes.push_back("mismatch at " + pair);
                if (rep.pass) rep.counterexample = Counterexample{{}, 0, pair, got.str(), want.str()};
                rep.pass = false;
            }
        }
    return rep;
}

// ---- vacuum modules ----

// PBW order on creation modes: I < E < F < J, then by degree
inline std::pair<int, int> dy_key(const Mode& z) {
    static const std::string order = "IEFJ";
    return {static_cast<int>(order.find(z.species)), z.degree};
}

inline std::vector<Monomial> dy_basis(int depth) {
    std::vector<Mode> modes;
    for (char s : {'I', 'E', 'F', 'J'})
        for (int d = -depth; d <= -1; ++d) modes.push_back({s, 1, d});
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return dy_key(a) < dy_key(b); });
    std::vector<Monomial> out;
    Monomial cur;
    std::function<void(size_t, int)> rec = [&](size_t from, int w) {
        out.push_back(cur);
        for (size_t i = from; i < modes.size(); ++i) {
            int nw = w - modes[i].degree;
            if (nw > depth) continue;
            cur.push_back(modes[i]);
            rec(i, nw);
            cur.pop_back();
        }
    };
    rec(0, 0);
    std::stable_sort(out.begin(), out.end(), [](const Monomial& a, const Monomial& b) { return weight(a) < weight(b); });
    return out;
}

inline std::vector<ModuleVector> dy_probes(int depth, int N) {
    std::vector<ModuleVector> out;
    for (auto& m : dy_basis(depth)) out.push_back(ModuleVector::basis(m, N));
    return out;
}

namespace detail {

inline Monomial prepend(const Mode& z, const Monomial& w) {
    Monomial r;
    r.push_back(z);
    r.insert(r.end(), w.begin(), w.end());
    return r;
}

inline Monomial tail(const Monomial& w) { return Monomial(w.begin() + 1, w.end()); }

} // namespace detail

// Induced vacuum module of K at level l: K_{>=0} kills 1, c acts by l.
class KModule {
public:
    explicit KModule(Rational level) : impl_(std::make_shared<Impl>()) { impl_->level = level; }

    const Rational& level() const { return impl_->level; }

    ModuleVector apply_mode(const Mode& z, const ModuleVector& v, int N) const {
        return apply_linear(v, N, [&](const Monomial& m) { return lift(apply_mono(z, m), N); });
    }

    FieldOracle field(char s) const {
        KModule self = *this;
        return {[self, s](int m, const ModuleVector& w, int N) { return self.apply_mode({s, 1, m}, w, N); },
                [](const ModuleVector& w, int) { return w.depth() + 1; }, std::string(1, s)};
    }

private:
    struct Impl {
        Rational level;
        std::recursive_mutex mu;
        std::map<std::pair<Mode, Monomial>, ModuleVector> memo;
    };

    static ModuleVector lift(const ModuleVector& v, int N) {
        ModuleVector r(N);
        for (auto& [m, c] : v.terms()) r.add(m, TruncScalar(c[0], N));
        return r;
    }

    ModuleVector apply_vec(const Mode& z, const ModuleVector& v) const {
        ModuleVector r(1);
        for (auto& [m, c] : v.terms()) r.add_scaled(apply_mono(z, m), c);
        return r;
    }

    ModuleVector apply_mono(const Mode& z, const Monomial& w) const {
        std::lock_guard lk(impl_->mu);
        auto key = std::pair(z, w);
        if (auto it = impl_->memo.find(key); it != impl_->memo.end()) return it->second;
        ModuleVector r(1);
        if (w.empty()) {
            if (z.degree < 0) r = ModuleVector::basis(Monomial{z}, 1);
        } else if (z.degree < 0 && dy_key(z) <= dy_key(w[0])) {
            r = ModuleVector::basis(detail::prepend(z, w), 1);
        } else {
            const Mode& f = w[0];
            Monomial rest = detail::tail(w);
            r = apply_vec(f, apply_mono(z, rest));
            for (auto& [b, a] : k_bracket(KBasis{z.species, z.degree}, KBasis{f.species, f.degree})) {
                if (b.kind == 'c')
                    r.add_scaled(ModuleVector::basis(rest, 1), a * impl_->level);
                else
                    r.add_scaled(apply_mono({b.kind, 1, b.m}, rest), a);
            }
        }
        impl_->memo.emplace(key, r);
        return r;
    }

    std::shared_ptr<Impl> impl_;
};

namespace detail {

// coefficient of x^m1 y^m2 in D_k(x, y) * (d^der A)(x) w, or D_k * w when A is empty
inline ModuleVector delta_field_coeff(int k, const FieldOracle* A, int der, int m1, int m2, const ModuleVector& w, int N) {
    int mm = m2 + k;
    Rational b = binomial(mm, k);
    if (b.is_zero()) return ModuleVector(N);
    if (!A) return m1 == -mm - 1 ? b * w.truncated(N) : ModuleVector(N);
    int r = -m1 - mm - 2 - der;
    Rational f(1);
    for (int i = 0; i < der; ++i) f *= Rational(-r - 1 - i);
    if (f.is_zero()) return ModuleVector(N);
    return (b * f) * A->apply(r, w, N);
}

} // namespace detail

// [E(x), F(y)] = D0 (I(x) + J(x)) + sum_{k>=1} l^k h^(k-1) D_k (1 + h I(x)), coefficientwise on probes
inline CheckReport check_ef_bracket(const FieldOracle& E, const FieldOracle& F, const FieldOracle& I, const FieldOracle& J,
                                    const Rational& level, int N, const Window& win, const std::vector<ModuleVector>& probes) {
    CheckReport rep{"[e(x), f(y)] on the module", win.str(), N, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    for (auto& w0 : probes) {
        ModuleVector w = w0.truncated(N);
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int m1 = e[0], m2 = e[1];
            ModuleVector lhs = E.apply(-m1 - 1, F.apply(-m2 - 1, w, N), N) - F.apply(-m2 - 1, E.apply(-m1 - 1, w, N), N);
            ModuleVector rhs = detail::delta_field_coeff(0, &I, 0, m1, m2, w, N) + detail::delta_field_coeff(0, &J, 0, m1, m2, w, N);
            for (int k = 1; k <= N; ++k) {
                TruncScalar c = TruncScalar::hbar_pow(k - 1, N, rpow(level, k));
                rhs.add_scaled(detail::delta_field_coeff(k, nullptr, 0, m1, m2, w, N), c);
                rhs.add_scaled(detail::delta_field_coeff(k, &I, 0, m1, m2, w, N), c.shifted(1));
            }
            ok = cmp(e, w0.str(), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

// [A(x), B(y)] against the mode brackets of K, on the module
inline CheckReport check_k_commutator(const KModule& V, char A, char B, const Window& win, const std::vector<ModuleVector>& probes) {
    CheckReport rep{std::string("[") + A + "(x), " + B + "(y)] on V_K", win.str(), 1, static_cast<int>(probes.size())};
    Comparer cmp(rep);
    auto fa = V.field(A), fb = V.field(B);
    for (auto& w : probes) {
        bool ok = true;
        for_each_point(win, [&](const std::vector<int>& e) {
            int m = -e[0] - 1, n = -e[1] - 1;
            ModuleVector lhs = fa.apply(m, fb.apply(n, w, 1), 1) - fb.apply(n, fa.apply(m, w, 1), 1);
            ModuleVector rhs(1);
            for (auto& [b, a] : k_bracket(KBasis{A, m}, KBasis{B, n}))
                rhs.add_scaled(b.kind == 'c' ? V.level() * w.truncated(1) : V.field(b.kind).apply(b.m, w, 1), a);
            ok = cmp(e, w.str(), lhs, rhs);
            return ok;
        });
        if (!ok) break;
    }
    return rep;
}

inline std::vector<CheckReport> vk_field_checks(const KModule& V, int depth, const Window& win) {
    std::vector<CheckReport> out;
    auto probes = dy_probes(depth, 1);
    for (char A : {'E', 'F', 'I', 'J'})
        for (char B : {'E', 'F', 'I', 'J'}) out.push_back(check_k_commutator(V, A, B, win, probes));
    out.push_back(check_ef_bracket(V.field('E'), V.field('F'), V.field('I'), V.field('J'), V.level(), 1, win, probes));
    DirectedSeries one(HPoly(Rational(1)), HPoly(Rational(1)), Direction::Single, 1);
    // I and J against anything else give one-sided expansions, which are not local
    const std::vector<std::pair<char, char>> local{{'E', 'E'}, {'E', 'F'}, {'F', 'E'}, {'F', 'F'}, {'I', 'I'}, {'J', 'J'}};
    for (auto [A, B] : local) {
        auto a = V.field(A), b = V.field(B);
        int k = find_locality_order(a, b, {{b, a, one}}, 2, 1, win, probes);
        CheckReport r{std::string("locality ") + A + "," + B, win.str(), 1, static_cast<int>(probes.size())};
        r.pass = k >= 0;
        r.notes.push_back("order " + std::to_string(k));
        out.push_back(r);
    }
    return out;
}

// Straightening of the tilde relations on PBW monomials, mod h^N. Exchange factors are expanded so that the
// moved mode's degree rises; the remaining terms follow the expansion directions of K.
class DYModule {
public:
    DYModule(Rational level, int N, long fuel = 2000000) : impl_(std::make_shared<Impl>()) {
        impl_->level = level;
        impl_->N = N;
        impl_->fuel = fuel;
        DYEngine eng(DYPresentation::Tilde, N);
        for (char Z : {'E', 'F', 'I', 'J'})
            for (char W : {'E', 'F', 'I', 'J'}) impl_->rules.emplace(std::pair(Z, W), make_rule(eng, Z, W));
    }

    int order() const { return impl_->N; }
    const Rational& level() const { return impl_->level; }

    ModuleVector apply_mode(const Mode& z, const ModuleVector& v, int N) const {
        if (N > impl_->N) throw ConfigError("module built for a lower h order");
        ModuleVector r = apply_linear(v.truncated(N), N, [&](const Monomial& m) { return apply_mono(z, m).truncated(N); });
        return r;
    }

    FieldOracle field(char s) const {
        DYModule self = *this;
        return {[self, s](int m, const ModuleVector& w, int N) { return self.apply_mode({s, 1, m}, w, N); },
                [](const ModuleVector& w, int N) { return w.depth() + N; }, std::string(1, s) + "~"};
    }

private:
    struct Rule {
        std::map<int, TruncScalar> R;
        struct Single {
            Sym s;
            std::map<int, TruncScalar> c;
        };
        std::vector<Single> singles;
        std::map<int, TruncScalar> konst;
        struct Delta {
            int k;
            std::optional<Sym> s;
            TruncScalar c;
        };
        std::vector<Delta> deltas;
        bool x_dominant = false;
    };

    struct Impl {
        Rational level;
        int N = 1;
        long fuel = 0;
        std::map<std::pair<char, char>, Rule> rules;
        std::recursive_mutex mu;
        std::map<std::pair<Mode, Monomial>, ModuleVector> memo;
    };

    static char eng_kind(char s) { return s == 'I' ? 'P' : s == 'J' ? 'M' : s; }
    static char mod_kind(char s) { return s == 'P' ? 'I' : s == 'M' ? 'J' : s; }

    // Z(x) W(y) = R W(y) Z(x) + ...
    Rule make_rule(const DYEngine& eng, char Z, char W) const {
        const int N = impl_->N;
        Sym z{eng_kind(Z), 0}, w{eng_kind(W), 1};
        FWExpr e(N);
        if (!eng.is_normal(z, w))
            e = eng.swap_word(z, w);
        else {
            FWExpr rev = eng.swap_word(w, z);
            RElem Rp = rev.words().at(FWord{z, w});
            RElem Ri = Rp.inverse();
            e.add_word({w, z}, Ri);
            FWExpr rest(N);
            for (auto& [wd, c] : rev.words())
                if (wd != FWord{z, w}) rest.add_word(wd, c);
            for (auto& [k, c] : rev.deltas()) rest.add_delta(k.first, k.second, c);
            e.add(rest, -Ri);
        }
        Rule r;
        const Rational& l = impl_->level;
        for (auto& [wd, c] : e.words()) {
            if (wd.size() == 2) {
                if (wd != FWord{w, z}) throw DYInconsistent("unexpected word in rule " + word_str(wd));
                r.R = c.specialize(l, N);
            } else if (wd.size() == 1) {
                Sym s = wd[0];
                s.kind = mod_kind(s.kind);
                r.singles.push_back({s, c.specialize(l, N)});
            } else
                r.konst = c.specialize(l, N);
        }
        for (auto& [k, c] : e.deltas()) {
            auto sp = c.specialize(l, N);
            if (sp.empty()) continue;
            std::optional<Sym> s;
            if (!k.second.empty()) {
                s = k.second[0];
                s->kind = mod_kind(s->kind);
            }
            r.deltas.push_back({k.first, s, sp.at(0)});
        }
        if (Z == 'I' || W == 'J')
            r.x_dominant = true;
        else
            r.x_dominant = false;
        return r;
    }

    ModuleVector apply_vec(const Mode& z, const ModuleVector& v) const {
        ModuleVector r(impl_->N);
        for (auto& [m, c] : v.terms()) r.add_scaled(apply_mono(z, m), c);
        return r;
    }

    // (x-y)^p = sum_t coef x^xe y^ye
    static Rational expand_coef(bool xdom, int p, int t, int& xe, int& ye) {
        if (xdom) {
            xe = p - t;
            ye = t;
            return binomial(p, t) * sign_pow(t);
        }
        xe = t;
        ye = p - t;
        return binomial(p, t) * sign_pow(p + t);
    }

    ModuleVector apply_rule(const Rule& r, const Mode& z, const Mode& front, const Monomial& rest) const {
        const int N = impl_->N;
        const int m = z.degree, n = front.degree;
        const int wr = weight(rest);
        ModuleVector out(N);
        ModuleVector restv = ModuleVector::basis(rest, N);
        for (auto& [p, rho] : r.R) {
            for (int t = 0; m + t < wr + N; ++t) {
                if (p >= 0 && t > p) break;
                Rational c = binomial(p, t) * sign_pow(p + t);
                if (c.is_zero()) continue;
                ModuleVector v = apply_mono({z.species, 1, m + t}, rest);
                if (v.is_zero()) continue;
                out.add_scaled(apply_vec({front.species, 1, n + p - t}, v), rho * c);
            }
        }
        for (auto& sg : r.singles)
            for (auto& [p, sig] : sg.c) {
                int t;
                if (r.x_dominant)
                    t = sg.s.var == 0 ? -n - 1 : p + m + 1;
                else
                    t = sg.s.var == 0 ? p + n + 1 : -m - 1;
                if (t < 0) continue;
                int xe, ye;
                Rational c = expand_coef(r.x_dominant, p, t, xe, ye);
                if (c.is_zero()) continue;
                int mode = sg.s.var == 0 ? m + xe : n + ye;
                out.add_scaled(apply_mono({sg.s.kind, 1, mode}, rest), sig * c);
            }
        for (auto& [p, kap] : r.konst) {
            int t = r.x_dominant ? -n - 1 : -m - 1;
            if (t < 0) continue;
            int xe, ye;
            Rational c = expand_coef(r.x_dominant, p, t, xe, ye);
            if (c.is_zero() || xe != -m - 1 || ye != -n - 1) continue;
            out.add_scaled(restv, kap * c);
        }
        for (auto& d : r.deltas) {
            int m1 = -m - 1, m2 = -n - 1, mm = m2 + d.k;
            Rational b = binomial(mm, d.k);
            if (b.is_zero()) continue;
            if (!d.s) {
                if (m1 == -mm - 1) out.add_scaled(restv, d.c * b);
                continue;
            }
            int rr = -m1 - mm - 2 - d.s->der;
            Rational f(1);
            for (int i = 0; i < d.s->der; ++i) f *= Rational(-rr - 1 - i);
            if (f.is_zero()) continue;
            out.add_scaled(apply_mono({d.s->kind, 1, rr}, rest), d.c * (b * f));
        }
        return out;
    }

    ModuleVector apply_mono(const Mode& z, const Monomial& w) const {
        std::lock_guard lk(impl_->mu);
        const int N = impl_->N;
        auto key = std::pair(z, w);
        if (auto it = impl_->memo.find(key); it != impl_->memo.end()) return it->second;
        if (--impl_->fuel < 0) throw FuelExhausted("straightening fuel exhausted at " + z.str() + " on " + monomial_str(w));
        ModuleVector r(N);
        if (w.empty()) {
            if (z.degree < 0) r = ModuleVector::basis(Monomial{z}, N);
        } else if (z.degree < 0 && dy_key(z) <= dy_key(w[0])) {
            r = ModuleVector::basis(detail::prepend(z, w), N);
        } else if (z.degree >= weight(w) + N) {
            // annihilated by weight
        } else {
            r = apply_rule(impl_->rules.at({z.species, w[0].species}), z, w[0], detail::tail(w));
        }
        impl_->memo.emplace(key, r);
        return r;
    }

    std::shared_ptr<Impl> impl_;
};

// Experimental checks of the straightened module: coherence with V_K at N = 1, the e-e relation and [e, f].
inline std::vector<CheckReport> dy_module_checks(const Rational& level, int N, int depth, const Window& win, long fuel = 2000000) {
    std::vector<CheckReport> out;
    auto mark = [&](CheckReport r) {
        r.experimental = true;
        out.push_back(std::move(r));
    };
    try {
        DYModule M1(level, 1, fuel);
        KModule V(level);
        CheckReport r{"straightened module at N=1 equals V_K", win.str(), 1, 0};
        Comparer cmp(r);
        auto probes = dy_probes(depth, 1);
        r.probes = static_cast<int>(probes.size());
        for (auto& w : probes)
            for (char s : {'E', 'F', 'I', 'J'})
                for (int m = win.ranges[0].first; m <= win.ranges[0].second; ++m)
                    cmp({m}, std::string(1, s) + " on " + w.str(), M1.apply_mode({s, 1, m}, w, 1), V.apply_mode({s, 1, m}, w, 1));
        mark(r);
    } catch (const std::exception& e) {
        CheckReport r{"straightened module at N=1 equals V_K", win.str(), 1, 0};
        r.pass = false;
        r.notes.push_back(std::string("non-confluence: ") + e.what());
        mark(r);
    }
    try {
        DYModule M(level, N, fuel);
        auto probes = dy_probes(depth, N);
        auto E = M.field('E');
        CheckReport r{"(y-x+h) e(x)e(y) = (y-x-h) e(y)e(x) on the module", win.str(), N, static_cast<int>(probes.size())};
        Comparer cmp(r);
        TruncScalar h = TruncScalar::hbar_pow(1, N);
        for (auto& w : probes) {
            PairTable P(E, E, w, N);
            bool ok = true;
            for_each_point(win, [&](const std::vector<int>& e) {
                int m1 = e[0], m2 = e[1];
                ModuleVector lhs = P.at(m1, m2 - 1) - P.at(m1 - 1, m2) + h * P.at(m1, m2);
                ModuleVector rhs = P.at(m2 - 1, m1) - P.at(m2, m1 - 1) - h * P.at(m2, m1);
                ok = cmp(e, w.str(), lhs, rhs);
                return ok;
            });
            if (!ok) break;
        }
        mark(r);
        mark(check_ef_bracket(E, M.field('F'), M.field('I'), M.field('J'), level, N, win, probes));
    } catch (const std::exception& e) {
        CheckReport r{"straightened module relations", win.str(), N, 0};
        r.pass = false;
        r.notes.push_back(std::string("non-confluence: ") + e.what());
        mark(r);
    }
    return out;
}

} // namespace qva
