#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace qva {

// Laurent polynomial in one variable.
class UPoly {
public:
    UPoly() = default;
    UPoly(const Rational& c) {
        if (!c.is_zero()) t_[0] = c;
    }
    static UPoly monomial(int e, const Rational& c = Rational(1)) {
        UPoly p;
        if (!c.is_zero()) p.t_[e] = c;
        return p;
    }

    const std::map<int, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    Rational coeff(int e) const {
        auto it = t_.find(e);
        return it == t_.end() ? Rational() : it->second;
    }
    void add(int e, const Rational& c) {
        if (c.is_zero()) return;
        auto [it, fresh] = t_.try_emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    int low() const { return t_.begin()->first; }
    int high() const { return t_.rbegin()->first; }

    UPoly operator-() const {
        UPoly p;
        for (auto& [e, c] : t_) p.t_[e] = -c;
        return p;
    }
    friend UPoly operator+(UPoly a, const UPoly& b) {
        for (auto& [e, c] : b.t_) a.add(e, c);
        return a;
    }
    friend UPoly operator-(UPoly a, const UPoly& b) {
        for (auto& [e, c] : b.t_) a.add(e, -c);
        return a;
    }
    friend UPoly operator*(const UPoly& a, const UPoly& b) {
        UPoly p;
        for (auto& [e1, c1] : a.t_)
            for (auto& [e2, c2] : b.t_) p.add(e1 + e2, c1 * c2);
        return p;
    }
    UPoly pow(int n) const {
        UPoly r(Rational(1));
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }
    // p(-u)
    UPoly reflect() const {
        UPoly p;
        for (auto& [e, c] : t_) p.t_[e] = (e % 2 == 0) ? c : -c;
        return p;
    }
    UPoly shift_exp(int s) const {
        UPoly p;
        for (auto& [e, c] : t_) p.t_[e + s] = c;
        return p;
    }
    friend bool operator==(const UPoly& a, const UPoly& b) { return a.t_ == b.t_; }

private:
    std::map<int, Rational> t_;
};

// Polynomial in a difference variable u and h: index k holds the h^k part.
class HPoly {
public:
    HPoly() = default;
    HPoly(const Rational& c) { set(0, UPoly(c)); }
    HPoly(const UPoly& p) { set(0, p); }

    static HPoly u() { return HPoly(UPoly::monomial(1)); }
    static HPoly h() {
        HPoly p;
        p.set(1, UPoly(Rational(1)));
        return p;
    }

    int hdeg() const { return static_cast<int>(parts_.size()) - 1; }
    const UPoly& part(int k) const {
        static const UPoly zero;
        return k >= 0 && k < static_cast<int>(parts_.size()) ? parts_[k] : zero;
    }
    void set(int k, const UPoly& p) {
        if (k >= static_cast<int>(parts_.size())) parts_.resize(k + 1);
        parts_[k] = p;
        trim();
    }
    bool is_zero() const { return parts_.empty(); }

    friend HPoly operator+(const HPoly& a, const HPoly& b) {
        HPoly r;
        int n = std::max(a.hdeg(), b.hdeg());
        for (int k = 0; k <= n; ++k) r.set(k, a.part(k) + b.part(k));
        return r;
    }
    HPoly operator-() const {
        HPoly r;
        for (int k = 0; k <= hdeg(); ++k) r.set(k, -part(k));
        return r;
    }
    friend HPoly operator-(const HPoly& a, const HPoly& b) { return a + (-b); }
    friend HPoly operator*(const HPoly& a, const HPoly& b) {
        HPoly r;
        for (int i = 0; i <= a.hdeg(); ++i)
            for (int j = 0; j <= b.hdeg(); ++j) r.set(i + j, r.part(i + j) + a.part(i) * b.part(j));
        return r;
    }
    HPoly pow(int n) const {
        HPoly r(Rational(1));
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }
    HPoly reflect() const {
        HPoly r;
        for (int k = 0; k <= hdeg(); ++k) r.set(k, part(k).reflect());
        return r;
    }
    friend bool operator==(const HPoly& a, const HPoly& b) { return a.parts_ == b.parts_; }

    std::string str(const std::string& var = "u") const;

private:
    void trim() {
        while (!parts_.empty() && parts_.back().is_zero()) parts_.pop_back();
    }
    std::vector<UPoly> parts_;
};

// Multivariate polynomial over a named variable list.
class MPoly {
public:
    using Exps = std::vector<int>;

    MPoly() = default;
    explicit MPoly(std::vector<std::string> vars) : vars_(std::move(vars)) {}
    MPoly(std::vector<std::string> vars, const Rational& c) : vars_(std::move(vars)) {
        if (!c.is_zero()) t_[Exps(vars_.size(), 0)] = c;
    }
    static MPoly var(const std::vector<std::string>& vars, size_t i) {
        MPoly p(vars);
        Exps e(vars.size(), 0);
        e[i] = 1;
        p.t_[e] = Rational(1);
        return p;
    }

    const std::vector<std::string>& vars() const { return vars_; }
    const std::map<Exps, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add(const Exps& e, const Rational& c) {
        if (c.is_zero()) return;
        auto [it, fresh] = t_.try_emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    friend MPoly operator+(MPoly a, const MPoly& b) {
        for (auto& [e, c] : b.t_) a.add(e, c);
        return a;
    }
    MPoly operator-() const {
        MPoly p(vars_);
        for (auto& [e, c] : t_) p.t_[e] = -c;
        return p;
    }
    friend MPoly operator-(const MPoly& a, const MPoly& b) { return a + (-b); }
    friend MPoly operator*(const MPoly& a, const MPoly& b) {
        MPoly p(a.vars_);
        for (auto& [e1, c1] : a.t_)
            for (auto& [e2, c2] : b.t_) {
                Exps e(e1.size());
                for (size_t i = 0; i < e.size(); ++i) e[i] = e1[i] + e2[i];
                p.add(e, c1 * c2);
            }
        return p;
    }
    MPoly pow(int n) const {
        MPoly r(vars_, Rational(1));
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }

    int degree_in(size_t i) const {
        int d = 0;
        for (auto& [e, c] : t_) d = std::max(d, e[i]);
        return d;
    }
    bool depends_on(size_t i) const {
        for (auto& [e, c] : t_)
            if (e[i] != 0) return true;
        return false;
    }

    // replace variable i by a polynomial
    MPoly substitute(size_t i, const MPoly& q) const {
        MPoly r(vars_);
        std::vector<MPoly> powers{MPoly(vars_, Rational(1))};
        for (auto& [e, c] : t_) {
            while (static_cast<int>(powers.size()) <= e[i]) powers.push_back(powers.back() * q);
            Exps rest = e;
            rest[i] = 0;
            MPoly m(vars_);
            m.t_[rest] = c;
            r = r + m * powers[e[i]];
        }
        return r;
    }

    // Collapse to an HPoly in (u, h) given index of u and h; other variables must be absent.
    HPoly to_hpoly(int ui, int hi) const {
        HPoly r;
        for (auto& [e, c] : t_) {
            for (size_t j = 0; j < e.size(); ++j)
                if (static_cast<int>(j) != ui && static_cast<int>(j) != hi && e[j] != 0)
                    throw std::invalid_argument("unexpected variable '" + vars_[j] + "'");
            int ue = ui >= 0 ? e[ui] : 0;
            int he = hi >= 0 ? e[hi] : 0;
            r.set(he, r.part(he) + UPoly::monomial(ue, c));
        }
        return r;
    }

private:
    std::vector<std::string> vars_;
    std::map<Exps, Rational> t_;
};

struct RationalFunction {
    MPoly num, den;
};

struct ParseError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Recursive-descent parser for rational expressions: + - * / ^ (integer exponents), parentheses.
class ExprParser {
public:
    ExprParser(std::string_view src, std::vector<std::string> vars) : s_(src), vars_(std::move(vars)) {}

    RationalFunction parse() {
        auto r = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression '" + std::string(s_) + "': " + msg + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    MPoly constant(const Rational& c) const { return MPoly(vars_, c); }

    static RationalFunction add(const RationalFunction& a, const RationalFunction& b, bool minus) {
        if (a.den.terms() == b.den.terms()) return {minus ? a.num - b.num : a.num + b.num, a.den};
        MPoly l = a.num * b.den, r = b.num * a.den;
        return {minus ? l - r : l + r, a.den * b.den};
    }

    RationalFunction expr() {
        RationalFunction r = term();
        for (;;) {
            if (eat('+'))
                r = add(r, term(), false);
            else if (eat('-'))
                r = add(r, term(), true);
            else
                return r;
        }
    }
    RationalFunction term() {
        RationalFunction r = unary();
        for (;;) {
            if (eat('*')) {
                auto b = unary();
                r = {r.num * b.num, r.den * b.den};
            } else if (eat('/')) {
                auto b = unary();
                if (b.num.is_zero()) fail("division by zero");
                r = {r.num * b.den, r.den * b.num};
            } else
                return r;
        }
    }
    RationalFunction unary() {
        if (eat('-')) {
            auto r = unary();
            return {-r.num, r.den};
        }
        if (eat('+')) return unary();
        return power();
    }
    RationalFunction power() {
        RationalFunction b = atom();
        if (eat('^')) {
            skip();
            bool neg = eat('-');
            skip();
            size_t st = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (st == pos_) fail("expected integer exponent");
            int e = std::stoi(std::string(s_.substr(st, pos_ - st)));
            if (neg) {
                if (b.num.is_zero()) fail("zero to a negative power");
                std::swap(b.num, b.den);
            }
            return {b.num.pow(e), b.den.pow(e)};
        }
        return b;
    }
    RationalFunction atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto r = expr();
            if (!eat(')')) fail("expected ')'");
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t st = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return {constant(Rational::parse(s_.substr(st, pos_ - st))), constant(Rational(1))};
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t st = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name(s_.substr(st, pos_ - st));
            auto it = std::find(vars_.begin(), vars_.end(), name);
            if (it == vars_.end()) fail("unknown variable '" + name + "'");
            return {MPoly::var(vars_, static_cast<size_t>(it - vars_.begin())), constant(Rational(1))};
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::vector<std::string> vars_;
    size_t pos_ = 0;
};

inline RationalFunction parse_rational_function(std::string_view src, const std::vector<std::string>& vars) {
    return ExprParser(src, vars).parse();
}

inline std::string HPoly::str(const std::string& var) const {
    std::string s;
    for (int k = 0; k <= hdeg(); ++k)
        for (auto& [e, c] : part(k).terms()) {
            std::string cs = c.str();
            bool neg = cs[0] == '-';
            if (neg) cs.erase(0, 1);
            if (!s.empty())
                s += neg ? " - " : " + ";
            else if (neg)
                s += "-";
            std::string mono;
            if (k) mono += k == 1 ? "h" : "h^" + std::to_string(k);
            if (e) {
                if (!mono.empty()) mono += "*";
                mono += e == 1 ? var : var + "^" + std::to_string(e);
            }
            if (mono.empty())
                s += cs;
            else
                s += (cs == "1" ? "" : cs + "*") + mono;
        }
    return s.empty() ? "0" : s;
}

} // namespace qva
