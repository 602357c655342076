#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "trunc_scalar.hpp"

namespace qva {

// One mode generator. Species letters: X, Y for the ZF algebra; E, F, I, J for K.
struct Mode {
    char species = 'X';
    int index = 1;
    int degree = -1;

    auto key() const { return std::tuple(index, species, degree); }
    friend bool operator==(const Mode& a, const Mode& b) = default;
    friend auto operator<=>(const Mode& a, const Mode& b) { return a.key() <=> b.key(); }

    std::string str() const {
        std::string s(1, species);
        if (index) s += std::to_string(index);
        return s + "(" + std::to_string(degree) + ")";
    }
};

using Monomial = boost::container::small_vector<Mode, 4>;

inline int weight(const Monomial& m) {
    int w = 0;
    for (auto& z : m) w -= z.degree;
    return w;
}

inline std::string monomial_str(const Monomial& m) {
    if (m.empty()) return "1";
    std::string s;
    for (auto& z : m) {
        if (!s.empty()) s += " ";
        s += z.str();
    }
    return s;
}

// Finite combination of normal monomials (applied to the vacuum) with coefficients in Q[h]/(h^N).
class ModuleVector {
public:
    using Map = std::map<Monomial, TruncScalar>;

    ModuleVector() = default;
    explicit ModuleVector(int order) : order_(order) {}
    static ModuleVector vacuum(int order) { return basis(Monomial{}, order); }
    static ModuleVector basis(const Monomial& m, int order) {
        ModuleVector v(order);
        v.t_.emplace(m, TruncScalar(Rational(1), order));
        return v;
    }

    int order() const { return order_; }
    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    size_t size() const { return t_.size(); }

    void add(const Monomial& m, const TruncScalar& c) {
        if (c.is_zero()) return;
        auto it = t_.find(m);
        if (it == t_.end())
            t_.emplace(m, c);
        else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    void add(const ModuleVector& o) {
        for (auto& [m, c] : o.t_) add(m, c);
    }
    void add_scaled(const ModuleVector& o, const TruncScalar& s) {
        for (auto& [m, c] : o.t_) add(m, c * s);
    }
    void add_scaled(const ModuleVector& o, const Rational& s) {
        if (s.is_zero()) return;
        for (auto& [m, c] : o.t_) add(m, c * s);
    }

    friend ModuleVector operator+(ModuleVector a, const ModuleVector& b) {
        a.add(b);
        return a;
    }
    friend ModuleVector operator-(ModuleVector a, const ModuleVector& b) {
        a.add_scaled(b, Rational(-1));
        return a;
    }
    friend ModuleVector operator*(const TruncScalar& s, const ModuleVector& v) {
        ModuleVector r(v.order_);
        r.add_scaled(v, s);
        return r;
    }
    friend ModuleVector operator*(const Rational& s, const ModuleVector& v) {
        ModuleVector r(v.order_);
        r.add_scaled(v, s);
        return r;
    }
    friend bool operator==(const ModuleVector& a, const ModuleVector& b) {
        if (a.t_.size() != b.t_.size()) return false;
        auto i = a.t_.begin();
        for (auto j = b.t_.begin(); j != b.t_.end(); ++i, ++j)
            if (i->first != j->first || !(i->second == j->second)) return false;
        return true;
    }

    // multiply by h^j
    ModuleVector shifted(int j) const {
        ModuleVector r(order_);
        for (auto& [m, c] : t_) r.add(m, c.shifted(j));
        return r;
    }
    ModuleVector truncated(int n) const {
        ModuleVector r(n);
        for (auto& [m, c] : t_) r.add(m, c.truncated(n));
        return r;
    }
    // coefficients of h^k only, as an order-1 vector
    ModuleVector hpart(int k) const {
        ModuleVector r(1);
        for (auto& [m, c] : t_) r.add(m, TruncScalar(c.coeff(k), 1));
        return r;
    }

    int depth() const {
        int d = 0;
        for (auto& [m, c] : t_) d = std::max(d, weight(m));
        return d;
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::string s;
        for (auto& [m, c] : t_) {
            if (!s.empty()) s += " + ";
            s += "(" + c.str() + ")*[" + monomial_str(m) + "]";
        }
        return s;
    }

private:
    int order_ = 1;
    Map t_;
};

} // namespace qva
