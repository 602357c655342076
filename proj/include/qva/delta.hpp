#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "series.hpp"

namespace qva {

// coefficient of x^(-m-1) y^n in D_k = (1/k!) (d/dy)^k x^-1 delta(y/x)
inline Rational delta_coeff(int k, int m, int n) {
    if (k < 0 || n != m - k) return Rational();
    return binomial(m, k);
}

struct UnsupportedProduct : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// sum_k c_k D_k(x, y)
class DeltaExpr {
public:
    DeltaExpr() = default;
    explicit DeltaExpr(int order) : order_(order) {}

    static DeltaExpr single(int k, const TruncScalar& c) {
        DeltaExpr d(c.order());
        d.add(k, c);
        return d;
    }

    int order() const { return order_; }
    const std::map<int, TruncScalar>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add(int k, const TruncScalar& c) {
        if (k < 0 || c.is_zero()) return;
        auto it = t_.find(k);
        if (it == t_.end())
            t_.emplace(k, c);
        else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    friend DeltaExpr operator+(DeltaExpr a, const DeltaExpr& b) {
        for (auto& [k, c] : b.t_) a.add(k, c);
        return a;
    }
    friend DeltaExpr operator-(DeltaExpr a, const DeltaExpr& b) {
        for (auto& [k, c] : b.t_) a.add(k, -c);
        return a;
    }

    // multiply by a polynomial in (x - y) and h; negative powers of (x - y) have no meaning here
    DeltaExpr times(const HPoly& p) const {
        DeltaExpr r(order_);
        for (int i = 0; i <= p.hdeg(); ++i)
            for (auto& [j, a] : p.part(i).terms()) {
                if (j < 0) throw UnsupportedProduct("pole at x=y times a delta distribution");
                for (auto& [k, c] : t_)
                    if (k - j >= 0) r.add(k - j, c.shifted(i) * a);
            }
        return r;
    }

    // coefficient of x^(-m-1) y^n
    TruncScalar coeff(int m, int n) const {
        TruncScalar s(order_);
        auto it = t_.find(m - n);
        if (it != t_.end()) s += it->second * binomial(m, m - n);
        return s;
    }

    // D_k(y, x) = (-1)^k D_k(x, y)
    DeltaExpr swapped() const {
        DeltaExpr r(order_);
        for (auto& [k, c] : t_) r.add(k, k % 2 ? -c : c);
        return r;
    }

    std::string str() const {
        std::string s;
        for (auto& [k, c] : t_) {
            if (!s.empty()) s += " + ";
            s += "(" + c.str() + ")*D" + std::to_string(k);
        }
        return s.empty() ? "0" : s;
    }

private:
    int order_ = 1;
    std::map<int, TruncScalar> t_;
};

inline DeltaExpr delta_reduce(const DeltaExpr& e, const HPoly& pending) { return e.times(pending); }

// x^-1 delta((y + h c)/x) = sum_k (h c)^k D_k, truncated below h^N
inline DeltaExpr delta_shift(const Rational& c, int order) {
    DeltaExpr d(order);
    Rational ck(1);
    for (int k = 0; k < order; ++k, ck *= c) d.add(k, TruncScalar::hbar_pow(k, order, ck));
    return d;
}

} // namespace qva
