#pragma once

#include <stdexcept>
#include <string>

#include <boost/container/small_vector.hpp>

#include "rational.hpp"

namespace qva {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Element of Q[h]/(h^N), stored densely.
class TruncScalar {
public:
    using Coeffs = boost::container::small_vector<Rational, 4>;

    TruncScalar() = default;
    explicit TruncScalar(int order) : c_(check_order(order)) {}
    TruncScalar(const Rational& r, int order) : c_(check_order(order)) { c_[0] = r; }

    static TruncScalar hbar_pow(int k, int order, const Rational& r = Rational(1)) {
        TruncScalar t(order);
        if (k < order) t.c_[k] = r;
        return t;
    }

    int order() const { return static_cast<int>(c_.size()); }
    const Rational& operator[](int k) const { return c_[k]; }
    Rational coeff(int k) const { return k >= 0 && k < order() ? c_[k] : Rational(); }
    void set(int k, const Rational& r) {
        if (k < order()) c_[k] = r;
    }
    void add_at(int k, const Rational& r) {
        if (k >= 0 && k < order()) c_[k] += r;
    }

    bool is_zero() const {
        for (auto& r : c_)
            if (!r.is_zero()) return false;
        return true;
    }
    int valuation() const {
        for (int k = 0; k < order(); ++k)
            if (!c_[k].is_zero()) return k;
        return order();
    }

    TruncScalar truncated(int m) const {
        if (m > order()) throw ConfigError("cannot raise truncation order");
        TruncScalar t(m);
        for (int k = 0; k < m; ++k) t.c_[k] = c_[k];
        return t;
    }

    // multiply by h^j
    TruncScalar shifted(int j) const {
        TruncScalar t(order());
        for (int k = 0; k + j < order(); ++k) t.c_[k + j] = c_[k];
        return t;
    }

    TruncScalar operator-() const {
        TruncScalar t(*this);
        for (auto& r : t.c_) r = -r;
        return t;
    }
    TruncScalar& operator+=(const TruncScalar& o) {
        same_order(o);
        for (int k = 0; k < order(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    TruncScalar& operator-=(const TruncScalar& o) {
        same_order(o);
        for (int k = 0; k < order(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    TruncScalar& operator*=(const Rational& r) {
        for (auto& x : c_) x *= r;
        return *this;
    }
    friend TruncScalar operator+(TruncScalar a, const TruncScalar& b) { return a += b; }
    friend TruncScalar operator-(TruncScalar a, const TruncScalar& b) { return a -= b; }
    friend TruncScalar operator*(TruncScalar a, const Rational& r) { return a *= r; }
    friend TruncScalar operator*(const Rational& r, TruncScalar a) { return a *= r; }

    friend TruncScalar operator*(const TruncScalar& a, const TruncScalar& b) {
        a.same_order(b);
        TruncScalar t(a.order());
        for (int i = 0; i < a.order(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (int j = 0; i + j < a.order(); ++j)
                if (!b.c_[j].is_zero()) t.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return t;
    }
    TruncScalar& operator*=(const TruncScalar& o) { return *this = *this * o; }

    // inverse exists iff the constant term is nonzero
    TruncScalar inverse() const {
        if (c_.empty() || c_[0].is_zero()) throw std::domain_error("not invertible mod h^N");
        TruncScalar t(order());
        Rational inv0 = c_[0].inverse();
        t.c_[0] = inv0;
        for (int k = 1; k < order(); ++k) {
            Rational s;
            for (int j = 1; j <= k; ++j) s += c_[j] * t.c_[k - j];
            t.c_[k] = -s * inv0;
        }
        return t;
    }

    friend bool operator==(const TruncScalar& a, const TruncScalar& b) {
        a.same_order(b);
        for (int k = 0; k < a.order(); ++k)
            if (a.c_[k] != b.c_[k]) return false;
        return true;
    }

    std::string str() const {
        std::string s;
        for (int k = 0; k < order(); ++k) {
            if (c_[k].is_zero()) continue;
            std::string cs = c_[k].str();
            if (!s.empty()) {
                if (cs[0] == '-') {
                    s += " - ";
                    cs.erase(0, 1);
                } else
                    s += " + ";
            }
            if (k == 0)
                s += cs;
            else {
                if (cs != "1") s += cs + "*";
                s += k == 1 ? "h" : "h^" + std::to_string(k);
            }
        }
        return s.empty() ? "0" : s;
    }

private:
    static int check_order(int order) {
        if (order < 1) throw ConfigError("truncation order must be >= 1");
        return order;
    }
    void same_order(const TruncScalar& o) const {
        if (o.order() != order())
            throw ConfigError("mismatched truncation orders " + std::to_string(order()) + " and " + std::to_string(o.order()));
    }

    Coeffs c_;
};

} // namespace qva
