#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "poly.hpp"
#include "trunc_scalar.hpp"

namespace qva {

using ExpVector = boost::container::small_vector<int, 3>;

struct DirectionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Laurent expansion at u = 0 of P(u) / (u^s B(u)) with B(0) != 0.
// Coefficients are produced lazily from the recurrence Q*B = P.
class LaurentCoeffs {
public:
    LaurentCoeffs() = default;
    LaurentCoeffs(UPoly num, UPoly den) {
        if (den.is_zero()) throw std::domain_error("zero denominator");
        if (num.is_zero()) {
            zero_ = true;
            return;
        }
        int s = den.low();
        int pl = num.low();
        shift_ = pl - s;
        for (auto& [e, c] : num.terms()) p_.push_back({e - pl, c});
        for (auto& [e, c] : den.terms()) {
            if (static_cast<int>(b_.size()) <= e - s) b_.resize(e - s + 1);
            b_[e - s] = c;
        }
        b0inv_ = b_[0].inverse();
        // exact division leaves a finite expansion
        if (b_.size() == 1) {
            finite_ = true;
        } else {
            std::vector<Rational> rem(num.high() - pl + 1);
            for (auto& [e, c] : p_) rem[e] = c;
            int db = static_cast<int>(b_.size()) - 1;
            int dq = static_cast<int>(rem.size()) - 1 - db;
            if (dq >= 0) {
                std::vector<Rational> q(dq + 1);
                for (int i = 0; i <= dq; ++i) {
                    q[i] = rem[i] * b0inv_;
                    if (q[i].is_zero()) continue;
                    for (int j = 0; j <= db; ++j) rem[i + j] -= q[i] * b_[j];
                }
                bool exact = true;
                for (auto& r : rem) exact = exact && r.is_zero();
                if (exact) {
                    finite_ = true;
                    cache_ = std::move(q);
                    b_ = {Rational(1)};
                    b0inv_ = Rational(1);
                    p_.clear();
                    for (size_t i = 0; i < cache_.size(); ++i)
                        if (!cache_[i].is_zero()) p_.push_back({static_cast<int>(i), cache_[i]});
                }
            }
        }
        if (finite_) {
            int hi = 0;
            for (auto& [e, c] : p_) hi = std::max(hi, e);
            high_ = shift_ + hi;
        }
    }

    bool is_zero() const { return zero_; }
    bool finite() const { return zero_ || finite_; }
    // lowest exponent that can carry a nonzero coefficient
    int low() const { return zero_ ? 0 : shift_; }
    // only meaningful when finite()
    int high() const { return zero_ ? -1 : high_; }

    Rational coeff(int n) const {
        if (zero_) return Rational();
        int i = n - shift_;
        if (i < 0) return Rational();
        if (finite_ && n > high_) return Rational();
        std::lock_guard<std::mutex> lock(*mu_);
        extend(i);
        return cache_[i];
    }

private:
    void extend(int i) const {
        while (static_cast<int>(cache_.size()) <= i) {
            int n = static_cast<int>(cache_.size());
            Rational s;
            for (auto& [e, c] : p_)
                if (e == n) s = c;
            for (int j = 1; j < static_cast<int>(b_.size()) && j <= n; ++j)
                if (!b_[j].is_zero()) s -= b_[j] * cache_[n - j];
            cache_.push_back(s * b0inv_);
        }
    }

    bool zero_ = false;
    bool finite_ = false;
    int shift_ = 0;
    int high_ = 0;
    std::vector<std::pair<int, Rational>> p_;
    std::vector<Rational> b_;
    Rational b0inv_;
    mutable std::vector<Rational> cache_;
    std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
};

enum class Direction { Single, FirstDominant, SecondDominant };

// h-adic then directed expansion of num/den, num and den polynomials in u = x_a - x_b and h.
class DirectedSeries {
public:
    DirectedSeries() = default;
    DirectedSeries(HPoly num, HPoly den, Direction dir, int order, std::vector<std::string> vars = {})
        : num_(std::move(num)), den_(std::move(den)), dir_(dir), order_(order), vars_(std::move(vars)) {
        if (order < 1) throw ConfigError("truncation order must be >= 1");
        const UPoly& d0 = den_.part(0);
        if (d0.is_zero()) throw std::domain_error("not h-adically invertible: denominator vanishes at h=0");
        // 1/den = sum_k h^k G_k / d0^(k+1)
        std::vector<UPoly> G{UPoly(Rational(1))};
        std::vector<UPoly> d0pow{UPoly(Rational(1)), d0};
        for (int k = 1; k < order; ++k) {
            UPoly g;
            for (int j = 1; j <= k; ++j) {
                if (den_.part(j).is_zero()) continue;
                while (static_cast<int>(d0pow.size()) <= j - 1) d0pow.push_back(d0pow.back() * d0);
                g = g - den_.part(j) * G[k - j] * d0pow[j - 1];
            }
            G.push_back(g);
        }
        while (static_cast<int>(d0pow.size()) <= order) d0pow.push_back(d0pow.back() * d0);
        parts_.reserve(order);
        for (int k = 0; k < order; ++k) {
            UPoly P;
            for (int i = 0; i <= k; ++i)
                if (!num_.part(i).is_zero()) P = P + num_.part(i) * G[k - i] * d0pow[i];
            parts_.emplace_back(P, d0pow[k + 1]);
        }
    }

    Direction direction() const { return dir_; }
    int order() const { return order_; }
    const HPoly& num() const { return num_; }
    const HPoly& den() const { return den_; }
    const std::vector<std::string>& vars() const { return vars_; }
    const LaurentCoeffs& part(int k) const { return parts_.at(k); }

    // coefficient of u^n h^k in the one-variable expansion
    Rational ucoeff(int n, int k) const { return k < order_ ? parts_[k].coeff(n) : Rational(); }

    bool finite() const {
        for (auto& p : parts_)
            if (!p.finite()) return false;
        return true;
    }
    bool polynomial() const {
        for (auto& p : parts_)
            if (!p.is_zero() && p.low() < 0) return false;
        return finite();
    }

    // two-variable coefficient of x_a^ma x_b^mb h^k
    Rational coeff(int ma, int mb, int k) const {
        if (dir_ == Direction::Single) throw DirectionError("two-variable coefficient of a single-variable series");
        int n = ma + mb;
        if (dir_ == Direction::FirstDominant) {
            if (mb < 0) return Rational();
            Rational c = ucoeff(n, k);
            if (c.is_zero()) return c;
            return c * binomial(n, mb) * sign_pow(mb);
        }
        if (ma < 0) return Rational();
        Rational c = ucoeff(n, k);
        if (c.is_zero()) return c;
        // (x_a - x_b)^n = (-1)^n (x_b - x_a)^n, expanded in powers of x_a
        return c * sign_pow(n) * binomial(n, ma) * sign_pow(ma);
    }

    TruncScalar coeff_all(int ma, int mb) const {
        TruncScalar t(order_);
        for (int k = 0; k < order_; ++k) t.set(k, coeff(ma, mb, k));
        return t;
    }
    TruncScalar ucoeff_all(int n) const {
        TruncScalar t(order_);
        for (int k = 0; k < order_; ++k) t.set(k, ucoeff(n, k));
        return t;
    }

    // lowest u-power over all h-orders
    int low() const {
        int lo = INT32_MAX;
        for (auto& p : parts_)
            if (!p.is_zero()) lo = std::min(lo, p.low());
        return lo == INT32_MAX ? 0 : lo;
    }
    int high() const {
        int hi = INT32_MIN;
        for (auto& p : parts_)
            if (!p.is_zero()) hi = std::max(hi, p.high());
        return hi;
    }
    bool is_zero() const {
        for (auto& p : parts_)
            if (!p.is_zero()) return false;
        return true;
    }

    DirectedSeries with_direction(Direction d) const { return DirectedSeries(num_, den_, d, order_, vars_); }
    DirectedSeries with_order(int n) const { return DirectedSeries(num_, den_, dir_, n, vars_); }
    // f(-u)
    DirectedSeries reflected() const { return DirectedSeries(num_.reflect(), den_.reflect(), dir_, order_, vars_); }

    std::string str(int umin, int umax) const {
        // debug grammar: sum of c * h^k * u^n, ordered by (k, n)
        std::string s;
        for (int k = 0; k < order_; ++k)
            for (int n = umin; n <= umax; ++n) {
                Rational c = ucoeff(n, k);
                if (c.is_zero()) continue;
                if (!s.empty()) s += " + ";
                s += c.str() + " * h^" + std::to_string(k) + " * u^" + std::to_string(n);
            }
        return s.empty() ? "0" : s;
    }

private:
    HPoly num_, den_;
    Direction dir_ = Direction::Single;
    int order_ = 1;
    std::vector<std::string> vars_;
    std::vector<LaurentCoeffs> parts_;
};

inline DirectedSeries iota_expand(const HPoly& num, const HPoly& den, Direction dir, int order,
                                  std::vector<std::string> vars = {}) {
    return DirectedSeries(num, den, dir, order, std::move(vars));
}

inline Rational series_coeff(const DirectedSeries& s, const ExpVector& e, int k) {
    if (k < 0 || k >= s.order()) return Rational();
    if (s.direction() == Direction::Single) {
        if (e.size() != 1) throw std::invalid_argument("expected one exponent");
        return s.ucoeff(e[0], k);
    }
    if (e.size() != 2) throw std::invalid_argument("expected two exponents");
    return s.coeff(e[0], e[1], k);
}

// Build a DirectedSeries from an expression in two named variables that depends only on their difference.
inline DirectedSeries iota_expand_expr(const std::string& expr, const std::string& xa, const std::string& xb,
                                       Direction dir, int order) {
    std::vector<std::string> vars{"u", xa, xb, "h"};
    auto rf = parse_rational_function(expr, vars);
    // x_a = u + x_b
    MPoly sub = MPoly::var(vars, 0) + MPoly::var(vars, 2);
    auto conv = [&](const MPoly& p) {
        MPoly q = p.substitute(1, sub);
        if (q.depends_on(2)) throw ParseError("expression is not a function of " + xa + "-" + xb);
        return q.to_hpoly(0, 3);
    };
    return DirectedSeries(conv(rf.num), conv(rf.den), dir, order, {xa, xb});
}

inline DirectedSeries iota_expand_expr1(const std::string& expr, const std::string& x, int order) {
    std::vector<std::string> vars{x, "h"};
    auto rf = parse_rational_function(expr, vars);
    return DirectedSeries(rf.num.to_hpoly(0, 1), rf.den.to_hpoly(0, 1), Direction::Single, order, {x});
}

// (x2 + x0)^n expanded in nonnegative powers of x0: coefficient of x2^(n-j) x0^j
inline Rational taylor_shift_coeff(int n, int j) { return j < 0 ? Rational() : binomial(n, j); }

} // namespace qva
