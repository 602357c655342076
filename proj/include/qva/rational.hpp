#pragma once

#include <climits>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace qva {

// Exact rational. Small values live in two int64 words; anything that
// overflows is promoted to an immutable GMP rational shared between copies.
class Rational {
public:
    Rational() = default;
    Rational(long long n) : num_(n), den_(1) {
        if (n == INT64_MIN) set_big(mpq_class(mpz_class(std::to_string(n))));
    }
    Rational(int n) : Rational(static_cast<long long>(n)) {}
    Rational(long long n, long long d) { assign128(n, d); }

    explicit Rational(const mpq_class& q) { set_from_mpq(q); }

    static Rational parse(std::string_view s) {
        std::string t;
        for (char ch : s)
            if (ch != ' ' && ch != '\t') t.push_back(ch);
        if (t.empty()) throw std::invalid_argument("empty rational");
        auto slash = t.find('/');
        auto valid_int = [](const std::string& z) {
            size_t i = (!z.empty() && (z[0] == '-' || z[0] == '+')) ? 1 : 0;
            if (i >= z.size()) return false;
            for (; i < z.size(); ++i)
                if (z[i] < '0' || z[i] > '9') return false;
            return true;
        };
        std::string ns = t.substr(0, slash);
        std::string ds = slash == std::string::npos ? "1" : t.substr(slash + 1);
        if (!valid_int(ns) || !valid_int(ds)) throw std::invalid_argument("malformed rational '" + t + "'");
        if (ns[0] == '+') ns.erase(0, 1);
        if (ds[0] == '+') ds.erase(0, 1);
        mpz_class n(ns), d(ds);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + t + "'");
        mpq_class q(n, d);
        q.canonicalize();
        return Rational(q);
    }

    bool is_zero() const { return !big_ && num_ == 0; }
    bool is_one() const { return !big_ && num_ == 1 && den_ == 1; }
    bool is_integer() const { return big_ ? big_->get_den() == 1 : den_ == 1; }
    int sign() const { return big_ ? sgn(*big_) : (num_ > 0) - (num_ < 0); }
    bool is_small() const { return !big_; }

    mpq_class to_mpq() const {
        if (big_) return *big_;
        mpq_class q(mpz_class(std::to_string(num_)), mpz_class(std::to_string(den_)));
        return q;
    }

    std::string str() const {
        if (big_) return big_->get_str();
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    long long num_small() const { return num_; }
    long long den_small() const { return den_; }

    Rational operator-() const {
        if (big_) return Rational(mpq_class(-*big_));
        return Rational(-num_, den_, raw_tag{});
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (!a.big_ && !b.big_) {
            if (a.den_ == b.den_) {
                Rational r;
                r.assign128(static_cast<__int128>(a.num_) + b.num_, a.den_);
                return r;
            }
            __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
            __int128 d = static_cast<__int128>(a.den_) * b.den_;
            Rational r;
            r.assign128(n, d);
            return r;
        }
        return Rational(mpq_class(a.to_mpq() + b.to_mpq()));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

    friend Rational operator*(const Rational& a, const Rational& b) {
        if (a.is_zero() || b.is_zero()) return Rational();
        if (!a.big_ && !b.big_) {
            if (a.den_ == 1 && b.den_ == 1) {
                Rational r;
                r.assign128(static_cast<__int128>(a.num_) * b.num_, 1);
                return r;
            }
            long long g1 = gcd64(a.num_, b.den_), g2 = gcd64(b.num_, a.den_);
            __int128 n = static_cast<__int128>(a.num_ / g1) * (b.num_ / g2);
            __int128 d = static_cast<__int128>(a.den_ / g2) * (b.den_ / g1);
            Rational r;
            r.assign_reduced128(n, d);
            return r;
        }
        return Rational(mpq_class(a.to_mpq() * b.to_mpq()));
    }

    Rational inverse() const {
        if (is_zero()) throw std::domain_error("division by zero");
        if (big_) return Rational(mpq_class(1 / *big_));
        return num_ < 0 ? Rational(-den_, -num_, raw_tag{}) : Rational(den_, num_, raw_tag{});
    }
    friend Rational operator/(const Rational& a, const Rational& b) { return a * b.inverse(); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
        if (a.big_ && b.big_) return *a.big_ == *b.big_;
        return false; // canonical: a value is big only when it does not fit
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_) {
            __int128 l = static_cast<__int128>(a.num_) * b.den_, r = static_cast<__int128>(b.num_) * a.den_;
            return l <=> r;
        }
        int c = cmp(a.to_mpq(), b.to_mpq());
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    size_t hash() const {
        if (big_) return std::hash<std::string>{}(big_->get_str());
        return std::hash<long long>{}(num_) * 1000003u ^ std::hash<long long>{}(den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    struct raw_tag {};
    Rational(long long n, long long d, raw_tag) : num_(n), den_(d) {
        if (n == INT64_MIN || d == INT64_MIN) assign128(n, d);
    }

    static long long gcd64(long long a, long long b) {
        unsigned long long x = a < 0 ? 0ull - static_cast<unsigned long long>(a) : a;
        unsigned long long y = b < 0 ? 0ull - static_cast<unsigned long long>(b) : b;
        while (y) {
            auto t = x % y;
            x = y;
            y = t;
        }
        return static_cast<long long>(x);
    }
    static unsigned __int128 gcd128(unsigned __int128 x, unsigned __int128 y) {
        while (y) {
            auto t = x % y;
            x = y;
            y = t;
        }
        return x;
    }

    static constexpr __int128 kMax = INT64_MAX;

    void assign128(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("zero denominator");
        if (d < 0) n = -n, d = -d;
        unsigned __int128 un = n < 0 ? static_cast<unsigned __int128>(-n) : static_cast<unsigned __int128>(n);
        unsigned __int128 g = gcd128(un, static_cast<unsigned __int128>(d));
        if (g > 1) n /= static_cast<__int128>(g), d /= static_cast<__int128>(g);
        assign_reduced128(n, d);
    }
    void assign_reduced128(__int128 n, __int128 d) {
        if (d < 0) n = -n, d = -d;
        if (n == 0) {
            num_ = 0, den_ = 1, big_.reset();
            return;
        }
        if (n <= kMax && n >= -kMax && d <= kMax) {
            num_ = static_cast<long long>(n), den_ = static_cast<long long>(d), big_.reset();
            return;
        }
        mpq_class q(to_mpz(n), to_mpz(d));
        q.canonicalize();
        set_big(std::move(q));
    }
    static mpz_class to_mpz(__int128 v) {
        bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
        std::string s;
        do {
            s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        } while (u);
        if (neg) s.push_back('-');
        return mpz_class(std::string(s.rbegin(), s.rend()));
    }

    void set_from_mpq(const mpq_class& q) {
        if (q.get_num().fits_slong_p() && q.get_den().fits_slong_p() && q.get_num() != LONG_MIN) {
            num_ = q.get_num().get_si(), den_ = q.get_den().get_si(), big_.reset();
            if (num_ == 0) den_ = 1;
            return;
        }
        set_big(q);
    }
    void set_big(mpq_class q) {
        num_ = 0, den_ = 1;
        big_ = std::make_shared<const mpq_class>(std::move(q));
    }

    long long num_ = 0;
    long long den_ = 1;
    std::shared_ptr<const mpq_class> big_;
};

inline Rational binomial(long long n, long long k) {
    // generalized: valid for negative n, zero for k < 0
    if (k < 0) return Rational();
    Rational r(1);
    for (long long i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
    return r;
}

inline Rational rpow(const Rational& a, long long e) {
    if (e < 0) return rpow(a.inverse(), -e);
    Rational r(1), b = a;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

inline Rational sign_pow(long long e) { return (e % 2 == 0) ? Rational(1) : Rational(-1); }

inline Rational factorial(long long n) {
    Rational r(1);
    for (long long i = 2; i <= n; ++i) r *= Rational(i);
    return r;
}

} // namespace qva

template <>
struct std::hash<qva::Rational> {
    size_t operator()(const qva::Rational& r) const { return r.hash(); }
};
