#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nn2c {

// Exact rational on 128-bit integers. Wide enough that rate ratios and
// their cumulative products/sums never drift or overflow at the network
// sizes this tool handles.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t n) : num_(n), den_(1) {}
    Rational(int64_t n, int64_t d) : num_(n), den_(d) {
        if (d == 0) throw std::invalid_argument("rational: zero denominator");
        normalize();
    }

    static Rational from_wide(__int128 n, __int128 d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        if (d == 0) throw std::invalid_argument("rational: zero denominator");
        r.normalize();
        return r;
    }

    Rational operator+(const Rational& o) const {
        return from_wide(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    Rational operator-(const Rational& o) const {
        return from_wide(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    Rational operator*(const Rational& o) const {
        return from_wide(num_ * o.num_, den_ * o.den_);
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw std::invalid_argument("rational: divide by zero");
        return from_wide(num_ * o.den_, den_ * o.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) {
        return !(a == b);
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }

    // floor(this * k) for integer k >= 0.
    int64_t floor_mul(int64_t k) const {
        __int128 p = num_ * k;
        __int128 q = p / den_;
        if (p % den_ != 0 && p < 0) --q;
        return int64_t(q);
    }

    double to_double() const { return double(num_) / double(den_); }

    int64_t num() const { return checked_narrow(num_); }
    int64_t den() const { return checked_narrow(den_); }

    std::string to_string() const {
        return wide_to_string(num_) + "/" + wide_to_string(den_);
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        __int128 g = gcd128(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static int64_t checked_narrow(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("rational: value exceeds 64 bits");
        return int64_t(v);
    }

    static std::string wide_to_string(__int128 v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? (unsigned __int128)(-v) : (unsigned __int128)v;
        std::string s;
        while (u) {
            s.insert(s.begin(), char('0' + int(u % 10)));
            u /= 10;
        }
        return neg ? "-" + s : s;
    }

    __int128 num_;
    __int128 den_;
};

}  // namespace nn2c
