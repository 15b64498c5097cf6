#pragma once

#include <cstdint>
#include <numeric>

#include "mdag/errors.hpp"

namespace mdag {

// Exact rational scalar for the smallest evaluation fixtures. int64-backed
// and unticked for overflow; keep the joints tiny.
struct Rat {
    long long n = 0, d = 1;

    Rat() = default;
    Rat(long long num) : n(num), d(1) {}
    Rat(long long num, long long den) : n(num), d(den) { normalize(); }

    void normalize() {
        if (d == 0) throw PositivityViolation("rational division by zero");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
    }

    friend Rat operator+(Rat a, Rat b) { return Rat(a.n * b.d + b.n * a.d, a.d * b.d); }
    friend Rat operator-(Rat a, Rat b) { return Rat(a.n * b.d - b.n * a.d, a.d * b.d); }
    friend Rat operator*(Rat a, Rat b) { return Rat(a.n * b.n, a.d * b.d); }
    friend Rat operator/(Rat a, Rat b) {
        if (b.n == 0) throw PositivityViolation("rational division by zero");
        return Rat(a.n * b.d, a.d * b.n);
    }
    Rat& operator+=(Rat o) { return *this = *this + o; }
    friend bool operator==(Rat a, Rat b) { return a.n == b.n && a.d == b.d; }
    friend bool operator!=(Rat a, Rat b) { return !(a == b); }

    bool is_zero() const { return n == 0; }
    double to_double() const { return static_cast<double>(n) / static_cast<double>(d); }
};

inline bool scalar_is_zero(double v) { return v == 0.0; }
inline bool scalar_is_zero(const Rat& v) { return v.is_zero(); }

}  // namespace mdag
