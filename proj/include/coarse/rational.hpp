#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "coarse/errors.hpp"

namespace coarse {

// All distances, separations and mesh bounds are exact rationals. The
// inequalities being verified are strict, so no floating point anywhere.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline BigInt rational_floor(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt r = n / d;
    if (n < 0 && r * d != n) --r;
    return r;
}

inline BigInt rational_ceil(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt r = n / d;
    if (n > 0 && r * d != n) ++r;
    return r;
}

inline long long rational_ceil_ll(const Rational& q) {
    return static_cast<long long>(rational_ceil(q));
}

inline bool rational_is_integer(const Rational& q) { return denominator(q) == 1; }

// Canonical text form: "p" when integral, "p/q" otherwise.
inline std::string rational_to_string(const Rational& q) {
    if (rational_is_integer(q)) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational rational_from_string(const std::string& s) {
    if (s.empty()) throw ParseError("empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw ParseError("rational with zero denominator: " + s);
        return Rational(num, den);
    } catch (const std::runtime_error& e) {
        throw ParseError("bad rational literal '" + s + "': " + e.what());
    }
}

// Strict comparison of an int64 distance against a rational threshold,
// with the cross-multiplication precomputed. Falls back to exact
// arithmetic when the threshold does not fit in 64 bits.
class Threshold {
public:
    explicit Threshold(const Rational& r) : exact_(r) {
        BigInt n = numerator(r), d = denominator(r);
        if (n >= INT64_MIN && n <= INT64_MAX && d <= INT64_MAX) {
            num_ = static_cast<std::int64_t>(n);
            den_ = static_cast<std::int64_t>(d);
            fast_ = true;
        }
    }

    bool gt(std::int64_t v) const {  // v > threshold
        if (fast_) return static_cast<__int128>(v) * den_ > num_;
        return Rational(v) > exact_;
    }
    bool lt(std::int64_t v) const {  // v < threshold
        if (fast_) return static_cast<__int128>(v) * den_ < num_;
        return Rational(v) < exact_;
    }
    bool le(std::int64_t v) const { return !gt(v); }
    bool ge(std::int64_t v) const { return !lt(v); }

    const Rational& value() const { return exact_; }

private:
    Rational exact_;
    std::int64_t num_ = 0, den_ = 1;
    bool fast_ = false;
};

}  // namespace coarse
