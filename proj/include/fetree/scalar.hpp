// scalar.hpp — exact-rational / double scalar modes shared by all numeric code.
//
// A computation runs entirely in one mode: Rational (arbitrary precision,
// always in lowest terms with positive denominator) or double. Exact-mode
// comparisons are literal equality; float-mode comparisons go through
// approx_equal with a relative tolerance.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace fetree {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class S>
concept ScalarMode = std::same_as<S, Rational> || std::same_as<S, double>;

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Rational make_rational(BigInt num, BigInt den) {
    if (den == 0) throw parse_error("rational with zero denominator");
    Rational r(std::move(num));
    r /= den;
    return r;
}

// Accepts "p", "-p", "p/q". Throws parse_error on anything else.
inline Rational parse_rational(std::string_view text) {
    const auto bad = [&] { return parse_error("not a rational: '" + std::string(text) + "'"); };
    if (text.empty()) throw bad();
    const auto slash = text.find('/');
    try {
        if (slash == std::string_view::npos) return Rational(BigInt(std::string(text)));
        const std::string num(text.substr(0, slash));
        const std::string den(text.substr(slash + 1));
        if (num.empty() || den.empty()) throw bad();
        return make_rational(BigInt(num), BigInt(den));
    } catch (const std::runtime_error&) {
        throw bad();
    }
}

inline std::string format_rational(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }
inline double to_double(double x) { return x; }

template <ScalarMode S>
S from_rational(const Rational& r) {
    if constexpr (std::is_same_v<S, Rational>) return r;
    else return to_double(r);
}

// Mode-appropriate equality: exact in Rational, relative 1e-10 in double.
inline bool approx_equal(const Rational& a, const Rational& b) { return a == b; }
inline bool approx_equal(double a, double b, double tol = 1e-10) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

template <ScalarMode S>
std::string format_scalar(const S& v) {
    if constexpr (std::is_same_v<S, Rational>) {
        return format_rational(v);
    } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
}

}  // namespace fetree
