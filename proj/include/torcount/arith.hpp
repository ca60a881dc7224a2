#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace torcount {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using i128 = __int128;
using u128 = unsigned __int128;

// Accepts "p/q", plain integers and decimal/scientific literals ("1e4", "2.5").
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string u128_to_string(u128 v);
std::string i128_to_string(i128 v);

BigInt floor_rat(const Rational& q);
BigInt ceil_rat(const Rational& q);
double to_double(const Rational& q);
BigInt lcm_big(const BigInt& a, const BigInt& b);

BigInt ipow(const BigInt& base, unsigned exp);
// largest y >= 0 with y^k <= x
BigInt iroot_floor(const BigInt& x, unsigned k);
// floor(B^(p/q)) for B >= 0 and p/q >= 0
BigInt floor_power(const Rational& B, const Rational& exponent);

std::uint64_t iroot_u128(u128 x, unsigned k);

constexpr u128 kSatCap = (static_cast<u128>(1) << 126);

inline u128 sat_mul(u128 a, u128 b) {
    if (a == 0 || b == 0) return 0;
    if (a >= kSatCap || b >= kSatCap) return kSatCap;
    if (a > kSatCap / b) return kSatCap;
    u128 r = a * b;
    return r >= kSatCap ? kSatCap : r;
}

inline u128 sat_pow(u128 base, unsigned exp) {
    u128 r = 1;
    while (exp) {
        if (exp & 1u) r = sat_mul(r, base);
        exp >>= 1;
        if (exp) base = sat_mul(base, base);
    }
    return r;
}

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) {
        std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline u128 gcd_u128(u128 a, u128 b) {
    while (b) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// u128 <-> BigInt; to_u128 throws if the value does not fit
u128 to_u128(const BigInt& v);
BigInt from_u128(u128 v);

}  // namespace torcount
