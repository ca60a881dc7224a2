#include "torcount/arith.hpp"

#include <cmath>
#include <stdexcept>

#include "torcount/errors.hpp"

namespace torcount {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

BigInt parse_int(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) throw InputError("malformed integer '" + std::string(s) + "'");
    BigInt v{std::string(s)};
    return neg ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) throw InputError("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        BigInt num = parse_int(text.substr(0, slash));
        BigInt den = parse_int(text.substr(slash + 1));
        if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
        return Rational(num, den);
    }
    std::string_view mant = text;
    long long exp10 = 0;
    auto epos = text.find_first_of("eE");
    if (epos != std::string_view::npos) {
        mant = text.substr(0, epos);
        BigInt e = parse_int(text.substr(epos + 1));
        if (abs(e) > 4000) throw InputError("exponent out of range in '" + std::string(text) + "'");
        exp10 = e.convert_to<long long>();
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        neg = mant[0] == '-';
        mant.remove_prefix(1);
    }
    std::string digits;
    auto dot = mant.find('.');
    if (dot != std::string_view::npos) {
        std::string_view ip = mant.substr(0, dot), fp = mant.substr(dot + 1);
        if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) || (ip.empty() && fp.empty()))
            throw InputError("malformed number '" + std::string(text) + "'");
        digits = std::string(ip) + std::string(fp);
        exp10 -= static_cast<long long>(fp.size());
    } else {
        if (!all_digits(mant)) throw InputError("malformed number '" + std::string(text) + "'");
        digits = std::string(mant);
    }
    Rational v{BigInt(digits)};
    BigInt p10 = ipow(BigInt(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    if (exp10 >= 0)
        v *= p10;
    else
        v /= p10;
    return neg ? Rational(-v) : v;
}

std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return std::string(s.rbegin(), s.rend());
}

std::string i128_to_string(i128 v) {
    if (v < 0) return "-" + u128_to_string(static_cast<u128>(-(v + 1)) + 1);
    return u128_to_string(static_cast<u128>(v));
}

BigInt floor_rat(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt r = n / d;
    if (n % d != 0 && n < 0) r -= 1;
    return r;
}

BigInt ceil_rat(const Rational& q) { return -floor_rat(-q); }

double to_double(const Rational& q) { return q.convert_to<double>(); }

BigInt lcm_big(const BigInt& a, const BigInt& b) {
    if (a == 0 || b == 0) return 0;
    return abs(a / gcd(a, b) * b);
}

BigInt ipow(const BigInt& base, unsigned exp) { return boost::multiprecision::pow(base, exp); }

BigInt iroot_floor(const BigInt& x, unsigned k) {
    if (x < 0) throw InvariantError("iroot_floor of a negative number");
    if (k == 0) throw InvariantError("iroot_floor with k = 0");
    if (k == 1 || x < 2) return x;
    // Newton iteration from an overestimate
    std::size_t bits = msb(x) + 1;
    BigInt y = BigInt(1) << ((bits + k - 1) / k);
    for (;;) {
        BigInt yk1 = ipow(y, k - 1);
        BigInt next = ((k - 1) * y + x / yk1) / k;
        if (next >= y) break;
        y = next;
    }
    while (ipow(y, k) > x) --y;
    while (ipow(y + 1, k) <= x) ++y;
    return y;
}

BigInt floor_power(const Rational& B, const Rational& exponent) {
    if (B < 0 || exponent < 0) throw InvariantError("floor_power needs nonnegative arguments");
    BigInt p = numerator(exponent), q = denominator(exponent);
    if (p > 100000 || q > 100000) throw BudgetError("exponent " + to_string(exponent) + " too large for exact powering");
    unsigned pu = p.convert_to<unsigned>(), qu = q.convert_to<unsigned>();
    BigInt num = ipow(numerator(B), pu), den = ipow(denominator(B), pu);
    return iroot_floor(num / den, qu);
}

std::uint64_t iroot_u128(u128 x, unsigned k) {
    if (k == 1) {
        if (x > static_cast<u128>(UINT64_MAX)) return UINT64_MAX;
        return static_cast<std::uint64_t>(x);
    }
    if (x < 2) return static_cast<std::uint64_t>(x);
    double guess = std::pow(static_cast<long double>(x), 1.0L / k);
    u128 y = guess >= 1.8e19 ? static_cast<u128>(UINT64_MAX) : static_cast<u128>(guess);
    if (y == 0) y = 1;
    while (y > 1 && sat_pow(y, k) > x) --y;
    while (sat_pow(y + 1, k) <= x) ++y;
    return static_cast<std::uint64_t>(y);
}

u128 to_u128(const BigInt& v) {
    if (v < 0 || msb(v) >= 128) throw BudgetError("value " + v.str() + " exceeds the 128-bit range");
    if (v == 0) return 0;
    u128 r = 0;
    BigInt t = v;
    std::uint64_t lo = static_cast<std::uint64_t>(t & BigInt(UINT64_MAX));
    std::uint64_t hi = static_cast<std::uint64_t>(t >> 64);
    r = (static_cast<u128>(hi) << 64) | lo;
    return r;
}

BigInt from_u128(u128 v) {
    BigInt r = static_cast<std::uint64_t>(v >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(v);
    return r;
}

}  // namespace torcount
