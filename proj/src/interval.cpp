#include "torcount/interval.hpp"

#include <gmp.h>

#include <algorithm>
#include <cstdio>
#include <utility>

#include "torcount/errors.hpp"

namespace torcount {

Interval::Interval() {
    mpfr_init2(lo_, kPrec);
    mpfr_init2(hi_, kPrec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
}

Interval::Interval(long v) : Interval() {
    mpfr_set_si(lo_, v, MPFR_RNDD);
    mpfr_set_si(hi_, v, MPFR_RNDU);
}

Interval::Interval(const Interval& o) : Interval() {
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& o) noexcept : Interval() { swap(*this, o); }

Interval& Interval::operator=(Interval o) noexcept {
    swap(*this, o);
    return *this;
}

Interval::~Interval() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
}

void swap(Interval& a, Interval& b) noexcept {
    mpfr_swap(a.lo_, b.lo_);
    mpfr_swap(a.hi_, b.hi_);
}

Interval Interval::from_rational(const Rational& q) {
    Interval r;
    mpq_t g;
    mpq_init(g);
    std::string s = numerator(q).str() + "/" + denominator(q).str();
    mpq_set_str(g, s.c_str(), 10);
    mpfr_set_q(r.lo_, g, MPFR_RNDD);
    mpfr_set_q(r.hi_, g, MPFR_RNDU);
    mpq_clear(g);
    return r;
}

Interval Interval::from_bounds(double lo, double hi) {
    Interval r;
    mpfr_set_d(r.lo_, lo, MPFR_RNDD);
    mpfr_set_d(r.hi_, hi, MPFR_RNDU);
    return r;
}

Interval Interval::hull(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_min(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
}

Interval Interval::pow_neg(std::uint64_t p, const Rational& e) {
    if (e < 0) throw InvariantError("pow_neg needs a nonnegative exponent");
    Interval r;
    if (e == 0) {
        mpfr_set_ui(r.lo_, 1, MPFR_RNDD);
        mpfr_set_ui(r.hi_, 1, MPFR_RNDU);
        return r;
    }
    unsigned long a = numerator(e).convert_to<unsigned long>();
    unsigned long b = denominator(e).convert_to<unsigned long>();
    mpfr_t t;
    mpfr_init2(t, kPrec);
    // p^(a/b) rounded up gives the lower end of p^(-a/b), and vice versa
    mpfr_ui_pow_ui(t, p, a, MPFR_RNDU);
    if (b > 1) mpfr_rootn_ui(t, t, b, MPFR_RNDU);
    mpfr_ui_div(r.lo_, 1, t, MPFR_RNDD);
    mpfr_ui_pow_ui(t, p, a, MPFR_RNDD);
    if (b > 1) mpfr_rootn_ui(t, t, b, MPFR_RNDD);
    mpfr_ui_div(r.hi_, 1, t, MPFR_RNDU);
    mpfr_clear(t);
    return r;
}

Interval Interval::pi() {
    Interval r;
    mpfr_const_pi(r.lo_, MPFR_RNDD);
    mpfr_const_pi(r.hi_, MPFR_RNDU);
    return r;
}

Interval Interval::exp() const {
    Interval r;
    mpfr_exp(r.lo_, lo_, MPFR_RNDD);
    mpfr_exp(r.hi_, hi_, MPFR_RNDU);
    return r;
}

Interval Interval::log() const {
    if (mpfr_sgn(lo_) <= 0) throw InvariantError("log of a non-positive interval");
    Interval r;
    mpfr_log(r.lo_, lo_, MPFR_RNDD);
    mpfr_log(r.hi_, hi_, MPFR_RNDU);
    return r;
}

double Interval::lo() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double Interval::hi() const { return mpfr_get_d(hi_, MPFR_RNDU); }

double Interval::mid() const {
    mpfr_t t;
    mpfr_init2(t, kPrec + 2);
    mpfr_add(t, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(t, t, 1, MPFR_RNDN);
    double d = mpfr_get_d(t, MPFR_RNDN);
    mpfr_clear(t);
    return d;
}

std::string Interval::str(int digits) const {
    char buf[256];
    mpfr_snprintf(buf, sizeof buf, "[%.*RDe, %.*RUe]", digits, lo_, digits, hi_);
    return buf;
}

Interval operator+(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
}

Interval operator-(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
}

Interval operator*(const Interval& a, const Interval& b) {
    Interval r;
    if (mpfr_sgn(a.lo_) >= 0 && mpfr_sgn(b.lo_) >= 0) {
        mpfr_mul(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
        mpfr_mul(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
        return r;
    }
    mpfr_t t;
    mpfr_init2(t, Interval::kPrec);
    const __mpfr_struct* xs[2] = {a.lo_, a.hi_};
    const __mpfr_struct* ys[2] = {b.lo_, b.hi_};
    bool first = true;
    for (auto x : xs)
        for (auto y : ys) {
            mpfr_mul(t, x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
            mpfr_mul(t, x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
            first = false;
        }
    mpfr_clear(t);
    return r;
}

Interval operator/(const Interval& a, const Interval& b) {
    if (mpfr_sgn(b.lo_) <= 0 && mpfr_sgn(b.hi_) >= 0) throw InvariantError("interval division by an interval containing 0");
    Interval inv;
    mpfr_ui_div(inv.lo_, 1, b.hi_, MPFR_RNDD);
    mpfr_ui_div(inv.hi_, 1, b.lo_, MPFR_RNDU);
    return a * inv;
}

}  // namespace torcount
