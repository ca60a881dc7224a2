#pragma once

#include <cstdint>
#include <string>

#include <mpfr.h>

#include "torcount/arith.hpp"

namespace torcount {

// Closed real interval with outward-rounded MPFR endpoints.
class Interval {
public:
    static constexpr mpfr_prec_t kPrec = 128;

    Interval();
    explicit Interval(long v);
    Interval(const Interval& o);
    Interval(Interval&& o) noexcept;
    Interval& operator=(Interval o) noexcept;
    ~Interval();

    static Interval from_rational(const Rational& q);
    static Interval from_bounds(double lo, double hi);
    static Interval hull(const Interval& a, const Interval& b);
    // p^(-e) for e >= 0
    static Interval pow_neg(std::uint64_t p, const Rational& e);
    static Interval pi();

    Interval exp() const;
    Interval log() const;  // requires lo > 0

    double lo() const;  // rounded down
    double hi() const;  // rounded up
    double mid() const;
    double width() const { return hi() - lo(); }
    bool contains(double v) const { return lo() <= v && v <= hi(); }
    bool positive() const { return mpfr_sgn(lo_) > 0; }
    bool is_finite() const { return mpfr_number_p(lo_) && mpfr_number_p(hi_); }
    std::string str(int digits = 20) const;

    friend Interval operator+(const Interval& a, const Interval& b);
    friend Interval operator-(const Interval& a, const Interval& b);
    friend Interval operator*(const Interval& a, const Interval& b);
    friend Interval operator/(const Interval& a, const Interval& b);  // b must not contain 0
    friend void swap(Interval& a, Interval& b) noexcept;

private:
    mpfr_t lo_, hi_;
};

}  // namespace torcount
