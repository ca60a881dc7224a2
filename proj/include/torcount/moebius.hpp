#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "torcount/fan.hpp"
#include "torcount/interval.hpp"
#include "torcount/matrix.hpp"

namespace torcount {

using Exponents = std::vector<int>;

int chi_local(const Exponents& e, const ConeIndexData& cones);
// poset inversion over f in [e-1, e]
int mu_local(const Exponents& e, const ConeIndexData& cones);

// mu on {0,1}^s, indexed by bitmask (bit i <-> group i)
struct LocalMuTable {
    int s = 0;
    std::vector<int> chi;
    std::vector<int> mu;
    std::vector<int> n;  // group sizes
    long long abs_sum = 0;  // sum of |mu(e)| over e != 0
    Rational f_tilde, f;

    int mu_mask(std::uint32_t m) const { return mu[m]; }
};

LocalMuTable build_mu_table(const ToricVariety& tv);

// Multiplicative mu of an s-tuple of positive integers.
int mu_global(const std::vector<std::uint64_t>& d, const LocalMuTable& table);

Rational f_beta(const RatVec& beta, const LocalMuTable& table);

struct EulerProduct {
    Interval truncated;  // product over p <= P
    Interval value;      // truncated times the tail enclosure (equal to truncated if the tail is unbounded)
    bool tail_finite = false;
    double tail_sum = 0;  // rigorous upper bound on sum_{p > P} C p^(-f)
    std::uint64_t prime_bound = 0;
    Rational f;
    Rational C;
    std::optional<std::uint64_t> first_nonpositive;  // first p with S(p) <= 0, if any
};

struct LocalTerm {
    Rational exponent;
    Rational coeff;
};

// Upper bound on sum_{p > P} C p^(-f), f > 1.
Interval prime_tail_sum(const Rational& C, const Rational& f, std::uint64_t P);

// prod_p (1 + sum coeff p^(-exponent))
EulerProduct euler_product(const std::vector<LocalTerm>& terms, std::uint64_t P, unsigned threads);

// prod_p S(p) for an arbitrary local factor with |S(p) - 1| <= C p^(-f)
EulerProduct euler_product_fn(const std::function<Interval(std::uint64_t)>& local, const Rational& f, const Rational& C,
                              std::uint64_t P, unsigned threads);

// sum_d mu(d) prod_i d_i^(-beta_i) as an Euler product
EulerProduct mu_sum_euler(const RatVec& beta, const LocalMuTable& table, std::uint64_t P, unsigned threads);

nlohmann::json to_json(const LocalMuTable& t);
nlohmann::json to_json(const EulerProduct& e);

}  // namespace torcount
