#include "torcount/moebius.hpp"

#include <algorithm>
#include <map>

#include "torcount/errors.hpp"
#include "torcount/parallel.hpp"
#include "torcount/primes.hpp"

namespace torcount {

int chi_local(const Exponents& e, const ConeIndexData& cones) {
    for (int rep : cones.reps) {
        bool zero = true;
        for (int i : cones.cones[rep].I)
            if (e[i] != 0) {
                zero = false;
                break;
            }
        if (zero) return 1;
    }
    return 0;
}

int mu_local(const Exponents& e, const ConeIndexData& cones) {
    const std::size_t s = e.size();
    std::vector<int> movable;
    for (std::size_t i = 0; i < s; ++i)
        if (e[i] > 0) movable.push_back(static_cast<int>(i));
    int total = 0;
    Exponents f = e;
    for (std::uint32_t m = 0; m < (1u << movable.size()); ++m) {
        int parity = 0;
        for (std::size_t k = 0; k < movable.size(); ++k) {
            bool down = m >> k & 1u;
            f[movable[k]] = e[movable[k]] - (down ? 1 : 0);
            parity += down;
        }
        int c = chi_local(f, cones);
        total += (parity & 1) ? -c : c;
    }
    return total;
}

LocalMuTable build_mu_table(const ToricVariety& tv) {
    LocalMuTable t;
    t.s = tv.grading.s;
    t.n = tv.grading.n;
    if (t.s > 24) throw BudgetError("too many degree classes for a local mu table");
    const std::uint32_t full = 1u << t.s;
    t.chi.resize(full);
    t.mu.resize(full);
    Exponents e(t.s);
    for (std::uint32_t m = 0; m < full; ++m) {
        for (int i = 0; i < t.s; ++i) e[i] = m >> i & 1u;
        t.chi[m] = chi_local(e, tv.cones);
        t.mu[m] = mu_local(e, tv.cones);
        if (m) t.abs_sum += std::abs(t.mu[m]);
    }
    TORCOUNT_ASSERT(t.mu[0] == 1, "mu(0) = 1");
    RatVec ones(t.s, 1), ns;
    for (int v : t.n) ns.emplace_back(v);
    t.f_tilde = f_beta(ones, t);
    t.f = f_beta(ns, t);
    TORCOUNT_ASSERT(t.f >= 2, "f >= 2 for a proper toric variety");
    return t;
}

int mu_global(const std::vector<std::uint64_t>& d, const LocalMuTable& table) {
    if (static_cast<int>(d.size()) != table.s) throw InputError("modulus tuple has the wrong length");
    std::map<std::uint64_t, std::uint32_t> pattern;
    for (int i = 0; i < table.s; ++i) {
        if (d[i] == 0) throw InputError("moduli must be positive");
        for (auto [p, e] : factor_u64(d[i])) {
            if (e >= 2) return 0;
            pattern[p] |= 1u << i;
        }
    }
    int mu = 1;
    for (auto& [p, m] : pattern) {
        mu *= table.mu[m];
        if (!mu) return 0;
    }
    return mu;
}

Rational f_beta(const RatVec& beta, const LocalMuTable& table) {
    if (static_cast<int>(beta.size()) != table.s) throw InputError("beta has the wrong length");
    bool any = false;
    Rational best = 0;
    for (std::uint32_t m = 1; m < (1u << table.s); ++m) {
        if (!table.mu[m]) continue;
        Rational v = 0;
        for (int i = 0; i < table.s; ++i)
            if (m >> i & 1u) v += beta[i];
        if (!any || v < best) best = v;
        any = true;
    }
    if (!any) throw InvariantError("mu has empty support away from 0");
    return best;
}

Interval prime_tail_sum(const Rational& C, const Rational& f, std::uint64_t P) {
    if (f <= 1) throw InvariantError("tail sum needs f > 1");
    Interval fm1 = Interval::from_rational(f - 1);
    Interval Ci = Interval::from_rational(C);
    if (P < 2) {
        // sum_{n >= 2} n^(-f) <= 1/(f-1)
        return Ci / fm1;
    }
    // sum_{n > P} n^(-f) <= P^(1-f)/(f-1)
    Interval base = Ci * Interval::pow_neg(P, f - 1) / fm1;
    // pi(x) < 1.25506 x / log x (Rosser-Schoenfeld) and partial summation
    Interval rs = base * Interval::from_rational(Rational(125506, 100000)) * Interval::from_rational(f) /
                  Interval(static_cast<long>(P)).log();
    return rs.hi() < base.hi() ? rs : base;
}

namespace {

constexpr std::size_t kBlock = 2048;

EulerProduct finish(std::vector<Interval>& blocks, const std::vector<std::optional<std::uint64_t>>& bad,
                    const Rational& f, const Rational& C, std::uint64_t P) {
    EulerProduct out;
    out.prime_bound = P;
    out.f = f;
    out.C = C;
    out.truncated = Interval(1);
    for (auto& b : blocks) out.truncated = out.truncated * b;
    for (const auto& b : bad)
        if (b) {
            out.first_nonpositive = b;
            break;
        }
    Interval T = prime_tail_sum(C, f, P);
    out.tail_sum = T.hi();
    // every tail factor within 1/2 of 1 lets log(1+x) be squeezed between -2|x| and |x|
    Interval first = Interval::from_rational(C) * Interval::pow_neg(P + 1, f);
    out.tail_finite = first.hi() <= 0.5;
    if (out.tail_finite) {
        Interval lo = (Interval(0) - Interval(2) * T).exp();
        Interval hi = T.exp();
        Interval tail = Interval::hull(Interval::from_bounds(lo.lo(), lo.lo()), Interval::from_bounds(hi.hi(), hi.hi()));
        out.value = out.truncated * tail;
    } else {
        out.value = out.truncated;
    }
    return out;
}

}  // namespace

EulerProduct euler_product_fn(const std::function<Interval(std::uint64_t)>& local, const Rational& f, const Rational& C,
                              std::uint64_t P, unsigned threads) {
    if (f <= 1) throw HypothesisError("Euler product exponent f = " + to_string(f) + " <= 1; refusing (divergence risk)");
    auto primes = primes_up_to(P);
    std::size_t nb = (primes.size() + kBlock - 1) / kBlock;
    std::vector<Interval> blocks(nb);
    std::vector<std::optional<std::uint64_t>> bad(nb);
    parallel_for(nb, resolve_threads(threads), [&](std::size_t b) {
        Interval acc(1);
        for (std::size_t k = b * kBlock; k < std::min(primes.size(), (b + 1) * kBlock); ++k) {
            Interval s = local(primes[k]);
            if (!s.positive() && !bad[b]) bad[b] = primes[k];
            acc = acc * s;
        }
        blocks[b] = std::move(acc);
    });
    return finish(blocks, bad, f, C, P);
}

EulerProduct euler_product(const std::vector<LocalTerm>& terms, std::uint64_t P, unsigned threads) {
    std::map<Rational, Rational> merged;
    for (const auto& t : terms)
        if (t.coeff != 0) merged[t.exponent] += t.coeff;
    std::vector<std::pair<Rational, Interval>> ts;
    Rational C = 0, f = 0;
    bool first = true;
    for (auto& [e, c] : merged) {
        if (c == 0) continue;
        ts.emplace_back(e, Interval::from_rational(c));
        C += c < 0 ? Rational(-c) : c;
        if (first || e < f) f = e;
        first = false;
    }
    if (ts.empty()) {
        // empty local series: the product is exactly 1
        EulerProduct out;
        out.truncated = Interval(1);
        out.value = Interval(1);
        out.tail_finite = true;
        out.prime_bound = P;
        out.f = 0;
        out.C = 0;
        return out;
    }
    return euler_product_fn(
        [&](std::uint64_t p) {
            Interval s(1);
            for (const auto& [e, c] : ts) s = s + c * Interval::pow_neg(p, e);
            return s;
        },
        f, C, P, threads);
}

EulerProduct mu_sum_euler(const RatVec& beta, const LocalMuTable& table, std::uint64_t P, unsigned threads) {
    Rational fb = f_beta(beta, table);
    if (fb <= 1) throw HypothesisError("f_beta = " + to_string(fb) + " <= 1; the mu-sum may diverge");
    std::vector<LocalTerm> terms;
    for (std::uint32_t m = 1; m < (1u << table.s); ++m) {
        if (!table.mu[m]) continue;
        Rational v = 0;
        for (int i = 0; i < table.s; ++i)
            if (m >> i & 1u) v += beta[i];
        terms.push_back({v, table.mu[m]});
    }
    std::map<Rational, Rational> merged;
    for (const auto& t : terms) merged[t.exponent] += t.coeff;
    std::vector<std::pair<Rational, Interval>> ts;
    for (auto& [e, c] : merged)
        if (c != 0) ts.emplace_back(e, Interval::from_rational(c));
    return euler_product_fn(
        [&](std::uint64_t p) {
            Interval acc(1);
            for (const auto& [e, c] : ts) acc = acc + c * Interval::pow_neg(p, e);
            return acc;
        },
        fb, Rational(table.abs_sum), P, threads);
}

nlohmann::json to_json(const LocalMuTable& t) {
    nlohmann::json j;
    j["s"] = t.s;
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint32_t m = 0; m < (1u << t.s); ++m) {
        nlohmann::json e = nlohmann::json::array();
        for (int i = 0; i < t.s; ++i) e.push_back(static_cast<int>(m >> i & 1u));
        rows.push_back({{"e", e}, {"chi", t.chi[m]}, {"mu", t.mu[m]}});
    }
    j["table"] = rows;
    j["f_tilde"] = to_string(t.f_tilde);
    j["f"] = to_string(t.f);
    return j;
}

nlohmann::json to_json(const EulerProduct& e) {
    nlohmann::json j;
    j["prime_bound"] = e.prime_bound;
    j["truncated"] = {e.truncated.lo(), e.truncated.hi()};
    j["enclosure"] = {e.value.lo(), e.value.hi()};
    j["tail_bounded"] = e.tail_finite;
    j["tail_sum_bound"] = e.tail_sum;
    j["f"] = to_string(e.f);
    j["C"] = to_string(e.C);
    if (e.first_nonpositive) j["first_nonpositive_factor"] = *e.first_nonpositive;
    return j;
}

}  // namespace torcount
