#include "torcount/mfull.hpp"

#include <algorithm>
#include <functional>

#include "torcount/arith.hpp"
#include "torcount/errors.hpp"
#include "torcount/primes.hpp"

namespace torcount {

std::optional<MFullDecomposition> m_full_decompose(std::int64_t x, unsigned m) {
    if (x == 0) throw InputError("m_full_decompose of 0");
    if (m == 0) throw InputError("multiplicity must be >= 1");
    std::uint64_t ax = x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1 : static_cast<std::uint64_t>(x);
    MFullDecomposition dec;
    dec.v.assign(m - 1, 1);
    for (auto [p, a] : factor_u64(ax)) {
        if (a < m) return std::nullopt;
        unsigned r = a % m;
        unsigned eu = r ? (a - m - r) / m : a / m;
        for (unsigned k = 0; k < eu; ++k) dec.u *= p;
        if (r) dec.v[r - 1] *= p;
    }
    TORCOUNT_ASSERT(m_full_recompose(dec, m) == ax, "m-full decomposition recomposes");
    return dec;
}

std::uint64_t m_full_recompose(const MFullDecomposition& dec, unsigned m) {
    u128 x = sat_pow(dec.u, m);
    for (std::size_t r = 0; r < dec.v.size(); ++r) x = sat_mul(x, sat_pow(dec.v[r], m + 1 + static_cast<unsigned>(r)));
    if (x > UINT64_MAX) throw InvariantError("recomposed m-full number overflows");
    return static_cast<std::uint64_t>(x);
}

bool is_m_full(std::uint64_t x, unsigned m) {
    if (x == 0) return false;
    for (auto [p, a] : factor_u64(x))
        if (a < m) return false;
    return true;
}

namespace {

struct Generator {
    std::uint64_t bound;
    unsigned m;
    std::uint64_t d;
    std::vector<std::uint32_t> dprimes;
    std::vector<std::uint32_t> spf;  // smallest prime factor up to the w-limit
    std::vector<std::uint64_t>& out;

    bool squarefree_coprime(std::uint64_t w, std::uint64_t avoid) const {
        if (gcd_u64(w, avoid) != 1) return false;
        while (w > 1) {
            std::uint32_t p = spf[w];
            w /= p;
            if (w % p == 0) return false;
        }
        return true;
    }

    // x = (s u~)^m prod (t_r w_r)^(m+r); w_r squarefree, coprime to d and to each other
    void over_w(unsigned r, std::uint64_t s, const std::vector<std::uint64_t>& t, u128 vpart, std::uint64_t used) {
        if (r == m) {
            u128 base = sat_mul(sat_pow(s, m), vpart);
            if (base > bound) return;
            std::uint64_t umax = iroot_u128(static_cast<u128>(bound) / vpart, m) / s;
            for (std::uint64_t ut = 1; ut <= umax; ++ut) {
                u128 x = sat_mul(sat_pow(static_cast<u128>(s) * ut, m), vpart);
                if (x > bound) break;
                out.push_back(static_cast<std::uint64_t>(x));
            }
            return;
        }
        unsigned ex = m + r;
        u128 tpow = sat_pow(t[r - 1], ex);
        u128 minrest = sat_mul(sat_mul(vpart, tpow), sat_pow(s, m));
        if (minrest > bound) return;
        for (std::uint64_t w = 1;; ++w) {
            u128 vp = sat_mul(vpart, sat_pow(static_cast<u128>(t[r - 1]) * w, ex));
            if (sat_mul(vp, sat_pow(s, m)) > bound) break;
            if (w > 1 && !squarefree_coprime(w, used)) continue;
            over_w(r + 1, s, t, vp, used * w);
        }
    }

    void run() {
        // each prime of d goes either into u (slot 0) or into v_r (slot r)
        std::size_t k = dprimes.size();
        std::vector<unsigned> slot(k, 0);
        for (;;) {
            std::uint64_t s = 1;
            std::vector<std::uint64_t> t(m > 1 ? m - 1 : 0, 1);
            for (std::size_t a = 0; a < k; ++a) {
                if (slot[a] == 0)
                    s *= dprimes[a];
                else
                    t[slot[a] - 1] *= dprimes[a];
            }
            over_w(1, s, t, 1, d);
            std::size_t a = 0;
            while (a < k && ++slot[a] == m) slot[a++] = 0;
            if (a == k) break;
        }
    }
};

}  // namespace

std::vector<std::uint64_t> enumerate_m_full(std::uint64_t bound, unsigned m, std::uint64_t d) {
    if (m == 0) throw InputError("multiplicity must be >= 1");
    if (d == 0) throw InputError("modulus must be >= 1");
    std::vector<std::uint64_t> out;
    if (bound == 0) return out;
    if (m == 1) {
        for (std::uint64_t x = d; x <= bound; x += d) out.push_back(x);
        return out;
    }
    std::vector<std::uint32_t> dprimes;
    for (auto [p, e] : factor_u64(d)) {
        if (e > 1) throw InputError("modulus " + std::to_string(d) + " is not squarefree");
        dprimes.push_back(static_cast<std::uint32_t>(p));
    }
    std::uint64_t wlim = iroot_u128(bound, m + 1) + 1;
    std::vector<std::uint32_t> spf(wlim + 1, 0);
    for (std::uint64_t i = 2; i <= wlim; ++i)
        if (!spf[i])
            for (std::uint64_t j = i; j <= wlim; j += i)
                if (!spf[j]) spf[j] = static_cast<std::uint32_t>(i);
    Generator gen{bound, m, d, dprimes, std::move(spf), out};
    gen.run();
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace torcount
