#include "torcount/primes.hpp"

namespace torcount {

std::vector<std::uint32_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint32_t> out;
    if (n < 2) return out;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
}

Sieve::Sieve(std::uint32_t limit) : limit_(limit), spf_(static_cast<std::size_t>(limit) + 1, 0) {
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i]) continue;
        for (std::uint64_t j = i; j <= limit; j += i)
            if (!spf_[j]) spf_[j] = static_cast<std::uint32_t>(i);
    }
}

std::vector<std::pair<std::uint32_t, unsigned>> Sieve::factor(std::uint32_t n) const {
    std::vector<std::pair<std::uint32_t, unsigned>> f;
    while (n > 1) {
        std::uint32_t p = spf_[n];
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    return f;
}

bool Sieve::squarefree(std::uint32_t n) const {
    while (n > 1) {
        std::uint32_t p = spf_[n];
        n /= p;
        if (n % p == 0) return false;
    }
    return true;
}

int Sieve::mobius(std::uint32_t n) const {
    int mu = 1;
    while (n > 1) {
        std::uint32_t p = spf_[n];
        n /= p;
        if (n % p == 0) return 0;
        mu = -mu;
    }
    return mu;
}

std::vector<std::pair<std::uint64_t, unsigned>> factor_u64(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, unsigned>> f;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

bool is_squarefree_u64(std::uint64_t n) {
    for (auto [p, e] : factor_u64(n))
        if (e > 1) return false;
    return true;
}

}  // namespace torcount
