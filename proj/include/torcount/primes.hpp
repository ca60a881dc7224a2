#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace torcount {

std::vector<std::uint32_t> primes_up_to(std::uint64_t n);

// Smallest-prime-factor table for fast factorization of small integers.
class Sieve {
public:
    explicit Sieve(std::uint32_t limit);
    std::uint32_t limit() const { return limit_; }
    // (prime, exponent) pairs in increasing order; n <= limit
    std::vector<std::pair<std::uint32_t, unsigned>> factor(std::uint32_t n) const;
    bool squarefree(std::uint32_t n) const;
    int mobius(std::uint32_t n) const;

private:
    std::uint32_t limit_;
    std::vector<std::uint32_t> spf_;
};

// Trial division; fine for the moderate moduli passed on the command line.
std::vector<std::pair<std::uint64_t, unsigned>> factor_u64(std::uint64_t n);
bool is_squarefree_u64(std::uint64_t n);

}  // namespace torcount
