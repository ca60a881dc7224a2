#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace torcount {

struct MFullDecomposition {
    std::uint64_t u = 1;
    std::vector<std::uint64_t> v;  // v_1 .. v_{m-1}
};

// |x| = u^m prod v_r^(m+r) with v_r squarefree and pairwise coprime
std::optional<MFullDecomposition> m_full_decompose(std::int64_t x, unsigned m);
std::uint64_t m_full_recompose(const MFullDecomposition& dec, unsigned m);

// Sorted m-full x in (0, bound] with d | x; d squarefree.
std::vector<std::uint64_t> enumerate_m_full(std::uint64_t bound, unsigned m, std::uint64_t d);

bool is_m_full(std::uint64_t x, unsigned m);

}  // namespace torcount
