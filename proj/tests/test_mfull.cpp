#include <random>

#include "doctest.h"
#include "torcount/mfull.hpp"

using namespace torcount;

namespace {

bool m_full_oracle(std::uint64_t x, unsigned m) {
    for (std::uint64_t p = 2; p * p <= x; ++p) {
        unsigned e = 0;
        while (x % p == 0) x /= p, ++e;
        if (e && e < m) return false;
    }
    return x == 1 || m <= 1;
}

}  // namespace

TEST_CASE("m-full decomposition examples") {
    auto d = m_full_decompose(72, 2);
    REQUIRE(d);
    CHECK(d->u == 3);
    CHECK(d->v == std::vector<std::uint64_t>{2});

    for (unsigned m = 1; m <= 4; ++m) {
        auto one = m_full_decompose(1, m);
        REQUIRE(one);
        CHECK(one->u == 1);
        for (auto v : one->v) CHECK(v == 1);
    }
    CHECK_FALSE(m_full_decompose(200, 3));
    CHECK(m_full_decompose(-72, 2));
}

TEST_CASE("m-full enumeration examples") {
    CHECK(enumerate_m_full(50, 2, 1) == std::vector<std::uint64_t>{1, 4, 8, 9, 16, 25, 27, 32, 36, 49});
    CHECK(enumerate_m_full(50, 2, 3) == std::vector<std::uint64_t>{9, 27, 36});
    CHECK(enumerate_m_full(10, 1, 2) == std::vector<std::uint64_t>{2, 4, 6, 8, 10});
    CHECK(enumerate_m_full(0, 2, 1).empty());
}

TEST_CASE("enumeration matches a filter") {
    for (unsigned m = 1; m <= 4; ++m)
        for (std::uint64_t d : {1, 2, 3, 6, 10, 30})
            for (std::uint64_t bound : {1, 17, 1000, 100000}) {
                CAPTURE(m);
                CAPTURE(d);
                CAPTURE(bound);
                if (m == 1 && bound == 100000) continue;
                std::vector<std::uint64_t> want;
                for (std::uint64_t x = d; x <= bound; x += d)
                    if (m_full_oracle(x, m)) want.push_back(x);
                REQUIRE(enumerate_m_full(bound, m, d) == want);
            }
}

TEST_CASE("decompose and recompose round trip") {
    std::mt19937_64 rng(7);
    for (unsigned m = 1; m <= 5; ++m)
        for (std::uint64_t x = 1; x <= 20000; ++x) {
            auto dec = m_full_decompose(static_cast<std::int64_t>(x), m);
            REQUIRE(dec.has_value() == m_full_oracle(x, m));
            REQUIRE(is_m_full(x, m) == dec.has_value());
            if (!dec) continue;
            REQUIRE(dec->v.size() == m - 1);
            REQUIRE(m_full_recompose(*dec, m) == x);
        }
}
