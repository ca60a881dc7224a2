#include <chrono>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "torcount/count.hpp"
#include "torcount/errors.hpp"

using namespace torcount;
using testing::load;

namespace {

bool full_oracle(std::uint64_t x, unsigned m) {
    if (m <= 1) return true;
    for (std::uint64_t p = 2; p * p <= x; ++p) {
        unsigned e = 0;
        while (x % p == 0) x /= p, ++e;
        if (e && e < m) return false;
    }
    return x == 1;
}

// Box enumeration of torus points of V: own height, own coprimality over the ungrouped fan, own polynomial
// evaluation. The box is twice the library's, so a too-small box there would show up as a mismatch.
BigInt brute_count(const SubvarietySpec& sp, const CountContext& ctx, long long B) {
    const auto& tv = sp.tv;
    const auto& g = tv.grading;
    const int nc = g.num_coords();
    auto box = box_bounds(ctx, B);
    BigInt BN = 1;
    for (BigInt k = 0; k < ctx.hd.N; ++k) BN *= B;

    std::vector<std::int64_t> x(nc);
    BigInt total = 0;
    std::function<void(int)> rec = [&](int c) {
        if (c == nc) {
            BigInt h = 0;
            for (const auto& exps : ctx.hd.cone_coord_exps) {
                BigInt v = 1;
                for (int k = 0; k < nc; ++k)
                    for (std::int64_t t = 0; t < exps[k]; ++t) v *= std::llabs(x[k]);
                h = std::max(h, v);
            }
            if (h > BN) return;
            for (const auto& P : sp.polys) {
                BigInt val = 0;
                for (std::size_t l = 0; l < P.coeffs.size(); ++l) {
                    BigInt term = P.coeffs[l];
                    for (auto [coord, e] : P.monomials[l].vars)
                        for (unsigned t = 0; t < e; ++t) term *= x[coord];
                    val += term;
                }
                if (val != 0) return;
            }
            // coprime: the rays whose coordinate a prime divides lie in one cone
            std::uint64_t big = 0;
            for (auto v : x) big = std::max<std::uint64_t>(big, std::llabs(v));
            for (std::uint64_t p = 2; p <= big; ++p) {
                bool prime = true;
                for (std::uint64_t q = 2; q * q <= p; ++q)
                    if (p % q == 0) prime = false;
                if (!prime) continue;
                bool inside = false;
                for (const auto& cone : tv.fan.max_cones) {
                    bool ok = true;
                    for (int k = 0; k < nc && ok; ++k)
                        if (x[k] % static_cast<std::int64_t>(p) == 0)
                            ok = std::find(cone.begin(), cone.end(), g.coord_ray[k]) != cone.end();
                    if (ok) {
                        inside = true;
                        break;
                    }
                }
                if (!inside) return;
            }
            total += 1;
            return;
        }
        const std::int64_t M = static_cast<std::int64_t>(2 * box[g.coord_group[c]] + 1);
        for (std::int64_t v = 1; v <= M; ++v) {
            if (!full_oracle(v, sp.m[c])) continue;
            for (int sgn : {1, -1}) {
                x[c] = sgn * v;
                rec(c + 1);
            }
        }
    };
    rec(0);
    return total / (BigInt(1) << g.r);
}

struct Frozen {
    const char* name;
    long long B;
    long long N;
};

// values cross-checked against brute_count below at the smallest B
const Frozen kFrozen[] = {
    {"p2", 10, 28},        {"p2", 100, 220},        {"p2", 1000, 3364},
    {"p1xp1", 10, 52},     {"p1xp1", 100, 836},     {"p1xp1", 1000, 10372},
    {"f1", 10, 44},        {"f1", 100, 540},        {"f1", 1000, 7996},
    {"p2xp1", 10, 104},    {"p2xp1", 100, 1224},    {"p2xp1", 1000, 22200},
    {"dp6", 10, 76},       {"dp6", 100, 1972},      {"dp6", 1000, 32932},
    {"p4", 10, 16},        {"p4", 100, 496},        {"p4", 1000, 3856},
    {"p2xp2_linear", 10, 36}, {"p2xp2_linear", 100, 588}, {"p2xp2_linear", 1000, 11604},
    {"p1xp1_campana_adj", 10, 84}, {"p1xp1_campana_adj", 100, 1476}, {"p1xp1_campana_adj", 1000, 29556},
    {"p1xp1_campana_k", 10, 4},    {"p1xp1_campana_k", 100, 84},     {"p1xp1_campana_k", 1000, 292},
};

}  // namespace

TEST_CASE("count_A and count_direct examples") {
    auto sp = load("p2");
    auto ctx = make_count_context(sp);
    // max |x_j| <= 2 with x_j nonzero
    CHECK(count_A(ctx, 8, {1}) == 64);
    CHECK(count_A(ctx, 8, {2}) == 8);
    CHECK(count_A(ctx, 8, {3}) == 0);
    CHECK(count_direct(ctx, 8) == 28);
    CHECK(count_NV(ctx, 8) == 28);
    CHECK(count_direct(ctx, Rational(1, 2)) == 0);
    CHECK(count_NV(ctx, Rational(1, 2)) == 0);
    CHECK_THROWS_AS(count_A(ctx, 8, {4}), InputError);
    CHECK_THROWS_AS(count_A(ctx, 8, {1, 1}), InputError);

    auto q = load("p1xp1");
    auto cq = make_count_context(q);
    CHECK(count_direct(cq, 10) == 52);
}

TEST_CASE("frozen counts, both routes") {
    for (const auto& f : kFrozen) {
        CAPTURE(f.name);
        CAPTURE(f.B);
        auto sp = load(f.name);
        auto ctx = make_count_context(sp);
        CHECK(count_NV(ctx, f.B) == f.N);
        CHECK(count_direct(ctx, f.B) == f.N);
    }
}

TEST_CASE("counts agree with an independent box enumeration") {
    const std::pair<const char*, long long> cases[] = {
        {"p2", 40},    {"p1xp1", 40},        {"f1", 30},
        {"p2xp1", 12}, {"dp6", 12},          {"p4", 40},
        {"p2xp2_linear", 12}, {"p1xp1_campana_adj", 12}, {"p1xp1_campana_k", 100},
    };
    for (auto [name, B] : cases) {
        CAPTURE(name);
        auto sp = load(name);
        auto ctx = make_count_context(sp);
        for (long long b = 1; b <= B; b += std::max(1LL, B / 4)) {
            CAPTURE(b);
            CHECK(count_NV(ctx, b) == brute_count(sp, ctx, b));
        }
    }
}

TEST_CASE("general engine agrees with the factorized path") {
    for (const char* name : {"p1xp1", "f1", "p1xp1_campana_adj"}) {
        CAPTURE(name);
        auto sp = load(name);
        auto ctx = make_count_context(sp);
        CountOptions gen;
        gen.force_general = true;
        for (long long B : {50, 300}) CHECK(count_NV(ctx, B, gen) == count_NV(ctx, B));
        CHECK(count_A(ctx, 300, std::vector<std::uint64_t>(sp.tv.grading.s, 2), gen) ==
              count_A(ctx, 300, std::vector<std::uint64_t>(sp.tv.grading.s, 2)));
    }
}

TEST_CASE("count_A is antitone in each modulus") {
    auto sp = load("f1");
    auto ctx = make_count_context(sp);
    const std::uint64_t chain[] = {1, 2, 6, 30};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k + 1 < 4; ++k) {
            std::vector<std::uint64_t> a(3, 1), b(3, 1);
            a[i] = chain[k];
            b[i] = chain[k + 1];
            CHECK(count_A(ctx, 500, b) <= count_A(ctx, 500, a));
        }
    // and monotone in B
    BigInt prev = 0;
    for (long long B = 1; B <= 400; B += 13) {
        BigInt n = count_NV(ctx, B);
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("budget ceiling raises BudgetError") {
    auto sp = load("p2");
    auto ctx = make_count_context(sp);
    CountOptions tight;
    tight.budget = 10;
    CHECK_THROWS_AS(count_direct(ctx, 1e6, tight), BudgetError);
    // pure groups are counted in closed form, no leaves to budget
    CHECK_NOTHROW(count_NV(ctx, 1e6, tight));
}

TEST_CASE("diagonal box counts") {
    // u_1 + u_2 = 2 u_3 with all terms at most 10: u_1 + u_2 even
    CHECK(count_diagonal_box({1, 1, -2}, {1, 1, 1}, {1, 1, 1}, {10}) == 50);
    CHECK(count_diagonal_box({1, -1}, {1, 1}, {2, 2}, {100}) == 10);
    // Pythagorean triples with hypotenuse at most 10
    CHECK(count_diagonal_box({1, 1, -1}, {1, 1, 1}, {2, 2, 2}, {100}) == 4);
    CHECK(count_diagonal_box({1, 1, 1}, {1, 1, 1}, {2, 2, 2}, {100}) == 0);
    CHECK(count_diagonal_box({1, -1}, {1, 1}, {3, 3}, {1000}) == 10);
    CHECK_THROWS_AS(count_diagonal_box({1, -1}, {1}, {2, 2}, {10}), InputError);

    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coef(-3, 3), gam(1, 3), ex(1, 3);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 3;
        std::vector<std::int64_t> c(n);
        std::vector<std::uint64_t> gamma(n);
        std::vector<unsigned> k(n);
        for (int j = 0; j < n; ++j) {
            do c[j] = coef(rng);
            while (c[j] == 0);
            gamma[j] = gam(rng);
            k[j] = ex(rng);
        }
        const std::uint64_t bound = 60;
        std::uint64_t want = 0;
        std::vector<std::uint64_t> u(n, 1);
        std::function<void(int, std::int64_t)> rec = [&](int j, std::int64_t sum) {
            if (j == n) {
                want += sum == 0;
                return;
            }
            for (std::uint64_t v = 1;; ++v) {
                std::uint64_t w = gamma[j];
                for (unsigned e = 0; e < k[j]; ++e) w *= v;
                if (w > bound) break;
                rec(j + 1, sum + c[j] * static_cast<std::int64_t>(w));
            }
        };
        rec(0, 0);
        REQUIRE(count_diagonal_box(c, gamma, k, {bound}) == want);
    }
}

TEST_CASE("graded spec validation") {
    auto lin = load("p2xp2_linear");
    auto rep = validate_spec(lin);
    CHECK(rep.t == 1);
    REQUIRE(rep.degrees.size() == 1);

    auto j = load_json_file(testing::fixture("p2xp2_linear"));
    j["polynomials"][0]["monomials"][2] = {{2, 1, 1}};
    CHECK_THROWS_AS(validate_spec(spec_from_json(j)), InputError);

    auto j2 = load_json_file(testing::fixture("p2xp2_linear"));
    j2["polynomials"][0]["coeffs"] = {1, 1};
    CHECK_THROWS_AS(spec_from_json(j2), InputError);

    CHECK(validate_spec(load("p2")).t == 0);
}

TEST_CASE("coprimality test") {
    auto tv = load("p1xp1").tv;
    auto at = [&](std::vector<std::int64_t> per_ray) {
        TorsorPoint x(4);
        for (int k = 0; k < 4; ++k) x[tv.grading.ray_coord[k]] = per_ray[k];
        return coprimality_test(x, tv);
    };
    CHECK(at({1, 2, 3, 1}));
    CHECK_FALSE(at({2, 4, 3, 1}));
    CHECK(at({2, 3, 6, 5}));
    CHECK_THROWS_AS(at({0, 1, 1, 1}), InputError);
}
