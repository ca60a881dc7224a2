#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "torcount/divisor.hpp"

using namespace torcount;
using testing::load;

namespace {

// per-coordinate coefficients from per-ray ones
TorusDivisor ray_divisor(const ToricVariety& tv, std::vector<int> per_ray) {
    RatVec a;
    for (int v : per_ray) a.push_back(v);
    return divisor_from_rays(tv, a);
}

TorsorPoint point_from_rays(const ToricVariety& tv, const std::vector<std::int64_t>& per_ray) {
    TorsorPoint x(per_ray.size());
    for (std::size_t k = 0; k < per_ray.size(); ++k) x[tv.grading.ray_coord[k]] = per_ray[k];
    return x;
}

}  // namespace

TEST_CASE("local exponents, worked examples") {
    auto q = load("p1xp1");
    auto hd = local_trivialization(q.L, q.tv);
    for (const auto& row : hd.alpha_group) {
        CHECK(row[0] == 2);
        CHECK(row[1] == 2);
    }

    auto f1 = load("f1");
    auto hf = local_trivialization(f1.L, f1.tv);
    std::multiset<std::vector<Rational>> rows(hf.alpha_group.begin(), hf.alpha_group.end());
    CHECK(rows.count({1, 2, 0}) == 2);
    CHECK(rows.count({3, 0, 2}) == 2);

    auto zero = ray_divisor(f1.tv, {0, 0, 0, 0});
    for (const auto& row : local_trivialization(zero, f1.tv).alpha)
        for (const auto& v : row) CHECK(v == 0);
}

TEST_CASE("local exponents vanish inside the cone and are class functions") {
    for (const char* name : testing::kVarieties) {
        CAPTURE(name);
        auto sp = load(name);
        auto hd = local_trivialization(sp.L, sp.tv);
        const auto& cones = sp.tv.cones;
        for (std::size_t c = 0; c < cones.cones.size(); ++c) {
            for (int in : cones.cones[c].inside) CHECK(hd.alpha[c][in] == 0);
            CHECK(hd.alpha_group[c] == hd.alpha_group[cones.reps[cones.cones[c].cls]]);
        }
    }
}

TEST_CASE("positivity classification") {
    auto p2 = load("p2");
    CHECK(local_trivialization(p2.L, p2.tv).positivity == Positivity::ample);

    auto f1 = load("f1");
    // rays (1,0),(0,1),(-1,-1),(1,1): D_4 is the exceptional curve, D_3 the pulled-back line
    auto E = ray_divisor(f1.tv, {0, 0, 0, 1});
    CHECK(local_trivialization(E, f1.tv).positivity == Positivity::not_semiample);
    auto H = ray_divisor(f1.tv, {0, 0, 1, 0});
    CHECK(local_trivialization(H, f1.tv).positivity == Positivity::semiample_not_ample);
}

TEST_CASE("height evaluation examples") {
    auto q = load("p1xp1");
    auto hq = local_trivialization(q.L, q.tv);
    // rays e1, -e1, e2, -e2; x = ((1,2),(3,1))
    CHECK(height_eval(hq, q.tv, point_from_rays(q.tv, {1, 2, 3, 1})) == 36);

    auto p2 = load("p2");
    auto hp = local_trivialization(p2.L, p2.tv);
    CHECK(height_eval(hp, p2.tv, point_from_rays(p2.tv, {1, 2, 3})) == 27);

    for (const char* name : testing::kVarieties) {
        auto sp = load(name);
        auto hd = local_trivialization(sp.L, sp.tv);
        TorsorPoint ones(sp.tv.grading.num_coords(), -1);
        CHECK(height_eval(hd, sp.tv, ones) == 1);
    }
}

TEST_CASE("grouped and ungrouped heights agree on random points") {
    std::mt19937_64 rng(12345);
    for (const char* name : testing::kVarieties) {
        CAPTURE(name);
        auto sp = load(name);
        auto hd = local_trivialization(sp.L, sp.tv);
        const int nc = sp.tv.grading.num_coords();
        std::uniform_int_distribution<std::int64_t> mag(1, 60);
        std::bernoulli_distribution neg(0.5);
        for (int t = 0; t < 10000; ++t) {
            TorsorPoint x(nc);
            for (auto& v : x) v = mag(rng) * (neg(rng) ? -1 : 1);
            BigInt h = height_eval(hd, sp.tv, x);
            REQUIRE(h == height_eval_ungrouped(hd, sp.tv, x));
            // whole-coordinate sign flips act trivially
            TorsorPoint y = x;
            for (auto& v : y) v = -v;
            REQUIRE(height_eval(hd, sp.tv, y) == h);
        }
    }
}
