#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "torcount/errors.hpp"
#include "torcount/fan.hpp"
#include "torcount/matrix.hpp"

using namespace torcount;
using testing::load;

namespace {

Fan make_fan(int dim, std::vector<std::vector<long long>> rays, std::vector<std::vector<int>> cones1) {
    Fan f;
    f.dim = dim;
    f.rays = std::move(rays);
    for (auto c : cones1) {
        for (auto& v : c) --v;
        std::sort(c.begin(), c.end());
        f.max_cones.push_back(c);
    }
    return f;
}

Fan p2_fan() { return make_fan(2, {{1, 0}, {0, 1}, {-1, -1}}, {{1, 2}, {2, 3}, {1, 3}}); }

}  // namespace

TEST_CASE("integer normal forms") {
    IntMat A{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    auto S = smith_normal_form(A);
    // U A V = D with D diagonal and each entry dividing the next
    IntMat UA(3, std::vector<BigInt>(3, 0)), UAV(3, std::vector<BigInt>(3, 0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) UA[i][j] += S.U[i][k] * A[k][j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) UAV[i][j] += UA[i][k] * S.V[k][j];
    CHECK(UAV == S.D);
    CHECK(abs(S.D[0][0]) == 2);
    CHECK(abs(S.D[1][1]) == 6);
    CHECK(abs(S.D[2][2]) == 12);
    CHECK(abs(det_int(S.U)) == 1);
    CHECK(abs(det_int(S.V)) == 1);

    IntMat K = integer_kernel({{1, 1, 1}});
    CHECK(K.size() == 2);
    for (const auto& row : K) CHECK(row[0] + row[1] + row[2] == 0);
    // saturated: the kernel lattice has index 1 in Z^3 cap W
    CHECK(abs(det_int({{K[0][0], K[0][1]}, {K[1][0], K[1][1]}})) == 1);

    CHECK(rank_rat(to_rat(IntMat{{1, 2}, {2, 4}})) == 1);
    CHECK(parse_rational("1e4") == 10000);
    CHECK(parse_rational("3/6") == Rational(1, 2));
    CHECK(parse_rational("2.5") == Rational(5, 2));
    CHECK(iroot_floor(BigInt(1000000), 3) == 100);
    CHECK(iroot_floor(BigInt(999999), 3) == 99);
}

TEST_CASE("fan validation examples") {
    CHECK(validate_fan(p2_fan()).valid());

    auto missing = make_fan(2, {{1, 0}, {0, 1}, {-1, -1}}, {{1, 2}, {2, 3}});
    auto rep = validate_fan(missing);
    CHECK_FALSE(rep.valid());
    CHECK(rep.first_failure().find("facet-pairing") != std::string::npos);
    CHECK(rep.first_failure().find("(1,0)") != std::string::npos);

    auto bad = make_fan(2, {{1, 0}, {1, 2}}, {{1, 2}});
    auto rb = validate_fan(bad);
    CHECK_FALSE(rb.valid());
    CHECK(rb.first_failure().find("|det| = 2") != std::string::npos);

    auto nonprim = make_fan(2, {{2, 0}, {0, 1}, {-1, -1}}, {{1, 2}, {2, 3}, {1, 3}});
    CHECK_FALSE(validate_fan(nonprim).valid());

    CHECK_THROWS_AS(load("bad_cone"), InputError);
    CHECK_THROWS_AS(load("bad_incomplete"), InputError);
    CHECK_THROWS_AS(load("bad_primitive"), InputError);
}

TEST_CASE("Picard grading examples") {
    auto p2 = load("p2").tv.grading;
    CHECK(p2.r == 1);
    CHECK(p2.s == 1);
    CHECK(p2.n == std::vector<int>{3});

    auto q = load("p1xp1").tv.grading;
    CHECK(q.r == 2);
    CHECK(q.n == std::vector<int>{2, 2});

    auto f1 = load("f1").tv.grading;
    CHECK(f1.r == 2);
    CHECK(f1.n == std::vector<int>{2, 1, 1});
    // (1,0) and (0,1) share a class; (-1,-1) and (1,1) are alone
    CHECK(f1.coord_group[f1.ray_coord[0]] == f1.coord_group[f1.ray_coord[1]]);
    CHECK(f1.coord_group[f1.ray_coord[2]] != f1.coord_group[f1.ray_coord[3]]);
    // D_1 - D_3 + D_4 = 0 in Pic
    for (int t = 0; t < 2; ++t) CHECK(f1.ray_class[0][t] - f1.ray_class[2][t] + f1.ray_class[3][t] == 0);
}

TEST_CASE("cone index data examples") {
    auto q = load("p1xp1").tv.cones;
    CHECK(q.classes.size() == 1);
    CHECK(q.classes[0].size() == 4);
    for (const auto& c : q.cones) CHECK(c.I == std::vector<int>{0, 1});

    auto f1 = load("f1").tv;
    CHECK(f1.cones.classes.size() == 2);
    std::set<std::vector<int>> Is;
    for (const auto& cls : f1.cones.classes) {
        CHECK(cls.size() == 2);
        Is.insert(f1.cones.cones[cls[0]].I);
    }
    CHECK(Is == std::set<std::vector<int>>{{0, 1}, {0, 2}});

    auto p2 = load("p2").tv.cones;
    CHECK(p2.classes.size() == 1);
    CHECK(p2.classes[0].size() == 3);
}

TEST_CASE("grouped cone invariants on every fixture") {
    for (const char* name : testing::kVarieties) {
        CAPTURE(name);
        auto tv = load(name).tv;
        const auto& g = tv.grading;
        CHECK(g.r == static_cast<int>(tv.fan.rays.size()) - tv.fan.dim);
        int total = 0;
        for (int n : g.n) total += n;
        CHECK(total == static_cast<int>(tv.fan.rays.size()));
        std::set<std::vector<BigInt>> distinct(g.degrees.begin(), g.degrees.end());
        CHECK(distinct.size() == g.degrees.size());
        std::size_t sum = 0;
        for (const auto& cls : tv.cones.classes) {
            const auto& c0 = tv.cones.cones[cls[0]];
            CHECK(static_cast<int>(c0.I.size()) == g.r);
            CHECK(static_cast<int>(c0.complement.size()) == g.r);
            long long prod = 1;
            for (int i : c0.I) prod *= g.n[i];
            CHECK(static_cast<long long>(cls.size()) == prod);
            sum += cls.size();
            // delta_i, i in I_sigma, is a basis of Z^r
            IntMat D;
            for (int i : c0.I) D.push_back(g.degrees[i]);
            CHECK(abs(det_int(D)) == 1);
            // each choice of complement slots is realised by exactly one cone of the class
            std::set<std::vector<int>> choices;
            for (int idx : cls) {
                std::vector<int> ch;
                for (int i : c0.I) ch.push_back(tv.cones.cones[idx].j_of[i]);
                choices.insert(ch);
            }
            CHECK(choices.size() == cls.size());
        }
        CHECK(sum == tv.fan.max_cones.size());
        CHECK(check_minimal_covering(g, tv.cones).passed);
    }
}

TEST_CASE("grading is deterministic") {
    auto a = load("dp6").tv.grading;
    auto b = load("dp6").tv.grading;
    CHECK(to_json(a).dump() == to_json(b).dump());
}
