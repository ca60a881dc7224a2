#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "torcount/asymptotics.hpp"
#include "torcount/errors.hpp"
#include "torcount/mfull.hpp"
#include "torcount/polytope.hpp"

using namespace torcount;
using testing::load;

namespace {

const double kPi = std::acos(-1.0);

GrowthPolytope polytope_of(const char* name) {
    auto sp = load(name);
    auto hd = local_trivialization(sp.L, sp.tv);
    return solve_polytope(hd, sp.tv, growth_weights(sp));
}

// {u >= 0 : rows . u <= 1}, objective varpi, built without the toric layer
GrowthPolytope bare_polytope(const std::vector<RatVec>& rows, const RatVec& varpi) {
    GrowthPolytope P;
    P.s = static_cast<int>(varpi.size());
    P.varpi = varpi;
    for (const auto& r : rows) P.H.push_back({r, 1});
    for (int i = 0; i < P.s; ++i) {
        RatVec a(P.s, 0);
        a[i] = -1;
        P.H.push_back({a, 0});
    }
    P.vertices = enumerate_vertices(P.H, P.s);
    std::vector<Rational> vals;
    for (const auto& v : P.vertices) {
        Rational x = 0;
        for (int i = 0; i < P.s; ++i) x += varpi[i] * v.x[i];
        vals.push_back(x);
    }
    P.a = *std::max_element(vals.begin(), vals.end());
    std::vector<RatVec> pts;
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (vals[k] == P.a) {
            P.face.push_back(k);
            pts.push_back(P.vertices[k].x);
        }
    P.k = static_cast<int>(affine_rank(pts));
    return P;
}

// least squares by normal equations; fine for the handful of columns used here
std::vector<double> lstsq(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
    const std::size_t n = X[0].size();
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0));
    for (std::size_t r = 0; r < X.size(); ++r)
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) M[i][j] += X[r][i] * X[r][j];
            M[i][n] += X[r][i] * y[r];
        }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = M[r][c] / M[c][c];
            for (std::size_t k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = M[i][n] / M[i][i];
    return out;
}

}  // namespace

TEST_CASE("polytope primitives") {
    // unit square
    std::vector<HalfSpace> sq{{{1, 0}, 1}, {{0, 1}, 1}, {{-1, 0}, 0}, {{0, -1}, 0}};
    auto v = enumerate_vertices(sq, 2);
    CHECK(v.size() == 4);
    CHECK(v.front().x == RatVec{0, 0});
    CHECK(v.back().x == RatVec{1, 1});
    CHECK(is_bounded(sq, 2));
    CHECK(polytope_volume(sq, 2) == 1);

    std::vector<HalfSpace> orthant{{{-1, 0}, 0}, {{0, -1}, 0}};
    CHECK_FALSE(is_bounded(orthant, 2));

    std::vector<HalfSpace> simplex3{{{1, 1, 1}, 1}, {{-1, 0, 0}, 0}, {{0, -1, 0}, 0}, {{0, 0, -1}, 0}};
    CHECK(polytope_volume(simplex3, 3) == Rational(1, 6));
    // flat: x + y <= 0 with x, y >= 0
    std::vector<HalfSpace> flat{{{1, 1}, 0}, {{-1, 0}, 0}, {{0, -1}, 0}};
    CHECK(polytope_volume(flat, 2) == 0);

    CHECK(affine_rank({{0, 0}, {1, 1}, {2, 2}}) == 1);
    CHECK(affine_rank({{0, 0}}) == 0);

    // x + y = 1, x, y >= 0 has the two basic solutions (1,0), (0,1)
    auto bs = basic_solutions({{1, 1}}, {1}, {false, false});
    std::sort(bs.begin(), bs.end());
    CHECK(bs == std::vector<RatVec>{{0, 1}, {1, 0}});
}

TEST_CASE("growth polytope examples") {
    auto q = polytope_of("p1xp1");
    CHECK(q.a == 1);
    CHECK(q.k == 1);
    REQUIRE(q.face.size() == 2);
    CHECK(q.vertices[q.face[0]].x == RatVec{0, Rational(1, 2)});
    CHECK(q.vertices[q.face[1]].x == RatVec{Rational(1, 2), 0});

    auto f1 = polytope_of("f1");
    CHECK(f1.varpi == RatVec{2, 1, 1});
    CHECK(f1.a == 1);
    CHECK(f1.k == 1);
    std::set<RatVec> face;
    for (auto i : f1.face) face.insert(f1.vertices[i].x);
    CHECK(face == std::set<RatVec>{{0, Rational(1, 2), Rational(1, 2)}, {Rational(1, 3), Rational(1, 3), 0}});

    auto p2 = polytope_of("p2");
    CHECK(p2.a == 1);
    CHECK(p2.k == 0);

    auto sp = load("p2");
    auto hd = local_trivialization(sp.L, sp.tv);
    CHECK_THROWS_AS(solve_polytope(hd, sp.tv, {0}), InputError);
}

TEST_CASE("LP and effective cone agree on (a,k)") {
    const char* names[] = {"p2", "p1xp1", "f1", "p2xp1", "dp6", "p4", "p2xp2_linear", "p1xp1_campana_adj",
                           "p1xp1_campana_k"};
    for (const char* name : names) {
        CAPTURE(name);
        auto sp = load(name);
        auto hd = local_trivialization(sp.L, sp.tv);
        auto varpi = growth_weights(sp);
        auto P = solve_polytope(hd, sp.tv, varpi);
        auto E = effective_cone_ak(sp.tv.grading, divisor_class(sp.tv, sp.L), varpi);
        CHECK(P.a == E.a);
        CHECK(P.k == E.k);
        CHECK(P.a > 0);
        CHECK(P.k >= 0);
        CHECK(P.k <= P.s - 1);

        // [L] = sum varpi_i delta_i ample forces (a, k) = (1, r - 1)
        RatVec target(sp.tv.grading.r, 0);
        for (int i = 0; i < sp.tv.grading.s; ++i)
            for (int t = 0; t < sp.tv.grading.r; ++t) target[t] += varpi[i] * Rational(sp.tv.grading.degrees[i][t]);
        if (target == divisor_class(sp.tv, sp.L) && hd.positivity == Positivity::ample) {
            CHECK(P.a == 1);
            CHECK(P.k == sp.tv.grading.r - 1);
        }
    }
    auto q = load("p1xp1");
    auto e = effective_cone_ak(q.tv.grading, divisor_class(q.tv, q.L), {2, 2});
    CHECK(e.a == 1);
    CHECK(e.k == 1);
}

TEST_CASE("slice constant examples") {
    auto q = slice_constant_cP(polytope_of("p1xp1"));
    CHECK(q.cP == 1);
    auto tri = slice_constant_cP(bare_polytope({{1, 1}}, {1, 1}));
    CHECK(tri.cP == 1);

    auto f1p = polytope_of("f1");
    auto f1 = slice_constant_cP(f1p);
    CHECK(f1.cP == Rational(2, 3));
    // randomized volume at a small admissible delta
    Rational delta = f1.threshold / 4;
    Rational exact = slice_volume(f1p, delta, 0);
    auto [est, se] = slice_volume_mc(f1p, delta, 0, 400000, 17);
    CHECK(std::fabs(est - to_double(exact)) < 0.01 * to_double(exact));
    CHECK(se < 0.01 * to_double(exact));
}

TEST_CASE("slice polynomial degree and projection independence") {
    const char* names[] = {"p2", "p1xp1", "f1", "p2xp1", "dp6", "p4", "p2xp2_linear", "p1xp1_campana_k"};
    for (const char* name : names) {
        CAPTURE(name);
        auto P = polytope_of(name);
        auto S = slice_constant_cP(P);
        CHECK(S.order == P.s - 1 - P.k);
        // vanishes to order s-1-k at delta = 0, with c_P the first nonzero coefficient
        REQUIRE(static_cast<int>(S.coeffs.size()) > S.order);
        for (int i = 0; i < S.order; ++i) CHECK(S.coeffs[i] == 0);
        CHECK(S.coeffs[S.order] == S.cP);
        CHECK(S.cP > 0);
        // every admissible projection gives the same slice volume at one delta
        Rational delta = S.threshold / 3;
        Rational v0 = slice_volume(P, delta, S.projections.front());
        for (int proj : S.projections) CHECK(slice_volume(P, delta, proj) == v0);
        CHECK(S.projections.size() == static_cast<std::size_t>(P.s));
    }
}

TEST_CASE("lattice constants of linear forms") {
    CHECK(linear_lattice_constant({{1, 1}}) == 2);
    CHECK(linear_lattice_constant({{1, 2}}) == 1);
    CHECK(linear_lattice_constant({{1, 1, 1}}) == 3);
    // permutations of the coordinates
    CHECK(linear_lattice_constant({{2, 1}}) == 1);
    CHECK(linear_lattice_constant({{1, 3, 2}}) == linear_lattice_constant({{2, 1, 3}}));
    // a row operation keeps the kernel
    CHECK(linear_lattice_constant({{1, 1, 0, 0}, {0, 1, 1, 1}}) == linear_lattice_constant({{1, 1, 0, 0}, {1, 2, 1, 1}}));
    CHECK_THROWS_AS(linear_lattice_constant({{1, 1}, {2, 2}}), InputError);
}

TEST_CASE("m-full densities, closed forms") {
    for (std::uint64_t d : {1, 2, 3, 30}) {
        auto c = m_full_density(1, d, 1000, 1);
        CHECK(c.value.contains(1.0 / static_cast<double>(d)));
    }
    // zeta(3/2)/zeta(3)
    auto c21 = m_full_density(2, 1, 1000000, 2);
    CHECK(c21.value.contains(2.6123753486854883 / 1.2020569031595942));
    CHECK(c21.value.width() < 2e-3);
    auto c22 = m_full_density(2, 2, 1000000, 2);
    const double r2 = (0.5 + std::pow(2.0, -1.5)) / (1 + std::pow(2.0, -1.5));
    CHECK(std::fabs(c22.value.mid() - 2.1732543125195541 * r2) < 2e-3);
    CHECK(std::fabs(c22.value.mid() - 1.37045) < 2e-3);
    CHECK_THROWS_AS(m_full_density(2, 4, 1000, 1), InputError);
}

TEST_CASE("m-full counts converge to the Euler-product densities") {
    // N(B) = sum_{r < m} c_r B^{1/(m+r)} + lower order; the leading coefficient is extrapolated from counts up to
    // 1e8 and the raw ratio must approach the density from the same side at the expected rate.
    for (unsigned m : {2u, 3u})
        for (std::uint64_t d : {1, 2, 3, 6}) {
            CAPTURE(m);
            CAPTURE(d);
            auto dens = m_full_density(m, d, 1000000, 2);
            const double c = dens.value.mid();
            const auto all = enumerate_m_full(100000000ULL, m, d);
            std::vector<std::vector<double>> X;
            std::vector<double> y, rel;
            for (int e2 = 8; e2 <= 16; ++e2) {
                const double B = std::pow(10.0, e2 / 2.0);
                const double N = static_cast<double>(
                    std::upper_bound(all.begin(), all.end(), static_cast<std::uint64_t>(B)) - all.begin());
                std::vector<double> row;
                for (unsigned r = 0; r < m; ++r) row.push_back(std::pow(B, 1.0 / (m + r) - 1.0 / m));
                X.push_back(row);
                y.push_back(N / std::pow(B, 1.0 / m));
                if (e2 % 4 == 0) rel.push_back(y.back() / c - 1);
            }
            // 1e4, 1e6, 1e8: the gap shrinks and stays within twice the secondary-term scale
            for (std::size_t i = 1; i < rel.size(); ++i) CHECK(std::fabs(rel[i]) < std::fabs(rel[i - 1]));
            CHECK(std::fabs(rel.back()) <= 2 * std::pow(1e8, -1.0 / (m * (m + 1))));
            // for m = 3 the exponents 1/3, 1/4, 1/5 are too close to separate below 1e8 (the fit is off by 5-14%)
            if (m == 2) {
                auto coef = lstsq(X, y);
                CHECK(std::fabs(coef[0] / c - 1) < 0.02);
            }
        }
}

TEST_CASE("s0 bound") {
    CHECK(s0_bound(2) == 2);
    CHECK(s0_bound(3) == 4);
    CHECK(s0_bound(5) == 13);
    CHECK(s0_bound(1) == 1);
}

TEST_CASE("diagonal constants") {
    DiagonalGroup two{{1, -1}, {1, 1}, 1};
    auto r = diagonal_constant(two, 1, {});
    // one per sign-compatible pair (+,+) and (-,-)
    CHECK(std::fabs(r.value - 2) < 0.01);
    CHECK(r.label.find("q_max=100") != std::string::npos);
    CHECK(r.label.find("lambda_max=200") != std::string::npos);
    CHECK(r.label.find("struct_bound=1000") != std::string::npos);
    CHECK(r.label.find("no proven error bound") != std::string::npos);

    DiagonalGroup pos{{1, 2, 3}, {1, 1, 1}, 2};
    CHECK(std::fabs(diagonal_constant(pos, 1, {}).value) < 1e-9);

    CHECK(std::fabs(singular_integral({1, -1}, {1, 1}, 200) - 1) < 0.01);
    CHECK(std::fabs(singular_series({1, -1}, {1, 1}, 50) - 1) < 1e-9);
    CHECK_THROWS_AS(diagonal_constant({{1, 0}, {1, 1}, 1}, 1, {}), InputError);
    CHECK_THROWS_AS(diagonal_constant(two, 4, {}), InputError);
}

TEST_CASE("assembled constants") {
    auto q = assemble_constant(load("p1xp1"));
    CHECK(q.a == 1);
    CHECK(q.k == 1);
    CHECK(q.b == 2);
    CHECK(std::fabs(q.c.mid() - 144 / std::pow(kPi, 4)) < 1e-4);
    CHECK(q.c.contains(144 / std::pow(kPi, 4)));
    for (const auto& f : q.factors) CHECK(!f.provenance.empty());

    auto lin = assemble_constant(load("p2xp2_linear"));
    CHECK(lin.varpi == RatVec{2, 3});
    CHECK(std::fabs(lin.c.mid() - 3.03443) < 1e-3);

    auto ck = assemble_constant(load("p1xp1_campana_k"));
    CHECK(ck.a == Rational(1, 2));
    CHECK(ck.k == 1);
    CHECK(std::fabs(ck.c.mid() - 7.7087) < 1e-3);

    for (const char* name : testing::kVarieties) {
        CAPTURE(name);
        auto rep = assemble_constant(load(name));
        CHECK(rep.c.positive());
        CHECK(rep.mu_sum.positive());
    }
}

TEST_CASE("empirical fit") {
    std::vector<std::pair<double, double>> exact;
    for (double B : {1e3, 1e4, 1e5, 1e6}) exact.emplace_back(B, 2 * B * std::log(B) + 5 * B);
    auto f = empirical_fit(exact, 1, 1);
    CHECK(std::fabs(f.c_hat - 2) < 1e-9);
    CHECK(std::fabs(f.c_prime - 5) < 1e-7);

    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<std::pair<double, double>> noisy;
    for (double B = 1e3; B <= 1e6; B *= 2) noisy.emplace_back(B, 2 * B * std::log(B) * (1 + noise(rng)));
    auto g = empirical_fit(noisy, 1, 1);
    CHECK(g.c_hat >= 1.9);
    CHECK(g.c_hat <= 2.1);

    CHECK_THROWS_AS(empirical_fit({{10, 1}, {100, 2}}, 1, 1), InputError);
    CHECK_THROWS_AS(empirical_fit({{10, 1}, {100, 2}, {50, 3}}, 1, 1), InputError);
}
