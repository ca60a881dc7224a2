#include "torcount/divisor.hpp"

#include "torcount/errors.hpp"

namespace torcount {

TorusDivisor make_divisor(RatVec coord_coeffs) {
    TorusDivisor D;
    D.a = std::move(coord_coeffs);
    for (const auto& q : D.a) D.denom = lcm_big(D.denom, denominator(q));
    for (const auto& q : D.a) D.cleared.push_back(numerator(q) * (D.denom / denominator(q)));
    return D;
}

TorusDivisor divisor_from_rays(const ToricVariety& tv, const RatVec& per_ray) {
    const auto& g = tv.grading;
    if (static_cast<int>(per_ray.size()) != g.num_coords())
        throw InputError("divisor has " + std::to_string(per_ray.size()) + " coefficients, expected " +
                         std::to_string(g.num_coords()));
    RatVec a(g.num_coords());
    for (int k = 0; k < g.num_coords(); ++k) a[g.ray_coord[k]] = per_ray[k];
    return make_divisor(std::move(a));
}

TorusDivisor anticanonical(const ToricVariety& tv) { return make_divisor(RatVec(tv.grading.num_coords(), 1)); }

std::vector<Rational> divisor_class(const ToricVariety& tv, const TorusDivisor& D) {
    const auto& g = tv.grading;
    std::vector<Rational> cls(g.r, 0);
    for (int c = 0; c < g.num_coords(); ++c)
        for (int t = 0; t < g.r; ++t) cls[t] += D.a[c] * Rational(g.degrees[g.coord_group[c]][t]);
    return cls;
}

const char* to_string(Positivity p) {
    switch (p) {
        case Positivity::ample: return "ample";
        case Positivity::semiample_not_ample: return "semiample-not-ample";
        default: return "not-semiample";
    }
}

HeightData local_trivialization(const TorusDivisor& D, const ToricVariety& tv) {
    const auto& g = tv.grading;
    const auto& fan = tv.fan;
    const int nc = g.num_coords();
    if (static_cast<int>(D.a.size()) != nc) throw InputError("divisor does not match the coordinate set");
    HeightData hd;
    for (std::size_t ci = 0; ci < tv.cones.cones.size(); ++ci) {
        const auto& cd = tv.cones.cones[ci];
        RatMat A;
        RatVec b;
        for (int c : cd.inside) {
            RatVec row;
            for (auto v : fan.rays[g.coord_ray[c]]) row.emplace_back(v);
            A.push_back(std::move(row));
            b.push_back(D.a[c]);
        }
        auto u = solve_square(std::move(A), std::move(b));
        if (!u) throw InvariantError("singular local trivialization system");
        RatVec alpha(nc, 0);
        for (int c = 0; c < nc; ++c) {
            Rational ug = 0;
            const auto& gen = fan.rays[g.coord_ray[c]];
            for (int t = 0; t < fan.dim; ++t) ug += (*u)[t] * Rational(gen[t]);
            alpha[c] = D.a[c] - ug;
        }
        for (int c : cd.inside) TORCOUNT_ASSERT(alpha[c] == 0, "alpha vanishes on the rays of the cone");
        RatVec ag(g.s, 0);
        for (int c = 0; c < nc; ++c) ag[g.coord_group[c]] += alpha[c];
        for (int i = 0; i < g.s; ++i) {
            if (cd.j_of[i] < 0)
                TORCOUNT_ASSERT(ag[i] == 0, "D(sigma) has no support on groups outside I_sigma");
            else
                TORCOUNT_ASSERT(ag[i] == alpha[g.coord(i, cd.j_of[i])], "D(sigma) is supported on the complement rays");
        }
        hd.u.push_back(std::move(*u));
        hd.alpha.push_back(std::move(alpha));
        hd.alpha_group.push_back(std::move(ag));
    }
    for (const auto& cls : tv.cones.classes)
        for (int ci : cls)
            TORCOUNT_ASSERT(hd.alpha_group[ci] == hd.alpha_group[cls.front()], "alpha_{i,sigma} constant on equivalence classes");

    for (const auto& row : hd.alpha)
        for (const auto& q : row) hd.N = lcm_big(hd.N, denominator(q));
    auto to_int = [&](const Rational& q) {
        Rational v = q * Rational(hd.N);
        TORCOUNT_ASSERT(denominator(v) == 1, "cleared exponent is integral");
        if (abs(numerator(v)) > BigInt(1) << 40) throw BudgetError("height exponents too large");
        return numerator(v).convert_to<std::int64_t>();
    };
    for (int rep : tv.cones.reps) {
        std::vector<std::int64_t> e;
        for (const auto& q : hd.alpha_group[rep]) e.push_back(to_int(q));
        hd.class_exps.push_back(std::move(e));
    }
    for (const auto& row : hd.alpha) {
        std::vector<std::int64_t> e;
        for (const auto& q : row) e.push_back(to_int(q));
        hd.cone_coord_exps.push_back(std::move(e));
    }
    hd.positivity = positivity_class(hd, tv);
    return hd;
}

Positivity positivity_class(const HeightData& hd, const ToricVariety& tv) {
    bool ample = true;
    for (std::size_t ci = 0; ci < hd.alpha.size(); ++ci) {
        for (const auto& q : hd.alpha[ci])
            if (q < 0) return Positivity::not_semiample;
        for (int c : tv.cones.cones[ci].complement)
            if (hd.alpha[ci][c] <= 0) ample = false;
    }
    return ample ? Positivity::ample : Positivity::semiample_not_ample;
}

std::vector<std::uint64_t> group_maxima(const TorsorPoint& x, const GradingData& g) {
    std::vector<std::uint64_t> y(g.s, 0);
    for (int c = 0; c < g.num_coords(); ++c) {
        if (x[c] == 0) throw InputError("torsor point has a zero coordinate");
        std::uint64_t a = x[c] < 0 ? static_cast<std::uint64_t>(-(x[c] + 1)) + 1 : static_cast<std::uint64_t>(x[c]);
        if (a > y[g.coord_group[c]]) y[g.coord_group[c]] = a;
    }
    return y;
}

BigInt height_eval(const HeightData& hd, const ToricVariety& tv, const TorsorPoint& x) {
    if (hd.positivity == Positivity::not_semiample) throw InputError("height of a divisor that is not semiample");
    const auto& g = tv.grading;
    if (static_cast<int>(x.size()) != g.num_coords()) throw InputError("torsor point has the wrong length");
    auto y = group_maxima(x, g);
    BigInt best = 0;
    for (const auto& e : hd.class_exps) {
        BigInt v = 1;
        for (int i = 0; i < g.s; ++i)
            if (e[i]) v *= ipow(BigInt(y[i]), static_cast<unsigned>(e[i]));
        if (v > best) best = v;
    }
    return best;
}

BigInt height_eval_ungrouped(const HeightData& hd, const ToricVariety& tv, const TorsorPoint& x) {
    if (hd.positivity == Positivity::not_semiample) throw InputError("height of a divisor that is not semiample");
    const auto& g = tv.grading;
    if (static_cast<int>(x.size()) != g.num_coords()) throw InputError("torsor point has the wrong length");
    BigInt best = 0;
    for (const auto& e : hd.cone_coord_exps) {
        BigInt v = 1;
        for (int c = 0; c < g.num_coords(); ++c) {
            if (x[c] == 0) throw InputError("torsor point has a zero coordinate");
            if (e[c]) v *= ipow(BigInt(x[c] < 0 ? -x[c] : x[c]), static_cast<unsigned>(e[c]));
        }
        if (v > best) best = v;
    }
    return best;
}

nlohmann::json to_json(const HeightData& hd, const ToricVariety& tv) {
    nlohmann::json j;
    j["N"] = hd.N.str();
    j["positivity"] = to_string(hd.positivity);
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t k = 0; k < tv.cones.reps.size(); ++k) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& q : hd.alpha_group[tv.cones.reps[k]]) a.push_back(to_string(q));
        classes.push_back({{"cones", tv.cones.classes[k].size()}, {"alpha", a}});
    }
    j["alpha_by_class"] = classes;
    return j;
}

}  // namespace torcount
