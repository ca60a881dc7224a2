#include "torcount/hypotheses.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "torcount/errors.hpp"

namespace torcount {

const char* to_string(GroupKind k) {
    switch (k) {
        case GroupKind::free: return "free";
        case GroupKind::linear: return "linear";
        case GroupKind::diagonal: return "diagonal";
        case GroupKind::bihomogeneous: return "bihomogeneous";
        default: return "other";
    }
}

namespace {

bool is_linear_in(const CoxPolynomial& p, const GradingData& g, int i) {
    for (const auto& mono : p.monomials)
        if (mono.vars.size() != 1 || mono.vars[0].second != 1 || g.coord_group[mono.vars[0].first] != i) return false;
    return true;
}

// sum_j c_j x_{i,j}^e with every coordinate of group i present exactly once
std::optional<DiagonalGroup> as_diagonal(const CoxPolynomial& p, const GradingData& g, int i,
                                         const std::vector<unsigned>& m) {
    if (p.monomials.empty()) return std::nullopt;
    DiagonalGroup d;
    d.e = 0;
    std::vector<std::int64_t> c(g.n[i], 0);
    for (std::size_t k = 0; k < p.monomials.size(); ++k) {
        const auto& mono = p.monomials[k];
        if (mono.vars.size() != 1) return std::nullopt;
        auto [coord, e] = mono.vars[0];
        if (g.coord_group[coord] != i) return std::nullopt;
        if (d.e == 0) d.e = e;
        if (e != d.e) return std::nullopt;
        int j = coord - g.offset[i];
        if (c[j] != 0) return std::nullopt;
        c[j] = p.coeffs[k];
    }
    for (auto v : c)
        if (v == 0) return std::nullopt;
    d.c = c;
    for (int j = 0; j < g.n[i]; ++j) d.m.push_back(m[g.coord(i, j)]);
    return d;
}

std::string rat(const Rational& q) { return to_string(q); }

}  // namespace

std::vector<GroupStructure> classify_groups(const SubvarietySpec& spec) {
    const auto& g = spec.tv.grading;
    std::vector<GroupStructure> out(g.s);
    for (std::size_t l = 0; l < spec.polys.size(); ++l) {
        auto gs = spec.polys[l].groups(g);
        for (int i : gs) out[i].polys.push_back(static_cast<int>(l));
        if (gs.size() == 2) {
            out[gs[0]].partner = gs[1];
            out[gs[1]].partner = gs[0];
        }
    }
    for (int i = 0; i < g.s; ++i) {
        auto& st = out[i];
        if (st.polys.empty()) {
            st.kind = GroupKind::free;
            continue;
        }
        bool m1 = true;
        for (int j = 0; j < g.n[i]; ++j)
            if (spec.m[g.coord(i, j)] != 1) m1 = false;
        bool all_linear = std::all_of(st.polys.begin(), st.polys.end(),
                                      [&](int l) { return is_linear_in(spec.polys[l], g, i); });
        if (all_linear && m1) {
            st.kind = GroupKind::linear;
            for (int l : st.polys) {
                std::vector<BigInt> row(g.n[i], 0);
                const auto& p = spec.polys[l];
                for (std::size_t k = 0; k < p.monomials.size(); ++k)
                    row[p.monomials[k].vars[0].first - g.offset[i]] += p.coeffs[k];
                st.forms.push_back(row);
            }
            continue;
        }
        if (st.polys.size() == 1) {
            if (auto d = as_diagonal(spec.polys[st.polys[0]], g, i, spec.m)) {
                st.kind = GroupKind::diagonal;
                st.e = d->e;
                st.diag = *d;
                continue;
            }
        }
        if (st.partner >= 0) {
            // every polynomial bihomogeneous in the same pair of groups, of one common bidegree
            bool ok = true;
            std::optional<std::pair<unsigned, unsigned>> bideg;
            for (int l : st.polys) {
                auto gs = spec.polys[l].groups(g);
                if (gs.size() != 2 || (gs[0] != i && gs[1] != i) || (gs[0] != st.partner && gs[1] != st.partner)) {
                    ok = false;
                    break;
                }
                for (const auto& mono : spec.polys[l].monomials) {
                    unsigned ei = 0, ep = 0;
                    for (auto [c, e] : mono.vars) (g.coord_group[c] == i ? ei : ep) += e;
                    if (!bideg) bideg = std::make_pair(ei, ep);
                    if (*bideg != std::make_pair(ei, ep)) ok = false;
                }
            }
            if (ok && bideg) {
                st.kind = GroupKind::bihomogeneous;
                st.e = bideg->first;
                continue;
            }
        }
        st.kind = GroupKind::other;
    }
    return out;
}

HypothesisReport check_hypotheses(const SubvarietySpec& spec) {
    HypothesisReport rep;
    rep.tag = spec.theorem;
    const auto& g = spec.tv.grading;
    auto add = [&](std::string name, std::string detail, bool pass, bool verified = true) {
        rep.checks.push_back({std::move(name), std::move(detail), pass, verified});
        if (!pass) rep.pass = false;
    };
    auto hd = local_trivialization(spec.L, spec.tv);
    {
        bool ample = hd.positivity == Positivity::ample;
        std::string det = std::string("L is ") + to_string(hd.positivity);
        if (!ample && spec.semiample_override && hd.positivity == Positivity::semiample_not_ample) {
            det += " (semiample accepted by override)";
            ample = true;
        }
        if (spec.theorem != TheoremTag::none || !ample) add("L ample", det, ample);
    }
    if (spec.theorem == TheoremTag::none) return rep;

    auto groups = classify_groups(spec);
    if (spec.theorem == TheoremTag::linear) {
        bool all_lin = true;
        for (int i = 0; i < g.s; ++i)
            if (groups[i].kind != GroupKind::linear && groups[i].kind != GroupKind::free) all_lin = false;
        add("linear forms within single groups, m = 1", all_lin ? "yes" : "some polynomial is not a linear form in one group",
            all_lin);
        if (!all_lin) return rep;
        std::ostringstream tv;
        for (int i = 0; i < g.s; ++i) {
            int t = static_cast<int>(groups[i].forms.size());
            std::ostringstream d;
            d << "t_" << i + 1 << " = " << t << ", n_" << i + 1 << " - 2 = " << g.n[i] - 2;
            add("t_i <= n_i - 2 (group " + std::to_string(i + 1) + ")", d.str(), t <= g.n[i] - 2);
            if (t) {
                bool indep = rank_rat(to_rat(groups[i].forms)) == static_cast<std::size_t>(t);
                add("forms independent (group " + std::to_string(i + 1) + ")", indep ? "full rank" : "rank deficient",
                    indep);
            }
        }
        TorusDivisor adj = adjoint_divisor(spec.tv, spec.polys, spec.m);
        bool same = divisor_class(spec.tv, adj) == divisor_class(spec.tv, spec.L);
        add("[L] = -(K + sum [H])", same ? "classes agree" : "L differs from the adjoint class", same);
        return rep;
    }

    if (spec.theorem == TheoremTag::bihomogeneous) {
        int i1 = -1, i2 = -1;
        for (int i = 0; i < g.s; ++i)
            if (groups[i].kind == GroupKind::bihomogeneous && i1 < 0) {
                i1 = i;
                i2 = groups[i].partner;
            }
        bool shape = i1 >= 0;
        for (int i = 0; i < g.s; ++i)
            if (groups[i].kind != GroupKind::free && i != i1 && i != i2) shape = false;
        add("polynomials of one bidegree e_1 delta_i + e_2 delta_j", shape ? "yes" : "no common bidegree pair", shape);
        if (!shape) return rep;
        const long long t = static_cast<long long>(groups[i1].polys.size());
        const long long e1 = groups[i1].e, e2 = groups[i2].e;
        for (auto [i, e] : {std::make_pair(i1, e1), std::make_pair(i2, e2)}) {
            std::ostringstream d;
            d << "n = " << g.n[i] << ", t e = " << t * e;
            add("n_i - t e_i >= 2 (group " + std::to_string(i + 1) + ")", d.str(), g.n[i] - t * e >= 2);
        }
        BigInt rhs = BigInt(3) * (BigInt(1) << static_cast<unsigned>(e1 + e2)) * e1 * e2 * t * t * t;
        if (spec.dim_vstar) {
            BigInt lhs = g.n[i1] + g.n[i2];
            BigInt need = rhs + (*spec.dim_vstar)[0] + (*spec.dim_vstar)[1];
            add("n_1 + n_2 > dim V1* + dim V2* + 3 2^(e1+e2) e1 e2 t^3",
                lhs.str() + " vs " + need.str(), lhs > need);
        } else {
            add("n_1 + n_2 > dim V1* + dim V2* + 3 2^(e1+e2) e1 e2 t^3",
                "dim V_i^* not supplied; unverified (bound without them: " + rhs.str() + ")", false, false);
        }
        add("circle-method constant supplied", spec.circle_constant ? "yes" : "missing", spec.circle_constant.has_value());
        return rep;
    }

    // Campana points on diagonal intersections
    for (int i = 0; i < g.s; ++i) {
        const auto& st = groups[i];
        if (st.kind != GroupKind::free && st.kind != GroupKind::diagonal) {
            add("diagonal equations in single groups (group " + std::to_string(i + 1) + ")", to_string(st.kind), false);
            continue;
        }
        std::vector<unsigned> ms;
        for (int j = 0; j < g.n[i]; ++j) ms.push_back(spec.m[g.coord(i, j)]);
        std::sort(ms.begin(), ms.end());
        const std::string gi = " (group " + std::to_string(i + 1) + ")";
        add("m_ij >= 2" + gi, "min m = " + std::to_string(ms.front()), ms.front() >= 2);
        Rational inv = 0;
        for (auto m : ms) inv += Rational(1, m);
        add("sum 1/m > 3" + gi, rat(inv), inv > 3);
        if (st.kind != GroupKind::diagonal) continue;
        add("n_i >= 2" + gi, std::to_string(g.n[i]), g.n[i] >= 2);
        const unsigned e = st.e;
        if (e == 1) {
            Rational acc = 0;
            for (std::size_t j = 0; j + 1 < ms.size(); ++j) acc += Rational(1, (e * ms[j]) * (e * ms[j] + 1));
            add("sum_{j < n} 1/(e m (e m + 1)) >= 1" + gi, rat(acc), acc >= 1);
        } else {
            Rational acc = 0;
            for (auto m : ms) acc += Rational(1, 2 * s0_bound(e * m));
            add("sum 1/(2 s0(e m)) > 1" + gi, rat(acc), acc > 1);
        }
    }
    return rep;
}

nlohmann::json to_json(const HypothesisReport& r) {
    nlohmann::json j;
    j["theorem"] = to_string(r.tag);
    j["pass"] = r.pass;
    auto arr = nlohmann::json::array();
    for (const auto& c : r.checks)
        arr.push_back({{"name", c.name}, {"detail", c.detail}, {"pass", c.pass}, {"verified", c.verified}});
    j["checks"] = arr;
    return j;
}

}  // namespace torcount
