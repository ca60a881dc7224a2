#include "torcount/spec.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "torcount/errors.hpp"

namespace torcount {

std::vector<int> CoxPolynomial::coordinates() const {
    std::set<int> cs;
    for (const auto& mono : monomials)
        for (auto [c, e] : mono.vars) cs.insert(c);
    return {cs.begin(), cs.end()};
}

std::vector<int> CoxPolynomial::groups(const GradingData& g) const {
    std::set<int> gs;
    for (int c : coordinates()) gs.insert(g.coord_group[c]);
    return {gs.begin(), gs.end()};
}

const char* to_string(TheoremTag t) {
    switch (t) {
        case TheoremTag::linear: return "linear";
        case TheoremTag::bihomogeneous: return "bihomogeneous";
        case TheoremTag::campana_diagonal: return "campana-diagonal";
        default: return "none";
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

namespace {

long long as_int(const nlohmann::json& v, const std::string& what) {
    if (!v.is_number_integer()) throw InputError(what + " must be an integer, got " + v.dump());
    return v.get<long long>();
}

Rational as_rational(const nlohmann::json& v) {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw InputError("divisor coefficient " + v.dump() + " must be an integer or a \"p/q\" string");
}

CoxPolynomial parse_poly(const nlohmann::json& p, const GradingData& g) {
    CoxPolynomial poly;
    if (!p.contains("coeffs") || !p.contains("monomials")) throw InputError("polynomial needs \"coeffs\" and \"monomials\"");
    const auto& cs = p.at("coeffs");
    const auto& ms = p.at("monomials");
    if (!cs.is_array() || !ms.is_array() || cs.size() != ms.size() || cs.empty())
        throw InputError("polynomial coeffs/monomials must be equal-length nonempty arrays");
    for (std::size_t k = 0; k < cs.size(); ++k) {
        poly.coeffs.push_back(as_int(cs[k], "coefficient"));
        Monomial mono;
        std::map<int, unsigned> acc;
        for (const auto& triple : ms[k]) {
            if (!triple.is_array() || triple.size() != 3) throw InputError("monomial entry must be an (i,j,exponent) triple");
            long long i = as_int(triple[0], "group index"), j = as_int(triple[1], "slot index"),
                      e = as_int(triple[2], "exponent");
            if (i < 1 || i > g.s) throw InputError("group index " + std::to_string(i) + " out of range");
            if (j < 1 || j > g.n[i - 1]) throw InputError("slot index " + std::to_string(j) + " out of range");
            if (e < 0) throw InputError("negative exponent");
            if (e > 0) acc[g.coord(static_cast<int>(i - 1), static_cast<int>(j - 1))] += static_cast<unsigned>(e);
        }
        for (auto [c, e] : acc) mono.vars.emplace_back(c, e);
        poly.monomials.push_back(std::move(mono));
    }
    if (p.contains("degree")) {
        std::vector<BigInt> deg;
        for (const auto& v : p.at("degree")) deg.emplace_back(as_int(v, "degree entry"));
        if (static_cast<int>(deg.size()) != g.r) throw InputError("declared degree has the wrong rank");
        poly.declared_degree = deg;
    }
    return poly;
}

}  // namespace

std::vector<BigInt> monomial_degree(const Monomial& mono, const GradingData& g) {
    std::vector<BigInt> deg(g.r, 0);
    for (auto [c, e] : mono.vars)
        for (int t = 0; t < g.r; ++t) deg[t] += g.degrees[g.coord_group[c]][t] * e;
    return deg;
}

TorusDivisor adjoint_divisor(const ToricVariety& tv, const std::vector<CoxPolynomial>& polys,
                             const std::vector<unsigned>& m) {
    const auto& g = tv.grading;
    RatVec a(g.num_coords());
    for (int c = 0; c < g.num_coords(); ++c) a[c] = Rational(1, m[c]);
    for (const auto& p : polys)
        for (auto [c, e] : p.monomials.front().vars) a[c] -= e;
    return make_divisor(std::move(a));
}

SubvarietySpec spec_from_json(const nlohmann::json& j) {
    SubvarietySpec spec;
    spec.name = j.value("name", std::string("unnamed"));
    spec.tv = ToricVariety::build(fan_from_json(j));
    const auto& g = spec.tv.grading;
    const int nc = g.num_coords();

    spec.m.assign(nc, 1);
    if (j.contains("multiplicities")) {
        const auto& ms = j.at("multiplicities");
        if (!ms.is_array() || static_cast<int>(ms.size()) != nc)
            throw InputError("multiplicities must align with the rays");
        for (int k = 0; k < nc; ++k) {
            long long v = as_int(ms[k], "multiplicity");
            if (v < 1) throw InputError("multiplicities must be >= 1");
            spec.m[g.ray_coord[k]] = static_cast<unsigned>(v);
        }
    }
    if (j.contains("polynomials"))
        for (const auto& p : j.at("polynomials")) spec.polys.push_back(parse_poly(p, g));

    bool anti = j.value("anticanonical", false);
    if (j.contains("divisor") && anti) throw InputError("give either \"divisor\" or \"anticanonical\", not both");
    if (anti) {
        spec.L = anticanonical(spec.tv);
        spec.divisor_source = "anticanonical";
    } else if (j.contains("divisor")) {
        const auto& d = j.at("divisor");
        if (d.is_string()) {
            std::string kind = d.get<std::string>();
            if (kind == "anticanonical") {
                spec.L = anticanonical(spec.tv);
            } else if (kind == "adjoint") {
                spec.L = adjoint_divisor(spec.tv, spec.polys, spec.m);
            } else {
                throw InputError("unknown divisor shorthand \"" + kind + "\"");
            }
            spec.divisor_source = kind;
        } else if (d.is_array()) {
            RatVec per_ray;
            for (const auto& v : d) per_ray.push_back(as_rational(v));
            spec.L = divisor_from_rays(spec.tv, per_ray);
            spec.divisor_source = "explicit";
        } else {
            throw InputError("divisor must be an array or a shorthand string");
        }
    } else {
        spec.L = anticanonical(spec.tv);
        spec.divisor_source = "anticanonical";
    }

    std::string tag = j.value("theorem", std::string("none"));
    if (tag == "none")
        spec.theorem = TheoremTag::none;
    else if (tag == "linear")
        spec.theorem = TheoremTag::linear;
    else if (tag == "bihomogeneous")
        spec.theorem = TheoremTag::bihomogeneous;
    else if (tag == "campana-diagonal")
        spec.theorem = TheoremTag::campana_diagonal;
    else
        throw InputError("unknown theorem tag \"" + tag + "\"");
    spec.semiample_override = j.value("semiample_override", false);
    if (j.contains("circle_method_constant")) {
        if (!j.at("circle_method_constant").is_number()) throw InputError("circle_method_constant must be a number");
        spec.circle_constant = j.at("circle_method_constant").get<double>();
    }
    if (j.contains("dim_V_star")) {
        const auto& dv = j.at("dim_V_star");
        if (!dv.is_array() || dv.size() != 2) throw InputError("dim_V_star must be a pair");
        spec.dim_vstar = std::array<long long, 2>{as_int(dv[0], "dim_V_star"), as_int(dv[1], "dim_V_star")};
    }
    return spec;
}

SubvarietySpec load_spec(const std::string& path) { return spec_from_json(load_json_file(path)); }

GradedSpecReport validate_spec(const SubvarietySpec& spec) {
    GradedSpecReport rep;
    const auto& g = spec.tv.grading;
    rep.t = static_cast<int>(spec.polys.size());
    for (std::size_t l = 0; l < spec.polys.size(); ++l) {
        const auto& p = spec.polys[l];
        auto deg0 = monomial_degree(p.monomials.front(), g);
        for (std::size_t k = 1; k < p.monomials.size(); ++k)
            if (monomial_degree(p.monomials[k], g) != deg0)
                throw InputError("polynomial " + std::to_string(l + 1) + " is not homogeneous: monomials 1 and " +
                                 std::to_string(k + 1) + " have different degree classes");
        if (p.declared_degree && *p.declared_degree != deg0)
            throw InputError("polynomial " + std::to_string(l + 1) + " does not have its declared degree");
        rep.degrees.push_back(deg0);
    }
    return rep;
}

nlohmann::json to_json(const GradedSpecReport& r) {
    nlohmann::json j;
    j["t"] = r.t;
    nlohmann::json degs = nlohmann::json::array();
    for (const auto& d : r.degrees) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& x : d) v.push_back(x.convert_to<long long>());
        degs.push_back(v);
    }
    j["degrees"] = degs;
    j["note"] = r.note;
    return j;
}

}  // namespace torcount
