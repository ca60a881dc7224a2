#include "torcount/fan.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "torcount/errors.hpp"
#include "torcount/matrix.hpp"

namespace torcount {

namespace {

long long json_int(const nlohmann::json& v, const std::string& what) {
    if (!v.is_number_integer()) throw InputError(what + " must be an integer, got " + v.dump());
    return v.get<long long>();
}

std::string ray_str(const std::vector<long long>& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")";
    return os.str();
}

std::string cone_str(const std::vector<int>& c) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i] + 1;
    os << "}";
    return os.str();
}

}  // namespace

Fan fan_from_json(const nlohmann::json& j) {
    Fan f;
    if (!j.contains("dim") || !j.contains("rays") || !j.contains("max_cones"))
        throw InputError("fan description needs \"dim\", \"rays\" and \"max_cones\"");
    long long dim = json_int(j.at("dim"), "dim");
    if (dim <= 0 || dim > 64) throw InputError("dim must be a positive integer");
    f.dim = static_cast<int>(dim);
    if (!j.at("rays").is_array() || j.at("rays").empty()) throw InputError("rays must be a nonempty array");
    for (const auto& r : j.at("rays")) {
        if (!r.is_array() || static_cast<long long>(r.size()) != dim)
            throw InputError("ray " + r.dump() + " does not have dim entries");
        std::vector<long long> v;
        for (const auto& e : r) v.push_back(json_int(e, "ray entry"));
        f.rays.push_back(std::move(v));
    }
    if (!j.at("max_cones").is_array() || j.at("max_cones").empty())
        throw InputError("max_cones must be a nonempty array");
    for (const auto& c : j.at("max_cones")) {
        if (!c.is_array()) throw InputError("cone " + c.dump() + " is not an array");
        std::vector<int> cone;
        for (const auto& e : c) {
            long long k = json_int(e, "cone index");
            if (k < 1 || k > static_cast<long long>(f.rays.size()))
                throw InputError("cone index " + std::to_string(k) + " out of range");
            cone.push_back(static_cast<int>(k - 1));
        }
        std::sort(cone.begin(), cone.end());
        if (std::adjacent_find(cone.begin(), cone.end()) != cone.end())
            throw InputError("cone " + c.dump() + " repeats a ray");
        f.max_cones.push_back(std::move(cone));
    }
    return f;
}

bool ValidityReport::valid() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string ValidityReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.passed) return c.name + ": " + c.detail;
    return "";
}

ValidityReport validate_fan(const Fan& fan) {
    ValidityReport rep;

    CertificateCheck prim{"primitivity", true, ""};
    for (std::size_t k = 0; k < fan.rays.size(); ++k) {
        long long g = 0;
        for (auto v : fan.rays[k]) g = std::gcd(g, v < 0 ? -v : v);
        if (g != 1) {
            prim.passed = false;
            prim.detail += (prim.detail.empty() ? "" : "; ") + std::string("ray ") + std::to_string(k + 1) + " " +
                           ray_str(fan.rays[k]) + (g == 0 ? " is zero" : " is not primitive (gcd " + std::to_string(g) + ")");
        }
    }
    rep.checks.push_back(prim);

    CertificateCheck distinct{"distinct-rays", true, ""};
    {
        std::map<std::vector<long long>, std::size_t> seen;
        for (std::size_t k = 0; k < fan.rays.size(); ++k) {
            auto [it, fresh] = seen.emplace(fan.rays[k], k);
            if (!fresh) {
                distinct.passed = false;
                distinct.detail += (distinct.detail.empty() ? "" : "; ") + std::string("rays ") +
                                   std::to_string(it->second + 1) + " and " + std::to_string(k + 1) + " coincide";
            }
        }
    }
    rep.checks.push_back(distinct);

    CertificateCheck smooth{"smoothness", true, ""};
    for (const auto& cone : fan.max_cones) {
        if (static_cast<int>(cone.size()) != fan.dim) {
            smooth.passed = false;
            smooth.detail += (smooth.detail.empty() ? "" : "; ") + std::string("cone ") + cone_str(cone) +
                             " is not full-dimensional";
            continue;
        }
        IntMat M;
        for (int k : cone) {
            std::vector<BigInt> row;
            for (auto v : fan.rays[k]) row.emplace_back(v);
            M.push_back(std::move(row));
        }
        BigInt det = det_int(M);
        if (abs(det) != 1) {
            smooth.passed = false;
            smooth.detail += (smooth.detail.empty() ? "" : "; ") + std::string("cone ") + cone_str(cone) +
                             " has |det| = " + BigInt(abs(det)).str();
        }
    }
    rep.checks.push_back(smooth);

    CertificateCheck complete{"facet-pairing", true, ""};
    {
        std::map<std::vector<int>, int> facets;
        std::vector<std::vector<int>> order;
        for (const auto& cone : fan.max_cones) {
            if (static_cast<int>(cone.size()) != fan.dim) continue;
            for (std::size_t drop = 0; drop < cone.size(); ++drop) {
                std::vector<int> f;
                for (std::size_t t = 0; t < cone.size(); ++t)
                    if (t != drop) f.push_back(cone[t]);
                if (facets[f]++ == 0) order.push_back(f);
            }
        }
        for (const auto& f : order) {
            int cnt = facets[f];
            if (cnt == 2) continue;
            complete.passed = false;
            std::string rays;
            for (int k : f) rays += (rays.empty() ? "" : " ") + ray_str(fan.rays[k]);
            complete.detail += (complete.detail.empty() ? "" : "; ") + std::string("facet ") + cone_str(f) + " [" +
                               rays + "] lies in " + std::to_string(cnt) + " maximal cone(s)";
        }
    }
    rep.checks.push_back(complete);
    return rep;
}

GradingData picard_grading(const Fan& fan) {
    const int nr = static_cast<int>(fan.rays.size());
    IntMat R(nr, std::vector<BigInt>(fan.dim));
    for (int k = 0; k < nr; ++k)
        for (int c = 0; c < fan.dim; ++c) R[k][c] = fan.rays[k][c];
    SmithForm sf = smith_normal_form(R);
    for (std::size_t t = 0; t < sf.rank; ++t)
        if (sf.D[t][t] != 1) throw InvariantError("cokernel of the ray matrix has torsion (invariant factor " + sf.D[t][t].str() + ")");
    if (static_cast<int>(sf.rank) != fan.dim) throw InvariantError("rays do not span the lattice");
    // rows of U past the rank span the relations among the rays
    IntMat Q;
    for (int t = static_cast<int>(sf.rank); t < nr; ++t) Q.push_back(sf.U[t]);
    Q = hermite_rows(Q);

    GradingData g;
    g.r = nr - fan.dim;
    TORCOUNT_ASSERT(static_cast<int>(Q.size()) == g.r, "relation lattice has rank n - dim");
    for (const auto& row : Q)
        for (int c = 0; c < fan.dim; ++c) {
            BigInt acc = 0;
            for (int k = 0; k < nr; ++k) acc += row[k] * R[k][c];
            TORCOUNT_ASSERT(acc == 0, "class map annihilates the ray matrix");
        }
    g.ray_class.resize(nr);
    for (int k = 0; k < nr; ++k)
        for (int t = 0; t < g.r; ++t) g.ray_class[k].push_back(Q[t][k]);

    std::vector<int> ray_group(nr, -1);
    std::vector<std::vector<int>> group_rays;
    for (int k = 0; k < nr; ++k) {
        for (int i = 0; i < static_cast<int>(g.degrees.size()); ++i)
            if (g.degrees[i] == g.ray_class[k]) {
                ray_group[k] = i;
                break;
            }
        if (ray_group[k] < 0) {
            ray_group[k] = static_cast<int>(g.degrees.size());
            g.degrees.push_back(g.ray_class[k]);
            group_rays.emplace_back();
        }
        group_rays[ray_group[k]].push_back(k);
    }
    g.s = static_cast<int>(g.degrees.size());
    g.ray_coord.assign(nr, -1);
    int off = 0;
    for (int i = 0; i < g.s; ++i) {
        g.offset.push_back(off);
        g.n.push_back(static_cast<int>(group_rays[i].size()));
        for (int k : group_rays[i]) {
            g.ray_coord[k] = off++;
            g.coord_ray.push_back(k);
            g.coord_group.push_back(i);
        }
    }
    return g;
}

ConeIndexData cone_index_data(const Fan& fan, const GradingData& g) {
    ConeIndexData out;
    const int nc = g.num_coords();
    std::map<std::vector<int>, int> class_of_I;
    for (const auto& cone : fan.max_cones) {
        ConeData cd;
        std::vector<bool> in(nc, false);
        for (int k : cone) in[g.ray_coord[k]] = true;
        cd.j_of.assign(g.s, -1);
        for (int c = 0; c < nc; ++c) {
            if (in[c]) {
                cd.inside.push_back(c);
                continue;
            }
            cd.complement.push_back(c);
            int i = g.coord_group[c];
            if (cd.j_of[i] != -1)
                throw InvariantError("group " + std::to_string(i + 1) + " meets the complement of cone " + cone_str(cone) +
                                     " twice");
            cd.j_of[i] = c - g.offset[i];
            cd.I.push_back(i);
        }
        if (static_cast<int>(cd.I.size()) != g.r || static_cast<int>(cd.complement.size()) != g.r)
            throw InvariantError("cone " + cone_str(cone) + " has #I != r");
        // {delta_i : i in I} is a basis of Z^r
        IntMat M;
        for (int i : cd.I) M.push_back(g.degrees[i]);
        if (g.r > 0 && abs(det_int(M)) != 1)
            throw InvariantError("degree classes over I of cone " + cone_str(cone) + " do not form a basis");
        auto [it, fresh] = class_of_I.emplace(cd.I, static_cast<int>(out.classes.size()));
        if (fresh) {
            out.classes.emplace_back();
            out.reps.push_back(static_cast<int>(out.cones.size()));
        }
        cd.cls = it->second;
        out.classes[cd.cls].push_back(static_cast<int>(out.cones.size()));
        out.cones.push_back(std::move(cd));
    }
    std::size_t total = 0;
    for (const auto& cls : out.classes) {
        const auto& I = out.cones[cls.front()].I;
        std::size_t expect = 1;
        for (int i : I) expect *= static_cast<std::size_t>(g.n[i]);
        if (cls.size() != expect)
            throw InvariantError("equivalence class has " + std::to_string(cls.size()) + " cones, expected " +
                                 std::to_string(expect));
        // every choice of slots j_i is realized by exactly one cone of the class
        std::set<std::vector<int>> choices;
        for (int c : cls) {
            std::vector<int> key;
            for (int i : I) key.push_back(out.cones[c].j_of[i]);
            if (!choices.insert(key).second) throw InvariantError("two cones of a class share the same complement slots");
        }
        total += cls.size();
    }
    TORCOUNT_ASSERT(total == out.cones.size(), "class sizes sum to the number of maximal cones");
    return out;
}

CertificateCheck check_minimal_covering(const GradingData& g, const ConeIndexData& c) {
    CertificateCheck chk{"minimal-covering-groups", true, ""};
    const int nc = g.num_coords();
    if (nc > 20) {
        chk.detail = "skipped (more than 20 rays)";
        return chk;
    }
    std::vector<std::uint32_t> comp_masks;
    for (const auto& cd : c.cones) {
        std::uint32_t m = 0;
        for (int x : cd.complement) m |= 1u << x;
        comp_masks.push_back(m);
    }
    auto covers = [&](std::uint32_t J) {
        for (auto m : comp_masks)
            if (!(J & m)) return false;
        return true;
    };
    for (std::uint32_t J = 1; J < (1u << nc); ++J) {
        if (!covers(J)) continue;
        bool minimal = true;
        for (int x = 0; x < nc && minimal; ++x)
            if ((J >> x & 1u) && covers(J & ~(1u << x))) minimal = false;
        if (!minimal) continue;
        for (int i = 0; i < g.s; ++i) {
            std::uint32_t gm = 0;
            for (int j = 0; j < g.n[i]; ++j) gm |= 1u << g.coord(i, j);
            if ((J & gm) && (J & gm) != gm) {
                chk.passed = false;
                chk.detail = "minimal covering set meets group " + std::to_string(i + 1) + " partially";
                return chk;
            }
        }
    }
    return chk;
}

ToricVariety ToricVariety::build(Fan fan) {
    ValidityReport rep = validate_fan(fan);
    if (!rep.valid()) throw InputError("invalid fan: " + rep.first_failure());
    ToricVariety tv;
    tv.grading = picard_grading(fan);
    tv.cones = cone_index_data(fan, tv.grading);
    tv.fan = std::move(fan);
    return tv;
}

nlohmann::json to_json(const GradingData& g) {
    nlohmann::json j;
    j["r"] = g.r;
    j["s"] = g.s;
    j["group_sizes"] = g.n;
    nlohmann::json degs = nlohmann::json::array();
    for (const auto& d : g.degrees) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& x : d) v.push_back(x.convert_to<long long>());
        degs.push_back(v);
    }
    j["degrees"] = degs;
    nlohmann::json groups = nlohmann::json::array();
    for (int i = 0; i < g.s; ++i) {
        nlohmann::json rays = nlohmann::json::array();
        for (int jj = 0; jj < g.n[i]; ++jj) rays.push_back(g.coord_ray[g.coord(i, jj)] + 1);
        groups.push_back(rays);
    }
    j["groups"] = groups;
    return j;
}

nlohmann::json to_json(const ConeIndexData& c, const GradingData& g) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t k = 0; k < c.classes.size(); ++k) {
        nlohmann::json cls;
        const auto& I = c.cones[c.classes[k].front()].I;
        nlohmann::json Ij = nlohmann::json::array();
        for (int i : I) Ij.push_back(i + 1);
        cls["I"] = Ij;
        nlohmann::json cones = nlohmann::json::array();
        for (int ci : c.classes[k]) {
            nlohmann::json cj;
            nlohmann::json rays = nlohmann::json::array();
            for (int x : c.cones[ci].inside) rays.push_back(g.coord_ray[x] + 1);
            cj["cone"] = ci + 1;
            cj["rays"] = rays;
            nlohmann::json js = nlohmann::json::array();
            for (int i : I) js.push_back(c.cones[ci].j_of[i] + 1);
            cj["j"] = js;
            cones.push_back(cj);
        }
        cls["cones"] = cones;
        cls["size"] = c.classes[k].size();
        j.push_back(cls);
    }
    return j;
}

nlohmann::json to_json(const ValidityReport& r) {
    nlohmann::json j;
    j["valid"] = r.valid();
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    return j;
}

}  // namespace torcount
