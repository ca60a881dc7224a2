#include "torcount/polytope.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "torcount/errors.hpp"

namespace torcount {

namespace {

Rational dot(const RatVec& a, const RatVec& x) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) s += a[i] * x[i];
    return s;
}

// calls f on every k-subset of {0..n-1}
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    for (;;) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::vector<Vertex> enumerate_vertices(const std::vector<HalfSpace>& H, std::size_t dim) {
    std::map<RatVec, std::vector<std::size_t>> found;
    if (dim == 0) return {};
    for_each_subset(H.size(), dim, [&](const std::vector<std::size_t>& S) {
        RatMat A;
        RatVec b;
        for (auto k : S) {
            A.push_back(H[k].a);
            b.push_back(H[k].b);
        }
        auto x = solve_square(std::move(A), std::move(b));
        if (!x) return;
        if (found.count(*x)) return;
        std::vector<std::size_t> tight;
        for (std::size_t k = 0; k < H.size(); ++k) {
            Rational v = dot(H[k].a, *x);
            if (v > H[k].b) return;
            if (v == H[k].b) tight.push_back(k);
        }
        found.emplace(std::move(*x), std::move(tight));
    });
    std::vector<Vertex> out;
    for (auto& [x, t] : found) out.push_back({x, t});
    return out;
}

bool is_bounded(const std::vector<HalfSpace>& H, std::size_t dim) {
    // bounded iff the normals positively span R^dim; e_1..e_dim and -(e_1+..+e_dim) must lie in their cone
    if (dim == 0) return true;
    RatMat rows;
    for (const auto& h : H) rows.push_back(h.a);
    if (rows.size() < dim + 1 || rank_rat(rows) < dim) return false;
    auto in_cone = [&](const RatVec& t) {
        bool hit = false;
        for_each_subset(rows.size(), dim, [&](const std::vector<std::size_t>& S) {
            if (hit) return;
            RatMat M(dim, RatVec(dim));
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) M[i][j] = rows[S[j]][i];
            auto x = solve_square(std::move(M), t);
            if (!x) return;
            for (const auto& c : *x)
                if (c < 0) return;
            hit = true;
        });
        return hit;
    };
    RatVec minus(dim, -1);
    if (!in_cone(minus)) return false;
    for (std::size_t i = 0; i < dim; ++i) {
        RatVec e(dim, 0);
        e[i] = 1;
        if (!in_cone(e)) return false;
    }
    return true;
}

std::size_t affine_rank(const std::vector<RatVec>& pts) {
    if (pts.size() <= 1) return 0;
    RatMat M;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        RatVec d(pts[i].size());
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = pts[i][j] - pts[0][j];
        M.push_back(std::move(d));
    }
    return rank_rat(std::move(M));
}

namespace {

struct Triangulator {
    const std::vector<Vertex>& V;
    std::size_t ncons;
    std::vector<std::vector<std::size_t>> simplices;

    std::size_t dim_of(const std::vector<std::size_t>& face) const {
        std::vector<RatVec> pts;
        for (auto v : face) pts.push_back(V[v].x);
        return affine_rank(pts);
    }

    bool tight_at(std::size_t v, std::size_t c) const {
        return std::binary_search(V[v].tight.begin(), V[v].tight.end(), c);
    }

    // pulling triangulation: cone from the first vertex over facets avoiding it
    void run(const std::vector<std::size_t>& face, std::size_t fdim, std::vector<std::size_t>& prefix) {
        if (fdim == 0) {
            prefix.push_back(face[0]);
            simplices.push_back(prefix);
            prefix.pop_back();
            return;
        }
        std::size_t apex = face[0];
        std::set<std::vector<std::size_t>> seen;
        for (std::size_t c = 0; c < ncons; ++c) {
            std::vector<std::size_t> sub;
            for (auto v : face)
                if (tight_at(v, c)) sub.push_back(v);
            if (sub.size() < fdim || sub.size() == face.size()) continue;
            if (std::find(sub.begin(), sub.end(), apex) != sub.end()) continue;
            if (seen.count(sub)) continue;
            if (dim_of(sub) != fdim - 1) continue;
            seen.insert(sub);
            prefix.push_back(apex);
            run(sub, fdim - 1, prefix);
            prefix.pop_back();
        }
    }
};

BigInt factorial(std::size_t n) {
    BigInt f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

Rational polytope_volume(const std::vector<HalfSpace>& H, std::size_t dim) {
    if (!is_bounded(H, dim)) throw InvariantError("volume of an unbounded polyhedron requested");
    auto V = enumerate_vertices(H, dim);
    if (V.size() < dim + 1) return 0;
    std::vector<std::size_t> all(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) all[i] = i;
    Triangulator tri{V, H.size(), {}};
    if (tri.dim_of(all) < dim) return 0;
    std::vector<std::size_t> prefix;
    tri.run(all, dim, prefix);
    Rational vol = 0;
    for (const auto& simp : tri.simplices) {
        RatMat M;
        for (std::size_t i = 1; i < simp.size(); ++i) {
            RatVec d(dim);
            for (std::size_t j = 0; j < dim; ++j) d[j] = V[simp[i]].x[j] - V[simp[0]].x[j];
            M.push_back(std::move(d));
        }
        Rational det = det_rat(std::move(M));
        vol += det < 0 ? Rational(-det) : det;
    }
    return vol / Rational(factorial(dim));
}

std::vector<RatVec> basic_solutions(const RatMat& A, const RatVec& b, const std::vector<bool>& free_var) {
    std::size_t n = free_var.size();
    // keep a maximal independent set of rows
    RatMat rows;
    RatVec rhs;
    for (std::size_t i = 0; i < A.size(); ++i) {
        RatMat trial = rows;
        trial.push_back(A[i]);
        if (rank_rat(trial) > rows.size()) {
            rows.push_back(A[i]);
            rhs.push_back(b[i]);
        }
    }
    std::size_t m = rows.size();
    std::set<RatVec> out;
    for_each_subset(n, m, [&](const std::vector<std::size_t>& S) {
        RatMat M(m, RatVec(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) M[i][j] = rows[i][S[j]];
        auto xs = solve_square(std::move(M), rhs);
        if (!xs) return;
        RatVec x(n, 0);
        for (std::size_t j = 0; j < m; ++j) {
            if (!free_var[S[j]] && (*xs)[j] < 0) return;
            x[S[j]] = (*xs)[j];
        }
        for (std::size_t i = 0; i < A.size(); ++i)
            if (dot(A[i], x) != b[i]) return;
        out.insert(std::move(x));
    });
    return {out.begin(), out.end()};
}

}  // namespace torcount
