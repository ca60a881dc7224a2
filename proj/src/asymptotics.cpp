#include "torcount/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "torcount/errors.hpp"
#include "torcount/hypotheses.hpp"
#include "torcount/primes.hpp"

namespace torcount {

// ---------------------------------------------------------------- growth polytope

GrowthPolytope solve_polytope(const HeightData& hd, const ToricVariety& tv, const RatVec& varpi) {
    const int s = tv.grading.s;
    if (static_cast<int>(varpi.size()) != s) throw InputError("varpi has the wrong length");
    for (const auto& w : varpi)
        if (w <= 0) throw InputError("varpi entries must be positive");
    if (hd.positivity == Positivity::not_semiample) throw InputError("L is not semiample; the growth polytope is not defined");
    GrowthPolytope P;
    P.s = s;
    P.varpi = varpi;
    for (int rep : tv.cones.reps) P.H.push_back({hd.alpha_group[rep], 1});
    for (int i = 0; i < s; ++i) {
        RatVec a(s, 0);
        a[i] = -1;
        P.H.push_back({a, 0});
    }
    if (!is_bounded(P.H, s)) throw InputError("growth polytope is unbounded (L outside the ample gate)");
    P.vertices = enumerate_vertices(P.H, s);
    TORCOUNT_ASSERT(!P.vertices.empty(), "growth polytope has a vertex");
    bool first = true;
    for (const auto& v : P.vertices) {
        Rational val = 0;
        for (int i = 0; i < s; ++i) val += varpi[i] * v.x[i];
        if (first || val > P.a) P.a = val;
        first = false;
    }
    std::vector<RatVec> pts;
    for (std::size_t k = 0; k < P.vertices.size(); ++k) {
        Rational val = 0;
        for (int i = 0; i < s; ++i) val += varpi[i] * P.vertices[k].x[i];
        if (val == P.a) {
            P.face.push_back(k);
            pts.push_back(P.vertices[k].x);
        }
    }
    P.k = static_cast<int>(affine_rank(pts));
    if (P.a <= 0) throw InvariantError("growth polytope optimum is not positive");
    return P;
}

EffectiveConeAK effective_cone_ak(const GradingData& g, const RatVec& L_class, const RatVec& varpi) {
    const int r = g.r, s = g.s;
    if (static_cast<int>(varpi.size()) != s || static_cast<int>(L_class.size()) != r)
        throw InputError("effective_cone_ak: dimension mismatch");
    RatVec target(r, 0);
    for (int i = 0; i < s; ++i)
        for (int t = 0; t < r; ++t) target[t] += varpi[i] * Rational(g.degrees[i][t]);
    // t [L] - sum_i lambda_i delta_i = sum_i varpi_i delta_i, lambda >= 0, t free
    RatMat A(r, RatVec(s + 1, 0));
    for (int t = 0; t < r; ++t) {
        A[t][0] = L_class[t];
        for (int i = 0; i < s; ++i) A[t][i + 1] = -Rational(g.degrees[i][t]);
    }
    std::vector<bool> freev(s + 1, false);
    freev[0] = true;
    auto sols = basic_solutions(A, target, freev);
    if (sols.empty()) throw HypothesisError("no t makes t[L] - sum varpi delta effective");
    EffectiveConeAK out;
    out.a = sols[0][0];
    for (const auto& x : sols) out.a = std::min(out.a, x[0]);
    // the optimum must be attained at a vertex and nothing smaller may be feasible; an ample L guarantees it
    RatVec w(r);
    for (int t = 0; t < r; ++t) w[t] = out.a * L_class[t] - target[t];
    // generators that carry positive weight in some representation of w
    RatMat D(r, RatVec(s, 0));
    for (int t = 0; t < r; ++t)
        for (int i = 0; i < s; ++i) D[t][i] = Rational(g.degrees[i][t]);
    auto reps = basic_solutions(D, w, std::vector<bool>(s, false));
    TORCOUNT_ASSERT(!reps.empty(), "a [L] - sum varpi delta lies in the effective cone");
    std::vector<bool> used(s, false);
    for (const auto& x : reps)
        for (int i = 0; i < s; ++i)
            if (x[i] > 0) used[i] = true;
    RatMat face;
    for (int i = 0; i < s; ++i)
        if (used[i]) {
            out.face_generators.push_back(i);
            RatVec row(r);
            for (int t = 0; t < r; ++t) row[t] = Rational(g.degrees[i][t]);
            face.push_back(row);
        }
    int dim = face.empty() ? 0 : static_cast<int>(rank_rat(face));
    out.k = r - dim - 1;
    return out;
}

// ---------------------------------------------------------------- slice constant

namespace {

// H_delta cap P in the coordinates u_i, i != proj
std::vector<HalfSpace> slice_halfspaces(const GrowthPolytope& P, const Rational& delta, int proj) {
    const int s = P.s;
    const Rational level = P.a - delta;
    std::vector<HalfSpace> out;
    auto eliminate = [&](const RatVec& a, const Rational& b) {
        // a.u <= b with u_proj = (level - sum_{i != proj} varpi_i u_i) / varpi_proj
        HalfSpace h;
        h.b = b - a[proj] * level / P.varpi[proj];
        for (int i = 0; i < s; ++i)
            if (i != proj) h.a.push_back(a[i] - a[proj] * P.varpi[i] / P.varpi[proj]);
        return h;
    };
    for (const auto& h : P.H) out.push_back(eliminate(h.a, h.b));
    return out;
}

Rational weight_without(const GrowthPolytope& P, int proj) {
    Rational w = 1;
    for (int i = 0; i < P.s; ++i)
        if (i != proj) w *= P.varpi[i];
    return w;
}

// coefficients of the degree < pts.size() interpolant, ascending
std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
    const std::size_t n = xs.size();
    RatMat V(n, RatVec(n));
    for (std::size_t i = 0; i < n; ++i) {
        Rational p = 1;
        for (std::size_t j = 0; j < n; ++j) {
            V[i][j] = p;
            p *= xs[i];
        }
    }
    auto sol = solve_square(V, ys);
    TORCOUNT_ASSERT(sol.has_value(), "interpolation nodes are distinct");
    return *sol;
}

}  // namespace

Rational slice_volume(const GrowthPolytope& P, const Rational& delta, int proj) {
    if (P.s == 1) {
        // a point; counting measure
        Rational u = (P.a - delta) / P.varpi[0];
        for (const auto& h : P.H)
            if (h.a[0] * u > h.b) return 0;
        return 1;
    }
    auto H = slice_halfspaces(P, delta, proj);
    return polytope_volume(H, P.s - 1) * weight_without(P, proj);
}

std::pair<double, double> slice_volume_mc(const GrowthPolytope& P, const Rational& delta, int proj,
                                          std::uint64_t samples, std::uint64_t seed) {
    if (P.s == 1) return {to_double(slice_volume(P, delta, proj)), 0.0};
    auto H = slice_halfspaces(P, delta, proj);
    const std::size_t dim = P.s - 1;
    auto verts = enumerate_vertices(H, dim);
    if (verts.empty()) return {0.0, 0.0};
    std::vector<double> lo(dim, 1e300), hi(dim, -1e300);
    for (const auto& v : verts)
        for (std::size_t i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], to_double(v.x[i]));
            hi[i] = std::max(hi[i], to_double(v.x[i]));
        }
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (const auto& h : H) {
        std::vector<double> row;
        for (const auto& q : h.a) row.push_back(to_double(q));
        A.push_back(row);
        b.push_back(to_double(h.b));
    }
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> dist;
    double box = 1;
    for (std::size_t i = 0; i < dim; ++i) {
        dist.emplace_back(lo[i], hi[i]);
        box *= hi[i] - lo[i];
    }
    std::uint64_t hit = 0;
    std::vector<double> x(dim);
    for (std::uint64_t t = 0; t < samples; ++t) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = dist[i](rng);
        bool in = true;
        for (std::size_t c = 0; c < A.size() && in; ++c) {
            double v = 0;
            for (std::size_t i = 0; i < dim; ++i) v += A[c][i] * x[i];
            if (v > b[c]) in = false;
        }
        hit += in;
    }
    double frac = static_cast<double>(hit) / static_cast<double>(samples);
    double w = to_double(weight_without(P, proj));
    double se = std::sqrt(frac * (1 - frac) / static_cast<double>(samples));
    return {frac * box * w, se * box * w};
}

SliceConstant slice_constant_cP(const GrowthPolytope& P) {
    SliceConstant out;
    const int s = P.s;
    if (s == 1) {
        out.cP = 1;
        out.order = 0;
        out.threshold = P.a;
        out.coeffs = {1};
        out.projections = {0};
        return out;
    }
    // below the first vertex level under a, the slice volume is one polynomial in delta
    bool have = false;
    for (const auto& v : P.vertices) {
        Rational val = 0;
        for (int i = 0; i < s; ++i) val += P.varpi[i] * v.x[i];
        Rational gap = P.a - val;
        if (gap > 0 && (!have || gap < out.threshold)) {
            out.threshold = gap;
            have = true;
        }
    }
    TORCOUNT_ASSERT(have, "growth polytope has a vertex below the optimum");
    std::vector<Rational> xs;
    for (int j = 1; j <= s; ++j) xs.push_back(out.threshold * Rational(j, s + 1));

    std::optional<std::vector<Rational>> first;
    for (int proj = 0; proj < s; ++proj) {
        std::vector<Rational> ys;
        for (const auto& x : xs) ys.push_back(slice_volume(P, x, proj));
        auto coeffs = interpolate(xs, ys);
        out.projections.push_back(proj);
        if (!first) {
            first = coeffs;
        } else if (coeffs != *first) {
            throw InvariantError("slice volume depends on the eliminated coordinate " + std::to_string(proj + 1));
        }
    }
    out.coeffs = *first;
    int order = -1;
    for (std::size_t j = 0; j < out.coeffs.size(); ++j)
        if (out.coeffs[j] != 0) {
            order = static_cast<int>(j);
            break;
        }
    if (order < 0) throw HypothesisError("slice measure vanishes identically: the optimal face lies in a coordinate hyperplane");
    out.order = order;
    out.cP = out.coeffs[order];
    if (order != s - 1 - P.k)
        throw HypothesisError("slice volume vanishes to order " + std::to_string(order) + ", expected s-1-k = " +
                              std::to_string(s - 1 - P.k) + " (optimal face in a coordinate hyperplane)");
    TORCOUNT_ASSERT(out.cP > 0, "leading slice coefficient is positive");
    return out;
}

// ---------------------------------------------------------------- linear lattice constant

namespace {

Rational kernel_preimage_volume(const IntMat& basis, std::size_t n) {
    const std::size_t dim = basis.size();
    if (dim == 0) return 1;
    std::vector<HalfSpace> H;
    for (std::size_t c = 0; c < n; ++c) {
        RatVec a(dim);
        for (std::size_t j = 0; j < dim; ++j) a[j] = Rational(basis[j][c]);
        H.push_back({a, 1});
        RatVec neg(dim);
        for (std::size_t j = 0; j < dim; ++j) neg[j] = -a[j];
        H.push_back({neg, 1});
    }
    return polytope_volume(H, dim);
}

}  // namespace

Rational linear_lattice_constant(const IntMat& forms) {
    if (forms.empty()) throw InputError("no linear forms given");
    const std::size_t n = forms[0].size();
    for (const auto& row : forms)
        if (row.size() != n) throw InputError("linear forms have different lengths");
    if (rank_rat(to_rat(forms)) != forms.size()) throw InputError("linear forms are dependent");
    IntMat basis = integer_kernel(forms);
    TORCOUNT_ASSERT(basis.size() == n - forms.size(), "kernel rank is n - t");
    Rational v1 = kernel_preimage_volume(basis, n);
    // a second basis: Hermite-reduced rows give the same lattice
    IntMat other = hermite_rows(basis);
    if (other.size() > 1)
        for (std::size_t j = 1; j < other.size(); ++j)
            for (std::size_t c = 0; c < n; ++c) other[0][c] += other[j][c];
    Rational v2 = kernel_preimage_volume(other, n);
    TORCOUNT_ASSERT(v1 == v2, "lattice constant depends on the kernel basis");
    return v1;
}

// ---------------------------------------------------------------- m-full densities

Interval m_full_local_ratio(unsigned m, std::uint64_t p) {
    Interval sum(0);
    for (unsigned r = 1; r < m; ++r) sum = sum + Interval::pow_neg(p, Rational(m + r, m));
    Interval num = Interval::pow_neg(p, Rational(1)) + sum;
    return num / (Interval(1) + sum);
}

MFullDensity m_full_density(unsigned m, std::uint64_t d, std::uint64_t prime_bound, unsigned threads) {
    if (m < 1) throw InputError("m must be >= 1");
    if (d < 1 || !is_squarefree_u64(d)) throw InputError("d must be a positive squarefree integer");
    MFullDensity out;
    out.m = m;
    out.d = d;
    std::vector<LocalTerm> terms;
    for (unsigned r = 1; r < m; ++r) terms.push_back({Rational(m + r, m), Rational(1)});
    out.product = euler_product(terms, prime_bound, threads);
    out.value = out.product.value;
    for (auto [p, e] : factor_u64(d)) out.value = out.value * m_full_local_ratio(m, p);
    return out;
}

std::uint64_t s0_bound(std::uint64_t m) {
    if (m == 0) return 0;
    std::uint64_t a = m - 1 >= 63 ? UINT64_MAX : (std::uint64_t{1} << (m - 1));
    std::uint64_t r = 0;
    while ((r + 1) * (r + 1) <= 2 * m + 2) ++r;
    std::uint64_t b = m * (m - 1) / 2 + r;
    return std::min(a, b);
}

// ---------------------------------------------------------------- diagonal constant

namespace {

using cplx = std::complex<long double>;
constexpr long double kTwoPi = 6.283185307179586476925286766559L;

// Complete exponential sums G_{q,k}[b] = sum_{r=1}^q e(b r^k / q) for prime powers q.
class ExpSumTables {
public:
    const std::vector<cplx>& get(std::uint64_t q, unsigned k) {
        auto key = std::make_pair(q, k);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<std::uint64_t> cnt(q, 0);
        for (std::uint64_t r = 1; r <= q; ++r) {
            std::uint64_t v = 1;
            for (unsigned t = 0; t < k; ++t) v = (v * (r % q)) % q;
            ++cnt[v % q];
        }
        std::vector<cplx> root(q);
        for (std::uint64_t x = 0; x < q; ++x) {
            long double ang = kTwoPi * static_cast<long double>(x) / static_cast<long double>(q);
            root[x] = cplx(std::cos(ang), std::sin(ang));
        }
        std::vector<cplx> G(q, cplx(0, 0));
        for (std::uint64_t b = 0; b < q; ++b) {
            cplx acc(0, 0);
            for (std::uint64_t t = 0; t < q; ++t)
                if (cnt[t]) acc += static_cast<long double>(cnt[t]) * root[(b * t) % q];
            G[b] = acc;
        }
        return cache_.emplace(key, std::move(G)).first->second;
    }

private:
    std::map<std::pair<std::uint64_t, unsigned>, std::vector<cplx>> cache_;
};

class SingularSeries {
public:
    explicit SingularSeries(std::uint64_t q_max) : q_max_(q_max), sieve_(static_cast<std::uint32_t>(std::max<std::uint64_t>(q_max, 2))) {}

    double operator()(const std::vector<BigInt>& b, const std::vector<unsigned>& k) {
        const std::size_t n = b.size();
        // A at prime powers
        std::map<std::uint64_t, long double> Apow;
        for (std::uint64_t q = 2; q <= q_max_; ++q) {
            auto f = sieve_.factor(static_cast<std::uint32_t>(q));
            if (f.size() != 1) continue;
            const std::uint64_t p = f[0].first;
            std::vector<std::uint64_t> bm(n);
            for (std::size_t j = 0; j < n; ++j) {
                BigInt r = b[j] % BigInt(q);
                if (r < 0) r += q;
                bm[j] = r.convert_to<std::uint64_t>();
            }
            cplx acc(0, 0);
            for (std::uint64_t a = 1; a < q; ++a) {
                if (a % p == 0) continue;
                cplx prod(1, 0);
                for (std::size_t j = 0; j < n; ++j) prod *= tables_.get(q, k[j])[(a * bm[j]) % q];
                acc += prod;
            }
            Apow[q] = acc.real() / std::pow(static_cast<long double>(q), static_cast<long double>(n));
        }
        long double total = 1;
        for (std::uint64_t q = 2; q <= q_max_; ++q) {
            long double v = 1;
            for (auto [p, e] : sieve_.factor(static_cast<std::uint32_t>(q))) {
                std::uint64_t pe = 1;
                for (unsigned t = 0; t < e; ++t) pe *= p;
                v *= Apow[pe];
                if (v == 0) break;
            }
            total += v;
        }
        return static_cast<double>(total);
    }

private:
    std::uint64_t q_max_;
    Sieve sieve_;
    ExpSumTables tables_;
};

// int_0^1 e(x xi^k) d xi
cplx phi(long double x, unsigned k) {
    if (x == 0) return cplx(1, 0);
    const bool neg = x < 0;
    const long double X = std::fabs(x);
    cplx val;
    if (X < 6) {
        static const long double nodes[8] = {0.0950125098376374401853193354250L, 0.2816035507792589132304605014604L,
                                             0.4580167776572273863424194429835L, 0.6178762444026437484466717640487L,
                                             0.7554044083550030338951011948474L, 0.8656312023878317438804678977123L,
                                             0.9445750230732325760779884155346L, 0.9894009349916499325961541734503L};
        static const long double weights[8] = {0.1894506104550684962853967232082L, 0.1826034150449235888667636679692L,
                                               0.1691565193950025381893120790303L, 0.1495959888165767320815017305474L,
                                               0.1246289712555338720524762821920L, 0.0951585116824927848099251076022L,
                                               0.0622535239386478928628438369944L, 0.0271524594117540948517805724560L};
        const int panels = static_cast<int>(std::ceil(X * k)) + 2;
        cplx acc(0, 0);
        for (int pn = 0; pn < panels; ++pn) {
            long double a0 = static_cast<long double>(pn) / panels, a1 = static_cast<long double>(pn + 1) / panels;
            long double mid = (a0 + a1) / 2, half = (a1 - a0) / 2;
            for (int t = 0; t < 8; ++t)
                for (int sg = -1; sg <= 1; sg += 2) {
                    long double xi = mid + sg * half * nodes[t];
                    long double ang = kTwoPi * X * std::pow(xi, static_cast<long double>(k));
                    acc += weights[t] * half * cplx(std::cos(ang), std::sin(ang));
                }
        }
        val = acc;
    } else {
        // (1/k) X^{-s} [Gamma(s) (2 pi)^{-s} e^{i pi s/2} - int_X^inf e^{2 pi i t} t^{s-1} dt], s = 1/k
        const long double s = 1.0L / k;
        const cplx iw(0, kTwoPi);
        cplx full = std::tgamma(s) * std::pow(kTwoPi, -s) * std::exp(cplx(0, kTwoPi / 4 * s));
        const long double alpha = s - 1;
        cplx term = std::pow(X, alpha);
        cplx series = term;
        // asymptotic in 1/(2 pi X); terms shrink until mm ~ 2 pi X > 37
        for (int mm = 1; mm < 30; ++mm) {
            term *= -(alpha - (mm - 1)) / (iw * X);
            series += term;
            if (std::abs(term) < 1e-19L * std::abs(series)) break;
        }
        cplx tail = -std::exp(cplx(0, kTwoPi * std::fmod(X, 1.0L))) / iw * series;
        val = (full - tail) * (std::pow(X, -s) / k);
    }
    return neg ? std::conj(val) : val;
}

struct IntegralBatch {
    std::vector<double> value;
    double quad_err = 0;
    double tail = 0;
};

// 2 Re int_0^L prod_j phi(lambda eps_j c_j) d lambda for every sign vector at once; phi(-x) = conj(phi(x))
IntegralBatch integrals_by_sign(const std::vector<std::int64_t>& c, const std::vector<unsigned>& k,
                                const std::vector<std::vector<int>>& signs, double lambda_max) {
    const std::size_t n = c.size();
    IntegralBatch out;
    out.value.assign(signs.size(), 0.0);
    long double asum = 0, sinv = 0;
    for (std::size_t j = 0; j < n; ++j) {
        asum += std::fabs(static_cast<long double>(c[j]));
        sinv += 1.0L / k[j];
    }
    std::vector<std::size_t> live;
    for (std::size_t t = 0; t < signs.size(); ++t) {
        bool pos = false, neg = false;
        for (std::size_t j = 0; j < n; ++j) (signs[t][j] * c[j] > 0 ? pos : neg) = true;
        if (pos && neg) live.push_back(t);  // otherwise no real zero with positive coordinates
    }
    if (live.empty()) return out;
    if (sinv <= 1) throw HypothesisError("singular integral does not converge absolutely (sum 1/k <= 1)");
    static const long double xk[8] = {0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
                                      0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
                                      0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
                                      0.207784955007898467600689403773245L, 0.0L};
    static const long double wk[8] = {0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
                                      0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
                                      0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
                                      0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
    static const long double wg[4] = {0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
                                      0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};
    std::vector<cplx> ph(n);
    std::vector<long double> fv(signs.size());
    auto eval = [&](long double lam) {
        for (std::size_t j = 0; j < n; ++j) ph[j] = phi(lam * std::fabs(static_cast<long double>(c[j])), k[j]);
        for (auto t : live) {
            cplx p(1, 0);
            for (std::size_t j = 0; j < n; ++j) p *= signs[t][j] * c[j] > 0 ? ph[j] : std::conj(ph[j]);
            fv[t] = p.real();
        }
    };
    // Gauss-Kronrod 7-15 panels of width 1/(2 sum |c|)
    const long double h = 0.5L / asum;
    const long double L = lambda_max;
    const long long panels = static_cast<long long>(std::ceil(L / h));
    std::vector<long double> total(signs.size(), 0), err(signs.size(), 0), kron(signs.size()), gauss(signs.size());
    for (long long pn = 0; pn < panels; ++pn) {
        long double a0 = pn * h, a1 = std::min<long double>(L, (pn + 1) * h);
        long double mid = (a0 + a1) / 2, hw = (a1 - a0) / 2;
        eval(mid);
        for (auto t : live) {
            kron[t] = wk[7] * fv[t];
            gauss[t] = wg[3] * fv[t];
        }
        for (int q = 0; q < 7; ++q) {
            eval(mid - hw * xk[q]);
            std::vector<long double> left(fv);
            eval(mid + hw * xk[q]);
            for (auto t : live) {
                long double v = left[t] + fv[t];
                kron[t] += wk[q] * v;
                if (q % 2 == 1) gauss[t] += wg[q / 2] * v;
            }
        }
        for (auto t : live) {
            total[t] += kron[t] * hw;
            err[t] += std::fabs((kron[t] - gauss[t]) * hw);
        }
    }
    for (auto t : live) {
        out.value[t] = static_cast<double>(2 * total[t]);
        out.quad_err = std::max(out.quad_err, static_cast<double>(2 * err[t]));
    }
    // |phi_j(lambda)| <~ Gamma(1 + s_j) / (2 pi |c_j| lambda)^{s_j} for large lambda
    long double K = 1;
    for (std::size_t j = 0; j < n; ++j) {
        long double sj = 1.0L / k[j];
        K *= std::tgamma(1 + sj) * std::pow(kTwoPi * std::fabs(static_cast<long double>(c[j])), -sj);
    }
    out.tail = static_cast<double>(2 * K * std::pow(L, 1 - sinv) / (sinv - 1));
    return out;
}

}  // namespace

double singular_integral(const std::vector<std::int64_t>& a, const std::vector<unsigned>& k, double lambda_max,
                         double* quad_err, double* tail) {
    if (a.size() != k.size() || a.empty()) throw InputError("singular_integral: length mismatch");
    auto b = integrals_by_sign(a, k, {std::vector<int>(a.size(), 1)}, lambda_max);
    if (quad_err) *quad_err = b.quad_err;
    if (tail) *tail = b.tail;
    return b.value[0];
}

double singular_series(const std::vector<BigInt>& b, const std::vector<unsigned>& k, std::uint64_t q_max) {
    SingularSeries S(q_max);
    return S(b, k);
}

namespace {

struct CoordStructure {
    BigInt gamma;
    double weight;  // gamma^(1/(e m))
};

// all (s, t, v~) data for one coordinate with weight <= bound
std::vector<CoordStructure> coordinate_structures(unsigned m, unsigned e, std::uint64_t d, double bound) {
    std::vector<CoordStructure> out;
    auto primes = factor_u64(d);
    const std::size_t np = primes.size();
    // slot 0: s, slot r: t_r
    std::vector<unsigned> slot(np, 0);
    std::function<void(std::size_t)> assign = [&](std::size_t idx) {
        if (idx < np) {
            for (unsigned r = 0; r < m; ++r) {
                slot[idx] = r;
                assign(idx + 1);
            }
            return;
        }
        std::uint64_t s = 1;
        std::vector<std::uint64_t> t(m, 1);
        for (std::size_t q = 0; q < np; ++q) (slot[q] == 0 ? s : t[slot[q]]) *= primes[q].first;
        double w0 = static_cast<double>(s);
        for (unsigned r = 1; r < m; ++r) w0 *= std::pow(static_cast<double>(t[r]), static_cast<double>(m + r) / m);
        if (w0 > bound) return;
        // v~_r squarefree, coprime to d and to each other
        std::vector<std::uint64_t> v(m, 1);
        std::function<void(unsigned, double, std::uint64_t)> pick = [&](unsigned r, double w, std::uint64_t used) {
            if (r == m) {
                BigInt gamma = ipow(BigInt(s), e * m);
                for (unsigned q = 1; q < m; ++q) gamma *= ipow(BigInt(t[q]) * v[q], e * (m + q));
                out.push_back({gamma, w});
                return;
            }
            const double ex = static_cast<double>(m + r) / m;
            for (std::uint64_t c = 1;; ++c) {
                double wc = w * std::pow(static_cast<double>(c), ex);
                if (wc > bound * (1 + 1e-12)) break;
                if (!is_squarefree_u64(c) || std::gcd(c, d) != 1 || std::gcd(c, used) != 1) continue;
                v[r] = c;
                pick(r + 1, wc, used * c);
            }
            v[r] = 1;
        };
        pick(1, w0, 1);
    };
    assign(0);
    std::sort(out.begin(), out.end(), [](const CoordStructure& x, const CoordStructure& y) { return x.weight < y.weight; });
    return out;
}

}  // namespace

DiagonalResult diagonal_constant(const DiagonalGroup& grp, std::uint64_t d, const DiagonalTruncation& tr) {
    const std::size_t n = grp.c.size();
    if (n == 0 || grp.m.size() != n) throw InputError("diagonal group: coefficient and multiplicity lists differ");
    if (grp.e < 1) throw InputError("diagonal degree must be >= 1");
    for (auto c : grp.c)
        if (c == 0) throw InputError("diagonal coefficients must be nonzero");
    if (d < 1 || !is_squarefree_u64(d)) throw InputError("d must be a positive squarefree integer");
    if (tr.q_max < 1 || tr.lambda_max <= 0 || tr.struct_bound < 1) throw InputError("truncation parameters must be positive");
    DiagonalResult res;
    res.truncation = tr;
    std::ostringstream lab;
    lab << "truncated, no proven error bound (q_max=" << tr.q_max << ", lambda_max=" << tr.lambda_max
        << ", struct_bound=" << tr.struct_bound << ")";
    res.label = lab.str();

    std::vector<unsigned> k(n);
    for (std::size_t j = 0; j < n; ++j) k[j] = grp.e * grp.m[j];

    std::vector<std::vector<CoordStructure>> per(n);
    for (std::size_t j = 0; j < n; ++j) per[j] = coordinate_structures(grp.m[j], grp.e, d, tr.struct_bound);

    // sign vectors with nonvanishing singular integral
    std::vector<std::vector<int>> signs;
    const bool odd = grp.e % 2 == 1;
    if (odd) {
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            std::vector<int> eps(n);
            for (std::size_t j = 0; j < n; ++j) eps[j] = (mask >> j & 1) ? -1 : 1;
            signs.push_back(eps);
        }
    } else {
        signs.push_back(std::vector<int>(n, 1));
    }
    auto batch = integrals_by_sign(grp.c, k, signs, tr.lambda_max);
    const std::vector<double>& integ = batch.value;
    res.integral_quadrature_error = batch.quad_err;
    res.integral_tail_estimate = batch.tail;
    for (std::size_t t = 0; t < signs.size(); ++t) res.singular_integrals.emplace_back(signs[t], integ[t]);

    SingularSeries S(tr.q_max);
    {
        std::vector<BigInt> b(n);
        for (std::size_t j = 0; j < n; ++j) b[j] = grp.c[j];
        res.trivial_singular_series = S(b, k);
    }
    long double total = 0;
    std::vector<const CoordStructure*> pick(n);
    std::function<void(std::size_t, double)> rec = [&](std::size_t j, double w) {
        if (j == n) {
            ++res.structures;
            for (std::size_t t = 0; t < signs.size(); ++t) {
                if (integ[t] == 0) continue;
                std::vector<BigInt> b(n);
                for (std::size_t q = 0; q < n; ++q) b[q] = BigInt(signs[t][q] * grp.c[q]) * pick[q]->gamma;
                total += static_cast<long double>(S(b, k)) * integ[t] / w;
            }
            return;
        }
        for (const auto& cs : per[j]) {
            double wn = w * cs.weight;
            if (wn > tr.struct_bound * (1 + 1e-12)) break;
            pick[j] = &cs;
            rec(j + 1, wn);
        }
    };
    rec(0, 1.0);
    if (!odd) total *= std::pow(2.0L, static_cast<long double>(n));
    res.value = static_cast<double>(total);
    return res;
}

// ---------------------------------------------------------------- assembly

namespace {

std::string interval_str(const Interval& v) {
    std::ostringstream os;
    os << v.str(12);
    return os.str();
}

BigInt factorial_big(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

RatVec growth_weights(const SubvarietySpec& spec) {
    const auto& g = spec.tv.grading;
    auto groups = classify_groups(spec);
    RatVec varpi(g.s, 0);
    for (int i = 0; i < g.s; ++i) {
        const auto& st = groups[i];
        Rational inv = 0;
        for (int j = 0; j < g.n[i]; ++j) inv += Rational(1, spec.m[g.coord(i, j)]);
        switch (st.kind) {
            case GroupKind::free: varpi[i] = inv; break;
            case GroupKind::linear: varpi[i] = g.n[i] - static_cast<int>(st.forms.size()); break;
            case GroupKind::diagonal: varpi[i] = inv - st.e; break;
            case GroupKind::bihomogeneous:
                varpi[i] = g.n[i] - static_cast<int>(st.polys.size()) * static_cast<int>(st.e);
                break;
            default:
                throw HypothesisError("group " + std::to_string(i + 1) +
                                      ": polynomials are neither linear, diagonal nor bihomogeneous; no main-term constant");
        }
        if (varpi[i] <= 0) throw HypothesisError("varpi_" + std::to_string(i + 1) + " = " + to_string(varpi[i]) + " is not positive");
    }
    return varpi;
}

ConstantReport assemble_constant(const SubvarietySpec& spec, const AssemblyOptions& opt) {
    ConstantReport rep;
    const auto& tv = spec.tv;
    const auto& g = tv.grading;
    auto hyp = check_hypotheses(spec);
    rep.hypotheses = to_json(hyp);
    if (spec.theorem != TheoremTag::none && !hyp.pass) {
        std::string failed;
        for (const auto& c : hyp.checks)
            if (!c.pass) failed += (failed.empty() ? "" : "; ") + c.name + " [" + c.detail + "]";
        throw HypothesisError("hypotheses of the " + std::string(to_string(spec.theorem)) + " theorem fail: " + failed);
    }
    HeightData hd = local_trivialization(spec.L, tv);
    if (hd.positivity == Positivity::not_semiample) throw InputError("L is not semiample");

    auto groups = classify_groups(spec);
    rep.varpi = growth_weights(spec);
    std::ostringstream structure;
    bool has_bihom = false, has_diag = false, has_mfull = false;
    for (int i = 0; i < g.s; ++i) {
        const auto& st = groups[i];
        if (st.kind == GroupKind::free && rep.varpi[i] != g.n[i]) has_mfull = true;
        if (st.kind == GroupKind::diagonal) has_diag = true;
        if (st.kind == GroupKind::bihomogeneous) has_bihom = true;
        structure << (i ? ", " : "") << to_string(st.kind);
    }
    rep.structure = structure.str();
    if (has_bihom && (has_diag || has_mfull))
        throw HypothesisError("bihomogeneous groups combine only with free m = 1 groups");

    auto P = solve_polytope(hd, tv, rep.varpi);
    rep.a = P.a;
    rep.k = P.k;
    rep.b = P.k + 1;
    rep.slice = slice_constant_cP(P);
    rep.detail["polytope"] = to_json(P);
    {
        const Rational delta = rep.slice.threshold / 2;
        const std::uint64_t samples = 200000;
        auto [est, se] = slice_volume_mc(P, delta, 0, samples, opt.seed);
        rep.detail["slice_monte_carlo"] = {{"delta", to_string(delta)},
                                           {"exact", to_double(slice_volume(P, delta, 0))},
                                           {"estimate", est},
                                           {"std_error", se},
                                           {"samples", samples},
                                           {"seed", opt.seed}};
    }
    const int s = g.s;
    const BigInt fact = factorial_big(s - 1 - P.k);
    rep.factors.push_back({"(s-1-k)!", fact.str(), fact.convert_to<double>(), "exact"});
    rep.factors.push_back({"c_P", to_string(rep.slice.cP), to_double(rep.slice.cP), "exact"});
    const Rational two_r = Rational(1, BigInt(1) << g.r);
    rep.factors.push_back({"2^-r", to_string(two_r), to_double(two_r), "exact"});
    Interval prefactor = Interval::from_rational(Rational(fact) * rep.slice.cP * two_r);

    auto mu = build_mu_table(tv);
    const unsigned threads = opt.threads;

    if (has_bihom) {
        RatVec beta(s);
        for (int i = 0; i < s; ++i) beta[i] = rep.varpi[i];
        if (!spec.circle_constant) throw InputError("bihomogeneous constant C must be user-supplied (circle_method_constant)");
        auto ep = mu_sum_euler(beta, mu, opt.prime_bound, threads);
        rep.mu_sum = ep.value;
        rep.mu_sum_provenance = "Euler product, primes <= " + std::to_string(opt.prime_bound) +
                                (ep.tail_finite ? " with rigorous tail" : " (tail unbounded)");
        rep.detail["mu_sum"] = to_json(ep);
        double C = *spec.circle_constant;
        rep.factors.push_back({"C (circle method)", std::to_string(C), C, "user-supplied"});
        rep.c = prefactor * Interval::from_bounds(C, C) * rep.mu_sum;
        rep.c_exact_enclosure = false;
        return rep;
    }

    if (!has_diag) {
        // C_{M,d} = K prod_i g_i(d_i) with multiplicative g_i
        Interval K(1);
        bool pure_powers = !has_mfull;
        std::vector<Rational> beta(s);
        std::vector<long long> Mbound(s, 1);
        for (int i = 0; i < s; ++i) {
            const auto& st = groups[i];
            if (st.kind == GroupKind::linear) {
                Rational ci = linear_lattice_constant(st.forms);
                rep.factors.push_back({"c_" + std::to_string(i + 1) + " (linear lattice constant)", to_string(ci),
                                       to_double(ci), "exact"});
                K = K * Interval::from_rational(ci);
                beta[i] = rep.varpi[i];
                continue;
            }
            Rational two_n = Rational(BigInt(1) << g.n[i]);
            K = K * Interval::from_rational(two_n);
            rep.factors.push_back({"2^n_" + std::to_string(i + 1), to_string(two_n), to_double(two_n), "exact"});
            beta[i] = g.n[i];
            for (int j = 0; j < g.n[i]; ++j) {
                unsigned m = spec.m[g.coord(i, j)];
                Mbound[i] *= m;
                if (m == 1) continue;
                auto dens = m_full_density(m, 1, opt.prime_bound, threads);
                K = K * dens.value;
                rep.factors.push_back({"c_{" + std::to_string(m) + ",1} (group " + std::to_string(i + 1) + ")",
                                       interval_str(dens.value), dens.value.mid(),
                                       "truncated(primes <= " + std::to_string(opt.prime_bound) + ") with rigorous tail"});
            }
        }
        EulerProduct ep;
        if (pure_powers) {
            ep = mu_sum_euler(beta, mu, opt.prime_bound, threads);
        } else {
            Rational f = f_beta(beta, mu);
            if (f <= 1) throw HypothesisError("f_beta = " + to_string(f) + " <= 1: C_{M,d} not compatible with Moebius inversion");
            Rational C = 0;
            for (std::uint32_t e = 1; e < (1u << s); ++e) {
                if (!mu.mu[e]) continue;
                long long w = std::abs(mu.mu[e]);
                for (int i = 0; i < s; ++i)
                    if (e >> i & 1) w *= Mbound[i];
                C += w;
            }
            auto local = [&](std::uint64_t p) {
                std::vector<Interval> gp(s);
                for (int i = 0; i < s; ++i) {
                    Interval v(1);
                    if (groups[i].kind == GroupKind::linear) {
                        v = Interval::pow_neg(p, beta[i]);
                    } else {
                        for (int j = 0; j < g.n[i]; ++j) v = v * m_full_local_ratio(spec.m[g.coord(i, j)], p);
                    }
                    gp[i] = v;
                }
                Interval acc(0);
                for (std::uint32_t e = 0; e < (1u << s); ++e) {
                    if (!mu.mu[e]) continue;
                    Interval term(mu.mu[e]);
                    for (int i = 0; i < s; ++i)
                        if (e >> i & 1) term = term * gp[i];
                    acc = acc + term;
                }
                return acc;
            };
            ep = euler_product_fn(local, f, C, opt.prime_bound, threads);
        }
        rep.mu_sum = ep.value;
        rep.mu_sum_provenance = "Euler product, primes <= " + std::to_string(opt.prime_bound) +
                                (ep.tail_finite ? " with rigorous tail" : " (tail unbounded)");
        rep.detail["mu_sum"] = to_json(ep);
        rep.c = prefactor * K * rep.mu_sum;
        rep.c_exact_enclosure = ep.tail_finite;
        return rep;
    }

    // diagonal groups: truncated d-sum
    std::map<std::pair<int, std::uint64_t>, double> cache;
    auto group_factor = [&](int i, std::uint64_t d) -> double {
        auto key = std::make_pair(i, d);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const auto& st = groups[i];
        double v;
        if (st.kind == GroupKind::diagonal) {
            v = diagonal_constant(st.diag, d, opt.diag).value;
        } else if (st.kind == GroupKind::linear) {
            v = to_double(linear_lattice_constant(st.forms)) * std::pow(static_cast<double>(d), -to_double(rep.varpi[i]));
        } else {
            v = std::ldexp(1.0, g.n[i]);
            for (int j = 0; j < g.n[i]; ++j) v *= m_full_density(spec.m[g.coord(i, j)], d, opt.prime_bound, threads).value.mid();
        }
        cache.emplace(key, v);
        return v;
    };
    std::vector<std::uint64_t> sqf;
    for (std::uint64_t d = 1; d <= opt.d_bound; ++d)
        if (is_squarefree_u64(d)) sqf.push_back(d);
    long double sum = 0;
    std::vector<std::uint64_t> d(s, 1);
    std::function<void(int)> rec = [&](int i) {
        if (i == s) {
            int m = mu_global(d, mu);
            if (!m) return;
            long double prod = m;
            for (int q = 0; q < s; ++q) prod *= group_factor(q, d[q]);
            sum += prod;
            return;
        }
        for (auto v : sqf) {
            d[i] = v;
            rec(i + 1);
        }
        d[i] = 1;
    };
    rec(0);
    for (int i = 0; i < s; ++i)
        if (groups[i].kind == GroupKind::diagonal) {
            auto r = diagonal_constant(groups[i].diag, 1, opt.diag);
            rep.factors.push_back({"c_{e,1} (group " + std::to_string(i + 1) + ")", std::to_string(r.value), r.value, r.label});
            rep.detail["diagonal_group_" + std::to_string(i + 1)] = to_json(r);
        }
    rep.mu_sum = Interval::from_bounds(static_cast<double>(sum), static_cast<double>(sum));
    rep.mu_sum_provenance = "truncated d-sum, d_i <= " + std::to_string(opt.d_bound) + " (includes the C_{M,d} factors)";
    rep.c = prefactor * rep.mu_sum;
    rep.c_exact_enclosure = false;
    return rep;
}

// ---------------------------------------------------------------- fit

FitResult empirical_fit(const std::vector<std::pair<double, double>>& points, const Rational& a, int k) {
    if (points.size() < 3) throw InputError("empirical_fit needs at least 3 points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].first > points[i - 1].first)) throw InputError("B values must be strictly increasing");
    if (points.front().first <= 1) throw InputError("B values must exceed 1");
    const double ad = to_double(a);
    FitResult out;
    std::vector<double> x, y;
    for (auto [B, N] : points) {
        double L = std::log(B);
        double scale = std::pow(B, ad) * std::pow(L, k);
        x.push_back(1 / L);
        y.push_back(N / scale);
        out.ratios.push_back(N / scale);
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    double spread = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
    if (spread <= 1e-9 * std::fabs(sx / n) || det <= 0)
        throw InputError("fit is ill-conditioned: the B range is too narrow");
    out.c_hat = (sxx * sy - sx * sxy) / det;
    out.c_prime = (n * sxy - sx * sy) / det;
    // condition number of the design matrix [1, 1/log B]
    double tr = n + sxx, dd = det;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - dd));
    double l1 = tr / 2 + disc, l2 = tr / 2 - disc;
    out.condition = l2 > 0 ? std::sqrt(l1 / l2) : INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double fit = out.c_hat + out.c_prime * x[i];
        out.residuals.push_back((y[i] - fit) / y[i]);
    }
    return out;
}

// ---------------------------------------------------------------- json

nlohmann::json to_json(const GrowthPolytope& P) {
    nlohmann::json j;
    auto vec = [](const RatVec& v) {
        auto a = nlohmann::json::array();
        for (const auto& q : v) a.push_back(to_string(q));
        return a;
    };
    j["varpi"] = vec(P.varpi);
    auto H = nlohmann::json::array();
    for (const auto& h : P.H) H.push_back({{"a", vec(h.a)}, {"b", to_string(h.b)}});
    j["halfspaces"] = H;
    auto V = nlohmann::json::array();
    for (const auto& v : P.vertices) V.push_back(vec(v.x));
    j["vertices"] = V;
    j["a"] = to_string(P.a);
    j["k"] = P.k;
    auto F = nlohmann::json::array();
    for (auto idx : P.face) F.push_back(vec(P.vertices[idx].x));
    j["optimal_face"] = F;
    return j;
}

nlohmann::json to_json(const SliceConstant& S) {
    nlohmann::json j;
    j["c_P"] = to_string(S.cP);
    j["order"] = S.order;
    j["threshold"] = to_string(S.threshold);
    auto c = nlohmann::json::array();
    for (const auto& q : S.coeffs) c.push_back(to_string(q));
    j["slice_polynomial"] = c;
    j["projections_checked"] = S.projections.size();
    return j;
}

nlohmann::json to_json(const DiagonalResult& r) {
    nlohmann::json j;
    j["value"] = r.value;
    j["label"] = r.label;
    j["structures"] = r.structures;
    j["q_max"] = r.truncation.q_max;
    j["lambda_max"] = r.truncation.lambda_max;
    j["struct_bound"] = r.truncation.struct_bound;
    j["integral_quadrature_error"] = r.integral_quadrature_error;
    j["integral_tail_estimate"] = r.integral_tail_estimate;
    j["trivial_singular_series"] = r.trivial_singular_series;
    auto I = nlohmann::json::array();
    for (const auto& [eps, v] : r.singular_integrals) I.push_back({{"signs", eps}, {"value", v}});
    j["singular_integrals"] = I;
    return j;
}

nlohmann::json to_json(const ConstantReport& r) {
    nlohmann::json j;
    auto vp = nlohmann::json::array();
    for (const auto& q : r.varpi) vp.push_back(to_string(q));
    j["varpi"] = vp;
    j["a"] = to_string(r.a);
    j["k"] = r.k;
    j["b"] = r.b;
    j["b_note"] = "b = k + 1; read as rk Pic(V) only if Pic(X) and Pic(V) agree, which is assumed and not checked";
    j["group_structure"] = r.structure;
    j["slice"] = to_json(r.slice);
    auto F = nlohmann::json::array();
    for (const auto& f : r.factors)
        F.push_back({{"name", f.name}, {"value", f.value}, {"approx", f.approx}, {"provenance", f.provenance}});
    j["factors"] = F;
    j["mu_sum"] = {{"value", r.mu_sum.str(15)}, {"approx", r.mu_sum.mid()}, {"provenance", r.mu_sum_provenance}};
    j["c"] = {{"enclosure", r.c.str(15)}, {"approx", r.c.mid()}, {"rigorous_enclosure", r.c_exact_enclosure}};
    j["hypotheses"] = r.hypotheses;
    j["detail"] = r.detail;
    return j;
}

nlohmann::json to_json(const FitResult& f) {
    nlohmann::json j;
    j["c_hat"] = f.c_hat;
    j["c_prime"] = f.c_prime;
    j["residuals"] = f.residuals;
    j["ratios"] = f.ratios;
    j["condition"] = f.condition;
    return j;
}

}  // namespace torcount
