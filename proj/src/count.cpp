#include "torcount/count.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "torcount/errors.hpp"
#include "torcount/mfull.hpp"
#include "torcount/parallel.hpp"
#include "torcount/polytope.hpp"
#include "torcount/primes.hpp"

namespace torcount {

namespace {

constexpr std::uint64_t kNone = UINT64_MAX;

u128 checked_mul(u128 a, u128 b) {
    u128 r;
    if (__builtin_mul_overflow(a, b, &r) || r >= kSatCap) throw BudgetError("count exceeds the 126-bit accumulator");
    return r;
}

u128 checked_add(u128 a, u128 b) {
    u128 r = a + b;
    if (r < a || r >= kSatCap) throw BudgetError("count exceeds the 126-bit accumulator");
    return r;
}

// Candidate absolute values for one coordinate, ascending.
struct Cand {
    std::uint64_t step = 1, n = 0;  // arithmetic: step*k for k = 1..n
    std::shared_ptr<const std::vector<std::uint64_t>> list;

    std::size_t size() const { return list ? list->size() : n; }
    std::uint64_t at(std::size_t k) const { return list ? (*list)[k] : step * (k + 1); }
    std::uint64_t first() const { return size() ? at(0) : kNone; }
    std::uint64_t count_le(std::uint64_t Y) const {
        if (list) return std::upper_bound(list->begin(), list->end(), Y) - list->begin();
        return std::min(n, Y / step);
    }
    bool contains(std::uint64_t v) const {
        if (list) return std::binary_search(list->begin(), list->end(), v);
        return v % step == 0 && v / step >= 1 && v / step <= n;
    }
    std::uint64_t next_after(std::uint64_t y) const {
        if (list) {
            auto it = std::upper_bound(list->begin(), list->end(), y);
            return it == list->end() ? kNone : *it;
        }
        std::uint64_t k = y / step + 1;
        return k > n ? kNone : step * k;
    }
};

Cand make_cand(std::uint64_t bound, unsigned m, std::uint64_t d) {
    Cand c;
    if (m == 1) {
        c.step = d;
        c.n = bound / d;
    } else {
        c.list = std::make_shared<const std::vector<std::uint64_t>>(enumerate_m_full(bound, m, d));
    }
    return c;
}

using Rows = std::vector<std::vector<unsigned>>;

u128 row_value(const std::vector<unsigned>& a, const std::uint64_t* y) {
    u128 v = 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i]) v = sat_mul(v, sat_pow(y[i], a[i]));
    return v;
}

u128 height_of(const Rows& rows, const std::uint64_t* y) {
    u128 h = 0;
    for (const auto& r : rows) h = std::max(h, row_value(r, y));
    return h;
}

// largest Y such that the height with y[g] = Y stays <= Bn (kNone if unconstrained, 0 if impossible)
std::uint64_t ymax_for(const Rows& rows, const std::uint64_t* y, int g, u128 Bn) {
    std::uint64_t res = kNone;
    for (const auto& r : rows) {
        u128 rest = 1;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (static_cast<int>(i) != g && r[i]) rest = sat_mul(rest, sat_pow(y[i], r[i]));
        if (rest > Bn) return 0;
        if (r[g] == 0) continue;
        res = std::min(res, iroot_u128(Bn / rest, r[g]));
    }
    return res;
}

struct GroupTable {
    std::vector<std::uint64_t> ys;
    std::vector<u128> prefix;
};

// Number of signed tuples of one group with max |x| = y, as a prefix-summable profile.
struct Profile {
    struct Factor {
        Cand cand;
        unsigned mult;
    };
    std::vector<Factor> factors;
    std::shared_ptr<const GroupTable> table;
    std::uint64_t scale = 1;

    u128 F(std::uint64_t Y) const {
        if (table) {
            if (Y == kNone) return table->prefix.empty() ? 0 : table->prefix.back();
            auto idx = std::upper_bound(table->ys.begin(), table->ys.end(), Y / scale) - table->ys.begin();
            return idx ? table->prefix[idx - 1] : 0;
        }
        u128 v = 1;
        for (const auto& f : factors) {
            u128 c = 2 * static_cast<u128>(f.cand.count_le(Y));
            for (unsigned k = 0; k < f.mult; ++k) v = checked_mul(v, c);
        }
        return v;
    }

    std::uint64_t first() const {
        if (table) return table->ys.empty() ? kNone : table->ys.front() * scale;
        if (factors.empty()) return 1;
        std::uint64_t y = 0;
        for (const auto& f : factors) y = std::max(y, f.cand.first());
        return y;
    }

    // fn(y, f(y)) over the support in increasing order; fn returns false to stop
    template <class Fn>
    void for_support(Fn&& fn) const {
        if (table) {
            for (std::size_t k = 0; k < table->ys.size(); ++k) {
                u128 f = table->prefix[k] - (k ? table->prefix[k - 1] : 0);
                if (f && !fn(table->ys[k] * scale, f)) return;
            }
            return;
        }
        if (factors.empty()) {
            fn(std::uint64_t{1}, u128{1});
            return;
        }
        std::uint64_t y = 0;
        u128 prev = 0;
        for (;;) {
            std::uint64_t nxt = kNone;
            for (const auto& f : factors) nxt = std::min(nxt, f.cand.next_after(y));
            if (nxt == kNone) return;
            y = nxt;
            u128 cur = F(y);
            if (cur != prev && !fn(y, cur - prev)) return;
            prev = cur;
        }
    }
};

// sum over y-tuples of prod_i f_i(y_i) subject to height <= Bn
class YSum {
public:
    YSum(const Rows& rows, u128 Bn, std::vector<int> order, std::vector<const Profile*> prof)
        : rows_(rows), Bn_(Bn), order_(std::move(order)), prof_(std::move(prof)) {
        const std::size_t L = order_.size(), R = rows_.size();
        suffix_.assign(L, std::vector<u128>(R, 1));
        for (std::size_t lvl = L; lvl-- > 0;)
            for (std::size_t r = 0; r < R; ++r) {
                u128 v = lvl + 1 < L ? suffix_[lvl + 1][r] : 1;
                if (lvl + 1 < L) {
                    int g = order_[lvl + 1];
                    std::uint64_t ym = prof_[g]->first();
                    if (ym == kNone) empty_ = true;
                    v = sat_mul(v, sat_pow(ym == kNone ? 1 : ym, rows_[r][g]));
                }
                suffix_[lvl][r] = v;
            }
        if (prof_[order_.back()]->first() == kNone) empty_ = true;
        partial_.assign(L + 1, std::vector<u128>(R, 1));
    }

    u128 run() {
        if (empty_) return 0;
        return rec(0);
    }

private:
    u128 rec(std::size_t lvl) {
        const int g = order_[lvl];
        const auto& part = partial_[lvl];
        if (lvl + 1 == order_.size()) {
            std::uint64_t Y = kNone;
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                if (part[r] > Bn_) return 0;
                if (rows_[r][g] == 0) continue;
                Y = std::min(Y, iroot_u128(Bn_ / part[r], rows_[r][g]));
            }
            return prof_[g]->F(Y);
        }
        u128 total = 0;
        auto& next = partial_[lvl + 1];
        prof_[g]->for_support([&](std::uint64_t y, u128 f) {
            u128 worst = 0;
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                next[r] = rows_[r][g] ? sat_mul(part[r], sat_pow(y, rows_[r][g])) : part[r];
                worst = std::max(worst, sat_mul(next[r], suffix_[lvl][r]));
            }
            if (worst > Bn_) return false;
            u128 sub = rec(lvl + 1);
            if (sub) total = checked_add(total, checked_mul(f, sub));
            return true;
        });
        return total;
    }

    const Rows& rows_;
    u128 Bn_;
    std::vector<int> order_;
    std::vector<const Profile*> prof_;
    std::vector<std::vector<u128>> suffix_;
    std::vector<std::vector<u128>> partial_;
    bool empty_ = false;
};

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

// Coprimality over class representatives, gcds given per group.
bool coprime_from_gcds(const std::vector<std::uint64_t>& g, const ConeIndexData& cones) {
    if (std::all_of(g.begin(), g.end(), [](std::uint64_t v) { return v == 1; })) return true;
    u128 G = 0;
    for (int rep : cones.reps) {
        const auto& I = cones.cones[rep].I;
        if (G == 0) {
            u128 P = 1;
            for (int i : I) {
                if (__builtin_mul_overflow(P, static_cast<u128>(g[i]), &P)) {
                    // rare: fall back to exact arithmetic
                    BigInt acc = 0;
                    for (int rep2 : cones.reps) {
                        BigInt p = 1;
                        for (int k : cones.cones[rep2].I) p *= g[k];
                        acc = gcd(acc, p);
                    }
                    return acc == 1;
                }
            }
            G = P;
        } else {
            // gcd(h, ab) = gcd(h, a) * gcd(h / gcd(h, a), b)
            u128 h = G, res = 1;
            for (int i : I) {
                u128 t = gcd_u128(h, g[i]);
                res *= t;
                h /= t;
            }
            G = res;
        }
        if (G == 1) return true;
    }
    return G == 1;
}

enum class LeafMode { count, coprime, histogram };

struct EPoly {
    struct Term {
        std::int64_t coeff;
        std::vector<std::pair<int, unsigned>> vars;  // (position, exponent)
    };
    std::vector<Term> terms;
};

// Depth-first enumeration over an ordered coordinate list.
struct Engine {
    // configuration
    std::vector<int> group_of_pos;
    std::vector<Cand> cand;
    std::vector<bool> is_signed;
    std::vector<EPoly> polys;
    std::vector<int> elim_at;                // polynomial eliminated at this position, or -1
    std::vector<std::vector<int>> check_at;  // polynomials verified once this position is set
    bool use_height = false;
    const Rows* rows = nullptr;
    u128 Bn = 0;
    std::vector<std::uint64_t> ymin;  // lower bound on y per group before assignment
    LeafMode mode = LeafMode::count;
    const ConeIndexData* cones = nullptr;
    int s = 0;

    // state
    std::vector<std::int64_t> x;
    std::vector<std::uint64_t> y;
    u128 leaves = 0;
    std::map<std::uint64_t, u128> hist;
    std::vector<std::uint64_t> gbuf;

    void run() {
        const int K = static_cast<int>(cand.size());
        x.assign(K, 0);
        y = ymin;
        gbuf.assign(s, 0);
        rec(0);
    }

    static i128 mul_checked(i128 a, i128 b) {
        i128 r;
        if (__builtin_mul_overflow(a, b, &r)) throw BudgetError("polynomial value overflows 128 bits");
        return r;
    }

    i128 term_value(const EPoly::Term& t, int skip_pos, bool& has_skip) const {
        i128 v = t.coeff;
        has_skip = false;
        for (auto [p, e] : t.vars) {
            if (p == skip_pos) {
                has_skip = true;
                continue;
            }
            for (unsigned k = 0; k < e; ++k) v = mul_checked(v, x[p]);
        }
        return v;
    }

    bool poly_zero(int l) const {
        i128 acc = 0;
        bool dummy;
        for (const auto& t : polys[l].terms) {
            i128 v = term_value(t, -1, dummy);
            if (__builtin_add_overflow(acc, v, &acc)) throw BudgetError("polynomial value overflows 128 bits");
        }
        return acc == 0;
    }

    bool height_ok() const { return !use_height || height_of(*rows, y.data()) <= Bn; }

    void leaf() {
        if (mode == LeafMode::count) {
            ++leaves;
        } else if (mode == LeafMode::histogram) {
            ++hist[y[group_of_pos[0]]];
        } else {
            std::fill(gbuf.begin(), gbuf.end(), 0);
            for (std::size_t p = 0; p < x.size(); ++p) {
                auto& gg = gbuf[group_of_pos[p]];
                gg = gcd_u64(gg, static_cast<std::uint64_t>(abs64(x[p])));
            }
            if (coprime_from_gcds(gbuf, *cones)) ++leaves;
        }
    }

    bool checks_pass(int pos) const {
        for (int l : check_at[pos])
            if (!poly_zero(l)) return false;
        return true;
    }

    void assign_and_descend(int pos, std::int64_t v) {
        x[pos] = v;
        if (checks_pass(pos)) rec(pos + 1);
    }

    void rec(int pos) {
        const int K = static_cast<int>(cand.size());
        if (pos == K) {
            leaf();
            return;
        }
        const int g = group_of_pos[pos];
        const Cand& c = cand[pos];
        const std::uint64_t ysave = y[g];

        if (elim_at[pos] >= 0) {
            i128 A = 0, C = 0;
            for (const auto& t : polys[elim_at[pos]].terms) {
                bool has;
                i128 v = term_value(t, pos, has);
                if (__builtin_add_overflow(has ? A : C, v, has ? &A : &C)) throw BudgetError("polynomial value overflows");
            }
            if (A != 0) {
                if (C % A != 0) return;
                i128 v = -C / A;
                if (v == 0) return;
                i128 av = v < 0 ? -v : v;
                if (av > static_cast<i128>(INT64_MAX) || !c.contains(static_cast<std::uint64_t>(av))) return;
                y[g] = std::max(ysave, static_cast<std::uint64_t>(av));
                if (height_ok()) assign_and_descend(pos, static_cast<std::int64_t>(v));
                y[g] = ysave;
                return;
            }
            if (C != 0) return;
        }

        if (mode == LeafMode::count && pos == K - 1 && check_at[pos].empty() && !is_signed[pos]) {
            // the last free coordinate is counted, not enumerated
            if (use_height) {
                if (height_of(*rows, y.data()) > Bn) return;
                std::uint64_t Y = ymax_for(*rows, y.data(), g, Bn);
                leaves += c.count_le(std::max(Y, ysave));
            } else {
                leaves += c.size();
            }
            return;
        }

        for (std::size_t k = 0; k < c.size(); ++k) {
            std::uint64_t v = c.at(k);
            y[g] = std::max(ysave, v);
            if (!height_ok()) break;
            assign_and_descend(pos, static_cast<std::int64_t>(v));
            if (is_signed[pos]) assign_and_descend(pos, -static_cast<std::int64_t>(v));
        }
        y[g] = ysave;
    }
};

struct Layout {
    std::vector<int> coords;  // enumeration order
    std::vector<int> pos_of;  // coordinate -> position (-1 if not enumerated)
};

// free groups first, then groups met by polynomials; each block by ascending bound
Layout make_layout(const CountContext& ctx, const std::vector<int>& groups, const std::vector<std::uint64_t>& bound) {
    const auto& spec = *ctx.spec;
    const auto& g = spec.tv.grading;
    std::vector<bool> in_poly(g.s, false);
    for (const auto& p : spec.polys)
        for (int i : p.groups(g)) in_poly[i] = true;
    std::vector<int> order = groups;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (in_poly[a] != in_poly[b]) return !in_poly[a];
        return bound[a] < bound[b];
    });
    Layout L;
    L.pos_of.assign(g.num_coords(), -1);
    for (int i : order)
        for (int j = 0; j < g.n[i]; ++j) {
            L.pos_of[g.coord(i, j)] = static_cast<int>(L.coords.size());
            L.coords.push_back(g.coord(i, j));
        }
    return L;
}

// Wires polynomials into the engine: last position of each polynomial eliminates or checks it.
void attach_polys(Engine& E, const CountContext& ctx, const Layout& L, const std::vector<int>& poly_ids) {
    const auto& spec = *ctx.spec;
    const int K = static_cast<int>(L.coords.size());
    E.elim_at.assign(K, -1);
    E.check_at.assign(K, {});
    E.is_signed.assign(K, false);
    for (int l : poly_ids) {
        const auto& p = spec.polys[l];
        EPoly ep;
        int last = -1;
        for (std::size_t k = 0; k < p.monomials.size(); ++k) {
            EPoly::Term t{p.coeffs[k], {}};
            for (auto [c, e] : p.monomials[k].vars) {
                int pos = L.pos_of[c];
                TORCOUNT_ASSERT(pos >= 0, "polynomial coordinates are enumerated");
                t.vars.emplace_back(pos, e);
                E.is_signed[pos] = true;
                last = std::max(last, pos);
            }
            ep.terms.push_back(std::move(t));
        }
        int idx = static_cast<int>(E.polys.size());
        E.polys.push_back(std::move(ep));
        if (last < 0) {
            // constant polynomial: nonzero constant kills everything
            if (p.coeffs.size() && std::accumulate(p.coeffs.begin(), p.coeffs.end(), std::int64_t{0}) != 0)
                E.check_at[0].push_back(idx);
            continue;
        }
        bool linear = true;
        for (const auto& t : E.polys[idx].terms)
            for (auto [pos, e] : t.vars)
                if (pos == last && e > 1) linear = false;
        if (linear && E.elim_at[last] < 0)
            E.elim_at[last] = idx;
        else
            E.check_at[last].push_back(idx);
    }
}

BigInt factor_pow2(int r) { return BigInt(1) << r; }

}  // namespace

CountContext make_count_context(const SubvarietySpec& spec) {
    CountContext ctx;
    ctx.spec = &spec;
    validate_spec(spec);
    const auto& tv = spec.tv;
    const auto& g = tv.grading;
    ctx.hd = local_trivialization(spec.L, tv);
    if (ctx.hd.positivity == Positivity::not_semiample) throw InputError("the height divisor L is not semiample");
    ctx.mu = build_mu_table(tv);

    for (const auto& e : ctx.hd.class_exps) {
        std::vector<unsigned> r;
        for (auto v : e) r.push_back(static_cast<unsigned>(v));
        ctx.rows.push_back(std::move(r));
    }
    std::sort(ctx.rows.begin(), ctx.rows.end());
    ctx.rows.erase(std::unique(ctx.rows.begin(), ctx.rows.end()), ctx.rows.end());
    Rows kept;
    for (std::size_t a = 0; a < ctx.rows.size(); ++a) {
        bool dominated = false;
        for (std::size_t b = 0; b < ctx.rows.size() && !dominated; ++b) {
            if (a == b) continue;
            bool le = true;
            for (int i = 0; i < g.s; ++i)
                if (ctx.rows[a][i] > ctx.rows[b][i]) le = false;
            dominated = le;
        }
        if (!dominated) kept.push_back(ctx.rows[a]);
    }
    ctx.rows = std::move(kept);

    // c_i = max u_i over {sum_i alpha_{i,sigma} u_i <= 1, u >= 0}
    std::vector<HalfSpace> H;
    for (int rep : tv.cones.reps) H.push_back({ctx.hd.alpha_group[rep], 1});
    for (int i = 0; i < g.s; ++i) {
        RatVec a(g.s, 0);
        a[i] = -1;
        H.push_back({a, 0});
    }
    if (!is_bounded(H, g.s)) throw InputError("growth polytope is unbounded; the height does not bound every group");
    auto verts = enumerate_vertices(H, g.s);
    ctx.box_exponent.assign(g.s, 0);
    for (const auto& v : verts)
        for (int i = 0; i < g.s; ++i) ctx.box_exponent[i] = std::max(ctx.box_exponent[i], v.x[i]);

    ctx.group_polys.assign(g.s, {});
    ctx.factorizable = true;
    for (std::size_t l = 0; l < spec.polys.size(); ++l) {
        auto gs = spec.polys[l].groups(g);
        if (gs.size() != 1)
            ctx.factorizable = false;
        else
            ctx.group_polys[gs[0]].push_back(static_cast<int>(l));
    }
    ctx.group_mmin.assign(g.s, UINT32_MAX);
    for (int c = 0; c < g.num_coords(); ++c)
        ctx.group_mmin[g.coord_group[c]] = std::min(ctx.group_mmin[g.coord_group[c]], spec.m[c]);
    return ctx;
}

BigInt height_bound(const Rational& B, const BigInt& N) {
    if (B < 1) return -1;
    if (N > 1000) throw BudgetError("denominator-clearing factor too large");
    return floor_power(B, Rational(N));
}

std::vector<std::uint64_t> box_bounds(const CountContext& ctx, const Rational& B) {
    std::vector<std::uint64_t> out;
    for (const auto& c : ctx.box_exponent) {
        BigInt v = B < 1 ? BigInt(0) : floor_power(B, c);
        if (v > BigInt(1) << 62) throw BudgetError("box bound " + v.str() + " exceeds 2^62");
        out.push_back(v.convert_to<std::uint64_t>());
    }
    return out;
}

bool coprimality_test(const TorsorPoint& x, const ToricVariety& tv) {
    const auto& g = tv.grading;
    std::vector<BigInt> gi(g.s, 0);
    for (int c = 0; c < g.num_coords(); ++c) {
        if (x[c] == 0) throw InputError("torsor point has a zero coordinate");
        gi[g.coord_group[c]] = gcd(gi[g.coord_group[c]], BigInt(abs64(x[c])));
    }
    BigInt acc = 0;
    for (int rep : tv.cones.reps) {
        BigInt p = 1;
        for (int i : tv.cones.cones[rep].I) p *= gi[i];
        acc = gcd(acc, p);
    }
    return acc == 1;
}

namespace {

struct Prepared {
    u128 Bn = 0;
    std::vector<std::uint64_t> box;
};

std::optional<Prepared> prepare(const CountContext& ctx, const Rational& B) {
    BigInt bn = height_bound(B, ctx.hd.N);
    if (bn < 0) return std::nullopt;
    if (bn >= BigInt(1) << 120) throw BudgetError("B^N = " + bn.str() + " exceeds the 120-bit height range");
    Prepared p;
    p.Bn = to_u128(bn);
    p.box = box_bounds(ctx, B);
    return p;
}

// y-cap for group i when every other group sits at its smallest possible value
std::uint64_t group_cap(const CountContext& ctx, const Prepared& P, int i, const std::vector<std::uint64_t>& ylow) {
    std::uint64_t Y = ymax_for(ctx.rows, ylow.data(), i, P.Bn);
    return std::min(Y, P.box[i]);
}

std::vector<std::uint64_t> d_floor(const CountContext& ctx, const std::vector<std::uint64_t>& d) {
    std::vector<std::uint64_t> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        u128 v = sat_pow(d[i], ctx.group_mmin[i]);
        y[i] = v > UINT64_MAX / 2 ? UINT64_MAX / 2 : static_cast<std::uint64_t>(v);
    }
    return y;
}

// Histogram of max |x| over tuples of group i satisfying its polynomials.
std::shared_ptr<const GroupTable> build_group_table(const CountContext& ctx, int i, std::uint64_t d, std::uint64_t cap,
                                                    double budget) {
    const auto& spec = *ctx.spec;
    const auto& g = spec.tv.grading;
    Layout L;
    L.pos_of.assign(g.num_coords(), -1);
    for (int j = 0; j < g.n[i]; ++j) {
        L.pos_of[g.coord(i, j)] = j;
        L.coords.push_back(g.coord(i, j));
    }
    Engine E;
    E.s = g.s;
    E.mode = LeafMode::histogram;
    for (int c : L.coords) {
        E.group_of_pos.push_back(i);
        E.cand.push_back(make_cand(cap, spec.m[c], d));
    }
    attach_polys(E, ctx, L, ctx.group_polys[i]);
    double cost = 1;
    for (std::size_t p = 0; p < E.cand.size(); ++p)
        if (E.elim_at[p] < 0) cost *= std::max<double>(1, static_cast<double>(E.cand[p].size()) * (E.is_signed[p] ? 2 : 1));
    if (cost > budget)
        throw BudgetError("group " + std::to_string(i + 1) + " enumeration needs ~" + std::to_string(cost) +
                          " leaves, above the budget " + std::to_string(budget));
    E.ymin.assign(g.s, 0);
    E.run();
    unsigned free_coords = 0;
    for (std::size_t p = 0; p < E.cand.size(); ++p)
        if (!E.is_signed[p]) ++free_coords;
    auto T = std::make_shared<GroupTable>();
    u128 acc = 0;
    for (auto& [y, cnt] : E.hist) {
        acc = checked_add(acc, checked_mul(cnt, static_cast<u128>(1) << free_coords));
        T->ys.push_back(y);
        T->prefix.push_back(acc);
    }
    return T;
}

// Per-group profile for modulus d_i, or nullptr if the group needs a per-d table that is not cached.
struct ProfileFactory {
    const CountContext& ctx;
    const Prepared& P;
    double budget;
    std::vector<std::shared_ptr<const GroupTable>> unit_tables;  // m == 1 groups with polynomials, d = 1
    std::vector<bool> all_m1;

    ProfileFactory(const CountContext& c, const Prepared& p, double b) : ctx(c), P(p), budget(b) {
        const auto& g = ctx.spec->tv.grading;
        unit_tables.resize(g.s);
        all_m1.assign(g.s, true);
        for (int cc = 0; cc < g.num_coords(); ++cc)
            if (ctx.spec->m[cc] != 1) all_m1[g.coord_group[cc]] = false;
        for (int i = 0; i < g.s; ++i)
            if (!ctx.group_polys[i].empty() && all_m1[i]) unit_tables[i] = build_group_table(ctx, i, 1, P.box[i], budget);
    }

    Profile make(int i, std::uint64_t d, std::uint64_t cap) const {
        const auto& spec = *ctx.spec;
        const auto& g = spec.tv.grading;
        Profile pr;
        if (!ctx.group_polys[i].empty()) {
            if (all_m1[i]) {
                pr.table = unit_tables[i];
                pr.scale = d;
            } else {
                pr.table = build_group_table(ctx, i, d, cap, budget);
            }
            return pr;
        }
        std::map<unsigned, unsigned> mult;
        for (int j = 0; j < g.n[i]; ++j) ++mult[spec.m[g.coord(i, j)]];
        for (auto [m, k] : mult) pr.factors.push_back({make_cand(cap, m, d), k});
        return pr;
    }
};

std::vector<int> group_order(const Prepared& P, int s) {
    std::vector<int> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return P.box[a] < P.box[b]; });
    return order;
}

u128 factorized_count_A(const CountContext& ctx, const Prepared& P, const ProfileFactory& F,
                        const std::vector<std::uint64_t>& d, const std::vector<int>& order,
                        const Profile* last_override = nullptr) {
    const int s = ctx.spec->tv.grading.s;
    auto ylow = d_floor(ctx, d);
    std::vector<Profile> profs(s);
    std::vector<const Profile*> ptrs(s);
    for (int i = 0; i < s; ++i) {
        if (last_override && i == order.back()) {
            ptrs[i] = last_override;
            continue;
        }
        profs[i] = F.make(i, d[i], group_cap(ctx, P, i, ylow));
        ptrs[i] = &profs[i];
    }
    return YSum(ctx.rows, P.Bn, order, ptrs).run();
}

// Generic engine over all coordinates for modulus d.
u128 engine_count(const CountContext& ctx, const Prepared& P, const std::vector<std::uint64_t>& d, LeafMode mode,
                  double budget) {
    const auto& spec = *ctx.spec;
    const auto& g = spec.tv.grading;
    std::vector<int> groups(g.s);
    std::iota(groups.begin(), groups.end(), 0);
    Layout L = make_layout(ctx, groups, P.box);
    auto ylow = d_floor(ctx, d);
    Engine E;
    E.s = g.s;
    E.mode = mode;
    E.cones = &spec.tv.cones;
    E.use_height = true;
    E.rows = &ctx.rows;
    E.Bn = P.Bn;
    for (int c : L.coords) {
        int i = g.coord_group[c];
        E.group_of_pos.push_back(i);
        E.cand.push_back(make_cand(group_cap(ctx, P, i, ylow), spec.m[c], d[i]));
    }
    std::vector<int> all_polys(spec.polys.size());
    std::iota(all_polys.begin(), all_polys.end(), 0);
    attach_polys(E, ctx, L, all_polys);
    E.ymin.assign(g.s, 1);
    for (std::size_t p = 0; p < E.cand.size(); ++p) {
        std::uint64_t f = E.cand[p].first();
        if (f == kNone) return 0;
        E.ymin[E.group_of_pos[p]] = std::max(E.ymin[E.group_of_pos[p]], f);
    }

    // budget: relaxed factorized count over the coordinates that are actually enumerated
    {
        std::vector<Profile> profs(g.s);
        std::vector<const Profile*> ptrs(g.s);
        std::vector<std::map<int, unsigned>> seen(g.s);
        for (std::size_t p = 0; p < E.cand.size(); ++p) {
            if (E.elim_at[p] >= 0) continue;
            profs[E.group_of_pos[p]].factors.push_back({E.cand[p], 1});
        }
        for (int i = 0; i < g.s; ++i) ptrs[i] = &profs[i];
        double est = static_cast<double>(YSum(ctx.rows, P.Bn, group_order(P, g.s), ptrs).run());
        if (est > budget)
            throw BudgetError("predicted enumeration cost ~" + std::to_string(est) + " leaves exceeds the budget " +
                              std::to_string(budget));
    }

    E.run();
    unsigned free_coords = 0;
    for (std::size_t p = 0; p < E.cand.size(); ++p)
        if (!E.is_signed[p]) ++free_coords;
    return checked_mul(E.leaves, static_cast<u128>(1) << free_coords);
}

// Enumerates squarefree d-tuples with mu(d) != 0 that can carry points, grouped by d of the last group.
class DSupport {
public:
    DSupport(const CountContext& ctx, const Prepared& P, std::vector<int> order)
        : ctx_(ctx), P_(P), order_(std::move(order)) {
        const int s = static_cast<int>(order_.size());
        // seq: last group first, then the others in order
        seq_.push_back(order_.back());
        for (int k = 0; k + 1 < s; ++k) seq_.push_back(order_[k]);
        const std::uint32_t full = 1u << s;
        ok_.assign(s, std::vector<char>(full, 0));
        for (int k = 0; k < s; ++k) {
            std::uint32_t future = 0;
            for (int t = k + 1; t < s; ++t) future |= 1u << seq_[t];
            for (std::uint32_t m = 1; m < full; ++m) {
                // some completion using only future groups has mu != 0
                bool any = false;
                for (std::uint32_t add = future;; add = (add - 1) & future) {
                    if (ctx_.mu.mu[m | add]) {
                        any = true;
                        break;
                    }
                    if (!add) break;
                }
                ok_[k][m] = any;
            }
        }
        std::vector<std::uint64_t> ones(s, 1);
        std::uint64_t dmax = 1;
        dmax_.assign(s, 1);
        for (int i = 0; i < s; ++i) {
            std::uint64_t Y = group_cap(ctx_, P_, i, ones);
            dmax_[i] = std::max<std::uint64_t>(1, iroot_u128(Y, ctx_.group_mmin[i]));
            dmax = std::max(dmax, dmax_[i]);
        }
        if (dmax > 200000000ULL) throw BudgetError("modulus range up to " + std::to_string(dmax) + " is too large");
        sieve_ = std::make_unique<Sieve>(static_cast<std::uint32_t>(dmax));
        for (std::uint64_t d = 1; d <= dmax_[seq_[0]]; ++d) {
            if (!sieve_->squarefree(static_cast<std::uint32_t>(d))) continue;
            if (d == 1 || ok_[0][1u << seq_[0]]) last_values_.push_back(d);
        }
    }

    const std::vector<std::uint64_t>& last_values() const { return last_values_; }

    // calls fn(d, mu) for every admissible tuple with d[last] = dl
    template <class Fn>
    void for_each(std::uint64_t dl, Fn&& fn) const {
        const int s = static_cast<int>(order_.size());
        std::vector<std::uint64_t> d(s, 1);
        d[seq_[0]] = dl;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pat;  // (prime, mask)
        for (auto [p, e] : sieve_->factor(static_cast<std::uint32_t>(dl))) pat.emplace_back(p, 1u << seq_[0]);
        auto ylow = d_floor(ctx_, d);
        if (height_of(ctx_.rows, ylow.data()) > P_.Bn) return;
        rec(1, d, pat, fn);
    }

private:
    template <class Fn>
    void rec(int k, std::vector<std::uint64_t>& d, std::vector<std::pair<std::uint32_t, std::uint32_t>>& pat,
             Fn& fn) const {
        const int s = static_cast<int>(order_.size());
        if (k == s) {
            int mu = 1;
            for (auto [p, m] : pat) mu *= ctx_.mu.mu[m];
            if (mu) fn(d, mu);
            return;
        }
        const int i = seq_[k];
        for (std::uint64_t v = 1; v <= dmax_[i]; ++v) {
            d[i] = v;
            auto ylow = d_floor(ctx_, d);
            if (height_of(ctx_.rows, ylow.data()) > P_.Bn) break;
            if (v > 1 && !sieve_->squarefree(static_cast<std::uint32_t>(v))) continue;
            std::size_t old = pat.size();
            std::vector<std::pair<std::size_t, std::uint32_t>> touched;
            if (v > 1)
                for (auto [p, e] : sieve_->factor(static_cast<std::uint32_t>(v))) {
                    bool found = false;
                    for (std::size_t t = 0; t < old; ++t)
                        if (pat[t].first == p) {
                            touched.emplace_back(t, pat[t].second);
                            pat[t].second |= 1u << i;
                            found = true;
                        }
                    if (!found) pat.emplace_back(p, 1u << i);
                }
            bool good = true;
            for (auto [p, m] : pat)
                if (!ok_[k][m]) {
                    good = false;
                    break;
                }
            if (good) rec(k + 1, d, pat, fn);
            for (auto [t, m] : touched) pat[t].second = m;
            pat.resize(old);
        }
        d[i] = 1;
    }

    const CountContext& ctx_;
    const Prepared& P_;
    std::vector<int> order_;
    std::vector<int> seq_;
    std::vector<std::vector<char>> ok_;
    std::vector<std::uint64_t> dmax_;
    std::unique_ptr<Sieve> sieve_;
    std::vector<std::uint64_t> last_values_;
};

}  // namespace

BigInt count_A(const CountContext& ctx, const Rational& B, const std::vector<std::uint64_t>& d, const CountOptions& opt) {
    const auto& g = ctx.spec->tv.grading;
    if (static_cast<int>(d.size()) != g.s) throw InputError("modulus tuple has the wrong length");
    for (auto v : d) {
        if (v == 0) throw InputError("moduli must be positive");
        if (!is_squarefree_u64(v)) throw InputError("moduli must be squarefree");
    }
    auto P = prepare(ctx, B);
    if (!P) return 0;
    if (ctx.factorizable && !opt.force_general) {
        ProfileFactory F(ctx, *P, opt.budget);
        return from_u128(factorized_count_A(ctx, *P, F, d, group_order(*P, g.s)));
    }
    return from_u128(engine_count(ctx, *P, d, LeafMode::count, opt.budget));
}

BigInt count_direct(const CountContext& ctx, const Rational& B, const CountOptions& opt) {
    const auto& g = ctx.spec->tv.grading;
    auto P = prepare(ctx, B);
    if (!P) return 0;
    u128 total = engine_count(ctx, *P, std::vector<std::uint64_t>(g.s, 1), LeafMode::coprime, opt.budget);
    u128 unit = static_cast<u128>(1) << g.r;
    if (total % unit != 0)
        throw InvariantError("direct count " + u128_to_string(total) + " is not divisible by 2^r");
    return from_u128(total / unit);
}

BigInt count_NV(const CountContext& ctx, const Rational& B, const CountOptions& opt) {
    const auto& g = ctx.spec->tv.grading;
    auto P = prepare(ctx, B);
    if (!P) return 0;
    auto order = group_order(*P, g.s);
    DSupport sup(ctx, *P, order);
    const auto& lasts = sup.last_values();
    std::vector<i128> part(lasts.size(), 0);
    const bool fast = ctx.factorizable && !opt.force_general;
    std::unique_ptr<ProfileFactory> F;
    if (fast) F = std::make_unique<ProfileFactory>(ctx, *P, opt.budget);
    const int last = order.back();
    parallel_for(lasts.size(), resolve_threads(opt.threads), [&](std::size_t k) {
        const std::uint64_t dl = lasts[k];
        i128 acc = 0;
        if (fast) {
            std::vector<std::uint64_t> ylow(g.s, 1);
            ylow[last] = 1;
            // the last profile only depends on d_last; its cap assumes the others at their minimum
            Profile lastp = F->make(last, dl, group_cap(ctx, *P, last, ylow));
            sup.for_each(dl, [&](const std::vector<std::uint64_t>& d, int mu) {
                u128 a = factorized_count_A(ctx, *P, *F, d, order, &lastp);
                acc += static_cast<i128>(mu) * static_cast<i128>(a);
            });
        } else {
            sup.for_each(dl, [&](const std::vector<std::uint64_t>& d, int mu) {
                u128 a = engine_count(ctx, *P, d, LeafMode::count, opt.budget);
                acc += static_cast<i128>(mu) * static_cast<i128>(a);
            });
        }
        part[k] = acc;
    });
    i128 total = 0;
    for (auto v : part) total += v;
    i128 unit = static_cast<i128>(1) << g.r;
    if (total < 0 || total % unit != 0)
        throw InvariantError("Moebius sum " + i128_to_string(total) + " is not a nonnegative multiple of 2^r");
    return from_u128(static_cast<u128>(total / unit));
}

std::uint64_t count_diagonal_box(const std::vector<std::int64_t>& c, const std::vector<std::uint64_t>& gamma,
                                 const std::vector<unsigned>& exps, const std::vector<std::uint64_t>& bounds) {
    const std::size_t n = c.size();
    if (n == 0 || gamma.size() != n || exps.size() != n || (bounds.size() != n && bounds.size() != 1))
        throw InputError("count_diagonal_box: inconsistent argument lengths");
    // admissible terms c_j gamma_j u^k per coordinate
    std::vector<std::vector<i128>> vals(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::uint64_t bound = bounds.size() == 1 ? bounds[0] : bounds[j];
        for (std::uint64_t u = 1;; ++u) {
            u128 w = sat_mul(gamma[j], sat_pow(u, exps[j]));
            if (w > bound) break;
            vals[j].push_back(static_cast<i128>(c[j]) * static_cast<i128>(w));
        }
    }
    const std::size_t h = n / 2;
    std::unordered_map<std::int64_t, std::uint64_t> left;
    std::vector<i128> sums{0};
    for (std::size_t j = 0; j < h; ++j) {
        std::vector<i128> next;
        next.reserve(sums.size() * vals[j].size());
        for (auto a : sums)
            for (auto b : vals[j]) next.push_back(a + b);
        sums.swap(next);
    }
    for (auto v : sums) ++left[static_cast<std::int64_t>(v)];
    std::uint64_t total = 0;
    std::vector<i128> right{0};
    for (std::size_t j = h; j < n; ++j) {
        std::vector<i128> next;
        next.reserve(right.size() * vals[j].size());
        for (auto a : right)
            for (auto b : vals[j]) next.push_back(a + b);
        right.swap(next);
    }
    for (auto v : right) {
        auto it = left.find(static_cast<std::int64_t>(-v));
        if (it != left.end()) total += it->second;
    }
    return total;
}

}  // namespace torcount
