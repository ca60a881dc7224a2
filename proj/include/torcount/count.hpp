#pragma once

#include <cstdint>
#include <vector>

#include "torcount/divisor.hpp"
#include "torcount/moebius.hpp"
#include "torcount/spec.hpp"

namespace torcount {

struct CountOptions {
    unsigned threads = 0;          // 0 = hardware concurrency
    double budget = 5e9;           // ceiling on the predicted number of enumeration leaves
    bool force_general = false;    // skip the factorized fast path
};

// Everything about a spec that does not depend on B.
struct CountContext {
    const SubvarietySpec* spec = nullptr;
    HeightData hd;
    std::vector<std::vector<unsigned>> rows;  // N*alpha per class, dominated rows removed
    std::vector<Rational> box_exponent;       // c_i = max u_i over the growth polytope
    LocalMuTable mu;
    bool factorizable = false;                 // every polynomial lives in a single group
    std::vector<std::vector<int>> group_polys; // polynomials per group (factorizable case)
    std::vector<unsigned> group_mmin;
};

CountContext make_count_context(const SubvarietySpec& spec);

// floor(B^N); negative if B < 1 (nothing to count)
BigInt height_bound(const Rational& B, const BigInt& N);
std::vector<std::uint64_t> box_bounds(const CountContext& ctx, const Rational& B);

bool coprimality_test(const TorsorPoint& x, const ToricVariety& tv);

BigInt count_A(const CountContext& ctx, const Rational& B, const std::vector<std::uint64_t>& d,
               const CountOptions& opt = {});
BigInt count_direct(const CountContext& ctx, const Rational& B, const CountOptions& opt = {});
BigInt count_NV(const CountContext& ctx, const Rational& B, const CountOptions& opt = {});

// #{u in Z_{>0}^n : max_j gamma_j u_j^{k_j} <= bound_j, sum c_j gamma_j u_j^{k_j} = 0}
std::uint64_t count_diagonal_box(const std::vector<std::int64_t>& c, const std::vector<std::uint64_t>& gamma,
                                 const std::vector<unsigned>& exps, const std::vector<std::uint64_t>& bounds);

}  // namespace torcount
