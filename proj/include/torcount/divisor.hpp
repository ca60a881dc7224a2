#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "torcount/fan.hpp"
#include "torcount/matrix.hpp"

namespace torcount {

// Coefficients a_{i,j} indexed by flattened coordinate.
struct TorusDivisor {
    RatVec a;
    BigInt denom = 1;               // lcm of denominators
    std::vector<BigInt> cleared;    // denom * a
};

TorusDivisor make_divisor(RatVec coord_coeffs);
// coefficients given in input ray order
TorusDivisor divisor_from_rays(const ToricVariety& tv, const RatVec& per_ray);
TorusDivisor anticanonical(const ToricVariety& tv);
std::vector<Rational> divisor_class(const ToricVariety& tv, const TorusDivisor& D);

enum class Positivity { ample, semiample_not_ample, not_semiample };
const char* to_string(Positivity p);

struct HeightData {
    std::vector<RatVec> u;            // per cone, the character u_{sigma,L}
    std::vector<RatVec> alpha;        // per cone, per coordinate
    std::vector<RatVec> alpha_group;  // per cone, per group
    BigInt N = 1;                     // heights are evaluated as H^N
    // per equivalence class: N * alpha_{i,sigma}; meaningful for evaluation only when semiample
    std::vector<std::vector<std::int64_t>> class_exps;
    std::vector<std::vector<std::int64_t>> cone_coord_exps;  // per cone: N * alpha_{i,j,sigma}
    Positivity positivity = Positivity::not_semiample;
};

HeightData local_trivialization(const TorusDivisor& D, const ToricVariety& tv);
Positivity positivity_class(const HeightData& hd, const ToricVariety& tv);

// Torsor point entries indexed by flattened coordinate.
using TorsorPoint = std::vector<std::int64_t>;

std::vector<std::uint64_t> group_maxima(const TorsorPoint& x, const GradingData& g);
// max over class representatives of prod_i y_i^{N alpha_{i,sigma}}
BigInt height_eval(const HeightData& hd, const ToricVariety& tv, const TorsorPoint& x);
// max over all cones of prod_{(i,j)} |x_{i,j}|^{N alpha_{i,j,sigma}}
BigInt height_eval_ungrouped(const HeightData& hd, const ToricVariety& tv, const TorsorPoint& x);

nlohmann::json to_json(const HeightData& hd, const ToricVariety& tv);

}  // namespace torcount
