#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "torcount/divisor.hpp"
#include "torcount/fan.hpp"

namespace torcount {

struct Monomial {
    std::vector<std::pair<int, unsigned>> vars;  // (coordinate, exponent), coordinates ascending
};

struct CoxPolynomial {
    std::vector<std::int64_t> coeffs;
    std::vector<Monomial> monomials;
    std::optional<std::vector<BigInt>> declared_degree;

    std::vector<int> coordinates() const;  // sorted, distinct
    std::vector<int> groups(const GradingData& g) const;
};

enum class TheoremTag { none, linear, bihomogeneous, campana_diagonal };
const char* to_string(TheoremTag t);

struct SubvarietySpec {
    std::string name;
    ToricVariety tv;
    std::vector<CoxPolynomial> polys;
    std::vector<unsigned> m;  // per coordinate
    TorusDivisor L;
    std::string divisor_source;  // "explicit", "anticanonical" or "adjoint"
    TheoremTag theorem = TheoremTag::none;
    bool semiample_override = false;
    std::optional<double> circle_constant;            // bihomogeneous C, user-supplied
    std::optional<std::array<long long, 2>> dim_vstar;  // dim V_1^*, dim V_2^*, user-supplied
};

SubvarietySpec spec_from_json(const nlohmann::json& j);
SubvarietySpec load_spec(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

struct GradedSpecReport {
    int t = 0;
    std::vector<std::vector<BigInt>> degrees;  // per polynomial
    std::string note = "V meets the open torus: user assertion, not decided";
};

// Throws InputError naming the first inhomogeneous monomial pair.
GradedSpecReport validate_spec(const SubvarietySpec& spec);
std::vector<BigInt> monomial_degree(const Monomial& mono, const GradingData& g);

// Sum_j (1/m_{ij}) D_{ij} minus the divisor of the first monomial of each polynomial.
TorusDivisor adjoint_divisor(const ToricVariety& tv, const std::vector<CoxPolynomial>& polys,
                             const std::vector<unsigned>& m);

nlohmann::json to_json(const GradedSpecReport& r);

}  // namespace torcount
