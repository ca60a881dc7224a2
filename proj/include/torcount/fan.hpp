#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "torcount/arith.hpp"

namespace torcount {

struct Fan {
    int dim = 0;
    std::vector<std::vector<long long>> rays;
    std::vector<std::vector<int>> max_cones;  // 0-based ray indices, sorted
};

// Parses "dim", "rays", "max_cones" (1-based). Floats are rejected.
Fan fan_from_json(const nlohmann::json& j);

struct CertificateCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ValidityReport {
    std::vector<CertificateCheck> checks;
    bool valid() const;
    std::string first_failure() const;
};

ValidityReport validate_fan(const Fan& fan);

// Coordinates (i,j) are flattened group-major: coord = offset[i] + j.
struct GradingData {
    int r = 0;
    int s = 0;
    std::vector<std::vector<BigInt>> degrees;  // delta_i
    std::vector<int> n;
    std::vector<int> offset;
    std::vector<int> coord_ray;                  // coordinate -> input ray index
    std::vector<int> ray_coord;                  // input ray index -> coordinate
    std::vector<int> coord_group;                // coordinate -> group
    std::vector<std::vector<BigInt>> ray_class;  // class vector per input ray

    int num_coords() const { return static_cast<int>(coord_ray.size()); }
    int coord(int i, int j) const { return offset[i] + j; }
};

GradingData picard_grading(const Fan& fan);

struct ConeData {
    std::vector<int> inside;      // coordinates of rays in the cone
    std::vector<int> complement;  // remaining coordinates
    std::vector<int> I;           // groups met by the complement, sorted
    std::vector<int> j_of;        // per group: slot j of the complement ray, -1 if i not in I
    int cls = -1;
};

struct ConeIndexData {
    std::vector<ConeData> cones;
    std::vector<std::vector<int>> classes;  // cone indices sharing I_sigma
    std::vector<int> reps;                  // first cone of each class
};

ConeIndexData cone_index_data(const Fan& fan, const GradingData& g);

// Groups meeting a minimal covering set lie inside it; brute force over subsets of coordinates (at most 20 rays).
CertificateCheck check_minimal_covering(const GradingData& g, const ConeIndexData& c);

struct ToricVariety {
    Fan fan;
    GradingData grading;
    ConeIndexData cones;

    // validates, throws InputError with the first failed certificate
    static ToricVariety build(Fan fan);
};

nlohmann::json to_json(const GradingData& g);
nlohmann::json to_json(const ConeIndexData& c, const GradingData& g);
nlohmann::json to_json(const ValidityReport& r);

}  // namespace torcount
