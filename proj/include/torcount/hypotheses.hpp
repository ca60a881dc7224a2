#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "torcount/asymptotics.hpp"
#include "torcount/spec.hpp"

namespace torcount {

enum class GroupKind { free, linear, diagonal, bihomogeneous, other };
const char* to_string(GroupKind k);

struct GroupStructure {
    GroupKind kind = GroupKind::free;
    std::vector<int> polys;
    int partner = -1;          // other group of a bihomogeneous pair
    unsigned e = 0;            // degree of the diagonal form, or of this group in a bihomogeneous form
    IntMat forms;              // linear forms, one row per polynomial, columns in group order
    DiagonalGroup diag;        // diagonal form with the group's multiplicities
};

// How each group enters the counting function, read off the polynomials.
std::vector<GroupStructure> classify_groups(const SubvarietySpec& spec);

struct HypothesisCheck {
    std::string name;
    std::string detail;
    bool pass = false;
    bool verified = true;  // false when an input needed for the check was not supplied
};

struct HypothesisReport {
    TheoremTag tag = TheoremTag::none;
    bool pass = true;
    std::vector<HypothesisCheck> checks;
};

HypothesisReport check_hypotheses(const SubvarietySpec& spec);

nlohmann::json to_json(const HypothesisReport& r);

}  // namespace torcount
