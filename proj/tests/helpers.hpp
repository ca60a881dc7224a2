#pragma once

#include <string>

#include "torcount/spec.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(TORCOUNT_FIXTURES) + "/" + name + ".json"; }

inline torcount::SubvarietySpec load(const std::string& name) { return torcount::load_spec(fixture(name)); }

// the V = X, m = 1, L = -K fixtures
inline const char* const kVarieties[] = {"p2", "p1xp1", "f1", "p2xp1", "dp6", "p4"};

}  // namespace testing
