#pragma once

#include <stdexcept>
#include <string>

namespace torcount {

// Exit codes of the CLI follow these categories.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HypothesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

#define TORCOUNT_ASSERT(cond, msg)                                                   \
    do {                                                                             \
        if (!(cond)) throw ::torcount::InvariantError(std::string("invariant: ") + (msg)); \
    } while (0)

}  // namespace torcount
