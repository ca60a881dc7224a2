#pragma once

#include <optional>
#include <vector>

#include "torcount/arith.hpp"

namespace torcount {

using IntMat = std::vector<std::vector<BigInt>>;
using RatMat = std::vector<std::vector<Rational>>;
using RatVec = std::vector<Rational>;

IntMat identity_int(std::size_t n);

struct SmithForm {
    IntMat U, D, V;  // U * A * V = D, U and V unimodular
    std::size_t rank = 0;
};
SmithForm smith_normal_form(const IntMat& A);

// Row-style Hermite normal form of the row lattice; zero rows dropped.
IntMat hermite_rows(IntMat A);

// Saturated basis (as rows) of {x in Z^n : A x = 0}.
IntMat integer_kernel(const IntMat& A);

BigInt det_int(IntMat A);
std::size_t rank_rat(RatMat A);
// Unique solution of a square system, nullopt if singular.
std::optional<RatVec> solve_square(RatMat A, RatVec b);
Rational det_rat(RatMat A);

RatMat to_rat(const IntMat& A);

}  // namespace torcount
