#pragma once

#include <vector>

#include "torcount/matrix.hpp"

namespace torcount {

// a . x <= b
struct HalfSpace {
    RatVec a;
    Rational b;
};

struct Vertex {
    RatVec x;
    std::vector<std::size_t> tight;  // indices of active constraints
};

// All vertices of {x : a_k . x <= b_k}, sorted lexicographically.
std::vector<Vertex> enumerate_vertices(const std::vector<HalfSpace>& H, std::size_t dim);

// Recession cone of H is {0}.
bool is_bounded(const std::vector<HalfSpace>& H, std::size_t dim);

std::size_t affine_rank(const std::vector<RatVec>& pts);

// Lebesgue volume of a bounded polyhedron; 0 if not full-dimensional.
Rational polytope_volume(const std::vector<HalfSpace>& H, std::size_t dim);

// Basic feasible solutions of {A x = b, x_j >= 0 unless free[j]}.
std::vector<RatVec> basic_solutions(const RatMat& A, const RatVec& b, const std::vector<bool>& free_var);

}  // namespace torcount
