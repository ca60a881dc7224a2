#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "torcount/divisor.hpp"
#include "torcount/interval.hpp"
#include "torcount/moebius.hpp"
#include "torcount/polytope.hpp"
#include "torcount/spec.hpp"

namespace torcount {

// {u >= 0 : sum_i alpha_{i,sigma} u_i <= 1 for every class}, objective varpi.
struct GrowthPolytope {
    int s = 0;
    std::vector<HalfSpace> H;
    RatVec varpi;
    std::vector<Vertex> vertices;
    Rational a;
    std::vector<std::size_t> face;  // indices into vertices attaining a
    int k = 0;
};

GrowthPolytope solve_polytope(const HeightData& hd, const ToricVariety& tv, const RatVec& varpi);

struct EffectiveConeAK {
    Rational a;
    int k = 0;
    std::vector<int> face_generators;  // groups whose degree can carry positive weight
};

EffectiveConeAK effective_cone_ak(const GradingData& g, const RatVec& L_class, const RatVec& varpi);

struct SliceConstant {
    Rational cP;
    int order = 0;                   // order of vanishing of the slice volume at delta = 0
    Rational threshold;              // slice combinatorics fixed on (0, threshold)
    std::vector<Rational> coeffs;    // slice volume polynomial, ascending powers of delta
    std::vector<int> projections;    // coordinates tried as the eliminated one
};

SliceConstant slice_constant_cP(const GrowthPolytope& P);
// meas_{s-1}(H_delta cap P) exactly, eliminating coordinate proj
Rational slice_volume(const GrowthPolytope& P, const Rational& delta, int proj);
// Monte-Carlo estimate of the same quantity; returns (estimate, standard error)
std::pair<double, double> slice_volume_mc(const GrowthPolytope& P, const Rational& delta, int proj,
                                          std::uint64_t samples, std::uint64_t seed);

// meas([-1,1]^n cap W) / det(Z^n cap W) for W the kernel of the rows of forms
Rational linear_lattice_constant(const IntMat& forms);

struct MFullDensity {
    Interval value;
    EulerProduct product;  // c_{m,1}
    unsigned m = 1;
    std::uint64_t d = 1;
};

MFullDensity m_full_density(unsigned m, std::uint64_t d, std::uint64_t prime_bound, unsigned threads = 0);
// local ratio c_{m,d}/c_{m,d/p} at a prime p
Interval m_full_local_ratio(unsigned m, std::uint64_t p);

std::uint64_t s0_bound(std::uint64_t m);

struct DiagonalGroup {
    std::vector<std::int64_t> c;
    std::vector<unsigned> m;
    unsigned e = 1;
};

struct DiagonalTruncation {
    std::uint64_t q_max = 100;
    double lambda_max = 200;
    double struct_bound = 1000;  // keep structures with prod_j gamma_j^(1/(e m_j)) <= struct_bound
};

struct DiagonalResult {
    double value = 0;
    std::size_t structures = 0;
    double integral_quadrature_error = 0;
    double integral_tail_estimate = 0;
    std::vector<std::pair<std::vector<int>, double>> singular_integrals;  // per sign vector
    double trivial_singular_series = 0;  // structure gamma = (1,...,1), signs +
    DiagonalTruncation truncation;
    std::string label;
};

DiagonalResult diagonal_constant(const DiagonalGroup& grp, std::uint64_t d, const DiagonalTruncation& tr);
// singular integral of sum_j a_j xi_j^{k_j} over [0,1]^n at 0
double singular_integral(const std::vector<std::int64_t>& a, const std::vector<unsigned>& k, double lambda_max,
                         double* quad_err = nullptr, double* tail = nullptr);
// sum_{q <= q_max} q^{-n} sum_{(a,q)=1} prod_j sum_{r mod q} e(a b_j r^{k_j} / q)
double singular_series(const std::vector<BigInt>& b, const std::vector<unsigned>& k, std::uint64_t q_max);

struct AssemblyOptions {
    std::uint64_t prime_bound = 1000000;
    DiagonalTruncation diag;
    std::uint64_t d_bound = 4;  // truncated d-sum when C_{M,d} has no product form
    unsigned threads = 0;
    std::uint64_t seed = 20240607;
};

struct ConstantFactor {
    std::string name;
    std::string value;
    double approx = 0;
    std::string provenance;  // exact | truncated(...) | user-supplied
};

struct ConstantReport {
    RatVec varpi;
    Rational a;
    int k = 0;
    int b = 1;
    SliceConstant slice;
    std::string structure;
    std::vector<ConstantFactor> factors;
    Interval mu_sum;
    std::string mu_sum_provenance;
    Interval c;
    bool c_exact_enclosure = true;  // false when some factor is a truncated approximation
    nlohmann::json hypotheses;
    nlohmann::json detail;
};

// varpi per group, read off the group structures
RatVec growth_weights(const SubvarietySpec& spec);

ConstantReport assemble_constant(const SubvarietySpec& spec, const AssemblyOptions& opt = {});

struct FitResult {
    double c_hat = 0;
    double c_prime = 0;
    std::vector<double> residuals;  // relative, per point
    std::vector<double> ratios;     // N(B) / (B^a (log B)^k)
    double condition = 0;
};

FitResult empirical_fit(const std::vector<std::pair<double, double>>& points, const Rational& a, int k);

nlohmann::json to_json(const GrowthPolytope& P);
nlohmann::json to_json(const SliceConstant& S);
nlohmann::json to_json(const DiagonalResult& r);
nlohmann::json to_json(const ConstantReport& r);
nlohmann::json to_json(const FitResult& f);

}  // namespace torcount
