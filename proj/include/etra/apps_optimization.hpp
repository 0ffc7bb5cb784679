// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "etra/solver.hpp"

namespace etra {

/// Standard quadratic optimization: maximize x^T A x over the simplex,
/// entries of A in [0,1].
struct SqpInstance {
    DenseTensor matrix; // p x p
    double eps = 0.1;

    void validate() const;
    int p() const { return matrix.dims()[0]; }
};

struct SqpResult {
    double value = 0;
    GridPoint point;
    std::vector<double> x;
    int k_used = 0;
    bool k_truncated = false; // theoretical k exceeded the cap
    SolveReport report;
};

/// Maximize over the k-uniform grid of the simplex. k defaults to
/// k_sqp(eps) capped at k_cap; pass k_override to pin it.
SqpResult solve_sqp(const SqpInstance& inst, std::optional<int> k_override = std::nullopt,
                    int k_cap = 1000, int workers = 1);

/// Reference optimum by fine-grid enumeration, independent of the
/// solver path (own composition recursion, direct x^T A x).
double sqp_oracle(const DenseTensor& matrix, int k_fine,
                  std::uint64_t point_budget = 400000000);

/// max h(x) s.t. h_1(x) >= 0, ..., h_m(x) >= 0 over a hull domain,
/// compiled to relaxed >= atoms plus a MAX objective.
SolveRequest build_constrained_opt(TmvPolynomial objective, std::vector<TmvPolynomial> constraints,
                                   Domain domain, double eps, std::vector<int> k);

/// Tensor eigenpair instance: find (lambda, x), x in hull Y nonzero,
/// lambda in [lambda_min, lambda_max], approximately satisfying
/// sum_ij a(i,j,kk) x(i) x(j) = lambda x(kk) for every kk.
struct EigenInstance {
    DenseTensor tensor;                     // p x p x p
    ConvexHull hull = simplex_hull(1, 1.0); // Y
    double lambda_max = 1;
    double lambda_min = 0; // the bound sign convention is configurable
    double eps = 0.05;
    double nonzero_delta = 0.5; // ||x||_1 >= delta guard
    int k_x = 1;
    int k_lambda = 1;

    void validate() const;
    int p() const { return tensor.dims()[0]; }
};

/// Variables: "x" over Y and "lambda" over the 1-d segment hull. Each
/// coordinate contributes a relaxed equality pair; the nonzero guard is
/// one extra >= atom (automatically satisfied on simplex hulls).
SolveRequest build_eigen_request(const EigenInstance& inst);

/// Residuals |sum_ij a(i,j,kk) x(i) x(j) - lambda x(kk)| recomputed
/// directly, bypassing the tensor-polynomial path.
std::vector<double> eigen_residuals(const DenseTensor& tensor, std::span<const double> x,
                                    double lambda);

} // namespace etra
