// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace etra {

/// Parameters of the main sample-size bound. alpha' = max(alpha,1) and
/// gamma' = max(gamma,1) are derived on the fly.
struct BoundInputs {
    double alpha = 1; // max |coefficient|
    double gamma = 1; // max vertex L-inf norm
    std::int64_t n = 1; // vector variables
    std::int64_t d = 1; // max degree
    std::int64_t t = 1; // max TMV length
    std::int64_t m = 1; // constraint count
    double eps = 1;
};

/// Main bound:
///   ceil( 512 * alpha^6 * gamma^(2d+2) * n^6 * d^6 * t^5
///         * ln(2 * alpha' * gamma' * d * n * m) / eps^5 ).
/// Values may exceed 2^63; the result is the exact ceiling as long as
/// it is representable, so it is returned as a double.
double k_main(const BoundInputs& in);

/// Non-tensor bound:
///   ceil( alpha^2 * gamma^(2d-2) * (2^d - 1)^2 * t^2 * ln(l) / eps^2 ).
/// l is accepted as a real so callers can probe the formula directly.
double k_nontensor(double alpha, double gamma, std::int64_t d, std::int64_t t, double l,
                   double eps);

/// Quadratic-over-the-simplex bound: ceil(32 * ln(3/eps) / eps^3),
/// the product of k = 16 ln(3/eps)/eps^2 and r = 2/eps.
double k_sqp(double eps);

/// Multilinear bound: ceil(2 * alpha^2 * gamma^2 * n^2 * ln(3 n m) / eps^2).
double k_multilinear(double alpha, double gamma, std::int64_t n, std::int64_t m, double eps);

/// Standard-degree bound: ceil(32 * alpha^6 * gamma^(2d) * d^6 / eps^4).
double k_standard_degree(double alpha, double gamma, std::int64_t d, double eps);

/// Perturbation bound gamma^(d-1) * (2^d - 1) * consts * terms * eps
/// for expanded-monomial polynomials and L-inf-close argument pairs.
double perturbation_bound(double consts, double terms, std::int64_t d, double gamma, double eps);

/// Exact decimal string for C(l+k-1, k) when k is an exact integer
/// below 2^63, otherwise a "~1e<exponent>" estimate via lgamma.
std::string grid_size_str(std::int64_t l, double k);

/// log10 of C(l+k-1, k).
double grid_size_log10(std::int64_t l, double k);

/// Bound evaluation plus grid feasibility for one variable's hull.
struct KReport {
    double k = 0;               // ceiled bound
    std::string grid_size;      // C(l+k-1, k), exact or estimated
    double grid_log10 = 0;
    bool enumerable = false;    // grid fits in the given point budget
};

KReport k_main_report(const BoundInputs& in, std::int64_t l, double point_budget = 1e8);

} // namespace etra
