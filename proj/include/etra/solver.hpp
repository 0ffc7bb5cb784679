// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "etra/bounds.hpp"
#include "etra/domain.hpp"
#include "etra/formula.hpp"

namespace etra {

struct Objective {
    enum class Sense { max, min };
    TmvPolynomial poly;
    Sense sense = Sense::max;
};

/// Inputs of the grid-sweep algorithm. k is per-variable (one entry
/// broadcasts); eps is the relaxation band; objectives, when present,
/// are optimized lexicographically in listed order over the feasible
/// grid points.
struct SolveRequest {
    Formula formula;
    Domain domain;
    double eps = 0;
    std::vector<int> k;
    std::vector<Objective> objectives;
    int workers = 1;
    std::uint64_t budget = std::numeric_limits<std::uint64_t>::max();
};

enum class Verdict { sat, unsat_exact_implied, budget_exhausted };

const char* to_string(Verdict v);

struct AtomCheck {
    int index = 0;        // DFS order in the formula tree
    CmpOp op = CmpOp::le;
    bool relaxable = true;
    double value = 0;     // polynomial value at the point
    double band = 0;      // eps actually applied
    double margin = 0;    // slack to the relaxed threshold; >= 0 passes (> 0 for strict ops)
    bool pass = false;
};

struct VerifyReport {
    std::vector<AtomCheck> atoms;
    bool satisfied = false;
};

/// Independent re-check of a candidate assignment: per-atom values,
/// relaxed thresholds, pass/fail, and the tree verdict. eta adds a
/// float guard to non-strict comparisons (oracle mode only).
VerifyReport verify(const Formula& formula, const VarAssignment& assignment, double eps,
                    double eta = 0.0);

struct SolveReport {
    Verdict verdict = Verdict::unsat_exact_implied;
    std::vector<GridPoint> witness;  // aligned with domain variable order
    VarAssignment assignment;        // realized vectors
    std::vector<AtomCheck> residuals;
    std::vector<double> objective_values;
    std::uint64_t points_scanned = 0;
    std::uint64_t grid_total = 0;    // saturates at uint64 max
    bool grid_truncated = false;     // budget cut the sweep short
    /// The UNSAT verdict only implies exact infeasibility when the
    /// supplied k meets the theoretical bound for the instance.
    bool guarantee_met = false;
    double theoretical_k = 0;
    double wall_seconds = 0;
};

/// Sweep the k-uniform product grid in colexicographic order. Without
/// objectives, returns the colex-first satisfying assignment or
/// UNSAT_EXACT_IMPLIED after exhausting the grid. With objectives,
/// scans every feasible point and returns the lexicographic optimum,
/// ties resolved to the colex-smallest index. Deterministic for any
/// worker count.
SolveReport solve(const SolveRequest& req);

/// Theorem-style bound inputs extracted from a request (used for the
/// guarantee_met flag and the bound CLI).
BoundInputs request_bound_inputs(const SolveRequest& req);

} // namespace etra
