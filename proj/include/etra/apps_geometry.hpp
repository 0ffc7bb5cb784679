// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "etra/solver.hpp"

namespace etra {

/// Simple undirected graph, vertices 0-based internally.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges; // sorted pairs i < j

    void validate() const;
    bool has_edge(int i, int j) const;
    int non_edge_count() const;
};

struct SegInstance {
    Graph graph;
    double K = 1;   // simplex scale
    double eps = 0;

    void validate() const;
};

struct UdgInstance {
    Graph graph;
    double K = 1;
    double eps = 0;

    void validate() const;
};

/// One joint variable "s" = (A_1,B_1,C_1,D_1, ..., A_n,B_n,C_n,D_n) on
/// the (4n-1)-simplex scaled by K. Edges contribute the two-branch
/// intersection predicate, non-edges its pushed-down negation, plus the
/// global C_i <= D_i atoms; everything uses the solver's uniform eps
/// relaxation.
SolveRequest build_seg_request(const SegInstance& inst, int grid_k);

/// One joint variable "z" = (X_1,Y_1, ..., X_n,Y_n) on the
/// (2n-1)-simplex scaled by K. The eps widening sits inside the atom
/// constants (4 +- 2*eps + eps^2), so the request runs at solver eps 0
/// and the atoms are marked non-relaxable.
SolveRequest build_udg_request(const UdgInstance& inst, int grid_k);

enum class GeomKind { seg, udg };

struct PairCheck {
    int i = 0, j = 0;     // 0-based vertex pair
    bool is_edge = false;
    bool pass = false;        // against the same band the formula uses
    bool strict_pass = false; // against the inner (unambiguous) band
    bool parallel = false;    // seg: slopes equal, no single intersection
    double value = 0;         // udg: squared distance; seg: intersection x when defined
};

struct RealizationReport {
    std::vector<PairCheck> pairs;
    bool ok = true; // all pairs pass the formula band
};

/// Direct-geometry re-check of a realized vector against the graph:
/// intersection x-coordinates (b_j - b_i)/(a_i - a_j) for segments,
/// squared center distances for disks, compared within the eps bands.
RealizationReport check_realization(GeomKind kind, std::span<const double> realized,
                                    const Graph& graph, double eps);

} // namespace etra
