// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etra/rational.hpp"
#include "etra/errors.hpp"

namespace etra {

/// V-representation convex hull: explicit vertex list c_1..c_l, with
/// gamma = max_i ||c_i||_inf cached. A `scaled_simplex` kind marks
/// hulls of the form {K*e_1, ..., K*e_p} so realization can skip the
/// general convex combination.
class ConvexHull {
public:
    enum class Kind { general, scaled_simplex };

    ConvexHull(int dim, std::vector<std::vector<double>> vertices);

    int dim() const noexcept { return dim_; }
    int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
    const std::vector<std::vector<double>>& vertices() const noexcept { return vertices_; }
    const std::vector<double>& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    double gamma() const noexcept { return gamma_; }
    Kind kind() const noexcept { return kind_; }
    double simplex_scale() const noexcept { return scale_; } // K for scaled_simplex

private:
    friend ConvexHull simplex_hull(int p, double K);

    int dim_;
    std::vector<std::vector<double>> vertices_;
    double gamma_ = 0;
    Kind kind_ = Kind::general;
    double scale_ = 0;
};

/// Vertices K*e_1 .. K*e_p of the scale-K simplex; gamma = K.
ConvexHull simplex_hull(int p, double K);

/// 1-dimensional segment [lo, hi] as a two-vertex hull.
ConvexHull segment_hull(double lo, double hi);

/// Consensus-halving cut hull: vertices v_j = (0^j, 1^(n-j)) for
/// j = 0..n, dimension n, gamma = 1.
ConvexHull halving_hull(int n);

/// A k-uniform point stored as multiset counts over hull vertices.
struct GridPoint {
    std::vector<int> counts; // beta_1..beta_l, sum = k
    int k = 0;

    bool operator==(const GridPoint& o) const { return k == o.k && counts == o.counts; }
};

/// Realized point sum_i (beta_i/k) * c_i.
std::vector<double> realize(const ConvexHull& hull, const GridPoint& gp);
void realize_into(const ConvexHull& hull, std::span<const int> counts, int k,
                  std::vector<double>& out);

/// Exact-rational realization for the oracle path (vertex coordinates
/// must be exactly representable; they are converted via Rat(v*2^20)/2^20
/// style conversion only when integral, otherwise this throws).
std::vector<Rat> realize_exact(const ConvexHull& hull, const GridPoint& gp);

/// Streams every multiset of size k over l vertices exactly once, in
/// colexicographic order of the count vectors. Restartable and
/// chunkable by index range; memory O(l).
class GridStream {
public:
    GridStream(int l, int k);
    GridStream(int l, int k, std::uint64_t begin, std::uint64_t end);

    /// Count of all k-multisets: C(l+k-1, k), saturating at uint64 max.
    static std::uint64_t total(int l, int k);

    /// Count vector at a given colex index.
    static std::vector<int> unrank(int l, int k, std::uint64_t index);

    /// Colex index of a count vector.
    static std::uint64_t rank(std::span<const int> counts);

    bool done() const noexcept { return index_ >= end_; }
    const std::vector<int>& counts() const noexcept { return counts_; }
    std::uint64_t index() const noexcept { return index_; }

    /// Move to the successor; false when the range is exhausted.
    bool advance();

    bool next(GridPoint& out);

private:
    int l_;
    int k_;
    std::uint64_t index_;
    std::uint64_t end_;
    std::vector<int> counts_;
};

/// C(n, r) saturating at uint64 max.
std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t r);

inline constexpr std::uint64_t kGridCountSaturated = std::numeric_limits<std::uint64_t>::max();

/// Nearest k-uniform point to x. Small grids (<= exact_limit points)
/// are searched exhaustively for the true L-inf minimizer, ties going
/// to the colex-smallest counts. Larger grids fall back to
/// largest-remainder rounding of x's barycentric coordinates, which are
/// derived automatically for scaled simplexes and must be supplied by
/// the caller otherwise.
struct NearestResult {
    GridPoint point;
    double distance = 0; // L-inf between x and the realized point
    bool exact = false;  // true when found by exhaustive search
};

NearestResult nearest_k_uniform(const ConvexHull& hull, std::span<const double> x, int k,
                                std::optional<std::vector<double>> barycentric = std::nullopt,
                                std::uint64_t exact_limit = 1000000);

/// Ordered list of (variable name, hull). Every formula variable must
/// be bound exactly once; the joint grid is the Cartesian product of
/// the per-variable grids.
class Domain {
public:
    Domain() = default;

    void bind(std::string name, ConvexHull hull);

    int size() const noexcept { return static_cast<int>(vars_.size()); }
    const std::string& name(int i) const { return vars_[static_cast<std::size_t>(i)].first; }
    const ConvexHull& hull(int i) const { return vars_[static_cast<std::size_t>(i)].second; }
    const ConvexHull* find(const std::string& name) const;

    /// Max gamma across hulls.
    double gamma() const;

private:
    std::vector<std::pair<std::string, ConvexHull>> vars_;
};

} // namespace etra
