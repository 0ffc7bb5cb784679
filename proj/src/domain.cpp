// SPDX-License-Identifier: Apache-2.0
#include "etra/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etra {

ConvexHull::ConvexHull(int dim, std::vector<std::vector<double>> vertices)
    : dim_(dim), vertices_(std::move(vertices)) {
    if (dim_ < 1) throw InputError("hull dimension must be >= 1", "dim");
    if (vertices_.empty()) throw InputError("hull needs at least one vertex", "vertices");
    for (const auto& v : vertices_) {
        if (static_cast<int>(v.size()) != dim_)
            throw InputError("hull vertex has wrong dimension", "vertices");
        for (double c : v) gamma_ = std::max(gamma_, std::fabs(c));
    }
}

ConvexHull simplex_hull(int p, double K) {
    if (p < 1) throw InputError("simplex needs p >= 1", "p");
    if (!(K > 0)) throw InputError("simplex scale K must be positive", "K");
    std::vector<std::vector<double>> verts(static_cast<std::size_t>(p),
                                           std::vector<double>(static_cast<std::size_t>(p), 0.0));
    for (int i = 0; i < p; ++i) verts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = K;
    ConvexHull hull(p, std::move(verts));
    hull.kind_ = ConvexHull::Kind::scaled_simplex;
    hull.scale_ = K;
    return hull;
}

ConvexHull segment_hull(double lo, double hi) {
    if (!(lo <= hi)) throw InputError("segment needs lo <= hi");
    return ConvexHull(1, {{lo}, {hi}});
}

ConvexHull halving_hull(int n) {
    if (n < 1) throw InputError("halving hull needs n >= 1", "n");
    std::vector<std::vector<double>> verts;
    verts.reserve(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        for (int i = j; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0;
        verts.push_back(std::move(v));
    }
    return ConvexHull(n, std::move(verts));
}

void realize_into(const ConvexHull& hull, std::span<const int> counts, int k,
                  std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(hull.dim()), 0.0);
    if (hull.kind() == ConvexHull::Kind::scaled_simplex) {
        const double unit = hull.simplex_scale() / static_cast<double>(k);
        for (std::size_t i = 0; i < counts.size(); ++i)
            out[i] = static_cast<double>(counts[i]) * unit;
        return;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        const double w = static_cast<double>(counts[i]) / static_cast<double>(k);
        const auto& c = hull.vertex(static_cast<int>(i));
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * c[d];
    }
}

std::vector<double> realize(const ConvexHull& hull, const GridPoint& gp) {
    if (static_cast<int>(gp.counts.size()) != hull.vertex_count())
        throw InputError("grid point count vector does not match hull vertex count");
    std::vector<double> out;
    realize_into(hull, gp.counts, gp.k, out);
    return out;
}

namespace {

Rat rat_from_double(double v) {
    if (!std::isfinite(v)) throw OverflowError("non-finite value in exact realization");
    if (v == 0.0) return Rat(0);
    int exp = 0;
    double mant = std::frexp(v, &exp); // v = mant * 2^exp, |mant| in [0.5, 1)
    // make mantissa integral
    std::int64_t m = 0;
    int shift = 0;
    while (shift < 63) {
        double scaled = std::ldexp(mant, shift);
        if (scaled == std::floor(scaled)) {
            m = static_cast<std::int64_t>(scaled);
            break;
        }
        ++shift;
    }
    if (m == 0) throw OverflowError("value not exactly representable as a small rational");
    const int e = exp - shift;
    if (e >= 0) {
        if (e > 62) throw OverflowError("value too large for exact rational");
        return Rat(m) * Rat(std::int64_t(1) << e);
    }
    if (e < -62) throw OverflowError("value too small for exact rational");
    return Rat(m, std::int64_t(1) << (-e));
}

} // namespace

std::vector<Rat> realize_exact(const ConvexHull& hull, const GridPoint& gp) {
    std::vector<Rat> out(static_cast<std::size_t>(hull.dim()), Rat(0));
    for (std::size_t i = 0; i < gp.counts.size(); ++i) {
        if (gp.counts[i] == 0) continue;
        Rat w(gp.counts[i], gp.k);
        const auto& c = hull.vertex(static_cast<int>(i));
        for (std::size_t d = 0; d < out.size(); ++d)
            out[d] += w * rat_from_double(c[d]);
    }
    return out;
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i; // exact: running product of binomials
        if (acc > std::numeric_limits<std::uint64_t>::max()) return kGridCountSaturated;
    }
    return static_cast<std::uint64_t>(acc);
}

GridStream::GridStream(int l, int k) : GridStream(l, k, 0, total(l, k)) {}

GridStream::GridStream(int l, int k, std::uint64_t begin, std::uint64_t end)
    : l_(l), k_(k), index_(begin), end_(end) {
    if (l < 1) throw InputError("enumeration needs l >= 1", "l");
    if (k < 1) throw InputError("enumeration needs k >= 1", "k");
    const std::uint64_t n = total(l, k);
    if (end_ > n) end_ = n;
    if (index_ < end_) {
        counts_ = unrank(l_, k_, index_);
    } else {
        index_ = end_;
    }
}

std::uint64_t GridStream::total(int l, int k) {
    return binomial_u64(static_cast<std::uint64_t>(l) + static_cast<std::uint64_t>(k) - 1,
                        static_cast<std::uint64_t>(k));
}

std::vector<int> GridStream::unrank(int l, int k, std::uint64_t index) {
    std::vector<int> counts(static_cast<std::size_t>(l), 0);
    int rem = k;
    for (int j = l; j >= 2; --j) {
        // choose beta_j = v; the remaining rem - v units go to parts 1..j-1
        for (int v = 0;; ++v) {
            const std::uint64_t block =
                binomial_u64(static_cast<std::uint64_t>(rem - v) + static_cast<std::uint64_t>(j) - 2,
                             static_cast<std::uint64_t>(j) - 2);
            if (block == kGridCountSaturated)
                throw OverflowError("grid too large to unrank");
            if (index < block) {
                counts[static_cast<std::size_t>(j - 1)] = v;
                rem -= v;
                break;
            }
            index -= block;
            if (v == rem) throw InputError("unrank index out of range", "index");
        }
    }
    counts[0] = rem;
    return counts;
}

std::uint64_t GridStream::rank(std::span<const int> counts) {
    const int l = static_cast<int>(counts.size());
    int rem = 0;
    for (int c : counts) rem += c;
    std::uint64_t r = 0;
    for (int j = l; j >= 2; --j) {
        for (int v = 0; v < counts[static_cast<std::size_t>(j - 1)]; ++v) {
            const std::uint64_t block =
                binomial_u64(static_cast<std::uint64_t>(rem - v) + static_cast<std::uint64_t>(j) - 2,
                             static_cast<std::uint64_t>(j) - 2);
            if (block == kGridCountSaturated) throw OverflowError("grid too large to rank");
            r += block;
        }
        rem -= counts[static_cast<std::size_t>(j - 1)];
    }
    return r;
}

bool GridStream::advance() {
    if (done()) return false;
    if (++index_ >= end_) return false;
    // colex successor on the count vector
    if (l_ >= 2 && counts_[0] > 0) {
        --counts_[0];
        ++counts_[1];
        return true;
    }
    int j = 1;
    while (j < l_ && counts_[static_cast<std::size_t>(j)] == 0) ++j;
    if (j + 1 >= l_) {
        // counts == (0,...,0,k): already the colex maximum
        index_ = end_;
        return false;
    }
    counts_[0] = counts_[static_cast<std::size_t>(j)] - 1;
    counts_[static_cast<std::size_t>(j)] = 0;
    ++counts_[static_cast<std::size_t>(j + 1)];
    return true;
}

bool GridStream::next(GridPoint& out) {
    if (done()) return false;
    out.counts = counts_;
    out.k = k_;
    advance();
    return true;
}

NearestResult nearest_k_uniform(const ConvexHull& hull, std::span<const double> x, int k,
                                std::optional<std::vector<double>> barycentric,
                                std::uint64_t exact_limit) {
    if (static_cast<int>(x.size()) != hull.dim())
        throw InputError("point dimension does not match hull");
    if (k < 1) throw InputError("k must be >= 1", "k");

    const int l = hull.vertex_count();
    const std::uint64_t n = GridStream::total(l, k);

    NearestResult res;
    if (n <= exact_limit) {
        GridStream stream(l, k);
        std::vector<double> realized;
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_counts;
        do {
            realize_into(hull, stream.counts(), k, realized);
            double dist = 0;
            for (std::size_t i = 0; i < realized.size(); ++i)
                dist = std::max(dist, std::fabs(realized[i] - x[i]));
            if (dist < best) {
                best = dist;
                best_counts = stream.counts();
            }
        } while (stream.advance());
        res.point = GridPoint{std::move(best_counts), k};
        res.distance = best;
        res.exact = true;
        return res;
    }

    // Largest-remainder rounding of barycentric coordinates.
    std::vector<double> bary;
    if (barycentric) {
        bary = std::move(*barycentric);
    } else if (hull.kind() == ConvexHull::Kind::scaled_simplex) {
        bary.resize(static_cast<std::size_t>(l));
        for (int i = 0; i < l; ++i)
            bary[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] / hull.simplex_scale();
    } else {
        throw InputError(
            "barycentric coordinates required for largest-remainder rounding on general hulls",
            "barycentric");
    }
    if (static_cast<int>(bary.size()) != l)
        throw InputError("barycentric coordinate count does not match hull", "barycentric");

    std::vector<int> counts(static_cast<std::size_t>(l), 0);
    std::vector<std::pair<double, int>> fracs; // (-fraction, index): sort ascending
    int assigned = 0;
    for (int i = 0; i < l; ++i) {
        double target = std::max(0.0, bary[static_cast<std::size_t>(i)]) * k;
        int base = static_cast<int>(std::floor(target));
        base = std::min(base, k);
        counts[static_cast<std::size_t>(i)] = base;
        assigned += base;
        fracs.push_back({-(target - base), i});
    }
    std::sort(fracs.begin(), fracs.end());
    int leftover = k - assigned;
    for (int r = 0; leftover > 0; ++r) {
        counts[static_cast<std::size_t>(fracs[static_cast<std::size_t>(r % l)].second)] += 1;
        --leftover;
    }
    // guard against overshoot from clamping
    int total_c = std::accumulate(counts.begin(), counts.end(), 0);
    for (int i = l - 1; total_c > k && i >= 0; --i) {
        int take = std::min(counts[static_cast<std::size_t>(i)], total_c - k);
        counts[static_cast<std::size_t>(i)] -= take;
        total_c -= take;
    }

    res.point = GridPoint{std::move(counts), k};
    std::vector<double> realized;
    realize_into(hull, res.point.counts, k, realized);
    for (std::size_t i = 0; i < realized.size(); ++i)
        res.distance = std::max(res.distance, std::fabs(realized[i] - x[i]));
    res.exact = false;
    return res;
}

void Domain::bind(std::string name, ConvexHull hull) {
    for (const auto& [n, h] : vars_)
        if (n == name) throw InputError("variable '" + name + "' bound twice", "vars");
    vars_.emplace_back(std::move(name), std::move(hull));
}

const ConvexHull* Domain::find(const std::string& name) const {
    for (const auto& [n, h] : vars_)
        if (n == name) return &h;
    return nullptr;
}

double Domain::gamma() const {
    double g = 0;
    for (const auto& [n, h] : vars_) g = std::max(g, h.gamma());
    return g;
}

} // namespace etra
