// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <set>

#include "etra/domain.hpp"
#include "test_util.hpp"

using namespace etra;
using testutil::Rng;

namespace {

/// Reference generator: all count vectors with sum k, recursively.
void reference_compositions(int l, int k, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(static_cast<std::size_t>(l), 0);
    auto rec = [&](auto&& self, int pos, int rest) -> void {
        if (pos == l - 1) {
            cur[static_cast<std::size_t>(pos)] = rest;
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= rest; ++v) {
            cur[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, rest - v);
        }
    };
    rec(rec, 0, k);
}

std::vector<std::vector<int>> collect(GridStream stream) {
    std::vector<std::vector<int>> out;
    GridPoint gp;
    while (stream.next(gp)) out.push_back(gp.counts);
    return out;
}

bool colex_less(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

} // namespace

TEST_CASE("enumeration counts match the closed form") {
    CHECK(collect(GridStream(3, 2)).size() == 6);   // C(4,2)
    CHECK(collect(GridStream(1, 5)).size() == 1);
    CHECK(collect(GridStream(4, 3)).size() == 20);  // C(6,3)
    CHECK(GridStream::total(3, 2) == 6);
    CHECK(GridStream::total(4, 3) == 20);
}

TEST_CASE("enumeration is complete, duplicate-free, and in colex order") {
    for (int l = 1; l <= 6; ++l) {
        for (int k = 1; k <= 6; ++k) {
            auto got = collect(GridStream(l, k));
            std::vector<std::vector<int>> want;
            reference_compositions(l, k, want);
            CHECK(got.size() == want.size());
            CHECK(got.size() == GridStream::total(l, k));

            std::set<std::vector<int>> seen(got.begin(), got.end());
            CHECK(seen.size() == got.size()); // no duplicates
            std::set<std::vector<int>> expect(want.begin(), want.end());
            CHECK(seen == expect);

            for (std::size_t i = 1; i < got.size(); ++i)
                CHECK(colex_less(got[i - 1], got[i]));
        }
    }
}

TEST_CASE("chunked enumeration reproduces the full stream") {
    const int l = 5, k = 4;
    const auto full = collect(GridStream(l, k));
    const std::uint64_t total = GridStream::total(l, k);
    for (std::uint64_t split : {std::uint64_t(0), std::uint64_t(1), total / 3, total - 1, total}) {
        auto head = collect(GridStream(l, k, 0, split));
        auto tail = collect(GridStream(l, k, split, total));
        head.insert(head.end(), tail.begin(), tail.end());
        CHECK(head == full);
    }
}

TEST_CASE("rank and unrank invert each other") {
    const int l = 4, k = 5;
    GridStream stream(l, k);
    do {
        CHECK(GridStream::rank(stream.counts()) == stream.index());
        CHECK(GridStream::unrank(l, k, stream.index()) == stream.counts());
    } while (stream.advance());
}

TEST_CASE("realize maps counts to hull points") {
    const ConvexHull d2 = simplex_hull(2, 1.0);
    CHECK(realize(d2, GridPoint{{2, 0}, 2}) == std::vector<double>{1.0, 0.0});
    CHECK(realize(d2, GridPoint{{1, 1}, 2}) == std::vector<double>{0.5, 0.5});

    const ConvexHull d3 = simplex_hull(3, 1.0);
    const auto bary = realize(d3, GridPoint{{1, 1, 1}, 3});
    for (double c : bary) CHECK(c == doctest::Approx(1.0 / 3.0));

    // exact path
    const auto exact = realize_exact(d3, GridPoint{{1, 1, 1}, 3});
    CHECK(exact[0] == Rat(1, 3));
}

TEST_CASE("delta-4 k=3 grid realizes quarter-resolution points") {
    const ConvexHull hull = simplex_hull(4, 1.0);
    GridStream stream(4, 3);
    std::set<double> coords;
    GridPoint gp;
    int count = 0;
    while (stream.next(gp)) {
        ++count;
        double sum = 0;
        for (double c : realize(hull, gp)) {
            coords.insert(c);
            sum += c;
        }
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(count == 20);
    CHECK(coords == std::set<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
}

TEST_CASE("simplex hulls carry gamma = K") {
    const ConvexHull a = simplex_hull(2, 1.0);
    CHECK(a.vertices() == std::vector<std::vector<double>>{{1, 0}, {0, 1}});
    CHECK(simplex_hull(3, 1.0).gamma() == 1.0);
    CHECK(simplex_hull(4, 2.0).gamma() == 2.0);
}

TEST_CASE("halving hull vertices are step vectors") {
    const ConvexHull h = halving_hull(3);
    CHECK(h.vertex_count() == 4);
    CHECK(h.vertex(0) == std::vector<double>{1, 1, 1});
    CHECK(h.vertex(1) == std::vector<double>{0, 1, 1});
    CHECK(h.vertex(3) == std::vector<double>{0, 0, 0});
    CHECK(h.gamma() == 1.0);
}

TEST_CASE("nearest k-uniform point, exact search") {
    const ConvexHull d2 = simplex_hull(2, 1.0);
    const auto mid = nearest_k_uniform(d2, std::vector<double>{0.5, 0.5}, 2);
    CHECK(mid.point.counts == std::vector<int>{1, 1});
    CHECK(mid.distance == 0.0);
    CHECK(mid.exact);

    const ConvexHull d3 = simplex_hull(3, 1.0);
    for (int k : {1, 4, 9}) {
        const auto vert = nearest_k_uniform(d3, std::vector<double>{1, 0, 0}, k);
        CHECK(vert.point.counts == std::vector<int>{k, 0, 0});
        CHECK(vert.distance == 0.0);
    }
}

TEST_CASE("exact nearest equals the brute-force minimum on delta-4") {
    const ConvexHull hull = simplex_hull(4, 1.0);
    const int k = 20;
    CHECK(GridStream::total(4, k) == 1771);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = testutil::random_simplex_point(rng, 4);
        const auto got = nearest_k_uniform(hull, x, k);

        // test-local brute force
        double best = 1e300;
        GridStream stream(4, k);
        do {
            std::vector<double> pt;
            realize_into(hull, stream.counts(), k, pt);
            double dist = 0;
            for (std::size_t i = 0; i < pt.size(); ++i)
                dist = std::max(dist, std::fabs(pt[i] - x[i]));
            best = std::min(best, dist);
        } while (stream.advance());

        CHECK(got.distance == doctest::Approx(best).epsilon(1e-15));
    }
}

TEST_CASE("largest-remainder fallback stays within l/k in L-inf") {
    Rng rng(21);
    for (int l = 2; l <= 5; ++l) {
        const ConvexHull hull = simplex_hull(l, 1.0);
        for (int k : {10, 40, 160}) {
            for (int trial = 0; trial < 5; ++trial) {
                const auto x = testutil::random_simplex_point(rng, l);
                // force the rounding path with exact_limit = 0
                const auto got = nearest_k_uniform(hull, x, k, std::nullopt, 0);
                CHECK_FALSE(got.exact);
                CHECK(got.distance <= static_cast<double>(l) / k);
                int sum = 0;
                for (int c : got.point.counts) sum += c;
                CHECK(sum == k);
            }
        }
    }
}

TEST_CASE("general hulls require caller-provided barycentric coordinates") {
    const ConvexHull h = halving_hull(2);
    std::vector<double> x{0.6, 0.9};
    CHECK_THROWS_AS(nearest_k_uniform(h, x, 50, std::nullopt, 0), InputError);
    // with coordinates provided: t = 0.6*v0 + 0.3*v1 + 0.1*v2 => (0.6, 0.9)
    const auto got = nearest_k_uniform(h, x, 50, std::vector<double>{0.6, 0.3, 0.1}, 0);
    CHECK(got.distance <= 3.0 / 50);
}

TEST_CASE("domain binds each variable once") {
    Domain d;
    d.bind("x", simplex_hull(2, 1.0));
    CHECK_THROWS_AS(d.bind("x", simplex_hull(3, 1.0)), InputError);
    d.bind("y", segment_hull(-4, 4));
    CHECK(d.size() == 2);
    CHECK(d.gamma() == 4.0);
    CHECK(d.find("y") != nullptr);
    CHECK(d.find("z") == nullptr);
}
