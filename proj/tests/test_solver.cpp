// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "etra/solver.hpp"
#include "test_util.hpp"

using namespace etra;
using testutil::Rng;

namespace {

/// coef . x + c over a vector variable.
Atom linear_atom(const std::string& var, std::vector<double> coef, double c, CmpOp op) {
    Atom a;
    StmPolynomial stm;
    const int p = static_cast<int>(coef.size());
    stm.tensor = DenseTensor::uniform(p, 1, std::move(coef));
    stm.var_names = {var};
    stm.exponents = {1};
    stm.constant = c;
    a.poly.terms.push_back(std::move(stm));
    a.op = op;
    return a;
}

SolveRequest first_coordinate_request(double c, CmpOp op, double eps, int k) {
    SolveRequest req;
    req.formula = normalize(FormulaNode::leaf(linear_atom("x", {1, 0}, -c, op)));
    req.domain.bind("x", simplex_hull(2, 1.0));
    req.eps = eps;
    req.k = {k};
    return req;
}

/// Sequential reference sweep with the same colex product order,
/// sidestepping the solver's partitioning and reduction entirely.
struct RefSweep {
    bool found = false;
    std::uint64_t index = 0;
    std::uint64_t scanned = 0;
    std::vector<std::vector<int>> counts;
    double objective = 0;
};

RefSweep reference_sweep(const SolveRequest& req, const TmvPolynomial* objective) {
    RefSweep out;
    const int nvars = req.domain.size();
    std::vector<GridStream> streams;
    std::vector<std::uint64_t> sizes;
    for (int v = 0; v < nvars; ++v) {
        streams.emplace_back(req.domain.hull(v).vertex_count(), req.k.size() == 1 ? req.k[0] : req.k[static_cast<std::size_t>(v)]);
        sizes.push_back(GridStream::total(req.domain.hull(v).vertex_count(),
                                          req.k.size() == 1 ? req.k[0] : req.k[static_cast<std::size_t>(v)]));
    }
    std::uint64_t total = 1;
    for (auto s : sizes) total *= s;

    double best = -1e300;
    for (std::uint64_t g = 0; g < total; ++g) {
        VarAssignment a;
        std::uint64_t rest = g;
        std::vector<std::vector<int>> counts;
        for (int v = 0; v < nvars; ++v) {
            const std::uint64_t idx = rest % sizes[static_cast<std::size_t>(v)];
            rest /= sizes[static_cast<std::size_t>(v)];
            const int k = req.k.size() == 1 ? req.k[0] : req.k[static_cast<std::size_t>(v)];
            auto c = GridStream::unrank(req.domain.hull(v).vertex_count(), k, idx);
            a[req.domain.name(v)] = realize(req.domain.hull(v), GridPoint{c, k});
            counts.push_back(std::move(c));
        }
        ++out.scanned;
        if (!eval_relaxed(req.formula, a, req.eps)) continue;
        if (!objective) {
            out.found = true;
            out.index = g;
            out.counts = std::move(counts);
            return out;
        }
        const double val = eval_tmv(*objective, a);
        if (!out.found || val > best) {
            out.found = true;
            best = val;
            out.index = g;
            out.counts = std::move(counts);
        }
    }
    out.objective = best;
    return out;
}

} // namespace

TEST_CASE("vertex solution is found at the colex-first grid point") {
    SolveRequest req = first_coordinate_request(1.0, CmpOp::ge, 0.0, 1);
    const SolveReport rep = solve(req);
    CHECK(rep.verdict == Verdict::sat);
    CHECK(rep.assignment.at("x") == std::vector<double>{1.0, 0.0});
    CHECK(rep.witness.at(0).counts == std::vector<int>{1, 0});
    CHECK(rep.points_scanned == 1);
}

TEST_CASE("infeasible band exhausts the grid") {
    SolveRequest req = first_coordinate_request(2.0, CmpOp::ge, 0.5, 3);
    const SolveReport rep = solve(req);
    CHECK(rep.verdict == Verdict::unsat_exact_implied);
    CHECK(rep.points_scanned == 4); // C(2+3-1, 3)
    CHECK(rep.grid_total == 4);
    CHECK_FALSE(rep.guarantee_met); // k = 3 is far below the theoretical bound
}

TEST_CASE("guarantee flag reflects the theoretical k") {
    SolveRequest req = first_coordinate_request(0.0, CmpOp::ge, 1.0, 1);
    SolveReport rep = solve(req);
    CHECK(rep.theoretical_k > 1.0);
    CHECK_FALSE(rep.guarantee_met);
    req.k = {static_cast<int>(rep.theoretical_k)};
    rep = solve(req);
    CHECK(rep.guarantee_met);
}

TEST_CASE("eps widens feasibility monotonically") {
    // x1 >= 0.8 + band on a coarse grid
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const double c = rng.uniform(0.5, 1.1);
        const double e1 = rng.uniform(0, 0.3);
        const double e2 = e1 + rng.uniform(0, 0.3);
        SolveRequest r1 = first_coordinate_request(c, CmpOp::ge, e1, 5);
        SolveRequest r2 = first_coordinate_request(c, CmpOp::ge, e2, 5);
        const SolveReport a = solve(r1);
        const SolveReport b = solve(r2);
        if (a.verdict == Verdict::sat) CHECK(b.verdict == Verdict::sat);
    }
}

TEST_CASE("solver matches a sequential reference sweep") {
    Rng rng(404);
    for (int trial = 0; trial < 25; ++trial) {
        SolveRequest req;
        std::vector<FormulaNode> atoms;
        const int n_atoms = rng.range(1, 3);
        for (int i = 0; i < n_atoms; ++i) {
            std::vector<double> coef{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            atoms.push_back(FormulaNode::leaf(
                linear_atom(rng.range(0, 1) ? "x" : "y", std::move(coef), rng.uniform(-0.5, 0.5),
                            rng.range(0, 1) ? CmpOp::ge : CmpOp::le)));
        }
        req.formula = normalize(rng.range(0, 1) ? FormulaNode::conj(std::move(atoms))
                                                : FormulaNode::disj(std::move(atoms)));
        req.domain.bind("x", simplex_hull(3, 1.0));
        req.domain.bind("y", simplex_hull(3, 1.0));
        req.eps = rng.uniform(0, 0.2);
        req.k = {rng.range(1, 7), rng.range(1, 7)};
        req.workers = rng.range(1, 4);

        const RefSweep ref = reference_sweep(req, nullptr);
        const SolveReport rep = solve(req);
        if (ref.found) {
            REQUIRE(rep.verdict == Verdict::sat);
            CHECK(rep.points_scanned == ref.index + 1);
            CHECK(rep.witness.at(0).counts == ref.counts.at(0));
            CHECK(rep.witness.at(1).counts == ref.counts.at(1));
        } else {
            CHECK(rep.verdict == Verdict::unsat_exact_implied);
            CHECK(rep.points_scanned == ref.scanned);
        }
    }
}

TEST_CASE("optimization matches the reference and breaks ties colex-first") {
    Rng rng(505);
    for (int trial = 0; trial < 15; ++trial) {
        SolveRequest req;
        req.formula = normalize(FormulaNode::conj({}));
        req.domain.bind("x", simplex_hull(3, 1.0));
        req.eps = 0;
        req.k = {rng.range(2, 8)};
        req.workers = rng.range(1, 4);
        Objective obj;
        // flat payoff induces massive ties -> colex-first must win
        std::vector<double> coef{1.0, 1.0, rng.range(0, 1) ? 1.0 : rng.uniform(0, 2)};
        obj.poly.terms.push_back(StmPolynomial{
            DenseTensor::uniform(3, 1, coef), {"x"}, {1}, 0.0});
        obj.sense = Objective::Sense::max;
        req.objectives.push_back(obj);

        const RefSweep ref = reference_sweep(req, &req.objectives[0].poly);
        const SolveReport rep = solve(req);
        REQUIRE(rep.verdict == Verdict::sat);
        CHECK(rep.objective_values.at(0) == ref.objective);
        CHECK(rep.witness.at(0).counts == ref.counts.at(0));
        CHECK(rep.points_scanned == ref.scanned);
    }
}

TEST_CASE("verdict and witness are identical across worker counts") {
    SolveRequest base;
    std::vector<FormulaNode> atoms;
    atoms.push_back(FormulaNode::leaf(linear_atom("x", {1, 0, -1}, -0.52, CmpOp::ge)));
    atoms.push_back(FormulaNode::leaf(linear_atom("y", {0, 1, 0}, -0.33, CmpOp::ge)));
    base.formula = normalize(FormulaNode::conj(std::move(atoms)));
    base.domain.bind("x", simplex_hull(3, 1.0));
    base.domain.bind("y", simplex_hull(3, 1.0));
    base.eps = 0.01;
    base.k = {24, 24};

    SolveReport first;
    bool have_first = false;
    for (int workers : {1, 4, 8}) {
        SolveRequest req = base;
        req.workers = workers;
        const SolveReport rep = solve(req);
        if (!have_first) {
            first = rep;
            have_first = true;
            continue;
        }
        CHECK(rep.verdict == first.verdict);
        CHECK(rep.points_scanned == first.points_scanned);
        REQUIRE(rep.witness.size() == first.witness.size());
        for (std::size_t v = 0; v < rep.witness.size(); ++v)
            CHECK(rep.witness[v].counts == first.witness[v].counts);
    }
}

TEST_CASE("SAT reports re-verify and expose per-atom residuals") {
    SolveRequest req = first_coordinate_request(0.6, CmpOp::ge, 0.05, 10);
    const SolveReport rep = solve(req);
    REQUIRE(rep.verdict == Verdict::sat);
    REQUIRE(rep.residuals.size() == 1);
    CHECK(rep.residuals[0].pass);
    const VerifyReport again = verify(req.formula, rep.assignment, req.eps);
    CHECK(again.satisfied);
    CHECK(again.atoms[0].value == rep.residuals[0].value);
}

TEST_CASE("verify rejects violating points and reports margins") {
    Formula f = normalize(FormulaNode::leaf(linear_atom("x", {1, 0}, -0.9, CmpOp::ge)));
    VarAssignment good{{"x", {0.95, 0.05}}};
    VarAssignment bad{{"x", {0.65, 0.35}}};
    CHECK(verify(f, good, 0.0).satisfied);
    const VerifyReport rep = verify(f, bad, 0.1);
    CHECK_FALSE(rep.satisfied);
    CHECK(rep.atoms[0].margin == doctest::Approx(-0.15));

    // eta guard admits float-boundary values in oracle mode
    VarAssignment edge{{"x", {0.9 - 1e-12, 0.1}}};
    CHECK_FALSE(verify(f, edge, 0.0).satisfied);
    CHECK(verify(f, edge, 0.0, 1e-9).satisfied);
}

TEST_CASE("budget cuts the sweep short") {
    SolveRequest req = first_coordinate_request(2.0, CmpOp::ge, 0.0, 50); // infeasible
    req.budget = 10;
    const SolveReport rep = solve(req);
    CHECK(rep.verdict == Verdict::budget_exhausted);
    CHECK(rep.points_scanned == 10);
    CHECK(rep.grid_truncated);

    // optimization under budget returns the best seen so far
    SolveRequest opt = first_coordinate_request(0.0, CmpOp::ge, 0.0, 50);
    Objective obj;
    obj.poly.terms.push_back(StmPolynomial{
        DenseTensor::uniform(2, 1, {1.0, 0.0}), {"x"}, {1}, 0.0});
    opt.objectives.push_back(obj);
    opt.budget = 5;
    const SolveReport best = solve(opt);
    CHECK(best.verdict == Verdict::budget_exhausted);
    CHECK(best.objective_values.size() == 1);
}

TEST_CASE("request validation") {
    SolveRequest req = first_coordinate_request(1.0, CmpOp::ge, 0.0, 1);
    req.k = {1, 2};
    CHECK_THROWS_AS(solve(req), InputError);
    req.k = {0};
    CHECK_THROWS_AS(solve(req), InputError);
    req.k = {1};
    req.eps = -1;
    CHECK_THROWS_AS(solve(req), InputError);

    // formula variable not bound by the domain
    SolveRequest unbound;
    unbound.formula = normalize(FormulaNode::leaf(linear_atom("z", {1.0}, 0, CmpOp::ge)));
    unbound.domain.bind("x", simplex_hull(2, 1.0));
    unbound.eps = 0;
    unbound.k = {1};
    CHECK_THROWS_AS(solve(unbound), DimensionError);
}
