// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "etra/formula.hpp"
#include "test_util.hpp"

using namespace etra;
using testutil::Rng;

namespace {

/// x - c compared against 0, over the scalar variable `name`.
Atom shifted_var(const std::string& name, double c, CmpOp op) {
    Atom a;
    StmPolynomial stm;
    stm.tensor = DenseTensor::uniform(1, 1, {1.0});
    stm.var_names = {name};
    stm.exponents = {1};
    stm.constant = -c;
    a.poly.terms.push_back(std::move(stm));
    a.op = op;
    return a;
}

bool same_structure(const FormulaNode& a, const FormulaNode& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    if (a.kind == FormulaNode::Kind::Leaf) return a.atom->op == b.atom->op;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!same_structure(a.children[i], b.children[i])) return false;
    return true;
}

/// Random depth-2 formulas over two scalar variables.
FormulaNode random_formula(Rng& rng, bool allow_not_eq) {
    auto random_atom = [&]() {
        const CmpOp ops[] = {CmpOp::lt, CmpOp::le, CmpOp::ge, CmpOp::gt, CmpOp::eq};
        const int n_ops = allow_not_eq ? 5 : 4;
        const std::string var = rng.range(0, 1) ? "x" : "y";
        return FormulaNode::leaf(
            shifted_var(var, rng.uniform(-1, 1), ops[rng.range(0, n_ops - 1)]));
    };
    std::vector<FormulaNode> groups;
    const int n_groups = rng.range(1, 3);
    for (int g = 0; g < n_groups; ++g) {
        std::vector<FormulaNode> atoms;
        const int n_atoms = rng.range(1, 3);
        for (int i = 0; i < n_atoms; ++i) atoms.push_back(random_atom());
        FormulaNode node = rng.range(0, 1) ? FormulaNode::conj(std::move(atoms))
                                           : FormulaNode::disj(std::move(atoms));
        if (allow_not_eq && rng.range(0, 3) == 0) node = FormulaNode::negate(std::move(node));
        groups.push_back(std::move(node));
    }
    return rng.range(0, 1) ? FormulaNode::conj(std::move(groups))
                           : FormulaNode::disj(std::move(groups));
}

} // namespace

TEST_CASE("negation pushes through conjunctions and flips operators") {
    // not((p <= 0) and (q > 0))  ->  (p > 0) or (q <= 0)
    FormulaNode raw = FormulaNode::negate(
        FormulaNode::conj({FormulaNode::leaf(shifted_var("p", 0, CmpOp::le)),
                           FormulaNode::leaf(shifted_var("q", 0, CmpOp::gt))}));
    Formula f = normalize(raw);
    REQUIRE(f.root.kind == FormulaNode::Kind::Or);
    REQUIRE(f.root.children.size() == 2);
    CHECK(f.root.children[0].atom->op == CmpOp::gt);
    CHECK(f.root.children[1].atom->op == CmpOp::le);
    CHECK(f.atom_count == 2);
}

TEST_CASE("equality expands into a two-sided conjunction") {
    Formula f = normalize(FormulaNode::leaf(shifted_var("p", 0, CmpOp::eq)));
    REQUIRE(f.root.kind == FormulaNode::Kind::And);
    REQUIRE(f.root.children.size() == 2);
    CHECK(f.root.children[0].atom->op == CmpOp::le);
    CHECK(f.root.children[1].atom->op == CmpOp::ge);
    CHECK(f.eq_rewrites == 1);

    // negated equality becomes a strict disjunction
    Formula g = normalize(FormulaNode::negate(FormulaNode::leaf(shifted_var("p", 0, CmpOp::eq))));
    REQUIRE(g.root.kind == FormulaNode::Kind::Or);
    CHECK(g.root.children[0].atom->op == CmpOp::lt);
    CHECK(g.root.children[1].atom->op == CmpOp::gt);
}

TEST_CASE("normalize is idempotent on already-normal trees") {
    FormulaNode raw =
        FormulaNode::conj({FormulaNode::leaf(shifted_var("x", 1, CmpOp::le)),
                           FormulaNode::disj({FormulaNode::leaf(shifted_var("y", 0, CmpOp::gt)),
                                              FormulaNode::leaf(shifted_var("x", 2, CmpOp::ge))})});
    Formula once = normalize(raw);
    Formula twice = normalize(once.root);
    CHECK(same_structure(once.root, twice.root));
    CHECK(once.atom_count == twice.atom_count);
}

TEST_CASE("exact evaluation honors boundaries and strictness") {
    VarAssignment at_one{{"x", {1.0}}};
    CHECK(eval_exact(normalize(FormulaNode::leaf(shifted_var("x", 1, CmpOp::le))), at_one));
    CHECK_FALSE(eval_exact(normalize(FormulaNode::leaf(shifted_var("x", 1, CmpOp::lt))), at_one));
}

TEST_CASE("relaxed evaluation widens by the band") {
    Formula f = normalize(FormulaNode::leaf(shifted_var("x", 1, CmpOp::le)));
    CHECK(eval_relaxed(f, {{"x", {1.05}}}, 0.1));
    CHECK_FALSE(eval_relaxed(f, {{"x", {1.2}}}, 0.1));
    CHECK_THROWS_AS(eval_relaxed(f, {{"x", {1.0}}}, -0.5), InputError);
}

TEST_CASE("unassigned variables raise a structured error") {
    Formula f = normalize(FormulaNode::leaf(shifted_var("x", 1, CmpOp::le)));
    CHECK_THROWS_AS(eval_exact(f, VarAssignment{}), DimensionError);
}

TEST_CASE("eps=0 relaxation collapses to exact semantics") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        FormulaNode raw = random_formula(rng, false);
        Formula f = normalize(raw);
        VarAssignment a{{"x", {rng.uniform(-2, 2)}}, {"y", {rng.uniform(-2, 2)}}};
        CHECK(eval_relaxed(f, a, 0.0) == eval_exact(f, a));
    }
}

TEST_CASE("relaxation is monotone in eps and implied by exact truth") {
    Rng rng(2024);
    int exact_hits = 0;
    for (int trial = 0; trial < 300; ++trial) {
        Formula f = normalize(random_formula(rng, true));
        VarAssignment a{{"x", {rng.uniform(-2, 2)}}, {"y", {rng.uniform(-2, 2)}}};
        double e1 = rng.uniform(0, 1);
        double e2 = e1 + rng.uniform(0, 1);
        if (eval_relaxed(f, a, e1)) CHECK(eval_relaxed(f, a, e2));
        if (eval_exact(f, a)) {
            ++exact_hits;
            CHECK(eval_relaxed(f, a, e1));
        }
    }
    CHECK(exact_hits > 0); // the property was actually exercised
}

TEST_CASE("normalize preserves exact semantics of raw trees") {
    Rng rng(777);
    for (int trial = 0; trial < 300; ++trial) {
        FormulaNode raw = random_formula(rng, true);
        Formula f = normalize(raw);
        VarAssignment a{{"x", {rng.uniform(-2, 2)}}, {"y", {rng.uniform(-2, 2)}}};
        // reference evaluator handles NOT/EQ directly on the raw tree
        CHECK(eval_exact(raw, a) == eval_exact(f, a));
    }
}

TEST_CASE("repeated-squaring gadget") {
    SUBCASE("structural atom count is L+7") {
        FeasGadget g = build_feas_gadget(0, 1.0);
        CHECK(count_atoms(g.formula.root) == 7);
        CHECK(g.var_names.size() == 7);
        CHECK(g.threshold == std::ldexp(1.0, 32)); // eps * 2^(2^5)
    }

    SUBCASE("padded witness satisfies, lowered t fails") {
        FeasGadget g = build_feas_gadget(0, 1.0);
        VarAssignment w;
        for (int j = 1; j <= 6; ++j)
            w["g" + std::to_string(j)] = {std::ldexp(1.0, 1 << (j - 1))}; // 2^(2^(j-1))
        w["t"] = {std::ldexp(1.0, 33)};
        CHECK(eval_relaxed(g.formula, w, 1.0));

        w["t"] = {std::ldexp(1.0, 31)}; // below eps*g6 - eps
        CHECK_FALSE(eval_relaxed(g.formula, w, 1.0));
    }

    SUBCASE("range guards") {
        CHECK_THROWS_AS(build_feas_gadget(-1, 1.0), InputError);
        CHECK_THROWS_AS(build_feas_gadget(5, 1.0), OverflowError);
        CHECK_THROWS_AS(build_feas_gadget(0, 0.0), InputError);
        CHECK_NOTHROW(build_feas_gadget(4, 1.0));
    }
}

TEST_CASE("monomial compilation produces one-hot tensors") {
    // 3*x(1)^2*y(2) - 0.5*x(2), variables x,y of length 2, constant 7
    std::vector<Monomial> monos;
    monos.push_back({3.0, {{"x", 0, 2}, {"y", 1, 1}}});
    monos.push_back({-0.5, {{"x", 1, 1}}});
    TmvPolynomial poly = compile_monomials(monos, {{"x", 2}, {"y", 2}}, 7.0);
    REQUIRE(poly.terms.size() == 2);
    CHECK(poly.terms[0].exponents == std::vector<int>{2, 1});
    CHECK(poly.terms[0].tensor.dims() == std::vector<int>{2, 2, 2});

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<double> y{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double direct = 3.0 * x[0] * x[0] * y[1] - 0.5 * x[1] + 7.0;
        CHECK(eval_tmv(poly, {{"x", x}, {"y", y}}) == doctest::Approx(direct).epsilon(1e-12));
    }
}
