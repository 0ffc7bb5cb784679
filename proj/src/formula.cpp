// SPDX-License-Identifier: Apache-2.0
#include "etra/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace etra {

const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::lt: return "lt";
        case CmpOp::le: return "le";
        case CmpOp::ge: return "ge";
        case CmpOp::gt: return "gt";
        case CmpOp::eq: return "eq";
    }
    return "?";
}

namespace {

CmpOp flipped(CmpOp op) {
    switch (op) {
        case CmpOp::lt: return CmpOp::ge;
        case CmpOp::le: return CmpOp::gt;
        case CmpOp::ge: return CmpOp::lt;
        case CmpOp::gt: return CmpOp::le;
        case CmpOp::eq: return CmpOp::eq; // handled by the caller
    }
    return op;
}

FormulaNode normalize_node(const FormulaNode& node, bool negated, int& atoms, int& eq_rewrites) {
    using Kind = FormulaNode::Kind;
    switch (node.kind) {
        case Kind::Not:
            if (node.children.size() != 1) throw InputError("NOT node must have one child");
            return normalize_node(node.children.front(), !negated, atoms, eq_rewrites);
        case Kind::And:
        case Kind::Or: {
            std::vector<FormulaNode> children;
            children.reserve(node.children.size());
            for (const auto& c : node.children)
                children.push_back(normalize_node(c, negated, atoms, eq_rewrites));
            const bool is_and = (node.kind == Kind::And) != negated;
            return is_and ? FormulaNode::conj(std::move(children))
                          : FormulaNode::disj(std::move(children));
        }
        case Kind::Leaf: {
            if (!node.atom) throw InputError("leaf without atom");
            const Atom& a = *node.atom;
            if (a.op == CmpOp::eq) {
                ++eq_rewrites;
                Atom le = a, ge = a;
                le.op = CmpOp::le;
                ge.op = CmpOp::ge;
                if (!negated) {
                    // p = 0  ->  (p <= 0) AND (p >= 0)
                    atoms += 2;
                    return FormulaNode::conj(
                        {FormulaNode::leaf(std::move(le)), FormulaNode::leaf(std::move(ge))});
                }
                // not(p = 0)  ->  (p < 0) OR (p > 0)
                le.op = CmpOp::lt;
                ge.op = CmpOp::gt;
                atoms += 2;
                return FormulaNode::disj(
                    {FormulaNode::leaf(std::move(le)), FormulaNode::leaf(std::move(ge))});
            }
            ++atoms;
            if (!negated) return FormulaNode::leaf(a);
            Atom flippedAtom = a;
            flippedAtom.op = flipped(a.op);
            return FormulaNode::leaf(std::move(flippedAtom));
        }
    }
    throw InputError("unknown formula node kind");
}

bool compare_exact(double value, CmpOp op) {
    switch (op) {
        case CmpOp::lt: return value < 0;
        case CmpOp::le: return value <= 0;
        case CmpOp::ge: return value >= 0;
        case CmpOp::gt: return value > 0;
        case CmpOp::eq: return value == 0;
    }
    return false;
}

bool eval_relaxed_node(const FormulaNode& node, const VarAssignment& assignment, double eps) {
    using Kind = FormulaNode::Kind;
    switch (node.kind) {
        case Kind::And:
            for (const auto& c : node.children)
                if (!eval_relaxed_node(c, assignment, eps)) return false;
            return true;
        case Kind::Or:
            for (const auto& c : node.children)
                if (eval_relaxed_node(c, assignment, eps)) return true;
            return false;
        case Kind::Not:
            throw InputError("formula not normalized: NOT node in relaxed evaluation");
        case Kind::Leaf: {
            const Atom& a = *node.atom;
            return atom_holds(a, eval_tmv(a.poly, assignment), eps);
        }
    }
    return false;
}

} // namespace

bool atom_holds(const Atom& atom, double value, double eps, double eta) {
    const double band = atom.relaxable ? eps : 0.0;
    switch (atom.op) {
        case CmpOp::lt: return value < band;
        case CmpOp::le: return value <= band + eta;
        case CmpOp::ge: return value >= -band - eta;
        case CmpOp::gt: return value > -band;
        case CmpOp::eq:
            throw InputError("formula not normalized: EQ atom in relaxed evaluation");
    }
    return false;
}

Formula normalize(const FormulaNode& raw) {
    Formula f;
    f.root = normalize_node(raw, false, f.atom_count, f.eq_rewrites);
    return f;
}

bool eval_exact(const FormulaNode& node, const VarAssignment& assignment) {
    using Kind = FormulaNode::Kind;
    switch (node.kind) {
        case Kind::And:
            for (const auto& c : node.children)
                if (!eval_exact(c, assignment)) return false;
            return true;
        case Kind::Or:
            for (const auto& c : node.children)
                if (eval_exact(c, assignment)) return true;
            return false;
        case Kind::Not:
            if (node.children.size() != 1) throw InputError("NOT node must have one child");
            return !eval_exact(node.children.front(), assignment);
        case Kind::Leaf:
            return compare_exact(eval_tmv(node.atom->poly, assignment), node.atom->op);
    }
    return false;
}

bool eval_exact(const Formula& formula, const VarAssignment& assignment) {
    return eval_exact(formula.root, assignment);
}

bool eval_relaxed(const Formula& formula, const VarAssignment& assignment, double eps) {
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
    return eval_relaxed_node(formula.root, assignment, eps);
}

std::vector<std::string> formula_variables(const FormulaNode& node) {
    std::set<std::string> names;
    auto walk = [&](auto&& self, const FormulaNode& n) -> void {
        if (n.kind == FormulaNode::Kind::Leaf) {
            for (const auto& term : n.atom->poly.terms)
                for (const auto& v : term.var_names) names.insert(v);
            return;
        }
        for (const auto& c : n.children) self(self, c);
    };
    walk(walk, node);
    return {names.begin(), names.end()};
}

int count_atoms(const FormulaNode& node) {
    if (node.kind == FormulaNode::Kind::Leaf) return 1;
    int n = 0;
    for (const auto& c : node.children) n += count_atoms(c);
    return n;
}

namespace {

// 1-dimensional linear STM: coef * var
StmPolynomial scalar_term(const std::string& var, double coef, double a0 = 0.0) {
    StmPolynomial stm;
    stm.tensor = DenseTensor::uniform(1, 1, {coef});
    stm.var_names = {var};
    stm.exponents = {1};
    stm.constant = a0;
    return stm;
}

// 1-dimensional quadratic STM: coef * var^2
StmPolynomial scalar_square_term(const std::string& var, double coef) {
    StmPolynomial stm;
    stm.tensor = DenseTensor::uniform(1, 2, {coef});
    stm.var_names = {var};
    stm.exponents = {2};
    return stm;
}

} // namespace

FeasGadget build_feas_gadget(int L, double eps) {
    if (L < 0) throw InputError("L must be >= 0", "L");
    if (eps <= 0) throw InputError("eps must be positive", "eps");
    if (L > 4)
        throw OverflowError("2^(2^(L+5)) exceeds double range for L > 4; choose L <= 4");

    FeasGadget g;
    g.eps = eps;
    g.threshold = eps * std::ldexp(1.0, 1 << (L + 5));
    if (!std::isfinite(g.threshold))
        throw OverflowError("gadget threshold overflows the float range");

    const int chain = L + 6;
    g.var_names.push_back("t");
    for (int j = 1; j <= chain; ++j) g.var_names.push_back("g" + std::to_string(j));

    std::vector<FormulaNode> atoms;
    // g1 - (2 + eps) >= 0, relaxed to g1 >= 2
    {
        Atom a;
        a.op = CmpOp::ge;
        a.poly.terms.push_back(scalar_term("g1", 1.0, -(2.0 + eps)));
        atoms.push_back(FormulaNode::leaf(std::move(a)));
    }
    // gj - g(j-1)^2 - eps >= 0, relaxed to gj >= g(j-1)^2
    for (int j = 2; j <= chain; ++j) {
        Atom a;
        a.op = CmpOp::ge;
        a.poly.terms.push_back(scalar_term("g" + std::to_string(j), 1.0, -eps));
        a.poly.terms.push_back(scalar_square_term("g" + std::to_string(j - 1), -1.0));
        atoms.push_back(FormulaNode::leaf(std::move(a)));
    }
    // t - eps*g(L+6) - eps >= 0, relaxed to t >= eps*g(L+6)
    {
        Atom a;
        a.op = CmpOp::ge;
        a.poly.terms.push_back(scalar_term("t", 1.0, -eps));
        a.poly.terms.push_back(scalar_term("g" + std::to_string(chain), -eps));
        atoms.push_back(FormulaNode::leaf(std::move(a)));
    }

    g.formula = normalize(FormulaNode::conj(std::move(atoms)));
    return g;
}

TmvPolynomial compile_monomials(const std::vector<Monomial>& monomials,
                                const std::map<std::string, int>& var_dims,
                                double constant) {
    TmvPolynomial poly;
    bool constant_pending = true;
    for (const auto& m : monomials) {
        // Group factors by variable so x(1)*x(2) compiles to one
        // exponent-2 axis pair rather than two exponent-1 entries.
        std::vector<std::pair<std::string, std::vector<int>>> groups;
        for (const auto& f : m.factors) {
            auto it = var_dims.find(f.var);
            if (it == var_dims.end())
                throw InputError("monomial uses undeclared variable '" + f.var + "'", "vars");
            if (f.index < 0 || f.index >= it->second)
                throw InputError("monomial component index out of range for '" + f.var + "'",
                                 "index");
            if (f.power < 1) throw InputError("monomial power must be >= 1", "power");
            auto g = std::find_if(groups.begin(), groups.end(),
                                  [&](const auto& e) { return e.first == f.var; });
            if (g == groups.end()) {
                groups.push_back({f.var, {}});
                g = std::prev(groups.end());
            }
            for (int r = 0; r < f.power; ++r) g->second.push_back(f.index);
        }

        StmPolynomial stm;
        std::vector<int> dims;
        std::vector<int> coords;
        for (const auto& [var, idxs] : groups) {
            stm.var_names.push_back(var);
            stm.exponents.push_back(static_cast<int>(idxs.size()));
            for (int idx : idxs) {
                dims.push_back(var_dims.at(var));
                coords.push_back(idx);
            }
        }
        stm.tensor = DenseTensor::zeros(dims);
        stm.tensor.mutable_at(coords) = m.coefficient;
        stm.tensor.refresh_alpha();
        if (constant_pending) {
            stm.constant = constant;
            constant_pending = false;
        }
        poly.terms.push_back(std::move(stm));
    }
    if (constant_pending) {
        StmPolynomial stm;
        stm.tensor = DenseTensor(0.0);
        stm.constant = constant;
        poly.terms.push_back(std::move(stm));
    }
    return poly;
}

} // namespace etra
