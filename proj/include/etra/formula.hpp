// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "etra/tensor.hpp"

namespace etra {

enum class CmpOp { lt, le, ge, gt, eq };

const char* to_string(CmpOp op);

/// Leaf constraint: poly compared against 0. Inputs of the form
/// p ⋈ q are pre-normalized to p - q ⋈ 0 by the builders.
/// relaxable=false keeps the atom at its exact semantics even when the
/// surrounding evaluation carries an eps band (used where a builder has
/// already widened the constants itself).
struct Atom {
    TmvPolynomial poly;
    CmpOp op = CmpOp::le;
    bool relaxable = true;
};

/// Boolean tree over atoms. NOT nodes are only legal in raw input
/// trees; normalize() removes them.
struct FormulaNode {
    enum class Kind { And, Or, Not, Leaf };

    Kind kind = Kind::And;
    std::vector<FormulaNode> children; // And/Or: any number; Not: exactly 1
    std::shared_ptr<const Atom> atom;  // Leaf only

    static FormulaNode leaf(Atom a) {
        FormulaNode n;
        n.kind = Kind::Leaf;
        n.atom = std::make_shared<const Atom>(std::move(a));
        return n;
    }
    static FormulaNode conj(std::vector<FormulaNode> cs) {
        FormulaNode n;
        n.kind = Kind::And;
        n.children = std::move(cs);
        return n;
    }
    static FormulaNode disj(std::vector<FormulaNode> cs) {
        FormulaNode n;
        n.kind = Kind::Or;
        n.children = std::move(cs);
        return n;
    }
    static FormulaNode negate(FormulaNode c) {
        FormulaNode n;
        n.kind = Kind::Not;
        n.children.push_back(std::move(c));
        return n;
    }
};

/// Negation-free formula plus normalization diagnostics.
/// An empty And node is the trivially-true formula used by pure
/// optimization requests.
struct Formula {
    FormulaNode root;
    int atom_count = 0;
    int eq_rewrites = 0; // EQ atoms expanded into (<=, >=) pairs

    bool trivially_true() const {
        return root.kind == FormulaNode::Kind::And && root.children.empty();
    }
};

/// Push negations to the atoms (De Morgan + operator flips) and expand
/// every equality into a (p<=0) AND (p>=0) pair.
Formula normalize(const FormulaNode& raw);

/// Standard semantics with strict/non-strict comparisons against 0.
/// Total on raw trees: handles NOT and EQ directly, so it doubles as
/// the reference evaluator for normalize().
bool eval_exact(const FormulaNode& node, const VarAssignment& assignment);
bool eval_exact(const Formula& formula, const VarAssignment& assignment);

/// Relaxed semantics: each relaxable atom is widened by eps
/// (p <=_eps 0 iff p <= eps, p >=_eps 0 iff p >= -eps, and the strict
/// variants likewise). eps = 0 coincides with eval_exact on normalized
/// formulas. Requires a normalized tree; negative eps is rejected.
bool eval_relaxed(const Formula& formula, const VarAssignment& assignment, double eps);

/// One relaxed atom check; exposed for the verifier.
bool atom_holds(const Atom& atom, double value, double eps, double eta = 0.0);

/// Collect the distinct variable names under a node.
std::vector<std::string> formula_variables(const FormulaNode& node);

/// Count leaves.
int count_atoms(const FormulaNode& node);

/// Repeated-squaring chain over scalar variables t, g1..g{L+6}:
///   g1 >= 2+eps, gj >= g(j-1)^2 + eps, t >= eps*g(L+6) + eps,
/// all as >= atoms relaxed by eps, which forces t >= eps * 2^(2^(L+5)).
struct FeasGadget {
    Formula formula;
    double eps = 0;
    double threshold = 0; // eps * 2^(2^(L+5))
    std::vector<std::string> var_names; // "t", "g1", ..., "g{L+6}"
};

/// L must be small enough that 2^(2^(L+5)) is a finite double (L <= 4).
FeasGadget build_feas_gadget(int L, double eps);

/// A term in expanded monomial form: coefficient times a product of
/// vector components raised to powers. Indices are 0-based here; the
/// file loader converts from the 1-based file convention.
struct Monomial {
    double coefficient = 0;
    struct Factor {
        std::string var;
        int index = 0; // component within the vector variable
        int power = 1;
    };
    std::vector<Factor> factors;
};

/// Compile monomials to a TMV with one one-hot STM per term. `var_dims`
/// gives each variable's vector length.
TmvPolynomial compile_monomials(const std::vector<Monomial>& monomials,
                                const std::map<std::string, int>& var_dims,
                                double constant = 0.0);

} // namespace etra
