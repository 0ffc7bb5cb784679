// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "etra/solver.hpp"

namespace etra {

/// n-player normal form game, l actions per player, payoff tensors in
/// [0,1]. Tensor j is flat row-major over the joint action space, axis
/// i indexed by player i's action.
struct NormalFormGame {
    int players = 2;
    int actions = 2;
    std::vector<std::vector<double>> payoffs; // one flat tensor per player

    void validate() const;
    std::size_t cells() const;
    double payoff(int player, std::span<const int> cell) const;
};

/// Matching pennies in the [0,1] win/loss normalization.
NormalFormGame matching_pennies();

/// Per-player regret max_a u_j(a, x_-j) - u_j(x), by direct
/// contraction over the payoff arrays (no solver machinery).
std::vector<double> regret(const NormalFormGame& game,
                           const std::vector<std::vector<double>>& profile);

/// Best-response atoms u_j(a, x_-j) - u_j(x) <=_eps 0 for every player
/// and action, conjoined with optional side constraints over the
/// strategy variables x1..xn; domain is a product of simplices.
SolveRequest build_ne_request(const NormalFormGame& game,
                              std::optional<FormulaNode> side_constraints, double eps, int k);

/// Two-player zero-sum discounted stochastic game.
struct ShapleyGame {
    int states = 1;   // N
    int actions = 1;  // M
    std::vector<double> rewards;     // r[s][j][k], flat N*M*M
    std::vector<double> transitions; // p[s][s'][j][k], flat N*N*M*M
    double lambda = 0.5;
    double bound = 1; // B: value hull is [-B, B] per state
    int start = 0;

    void validate() const;
    double r(int s, int j, int k) const {
        return rewards[static_cast<std::size_t>((s * actions + j) * actions + k)];
    }
    double p(int s, int s2, int j, int k) const {
        return transitions[static_cast<std::size_t>(((s * states + s2) * actions + j) * actions +
                                                    k)];
    }
};

/// Optimality-equation constraints: for every state s, (x_s, y_s) must
/// be a min-max pair at value v(s) for the one-shot game with
/// continuation values v, written as 2M relaxed inequalities per state.
/// Variables: x1..xN, y1..yN over the action simplex and v1..vN over
/// the segment [-B, B].
SolveRequest build_shapley_request(const ShapleyGame& game, double eps, int k);

/// Per-state fixed-point gap at a candidate (x, y, v), recomputed
/// directly: max deviation of v(s) from the pure best-response values
/// at (x_s, y_s).
std::vector<double> shapley_gaps(const ShapleyGame& game,
                                 const std::vector<std::vector<double>>& x,
                                 const std::vector<std::vector<double>>& y,
                                 const std::vector<double>& v);

/// Consensus halving with polynomial valuations: agent i values [0,t]
/// at F_i(t) given by a coefficient list (a0, a1, ..., ad).
struct HalvingInstance {
    std::vector<std::vector<double>> agents; // coefficient lists
    double eps = 0.1;
    int max_degree = 8;

    void validate() const;
    int n() const { return static_cast<int>(agents.size()); }
};

/// One relaxed equality pair per agent on the alternating share
/// difference, over the cut variable t in the hull of v_j = (0^j, 1^(n-j)).
SolveRequest build_halving_request(const HalvingInstance& inst, int k);

/// |F_i(A+) - F_i(A-)| per agent, straight from the coefficient lists.
/// Cuts must be sorted; t_0 = 0 and t_{n+1} = 1 are implied.
std::vector<double> evaluate_cut(const HalvingInstance& inst, std::span<const double> cuts);

} // namespace etra
