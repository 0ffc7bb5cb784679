// SPDX-License-Identifier: Apache-2.0
#include "etra/apps_games.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace etra {

void NormalFormGame::validate() const {
    if (players < 1) throw InputError("need at least one player", "players");
    if (actions < 1) throw InputError("need at least one action", "actions");
    if (static_cast<int>(payoffs.size()) != players)
        throw InputError("one payoff tensor per player required", "payoffs");
    const std::size_t want = cells();
    for (const auto& t : payoffs) {
        if (t.size() != want) throw InputError("payoff tensor has wrong size", "payoffs");
        for (double v : t)
            if (v < 0.0 || v > 1.0)
                throw InputError("payoffs must lie in [0,1]", "payoffs");
    }
}

std::size_t NormalFormGame::cells() const {
    std::size_t c = 1;
    for (int i = 0; i < players; ++i) c *= static_cast<std::size_t>(actions);
    return c;
}

double NormalFormGame::payoff(int player, std::span<const int> cell) const {
    std::size_t flat = 0;
    for (int i = 0; i < players; ++i)
        flat = flat * static_cast<std::size_t>(actions) + static_cast<std::size_t>(cell[static_cast<std::size_t>(i)]);
    return payoffs[static_cast<std::size_t>(player)][flat];
}

NormalFormGame matching_pennies() {
    NormalFormGame g;
    g.players = 2;
    g.actions = 2;
    // row player wins on a match, column player on a mismatch
    g.payoffs = {{1, 0, 0, 1}, {0, 1, 1, 0}};
    return g;
}

namespace {

void for_each_cell(int players, int actions, const std::function<void(std::span<const int>)>& fn) {
    std::vector<int> cell(static_cast<std::size_t>(players), 0);
    for (;;) {
        fn(cell);
        int i = players - 1;
        while (i >= 0 && ++cell[static_cast<std::size_t>(i)] == actions) {
            cell[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

} // namespace

std::vector<double> regret(const NormalFormGame& game,
                           const std::vector<std::vector<double>>& profile) {
    game.validate();
    if (static_cast<int>(profile.size()) != game.players)
        throw DimensionError("profile", "one strategy per player required");
    for (const auto& s : profile)
        if (static_cast<int>(s.size()) != game.actions)
            throw DimensionError("profile", "strategy length must equal the action count");

    std::vector<double> out(static_cast<std::size_t>(game.players), 0.0);
    for (int j = 0; j < game.players; ++j) {
        double realized = 0;
        std::vector<double> pure(static_cast<std::size_t>(game.actions), 0.0);
        for_each_cell(game.players, game.actions, [&](std::span<const int> cell) {
            double others = 1.0;
            for (int i = 0; i < game.players; ++i)
                if (i != j) others *= profile[static_cast<std::size_t>(i)]
                                             [static_cast<std::size_t>(cell[static_cast<std::size_t>(i)])];
            const double pay = game.payoff(j, cell);
            pure[static_cast<std::size_t>(cell[static_cast<std::size_t>(j)])] += others * pay;
            realized += others * pay *
                        profile[static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(cell[static_cast<std::size_t>(j)])];
        });
        double best = pure[0];
        for (double v : pure) best = std::max(best, v);
        out[static_cast<std::size_t>(j)] = best - realized;
    }
    return out;
}

namespace {

std::string player_var(int j) { return "x" + std::to_string(j + 1); }

/// STM for the full multilinear payoff of one player, all exponents 1.
StmPolynomial payoff_stm(const NormalFormGame& game, int player, double scale) {
    StmPolynomial stm;
    std::vector<double> entries = game.payoffs[static_cast<std::size_t>(player)];
    for (auto& e : entries) e *= scale;
    stm.tensor = DenseTensor::uniform(game.actions, game.players, std::move(entries));
    for (int i = 0; i < game.players; ++i) {
        stm.var_names.push_back(player_var(i));
        stm.exponents.push_back(1);
    }
    return stm;
}

/// Payoff tensor sliced at player j's pure action a, over the others.
StmPolynomial sliced_payoff_stm(const NormalFormGame& game, int player, int j, int a) {
    const int n = game.players;
    const int l = game.actions;
    StmPolynomial stm;
    std::size_t size = 1;
    for (int i = 0; i < n - 1; ++i) size *= static_cast<std::size_t>(l);
    std::vector<double> entries(size, 0.0);

    std::vector<int> cell(static_cast<std::size_t>(n), 0);
    cell[static_cast<std::size_t>(j)] = a;
    std::vector<int> rest(static_cast<std::size_t>(n - 1), 0);
    for (;;) {
        int r = 0;
        for (int i = 0; i < n; ++i)
            if (i != j) cell[static_cast<std::size_t>(i)] = rest[static_cast<std::size_t>(r++)];
        std::size_t flat = 0;
        for (int i = 0; i < n - 1; ++i)
            flat = flat * static_cast<std::size_t>(l) + static_cast<std::size_t>(rest[static_cast<std::size_t>(i)]);
        entries[flat] = game.payoff(player, cell);
        int i = n - 2;
        while (i >= 0 && ++rest[static_cast<std::size_t>(i)] == l) {
            rest[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0 || n == 1) break;
    }

    stm.tensor = DenseTensor::uniform(l, n - 1, std::move(entries));
    for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        stm.var_names.push_back(player_var(i));
        stm.exponents.push_back(1);
    }
    return stm;
}

} // namespace

SolveRequest build_ne_request(const NormalFormGame& game,
                              std::optional<FormulaNode> side_constraints, double eps, int k) {
    game.validate();
    std::vector<FormulaNode> atoms;
    for (int j = 0; j < game.players; ++j) {
        for (int a = 0; a < game.actions; ++a) {
            Atom atom;
            atom.op = CmpOp::le; // u_j(a, x_-j) - u_j(x) <= 0, relaxed
            atom.poly.terms.push_back(sliced_payoff_stm(game, j, j, a));
            atom.poly.terms.push_back(payoff_stm(game, j, -1.0));
            atoms.push_back(FormulaNode::leaf(std::move(atom)));
        }
    }
    FormulaNode root = FormulaNode::conj(std::move(atoms));
    if (side_constraints) root.children.push_back(std::move(*side_constraints));

    SolveRequest req;
    req.formula = normalize(root);
    for (int j = 0; j < game.players; ++j)
        req.domain.bind(player_var(j), simplex_hull(game.actions, 1.0));
    req.eps = eps;
    req.k = {k};
    return req;
}

void ShapleyGame::validate() const {
    if (states < 1) throw InputError("need at least one state", "states");
    if (actions < 1) throw InputError("need at least one action", "actions");
    const auto nm = static_cast<std::size_t>(states) * static_cast<std::size_t>(actions) *
                    static_cast<std::size_t>(actions);
    if (rewards.size() != nm) throw InputError("rewards must be N*M*M values", "rewards");
    if (transitions.size() != nm * static_cast<std::size_t>(states))
        throw InputError("transitions must be N*N*M*M values", "transitions");
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw InputError("discount factor must satisfy 0 < lambda < 1", "lambda");
    if (!(bound > 0) || !std::isfinite(bound))
        throw InputError("value bound B must be positive and finite", "bound");
    if (start < 0 || start >= states) throw InputError("start state out of range", "start");
    for (int s = 0; s < states; ++s)
        for (int j = 0; j < actions; ++j)
            for (int k = 0; k < actions; ++k) {
                double sum = 0;
                for (int s2 = 0; s2 < states; ++s2) sum += p(s, s2, j, k);
                if (std::fabs(sum - 1.0) > 1e-9)
                    throw InputError("transition rows must sum to 1", "transitions");
            }
}

namespace {

std::string state_var(const char* base, int s) { return base + std::to_string(s + 1); }

/// Atoms for Q_s with one side fixed to a pure action.
/// fix_row=true pins player one's action to `a` and leaves y_s free.
TmvPolynomial shapley_one_shot(const ShapleyGame& g, int s, bool fix_row, int a) {
    TmvPolynomial poly;
    const int M = g.actions;
    const std::string free_var = fix_row ? state_var("y", s) : state_var("x", s);

    StmPolynomial rb;
    std::vector<double> rvec(static_cast<std::size_t>(M), 0.0);
    for (int o = 0; o < M; ++o)
        rvec[static_cast<std::size_t>(o)] = fix_row ? g.r(s, a, o) : g.r(s, o, a);
    rb.tensor = DenseTensor::uniform(M, 1, std::move(rvec));
    rb.var_names = {free_var};
    rb.exponents = {1};
    poly.terms.push_back(std::move(rb));

    for (int s2 = 0; s2 < g.states; ++s2) {
        StmPolynomial tb;
        std::vector<double> tvec(static_cast<std::size_t>(M), 0.0);
        bool nonzero = false;
        for (int o = 0; o < M; ++o) {
            const double v = g.lambda * (fix_row ? g.p(s, s2, a, o) : g.p(s, s2, o, a));
            tvec[static_cast<std::size_t>(o)] = v;
            nonzero = nonzero || v != 0.0;
        }
        if (!nonzero) continue;
        tb.tensor = BasicTensor<double>({M, 1}, std::move(tvec));
        tb.var_names = {free_var, state_var("v", s2)};
        tb.exponents = {1, 1};
        poly.terms.push_back(std::move(tb));
    }

    StmPolynomial self;
    self.tensor = DenseTensor::uniform(1, 1, {-1.0});
    self.var_names = {state_var("v", s)};
    self.exponents = {1};
    poly.terms.push_back(std::move(self));
    return poly;
}

} // namespace

SolveRequest build_shapley_request(const ShapleyGame& game, double eps, int k) {
    game.validate();
    std::vector<FormulaNode> atoms;
    for (int s = 0; s < game.states; ++s) {
        // v(s) = min over x of max over y: pure column deviations stay
        // at or below v(s)+eps, pure row deviations at or above v(s)-eps.
        for (int col = 0; col < game.actions; ++col) {
            Atom a;
            a.op = CmpOp::le;
            a.poly = shapley_one_shot(game, s, false, col); // x_s free, y = e_col
            atoms.push_back(FormulaNode::leaf(std::move(a)));
        }
        for (int row = 0; row < game.actions; ++row) {
            Atom a;
            a.op = CmpOp::ge;
            a.poly = shapley_one_shot(game, s, true, row); // y_s free, x = e_row
            atoms.push_back(FormulaNode::leaf(std::move(a)));
        }
    }

    SolveRequest req;
    req.formula = normalize(FormulaNode::conj(std::move(atoms)));
    for (int s = 0; s < game.states; ++s)
        req.domain.bind(state_var("x", s), simplex_hull(game.actions, 1.0));
    for (int s = 0; s < game.states; ++s)
        req.domain.bind(state_var("y", s), simplex_hull(game.actions, 1.0));
    for (int s = 0; s < game.states; ++s)
        req.domain.bind(state_var("v", s), segment_hull(-game.bound, game.bound));
    req.eps = eps;
    req.k = {k};
    return req;
}

std::vector<double> shapley_gaps(const ShapleyGame& game,
                                 const std::vector<std::vector<double>>& x,
                                 const std::vector<std::vector<double>>& y,
                                 const std::vector<double>& v) {
    game.validate();
    const int N = game.states, M = game.actions;
    if (static_cast<int>(x.size()) != N || static_cast<int>(y.size()) != N ||
        static_cast<int>(v.size()) != N)
        throw DimensionError("v", "need one strategy pair and value per state");

    auto q = [&](int s, int j, int k) {
        double val = game.r(s, j, k);
        for (int s2 = 0; s2 < N; ++s2)
            val += game.lambda * game.p(s, s2, j, k) * v[static_cast<std::size_t>(s2)];
        return val;
    };

    std::vector<double> gaps(static_cast<std::size_t>(N), 0.0);
    for (int s = 0; s < N; ++s) {
        double best_col = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < M; ++k) {
            double val = 0;
            for (int j = 0; j < M; ++j)
                val += x[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] * q(s, j, k);
            best_col = std::max(best_col, val);
        }
        double best_row = std::numeric_limits<double>::infinity();
        for (int j = 0; j < M; ++j) {
            double val = 0;
            for (int k = 0; k < M; ++k)
                val += y[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] * q(s, j, k);
            best_row = std::min(best_row, val);
        }
        gaps[static_cast<std::size_t>(s)] =
            std::max(std::fabs(v[static_cast<std::size_t>(s)] - best_col),
                     std::fabs(v[static_cast<std::size_t>(s)] - best_row));
    }
    return gaps;
}

void HalvingInstance::validate() const {
    if (agents.empty()) throw InputError("need at least one agent", "agents");
    for (const auto& coeffs : agents) {
        if (coeffs.empty()) throw InputError("valuation needs at least one coefficient", "agents");
        const int degree = static_cast<int>(coeffs.size()) - 1;
        if (degree > max_degree)
            throw InputError("valuation degree exceeds the configured limit", "agents");
        // the degree-d share tensor is dense with n^d entries
        if (std::pow(static_cast<double>(agents.size()), degree) > 2e7)
            throw InputError("n^degree share tensor would be too large", "agents");
    }
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
}

namespace {

double horner(std::span<const double> coeffs, double t) {
    double acc = 0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
    return acc;
}

/// Alternating share difference for one agent as a polynomial in the
/// cut vector t: (-1)^(n+1) F(1) + 2 sum_i (-1)^i F(t_i), with the
/// F(t_0) term dropped (shares are measured from F(0) = 0).
double share_difference(std::span<const double> coeffs, std::span<const double> cuts) {
    const int n = static_cast<int>(cuts.size());
    double acc = (n % 2 == 0 ? -1.0 : 1.0) * horner(coeffs, 1.0);
    for (int i = 1; i <= n; ++i)
        acc += 2.0 * (i % 2 == 1 ? -1.0 : 1.0) * horner(coeffs, cuts[static_cast<std::size_t>(i - 1)]);
    return acc;
}

TmvPolynomial share_difference_poly(std::span<const double> coeffs, int n) {
    TmvPolynomial poly;
    const int degree = static_cast<int>(coeffs.size()) - 1;

    double c0 = (n % 2 == 0 ? -1.0 : 1.0) * horner(coeffs, 1.0);
    for (int i = 1; i <= n; ++i) c0 += 2.0 * (i % 2 == 1 ? -1.0 : 1.0) * coeffs[0];

    bool constant_pending = true;
    for (int deg = 1; deg <= degree; ++deg) {
        if (coeffs[static_cast<std::size_t>(deg)] == 0.0) continue;
        StmPolynomial stm;
        stm.tensor = DenseTensor::zeros(std::vector<int>(static_cast<std::size_t>(deg), n));
        std::vector<int> diag(static_cast<std::size_t>(deg), 0);
        for (int i = 1; i <= n; ++i) {
            std::fill(diag.begin(), diag.end(), i - 1);
            stm.tensor.mutable_at(diag) =
                2.0 * (i % 2 == 1 ? -1.0 : 1.0) * coeffs[static_cast<std::size_t>(deg)];
        }
        stm.tensor.refresh_alpha();
        stm.var_names = {"t"};
        stm.exponents = {deg};
        if (constant_pending) {
            stm.constant = c0;
            constant_pending = false;
        }
        poly.terms.push_back(std::move(stm));
    }
    if (constant_pending) {
        StmPolynomial stm;
        stm.tensor = DenseTensor(0.0);
        stm.constant = c0;
        poly.terms.push_back(std::move(stm));
    }
    return poly;
}

} // namespace

SolveRequest build_halving_request(const HalvingInstance& inst, int k) {
    inst.validate();
    const int n = inst.n();
    std::vector<FormulaNode> atoms;
    for (const auto& coeffs : inst.agents) {
        Atom a;
        a.poly = share_difference_poly(coeffs, n);
        a.op = CmpOp::eq; // normalize() expands into the relaxed pair
        atoms.push_back(FormulaNode::leaf(std::move(a)));
    }
    SolveRequest req;
    req.formula = normalize(FormulaNode::conj(std::move(atoms)));
    req.domain.bind("t", halving_hull(n));
    req.eps = inst.eps;
    req.k = {k};
    return req;
}

std::vector<double> evaluate_cut(const HalvingInstance& inst, std::span<const double> cuts) {
    inst.validate();
    if (static_cast<int>(cuts.size()) != inst.n())
        throw DimensionError("cuts", "need one cut per agent");
    double prev = 0.0;
    for (double t : cuts) {
        if (t < prev || t > 1.0) throw InputError("cuts must be sorted within [0,1]", "cuts");
        prev = t;
    }
    std::vector<double> out;
    out.reserve(inst.agents.size());
    for (const auto& coeffs : inst.agents)
        out.push_back(std::fabs(share_difference(coeffs, cuts)));
    return out;
}

} // namespace etra
