// SPDX-License-Identifier: Apache-2.0
#include "etra/apps_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace etra {

void Graph::validate() const {
    if (n < 1) throw InputError("graph needs at least one vertex", "n");
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("edge endpoint out of range", "edges");
        if (i == j) throw InputError("self-loops are not allowed", "edges");
        if (i > j) throw InputError("edges must be sorted pairs i < j", "edges");
    }
    auto copy = edges;
    std::sort(copy.begin(), copy.end());
    if (std::adjacent_find(copy.begin(), copy.end()) != copy.end())
        throw InputError("duplicate edge", "edges");
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end();
}

int Graph::non_edge_count() const {
    return n * (n - 1) / 2 - static_cast<int>(edges.size());
}

void SegInstance::validate() const {
    graph.validate();
    if (!(K > 0)) throw InputError("K must be positive", "K");
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
}

void UdgInstance::validate() const {
    graph.validate();
    if (!(K > 0)) throw InputError("K must be positive", "K");
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
}

namespace {

/// Degree-2 polynomial over one joint variable: a sparse symmetric-free
/// quadratic part plus a linear part plus a constant.
struct QuadBuilder {
    int dim;
    std::string var;
    std::vector<std::pair<std::pair<int, int>, double>> quad;
    std::vector<std::pair<int, double>> lin;
    double constant = 0;

    TmvPolynomial poly() const {
        TmvPolynomial out;
        bool constant_pending = true;
        if (!quad.empty()) {
            StmPolynomial q;
            q.tensor = DenseTensor::zeros({dim, dim});
            for (const auto& [rc, v] : quad) {
                std::vector<int> idx{rc.first, rc.second};
                q.tensor.mutable_at(idx) += v;
            }
            q.tensor.refresh_alpha();
            q.var_names = {var};
            q.exponents = {2};
            out.terms.push_back(std::move(q));
        }
        if (!lin.empty() || constant != 0 || out.terms.empty()) {
            StmPolynomial l;
            std::vector<double> entries(static_cast<std::size_t>(dim), 0.0);
            for (const auto& [i, v] : lin) entries[static_cast<std::size_t>(i)] += v;
            l.tensor = DenseTensor::uniform(dim, 1, std::move(entries));
            l.var_names = {var};
            l.exponents = {1};
            if (constant_pending) {
                l.constant = constant;
                constant_pending = false;
            }
            out.terms.push_back(std::move(l));
        }
        return out;
    }
};

FormulaNode quad_atom(QuadBuilder b, CmpOp op, bool relaxable = true) {
    Atom a;
    a.poly = b.poly();
    a.op = op;
    a.relaxable = relaxable;
    return FormulaNode::leaf(std::move(a));
}

// SEG layout: variable index of the quantities of vertex v (0-based)
int seg_a(int v) { return 4 * v + 0; }
int seg_b(int v) { return 4 * v + 1; }
int seg_c(int v) { return 4 * v + 2; }
int seg_d(int v) { return 4 * v + 3; }

/// C_of*(A_i - A_j) - (B_j - B_i): nonpositive when the intersection
/// abscissa clears the left endpoint (for A_i > A_j).
QuadBuilder seg_chain_low(int dim, int i, int j, int c_of) {
    QuadBuilder b{dim, "s", {}, {}, 0};
    b.quad.push_back({{seg_c(c_of), seg_a(i)}, 1.0});
    b.quad.push_back({{seg_c(c_of), seg_a(j)}, -1.0});
    b.lin.push_back({seg_b(j), -1.0});
    b.lin.push_back({seg_b(i), 1.0});
    return b;
}

/// (B_j - B_i) - D_of*(A_i - A_j): nonpositive when the abscissa stays
/// below the right endpoint (for A_i > A_j).
QuadBuilder seg_chain_high(int dim, int i, int j, int d_of) {
    QuadBuilder b{dim, "s", {}, {}, 0};
    b.lin.push_back({seg_b(j), 1.0});
    b.lin.push_back({seg_b(i), -1.0});
    b.quad.push_back({{seg_d(d_of), seg_a(i)}, -1.0});
    b.quad.push_back({{seg_d(d_of), seg_a(j)}, 1.0});
    return b;
}

/// INTS predicate: two OR branches of five atoms each; the second
/// branch flips every chain comparison along with the slope order.
FormulaNode seg_ints(int dim, int i, int j) {
    QuadBuilder lead{dim, "s", {}, {}, 0};
    lead.lin.push_back({seg_a(i), 1.0});
    lead.lin.push_back({seg_a(j), -1.0});

    std::vector<FormulaNode> plus;
    plus.push_back(quad_atom(lead, CmpOp::gt));
    plus.push_back(quad_atom(seg_chain_low(dim, i, j, i), CmpOp::le));
    plus.push_back(quad_atom(seg_chain_high(dim, i, j, i), CmpOp::le));
    plus.push_back(quad_atom(seg_chain_low(dim, i, j, j), CmpOp::le));
    plus.push_back(quad_atom(seg_chain_high(dim, i, j, j), CmpOp::le));

    std::vector<FormulaNode> minus;
    minus.push_back(quad_atom(lead, CmpOp::lt));
    minus.push_back(quad_atom(seg_chain_low(dim, i, j, i), CmpOp::ge));
    minus.push_back(quad_atom(seg_chain_high(dim, i, j, i), CmpOp::ge));
    minus.push_back(quad_atom(seg_chain_low(dim, i, j, j), CmpOp::ge));
    minus.push_back(quad_atom(seg_chain_high(dim, i, j, j), CmpOp::ge));

    return FormulaNode::disj(
        {FormulaNode::conj(std::move(plus)), FormulaNode::conj(std::move(minus))});
}

} // namespace

SolveRequest build_seg_request(const SegInstance& inst, int grid_k) {
    inst.validate();
    const int n = inst.graph.n;
    const int dim = 4 * n;

    std::vector<FormulaNode> parts;
    for (int v = 0; v < n; ++v) {
        QuadBuilder cd{dim, "s", {}, {}, 0};
        cd.lin.push_back({seg_c(v), 1.0});
        cd.lin.push_back({seg_d(v), -1.0});
        parts.push_back(quad_atom(std::move(cd), CmpOp::le));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            FormulaNode ints = seg_ints(dim, i, j);
            if (inst.graph.has_edge(i, j))
                parts.push_back(std::move(ints));
            else
                parts.push_back(FormulaNode::negate(std::move(ints)));
        }
    }

    SolveRequest req;
    req.formula = normalize(FormulaNode::conj(std::move(parts)));
    req.domain.bind("s", simplex_hull(dim, inst.K));
    req.eps = inst.eps;
    req.k = {grid_k};
    return req;
}

namespace {

int udg_x(int v) { return 2 * v + 0; }
int udg_y(int v) { return 2 * v + 1; }

QuadBuilder udg_sqdist(int dim, int i, int j) {
    QuadBuilder b{dim, "z", {}, {}, 0};
    auto add_pair = [&](int ci, int cj) {
        b.quad.push_back({{ci, ci}, 1.0});
        b.quad.push_back({{cj, cj}, 1.0});
        b.quad.push_back({{ci, cj}, -1.0});
        b.quad.push_back({{cj, ci}, -1.0});
    };
    add_pair(udg_x(i), udg_x(j));
    add_pair(udg_y(i), udg_y(j));
    return b;
}

} // namespace

SolveRequest build_udg_request(const UdgInstance& inst, int grid_k) {
    inst.validate();
    const int n = inst.graph.n;
    const int dim = 2 * n;
    const double eps = inst.eps;

    std::vector<FormulaNode> parts;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            QuadBuilder b = udg_sqdist(dim, i, j);
            if (inst.graph.has_edge(i, j)) {
                b.constant = -(4.0 + 2.0 * eps + eps * eps);
                parts.push_back(quad_atom(std::move(b), CmpOp::lt, /*relaxable=*/false));
            } else {
                b.constant = -(4.0 - 2.0 * eps + eps * eps);
                parts.push_back(quad_atom(std::move(b), CmpOp::ge, /*relaxable=*/false));
            }
        }
    }

    SolveRequest req;
    req.formula = normalize(FormulaNode::conj(std::move(parts)));
    req.domain.bind("z", simplex_hull(dim, inst.K));
    // the eps widening already sits in the atom constants
    req.eps = 0;
    req.k = {grid_k};
    return req;
}

namespace {

struct SegQuantities {
    double a, b, c, d;
};

bool seg_branch(const SegQuantities& si, const SegQuantities& sj, double eps, bool plus) {
    // plus: A_i >_eps A_j with "chain <= 0" comparisons; minus: flipped
    const double lead = si.a - sj.a;
    const double diff_b = sj.b - si.b;
    auto lo = [&](double c_of) { return c_of * lead - diff_b; }; // C*(Ai-Aj) - (Bj-Bi)
    auto hi = [&](double d_of) { return diff_b - d_of * lead; }; // (Bj-Bi) - D*(Ai-Aj)
    if (plus) {
        return lead > -eps && lo(si.c) <= eps && hi(si.d) <= eps && lo(sj.c) <= eps &&
               hi(sj.d) <= eps;
    }
    return lead < eps && lo(si.c) >= -eps && hi(si.d) >= -eps && lo(sj.c) >= -eps &&
           hi(sj.d) >= -eps;
}

bool seg_ints_relaxed(const SegQuantities& si, const SegQuantities& sj, double eps) {
    return seg_branch(si, sj, eps, true) || seg_branch(si, sj, eps, false);
}

/// Pushed-down negation evaluated with the same eps relaxation:
/// AND over branches of OR over flipped atoms.
bool seg_not_ints_relaxed(const SegQuantities& si, const SegQuantities& sj, double eps) {
    const double lead = si.a - sj.a;
    const double diff_b = sj.b - si.b;
    auto lo = [&](double c_of) { return c_of * lead - diff_b; };
    auto hi = [&](double d_of) { return diff_b - d_of * lead; };
    const bool not_plus = lead <= eps || lo(si.c) > -eps || hi(si.d) > -eps || lo(sj.c) > -eps ||
                          hi(sj.d) > -eps;
    const bool not_minus = lead >= -eps || lo(si.c) < eps || hi(si.d) < eps || lo(sj.c) < eps ||
                           hi(sj.d) < eps;
    return not_plus && not_minus;
}

} // namespace

RealizationReport check_realization(GeomKind kind, std::span<const double> realized,
                                    const Graph& graph, double eps) {
    graph.validate();
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
    const int n = graph.n;
    RealizationReport rep;

    if (kind == GeomKind::seg) {
        if (static_cast<int>(realized.size()) != 4 * n)
            throw DimensionError("s", "segment vector must have 4n entries");
        auto at = [&](int v) {
            return SegQuantities{realized[static_cast<std::size_t>(4 * v)],
                                 realized[static_cast<std::size_t>(4 * v + 1)],
                                 realized[static_cast<std::size_t>(4 * v + 2)],
                                 realized[static_cast<std::size_t>(4 * v + 3)]};
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const SegQuantities si = at(i), sj = at(j);
                PairCheck pc;
                pc.i = i;
                pc.j = j;
                pc.is_edge = graph.has_edge(i, j);
                pc.parallel = si.a == sj.a;
                if (!pc.parallel) pc.value = (sj.b - si.b) / (si.a - sj.a);
                if (pc.is_edge) {
                    pc.pass = seg_ints_relaxed(si, sj, eps);
                    pc.strict_pass = seg_ints_relaxed(si, sj, 0.0);
                } else {
                    pc.pass = seg_not_ints_relaxed(si, sj, eps);
                    pc.strict_pass = seg_not_ints_relaxed(si, sj, 0.0);
                }
                rep.ok = rep.ok && pc.pass;
                rep.pairs.push_back(pc);
            }
        }
        return rep;
    }

    if (static_cast<int>(realized.size()) != 2 * n)
        throw DimensionError("z", "center vector must have 2n entries");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = realized[static_cast<std::size_t>(2 * i)] -
                              realized[static_cast<std::size_t>(2 * j)];
            const double dy = realized[static_cast<std::size_t>(2 * i + 1)] -
                              realized[static_cast<std::size_t>(2 * j + 1)];
            const double sq = dx * dx + dy * dy;
            PairCheck pc;
            pc.i = i;
            pc.j = j;
            pc.is_edge = graph.has_edge(i, j);
            pc.value = sq;
            const double widened = 4.0 + 2.0 * eps + eps * eps;
            const double shrunk = 4.0 - 2.0 * eps + eps * eps;
            if (pc.is_edge) {
                pc.pass = sq < widened;
                pc.strict_pass = sq < shrunk;
            } else {
                pc.pass = sq >= shrunk;
                pc.strict_pass = sq >= widened;
            }
            rep.ok = rep.ok && pc.pass;
            rep.pairs.push_back(pc);
        }
    }
    return rep;
}

} // namespace etra
