// SPDX-License-Identifier: Apache-2.0
#include "etra/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace etra {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::sat: return "SAT";
        case Verdict::unsat_exact_implied: return "UNSAT_EXACT_IMPLIED";
        case Verdict::budget_exhausted: return "BUDGET_EXHAUSTED";
    }
    return "?";
}

namespace {

double atom_margin(const Atom& atom, double value, double eps, double eta) {
    const double band = atom.relaxable ? eps : 0.0;
    switch (atom.op) {
        case CmpOp::lt: return band - value;
        case CmpOp::le: return band + eta - value;
        case CmpOp::ge: return value + band + eta;
        case CmpOp::gt: return value + band;
        case CmpOp::eq:
            throw InputError("formula not normalized: EQ atom");
    }
    return 0;
}

void verify_node(const FormulaNode& node, const VarAssignment& assignment, double eps,
                 double eta, std::vector<AtomCheck>& checks, bool& result) {
    using Kind = FormulaNode::Kind;
    switch (node.kind) {
        case Kind::And: {
            bool all = true;
            for (const auto& c : node.children) {
                bool sub = false;
                verify_node(c, assignment, eps, eta, checks, sub);
                all = all && sub;
            }
            result = all;
            return;
        }
        case Kind::Or: {
            bool any = node.children.empty();
            for (const auto& c : node.children) {
                bool sub = false;
                verify_node(c, assignment, eps, eta, checks, sub);
                any = any || sub;
            }
            result = any;
            return;
        }
        case Kind::Not:
            throw InputError("formula not normalized: NOT node");
        case Kind::Leaf: {
            const Atom& a = *node.atom;
            AtomCheck chk;
            chk.index = static_cast<int>(checks.size());
            chk.op = a.op;
            chk.relaxable = a.relaxable;
            chk.value = eval_tmv(a.poly, assignment);
            chk.band = a.relaxable ? eps : 0.0;
            chk.margin = atom_margin(a, chk.value, eps, eta);
            chk.pass = atom_holds(a, chk.value, eps, eta);
            result = chk.pass;
            checks.push_back(chk);
            return;
        }
    }
}

// ----- compiled evaluation over per-variable realized buffers -----

struct CompiledStm {
    const StmPolynomial* stm = nullptr;
    std::vector<const std::vector<double>*> slots; // aligned with stm->var_names
};

struct CompiledAtom {
    const Atom* atom = nullptr;
    std::vector<CompiledStm> terms;

    double value() const {
        double acc = 0;
        for (const auto& t : terms)
            acc += eval_stm_vectors(*t.stm, std::span<const std::vector<double>* const>(t.slots));
        return acc;
    }
};

struct CompiledNode {
    FormulaNode::Kind kind = FormulaNode::Kind::And;
    std::vector<CompiledNode> children;
    int atom = -1;
};

struct CompiledObjective {
    Objective::Sense sense = Objective::Sense::max;
    std::vector<CompiledStm> terms;

    double value() const {
        double acc = 0;
        for (const auto& t : terms)
            acc += eval_stm_vectors(*t.stm, std::span<const std::vector<double>* const>(t.slots));
        return acc;
    }
};

struct VarLayout {
    const ConvexHull* hull = nullptr;
    int k = 0;
    std::uint64_t grid = 0;
};

int var_slot(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw DimensionError(name, "variable '" + name + "' is not bound by the domain");
}

CompiledStm compile_stm(const StmPolynomial& stm, const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& buffers) {
    CompiledStm c;
    c.stm = &stm;
    for (const auto& v : stm.var_names)
        c.slots.push_back(&buffers[static_cast<std::size_t>(var_slot(names, v))]);
    return c;
}

CompiledNode compile_node(const FormulaNode& node, const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& buffers,
                          std::vector<CompiledAtom>& atoms) {
    CompiledNode out;
    out.kind = node.kind;
    if (node.kind == FormulaNode::Kind::Not)
        throw InputError("formula not normalized: NOT node");
    if (node.kind == FormulaNode::Kind::Leaf) {
        CompiledAtom ca;
        ca.atom = node.atom.get();
        if (ca.atom->op == CmpOp::eq) throw InputError("formula not normalized: EQ atom");
        for (const auto& term : ca.atom->poly.terms)
            ca.terms.push_back(compile_stm(term, names, buffers));
        out.atom = static_cast<int>(atoms.size());
        atoms.push_back(std::move(ca));
        return out;
    }
    for (const auto& c : node.children)
        out.children.push_back(compile_node(c, names, buffers, atoms));
    return out;
}

bool eval_compiled(const CompiledNode& node, const std::vector<CompiledAtom>& atoms, double eps) {
    using Kind = FormulaNode::Kind;
    switch (node.kind) {
        case Kind::And:
            for (const auto& c : node.children)
                if (!eval_compiled(c, atoms, eps)) return false;
            return true;
        case Kind::Or:
            for (const auto& c : node.children)
                if (eval_compiled(c, atoms, eps)) return true;
            return false;
        case Kind::Leaf: {
            const auto& ca = atoms[static_cast<std::size_t>(node.atom)];
            return atom_holds(*ca.atom, ca.value(), eps);
        }
        case Kind::Not: break;
    }
    return false;
}

/// One worker's cursor over the product grid.
struct Cursor {
    std::vector<GridStream> streams;          // one per variable
    std::vector<std::vector<double>>* buffers = nullptr;

    void position(const std::vector<VarLayout>& vars, std::uint64_t global,
                  std::vector<std::vector<double>>& bufs) {
        buffers = &bufs;
        streams.clear();
        std::uint64_t rest = global;
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const std::uint64_t n = vars[v].grid;
            const std::uint64_t idx = rest % n;
            rest /= n;
            streams.emplace_back(vars[v].hull->vertex_count(), vars[v].k, idx, n);
            realize_into(*vars[v].hull, streams[v].counts(), vars[v].k, bufs[v]);
        }
    }

    /// Mixed-radix advance, variable 0 fastest. Returns false when the
    /// most significant variable wraps.
    bool advance(const std::vector<VarLayout>& vars) {
        for (std::size_t v = 0; v < vars.size(); ++v) {
            if (streams[v].advance()) {
                realize_into(*vars[v].hull, streams[v].counts(), vars[v].k, (*buffers)[v]);
                return true;
            }
            streams[v] = GridStream(vars[v].hull->vertex_count(), vars[v].k);
            realize_into(*vars[v].hull, streams[v].counts(), vars[v].k, (*buffers)[v]);
        }
        return false;
    }

    std::vector<GridPoint> snapshot(const std::vector<VarLayout>& vars) const {
        std::vector<GridPoint> out;
        for (std::size_t v = 0; v < vars.size(); ++v)
            out.push_back(GridPoint{streams[v].counts(), vars[v].k});
        return out;
    }
};

struct Candidate {
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
    std::vector<double> objectives;
    std::vector<GridPoint> witness;
    bool valid = false;
};

/// Lexicographic objective comparison; ties go to the smaller index.
bool better(const Candidate& a, const Candidate& b, const std::vector<Objective>& objs) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        const double av = a.objectives[i];
        const double bv = b.objectives[i];
        if (av == bv) continue;
        return objs[i].sense == Objective::Sense::max ? av > bv : av < bv;
    }
    return a.index < b.index;
}

} // namespace

VerifyReport verify(const Formula& formula, const VarAssignment& assignment, double eps,
                    double eta) {
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
    VerifyReport rep;
    verify_node(formula.root, assignment, eps, eta, rep.atoms, rep.satisfied);
    return rep;
}

BoundInputs request_bound_inputs(const SolveRequest& req) {
    BoundInputs in;
    in.gamma = req.domain.gamma();
    in.n = std::max(1, req.domain.size());
    in.eps = req.eps;
    double alpha = 0;
    int d = 0, t = 1, m = 0;
    auto walk = [&](auto&& self, const FormulaNode& node) -> void {
        if (node.kind == FormulaNode::Kind::Leaf) {
            PolyStats s = poly_stats(node.atom->poly);
            alpha = std::max(alpha, s.alpha);
            d = std::max(d, s.d);
            t = std::max(t, s.t);
            ++m;
            return;
        }
        for (const auto& c : node.children) self(self, c);
    };
    walk(walk, req.formula.root);
    for (const auto& obj : req.objectives) {
        PolyStats s = poly_stats(obj.poly);
        alpha = std::max(alpha, s.alpha);
        d = std::max(d, s.d);
        t = std::max(t, s.t);
        ++m;
    }
    in.alpha = alpha;
    in.d = std::max(1, d);
    in.t = std::max(1, t);
    in.m = std::max(1, m);
    return in;
}

SolveReport solve(const SolveRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    if (req.eps < 0) throw InputError("eps must be non-negative", "eps");
    const int nvars = req.domain.size();
    if (nvars == 0) throw InputError("domain binds no variables", "domain");

    // per-variable k
    std::vector<int> ks;
    if (req.k.size() == 1) {
        ks.assign(static_cast<std::size_t>(nvars), req.k[0]);
    } else if (static_cast<int>(req.k.size()) == nvars) {
        ks = req.k;
    } else {
        throw InputError("k must have one entry or one per domain variable", "k");
    }
    for (int k : ks)
        if (k < 1) throw InputError("every k must be >= 1", "k");

    // every formula/objective variable must be bound
    std::vector<std::string> names;
    for (int v = 0; v < nvars; ++v) names.push_back(req.domain.name(v));
    for (const auto& v : formula_variables(req.formula.root))
        var_slot(names, v);
    for (const auto& obj : req.objectives)
        for (const auto& term : obj.poly.terms)
            for (const auto& v : term.var_names) var_slot(names, v);

    std::vector<VarLayout> vars(static_cast<std::size_t>(nvars));
    std::uint64_t total = 1;
    bool saturated = false;
    for (int v = 0; v < nvars; ++v) {
        auto& lay = vars[static_cast<std::size_t>(v)];
        lay.hull = &req.domain.hull(v);
        lay.k = ks[static_cast<std::size_t>(v)];
        lay.grid = GridStream::total(lay.hull->vertex_count(), lay.k);
        if (lay.grid == kGridCountSaturated)
            throw InputError("per-variable grid exceeds 2^64 points; reduce k", "k");
        const unsigned __int128 prod = static_cast<unsigned __int128>(total) * lay.grid;
        if (prod > std::numeric_limits<std::uint64_t>::max()) {
            saturated = true;
            total = kGridCountSaturated;
        } else if (!saturated) {
            total = static_cast<std::uint64_t>(prod);
        }
    }
    if (saturated && req.budget == std::numeric_limits<std::uint64_t>::max())
        throw InputError("grid exceeds 2^64 points; supply an enumeration budget", "budget");

    const std::uint64_t scan_end = std::min(total, req.budget);
    const bool truncated = scan_end < total;
    const bool optimizing = !req.objectives.empty();

    int workers = std::max(1, req.workers);
    if (static_cast<std::uint64_t>(workers) > std::max<std::uint64_t>(scan_end, 1))
        workers = static_cast<int>(std::max<std::uint64_t>(scan_end, 1));

    std::atomic<std::uint64_t> found_min{std::numeric_limits<std::uint64_t>::max()};
    std::vector<Candidate> results(static_cast<std::size_t>(workers));

    auto run_range = [&](int w, std::uint64_t begin, std::uint64_t end) {
        std::vector<std::vector<double>> buffers(static_cast<std::size_t>(nvars));
        for (auto& b : buffers) b.reserve(16);
        std::vector<CompiledAtom> atoms;
        CompiledNode tree = compile_node(req.formula.root, names, buffers, atoms);
        std::vector<CompiledObjective> objs;
        for (const auto& o : req.objectives) {
            CompiledObjective co;
            co.sense = o.sense;
            for (const auto& term : o.poly.terms)
                co.terms.push_back(compile_stm(term, names, buffers));
            objs.push_back(std::move(co));
        }

        Cursor cur;
        cur.position(vars, begin, buffers);
        Candidate local;

        for (std::uint64_t g = begin; g < end; ++g) {
            if (!optimizing && (g & 0xfff) == 0 &&
                found_min.load(std::memory_order_relaxed) <= g)
                break;
            if (eval_compiled(tree, atoms, req.eps)) {
                if (!optimizing) {
                    local.index = g;
                    local.witness = cur.snapshot(vars);
                    local.valid = true;
                    std::uint64_t prev = found_min.load(std::memory_order_relaxed);
                    while (prev > g &&
                           !found_min.compare_exchange_weak(prev, g, std::memory_order_relaxed)) {
                    }
                    break;
                }
                Candidate cand;
                cand.index = g;
                cand.valid = true;
                for (const auto& o : objs) cand.objectives.push_back(o.value());
                if (better(cand, local, req.objectives)) {
                    cand.witness = cur.snapshot(vars);
                    local = std::move(cand);
                }
            }
            if (g + 1 < end) cur.advance(vars);
        }
        results[static_cast<std::size_t>(w)] = std::move(local);
    };

    if (workers == 1 || scan_end == 0) {
        if (scan_end > 0) run_range(0, 0, scan_end);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = scan_end / static_cast<std::uint64_t>(workers);
        const std::uint64_t rem = scan_end % static_cast<std::uint64_t>(workers);
        std::uint64_t begin = 0;
        for (int w = 0; w < workers; ++w) {
            const std::uint64_t len = chunk + (static_cast<std::uint64_t>(w) < rem ? 1 : 0);
            pool.emplace_back(run_range, w, begin, begin + len);
            begin += len;
        }
        for (auto& t : pool) t.join();
    }

    Candidate best;
    for (auto& c : results) {
        if (!c.valid) continue;
        if (!optimizing) {
            if (!best.valid || c.index < best.index) best = std::move(c);
        } else if (better(c, best, req.objectives)) {
            best = std::move(c);
        }
    }

    SolveReport rep;
    rep.grid_total = total;
    rep.grid_truncated = truncated;

    const BoundInputs bi = request_bound_inputs(req);
    if (req.eps > 0) {
        rep.theoretical_k = k_main(bi);
        rep.guarantee_met = true;
        for (int k : ks)
            rep.guarantee_met = rep.guarantee_met && static_cast<double>(k) >= rep.theoretical_k;
    } else {
        rep.theoretical_k = std::numeric_limits<double>::infinity();
        rep.guarantee_met = false;
    }

    if (best.valid) {
        rep.verdict = (optimizing && truncated) ? Verdict::budget_exhausted : Verdict::sat;
        rep.witness = best.witness;
        for (int v = 0; v < nvars; ++v)
            rep.assignment[names[static_cast<std::size_t>(v)]] =
                realize(*vars[static_cast<std::size_t>(v)].hull,
                        rep.witness[static_cast<std::size_t>(v)]);
        rep.objective_values = best.objectives;
        rep.points_scanned = optimizing ? scan_end : best.index + 1;

        VerifyReport check = verify(req.formula, rep.assignment, req.eps);
        rep.residuals = check.atoms;
        if (!check.satisfied)
            throw Error("internal: returned witness failed re-verification");
    } else {
        rep.verdict = truncated ? Verdict::budget_exhausted : Verdict::unsat_exact_implied;
        rep.points_scanned = scan_end;
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace etra
