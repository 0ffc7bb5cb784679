// SPDX-License-Identifier: Apache-2.0
#include "etra/io.hpp"

#include <fstream>

namespace etra::io {

namespace {

[[noreturn]] void fail(const std::string& what, const std::string& field) {
    throw InputError(what + " (at '" + field + "')", field);
}

double num(const json& j, const std::string& field) {
    if (!j.is_number()) fail("expected a number", field);
    return j.get<double>();
}

int integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) fail("expected an integer", field);
    return j.get<int>();
}

const json& member(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) fail("missing field", key);
    return *it;
}

void flatten_nested(const json& j, int depth, std::vector<double>& out,
                    std::vector<int>& dims, const std::string& field) {
    if (j.is_array() && !j.empty() && j.front().is_array()) {
        if (static_cast<int>(dims.size()) <= depth) dims.push_back(static_cast<int>(j.size()));
        else if (dims[static_cast<std::size_t>(depth)] != static_cast<int>(j.size()))
            fail("ragged nested array", field);
        for (const auto& c : j) flatten_nested(c, depth + 1, out, dims, field);
        return;
    }
    if (!j.is_array()) fail("expected an array", field);
    if (static_cast<int>(dims.size()) <= depth) dims.push_back(static_cast<int>(j.size()));
    else if (dims[static_cast<std::size_t>(depth)] != static_cast<int>(j.size()))
        fail("ragged nested array", field);
    for (const auto& v : j) out.push_back(num(v, field));
}

} // namespace

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file '" + path + "'", path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in '" + path + "': " + e.what(), path);
    }
    return j;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path + "'", path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

std::pair<DenseTensor, double> parse_tensor(const json& j) {
    if (!j.is_object()) fail("tensor must be an object", "tensor");
    double a0 = 0;
    if (j.contains("a0")) a0 = num(j.at("a0"), "a0");

    std::vector<int> dims;
    if (j.contains("dims")) {
        for (const auto& d : member(j, "dims")) dims.push_back(integer(d, "dims"));
    } else {
        const int order = integer(member(j, "order"), "order");
        const int p = order > 0 ? integer(member(j, "p"), "p") : 0;
        dims.assign(static_cast<std::size_t>(order), p);
    }

    const json& entries = member(j, "entries");
    if (entries.is_array() && (entries.empty() || !entries.front().is_array())) {
        std::vector<double> flat;
        flat.reserve(entries.size());
        for (const auto& v : entries) flat.push_back(num(v, "entries"));
        return {DenseTensor(dims, std::move(flat)), a0};
    }
    if (entries.is_array()) { // nested arrays: infer dims from shape
        std::vector<double> flat;
        std::vector<int> shape;
        flatten_nested(entries, 0, flat, shape, "entries");
        if (!dims.empty() && dims != shape) fail("nested entries do not match dims", "entries");
        return {DenseTensor(shape, std::move(flat)), a0};
    }
    if (entries.is_object() && entries.contains("coords")) {
        DenseTensor t = DenseTensor::zeros(dims);
        for (const auto& pair : entries.at("coords")) {
            if (!pair.is_array() || pair.size() != 2) fail("coords entries are [[i,...],v]", "coords");
            std::vector<int> idx;
            for (const auto& i : pair.at(0)) idx.push_back(integer(i, "coords") - 1);
            t.mutable_at(idx) = num(pair.at(1), "coords");
        }
        t.refresh_alpha();
        return {t, a0};
    }
    fail("entries must be an array or {\"coords\": ...}", "entries");
}

ConvexHull parse_hull(const json& j) {
    if (j.contains("simplex")) {
        const json& s = j.at("simplex");
        return simplex_hull(integer(member(s, "p"), "simplex.p"), num(member(s, "K"), "simplex.K"));
    }
    if (j.contains("segment")) {
        const json& s = j.at("segment");
        return segment_hull(num(member(s, "lo"), "segment.lo"), num(member(s, "hi"), "segment.hi"));
    }
    const int dim = integer(member(j, "dim"), "dim");
    std::vector<std::vector<double>> verts;
    for (const auto& v : member(j, "vertices")) {
        std::vector<double> vert;
        for (const auto& c : v) vert.push_back(num(c, "vertices"));
        verts.push_back(std::move(vert));
    }
    return ConvexHull(dim, std::move(verts));
}

Domain parse_domain(const json& j) {
    Domain d;
    for (const auto& v : member(j, "vars"))
        d.bind(member(v, "name").get<std::string>(), parse_hull(member(v, "hull")));
    return d;
}

TmvPolynomial parse_poly(const json& j, const std::map<std::string, int>& var_dims) {
    if (j.contains("monomials")) {
        std::vector<Monomial> monos;
        for (const auto& m : j.at("monomials")) {
            Monomial mono;
            mono.coefficient = num(member(m, "coef"), "coef");
            if (m.contains("factors")) {
                for (const auto& f : m.at("factors")) {
                    Monomial::Factor fac;
                    fac.var = member(f, "var").get<std::string>();
                    fac.index = f.contains("index") ? integer(f.at("index"), "index") - 1 : 0;
                    fac.power = f.contains("power") ? integer(f.at("power"), "power") : 1;
                    mono.factors.push_back(std::move(fac));
                }
            }
            monos.push_back(std::move(mono));
        }
        const double constant = j.contains("constant") ? num(j.at("constant"), "constant") : 0.0;
        return compile_monomials(monos, var_dims, constant);
    }

    TmvPolynomial poly;
    for (const auto& t : member(j, "terms")) {
        auto [tensor, a0] = parse_tensor(member(t, "tensor"));
        StmPolynomial stm;
        stm.tensor = std::move(tensor);
        stm.constant = t.contains("a0") ? num(t.at("a0"), "a0") : a0;
        if (t.contains("vars")) {
            for (const auto& v : t.at("vars")) {
                const auto name = member(v, "name").get<std::string>();
                if (!var_dims.count(name)) fail("undeclared variable '" + name + "'", "vars");
                stm.var_names.push_back(name);
                stm.exponents.push_back(integer(member(v, "deg"), "deg"));
            }
        }
        stm.validate();
        poly.terms.push_back(std::move(stm));
    }
    if (poly.terms.empty()) fail("polynomial needs at least one term", "terms");
    return poly;
}

FormulaNode parse_formula_tree(const json& j, const std::map<std::string, int>& var_dims) {
    if (!j.is_object()) fail("formula node must be an object", "tree");
    if (j.contains("and")) {
        std::vector<FormulaNode> cs;
        for (const auto& c : j.at("and")) cs.push_back(parse_formula_tree(c, var_dims));
        return FormulaNode::conj(std::move(cs));
    }
    if (j.contains("or")) {
        std::vector<FormulaNode> cs;
        for (const auto& c : j.at("or")) cs.push_back(parse_formula_tree(c, var_dims));
        return FormulaNode::disj(std::move(cs));
    }
    if (j.contains("not")) return FormulaNode::negate(parse_formula_tree(j.at("not"), var_dims));
    if (j.contains("atom")) {
        const json& a = j.at("atom");
        Atom atom;
        atom.poly = parse_poly(member(a, "poly"), var_dims);
        const auto op = member(a, "op").get<std::string>();
        if (op == "lt") atom.op = CmpOp::lt;
        else if (op == "le") atom.op = CmpOp::le;
        else if (op == "ge") atom.op = CmpOp::ge;
        else if (op == "gt") atom.op = CmpOp::gt;
        else if (op == "eq") atom.op = CmpOp::eq;
        else fail("op must be one of lt|le|ge|gt|eq", "op");
        if (a.contains("relaxable")) atom.relaxable = a.at("relaxable").get<bool>();
        return FormulaNode::leaf(std::move(atom));
    }
    fail("formula node needs one of and|or|not|atom", "tree");
}

FormulaFile parse_formula_file(const json& j) {
    FormulaFile f;
    for (const auto& v : member(j, "vars"))
        f.var_dims[member(v, "name").get<std::string>()] = integer(member(v, "p"), "p");
    f.tree = parse_formula_tree(member(j, "tree"), f.var_dims);
    return f;
}

VarAssignment parse_assignment(const json& j) {
    VarAssignment a;
    if (!j.is_object()) fail("assignment must map names to vectors", "assignment");
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::vector<double> vec;
        if (it.value().is_number()) {
            vec.push_back(it.value().get<double>());
        } else {
            for (const auto& c : it.value()) vec.push_back(num(c, it.key()));
        }
        a[it.key()] = std::move(vec);
    }
    return a;
}

NormalFormGame parse_game(const json& j) {
    NormalFormGame g;
    g.players = integer(member(j, "players"), "players");
    g.actions = integer(member(j, "actions"), "actions");
    for (const auto& t : member(j, "payoffs")) {
        std::vector<double> flat;
        if (t.is_array() && !t.empty() && t.front().is_array()) {
            std::vector<int> dims;
            flatten_nested(t, 0, flat, dims, "payoffs");
        } else {
            for (const auto& v : t) flat.push_back(num(v, "payoffs"));
        }
        g.payoffs.push_back(std::move(flat));
    }
    g.validate();
    return g;
}

ShapleyGame parse_shapley(const json& j) {
    ShapleyGame g;
    g.states = integer(member(j, "states"), "states");
    g.actions = integer(member(j, "actions"), "actions");
    std::vector<int> dims;
    flatten_nested(member(j, "rewards"), 0, g.rewards, dims, "rewards");
    dims.clear();
    flatten_nested(member(j, "transitions"), 0, g.transitions, dims, "transitions");
    g.lambda = num(member(j, "lambda"), "lambda");
    if (j.contains("bound")) g.bound = num(j.at("bound"), "bound");
    if (j.contains("start")) g.start = integer(j.at("start"), "start") - 1;
    g.validate();
    return g;
}

HalvingInstance parse_halving(const json& j, double eps) {
    HalvingInstance inst;
    inst.eps = eps;
    const json& agents = j.contains("agents") ? j.at("agents") : j;
    for (const auto& a : agents) {
        std::vector<double> coeffs;
        const json& list = a.is_object() ? member(a, "coeffs") : a;
        for (const auto& c : list) coeffs.push_back(num(c, "agents"));
        inst.agents.push_back(std::move(coeffs));
    }
    if (j.contains("max_degree")) inst.max_degree = integer(j.at("max_degree"), "max_degree");
    inst.validate();
    return inst;
}

Graph parse_graph(const json& j) {
    Graph g;
    g.n = integer(member(j, "n"), "n");
    for (const auto& e : member(j, "edges")) {
        if (!e.is_array() || e.size() != 2) fail("edges are [i,j] pairs", "edges");
        int a = integer(e.at(0), "edges") - 1;
        int b = integer(e.at(1), "edges") - 1;
        if (a > b) std::swap(a, b);
        g.edges.emplace_back(a, b);
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.validate();
    return g;
}

json assignment_json(const VarAssignment& a) {
    json out = json::object();
    for (const auto& [name, vec] : a) out[name] = vec;
    return out;
}

json atom_checks_json(const std::vector<AtomCheck>& checks) {
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"index", c.index},
                       {"op", to_string(c.op)},
                       {"relaxable", c.relaxable},
                       {"value", c.value},
                       {"band", c.band},
                       {"margin", c.margin},
                       {"pass", c.pass}});
    }
    return arr;
}

json solve_report_json(const SolveReport& rep, const Domain& domain) {
    json out;
    out["verdict"] = to_string(rep.verdict);
    out["points_scanned"] = rep.points_scanned;
    out["grid_total"] = rep.grid_total;
    out["grid_truncated"] = rep.grid_truncated;
    out["guarantee_met"] = rep.guarantee_met;
    if (std::isfinite(rep.theoretical_k)) out["theoretical_k"] = rep.theoretical_k;
    if (rep.verdict == Verdict::unsat_exact_implied) {
        out["unsat_meaning"] =
            rep.guarantee_met
                ? "k meets the theoretical bound: the exact formula has no hull solution"
                : "no eps-grid solution at the supplied k; exact infeasibility not implied";
    }
    if (!rep.witness.empty()) {
        json w = json::object();
        for (int v = 0; v < domain.size(); ++v) {
            w[domain.name(v)] = {{"counts", rep.witness[static_cast<std::size_t>(v)].counts},
                                 {"k", rep.witness[static_cast<std::size_t>(v)].k}};
        }
        out["witness"] = w;
        out["assignment"] = assignment_json(rep.assignment);
        out["residuals"] = atom_checks_json(rep.residuals);
    }
    if (!rep.objective_values.empty()) out["objective_values"] = rep.objective_values;
    return out;
}

json verify_report_json(const VerifyReport& rep) {
    return {{"satisfied", rep.satisfied}, {"atoms", atom_checks_json(rep.atoms)}};
}

json realization_report_json(const RealizationReport& rep) {
    json pairs = json::array();
    for (const auto& p : rep.pairs) {
        pairs.push_back({{"i", p.i + 1},
                         {"j", p.j + 1},
                         {"is_edge", p.is_edge},
                         {"pass", p.pass},
                         {"strict_pass", p.strict_pass},
                         {"parallel", p.parallel},
                         {"value", p.value}});
    }
    return {{"ok", rep.ok}, {"pairs", pairs}};
}

} // namespace etra::io
