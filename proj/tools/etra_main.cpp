// SPDX-License-Identifier: Apache-2.0
//
// Unified command-line front end: parses instance files, dispatches to
// the owning module, and writes a reproducible JSON report. Exit codes:
// 0 solved/SAT, 2 usage or input error, 3 UNSAT, 4 budget exhausted.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "etra/io.hpp"
#include "etra/version.hpp"

using namespace etra;
using io::json;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnsat = 3;
constexpr int kExitBudget = 4;

struct Emitter {
    std::string subcommand;
    json params = json::object();
    json inputs = json::object();
    int workers = 1;
    std::string out_path;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void input_file(const std::string& key, const std::string& path) {
        params[key] = path;
        inputs[path] = io::file_digest(path);
    }

    int emit(json report, int exit_code) const {
        json envelope;
        envelope["manifest"] = {{"subcommand", subcommand},
                                {"params", params},
                                {"inputs", inputs},
                                {"version", kVersion},
                                {"workers", workers}};
        envelope["report"] = std::move(report);
        envelope["timing"] = {
            {"wall_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
        const std::string text = envelope.dump(2);
        if (out_path.empty()) {
            std::cout << text << "\n";
        } else {
            std::ofstream out(out_path);
            if (!out) throw InputError("cannot write output file '" + out_path + "'");
            out << text << "\n";
        }
        return exit_code;
    }
};

int default_workers() {
    if (const char* env = std::getenv("ETR_APPROX_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

/// --k accepts a single integer, a comma list, or "auto".
std::vector<int> parse_k(const std::string& text, bool* auto_requested = nullptr) {
    if (auto_requested) *auto_requested = false;
    if (text == "auto") {
        if (!auto_requested) throw InputError("'auto' is not supported here", "k");
        *auto_requested = true;
        return {};
    }
    std::vector<int> ks;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string piece =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            ks.push_back(std::stoi(piece));
        } catch (const std::exception&) {
            throw InputError("k must be an integer, a comma list, or 'auto'", "k");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (ks.empty()) throw InputError("empty k", "k");
    return ks;
}

int verdict_exit(const SolveReport& rep) {
    switch (rep.verdict) {
        case Verdict::sat: return kExitSolved;
        case Verdict::unsat_exact_implied: return kExitUnsat;
        case Verdict::budget_exhausted: return kExitBudget;
    }
    return kExitInput;
}

std::uint64_t auto_grid_total(const SolveRequest& req, double k) {
    unsigned __int128 total = 1;
    for (int v = 0; v < req.domain.size(); ++v) {
        const std::uint64_t g = GridStream::total(req.domain.hull(v).vertex_count(),
                                                  static_cast<int>(std::min(k, 2e9)));
        if (g == kGridCountSaturated) return kGridCountSaturated;
        total *= g;
        if (total > std::numeric_limits<std::uint64_t>::max()) return kGridCountSaturated;
    }
    return static_cast<std::uint64_t>(total);
}

/// Resolve --k auto against the theoretical bound, refusing oversized grids.
void apply_auto_k(SolveRequest& req, std::uint64_t budget) {
    const double k = k_main(request_bound_inputs(req));
    if (k > 2e9)
        throw InputError("theoretical k " + std::to_string(k) +
                         " is not enumerable; pass an explicit k");
    const std::uint64_t total = auto_grid_total(req, k);
    if (total == kGridCountSaturated || total > budget)
        throw InputError(
            "grid for the theoretical k exceeds the point budget; pass an explicit k");
    req.k = {static_cast<int>(k)};
}

int run_solve(Emitter& em, const std::string& formula_path, const std::string& domain_path,
              double eps, const std::string& k_text, const std::string& objective_path,
              const std::string& sense, std::uint64_t budget, int workers) {
    SolveRequest req;
    const io::FormulaFile ff = io::parse_formula_file(io::load_json_file(formula_path));
    req.formula = normalize(ff.tree);
    req.domain = io::parse_domain(io::load_json_file(domain_path));
    req.eps = eps;
    req.workers = workers;
    req.budget = budget;
    if (!objective_path.empty()) {
        Objective obj;
        const json oj = io::load_json_file(objective_path);
        obj.poly = io::parse_poly(oj.contains("poly") ? oj.at("poly") : oj, ff.var_dims);
        obj.sense = sense == "min" ? Objective::Sense::min : Objective::Sense::max;
        req.objectives.push_back(std::move(obj));
    }
    bool auto_k = false;
    auto ks = parse_k(k_text, &auto_k);
    if (auto_k) {
        apply_auto_k(req, budget);
    } else {
        req.k = std::move(ks);
    }

    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (req.formula.eq_rewrites > 0) out["eq_atoms_normalized"] = req.formula.eq_rewrites;
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_bound(Emitter& em, double alpha, double gamma, std::int64_t n, std::int64_t d,
              std::int64_t t, std::int64_t m, double eps, std::int64_t l, double budget) {
    BoundInputs in{alpha, gamma, n, d, t, m, eps};
    json out;
    const KReport main = k_main_report(in, l, budget);
    out["k_main"] = main.k;
    out["grid_size"] = main.grid_size;
    out["grid_log10"] = main.grid_log10;
    out["enumerable"] = main.enumerable;
    out["k_nontensor"] = k_nontensor(alpha, gamma, d, t, static_cast<double>(l), eps);
    out["k_sqp"] = k_sqp(eps);
    out["k_multilinear"] = k_multilinear(alpha, gamma, n, m, eps);
    out["k_standard_degree"] = k_standard_degree(alpha, gamma, d, eps);
    return em.emit(std::move(out), kExitSolved);
}

int run_sqp(Emitter& em, const std::string& matrix_path, double eps, const std::string& k_text,
            int k_cap, int workers) {
    auto [matrix, a0] = io::parse_tensor(io::load_json_file(matrix_path));
    (void)a0;
    SqpInstance inst{std::move(matrix), eps};
    std::optional<int> k_override;
    if (!k_text.empty()) k_override = parse_k(k_text).at(0);
    const SqpResult res = solve_sqp(inst, k_override, k_cap, workers);
    json out;
    out["value"] = res.value;
    out["x"] = res.x;
    out["counts"] = res.point.counts;
    out["k_used"] = res.k_used;
    out["k_truncated"] = res.k_truncated;
    out["points_scanned"] = res.report.points_scanned;
    return em.emit(std::move(out), kExitSolved);
}

int run_opt(Emitter& em, const std::string& objective_path, const std::string& constraints_path,
            const std::string& domain_path, double eps, const std::string& k_text, int workers,
            std::uint64_t budget) {
    Domain domain = io::parse_domain(io::load_json_file(domain_path));
    std::map<std::string, int> var_dims;
    for (int v = 0; v < domain.size(); ++v) var_dims[domain.name(v)] = domain.hull(v).dim();

    const json oj = io::load_json_file(objective_path);
    TmvPolynomial objective = io::parse_poly(oj.contains("poly") ? oj.at("poly") : oj, var_dims);

    std::vector<TmvPolynomial> constraints;
    if (!constraints_path.empty()) {
        const json cj = io::load_json_file(constraints_path);
        for (const auto& c : (cj.contains("constraints") ? cj.at("constraints") : cj))
            constraints.push_back(io::parse_poly(c, var_dims));
    }

    SolveRequest req = build_constrained_opt(std::move(objective), std::move(constraints),
                                             std::move(domain), eps, parse_k(k_text));
    req.workers = workers;
    req.budget = budget;
    const SolveReport rep = solve(req);
    return em.emit(io::solve_report_json(rep, req.domain), verdict_exit(rep));
}

int run_eigen(Emitter& em, const std::string& tensor_path, const std::string& hull_path,
              double lambda_max, double lambda_min, double eps, const std::string& k_text,
              int k_lambda, double delta, int workers) {
    EigenInstance inst;
    inst.tensor = io::parse_tensor(io::load_json_file(tensor_path)).first;
    inst.hull = io::parse_hull(io::load_json_file(hull_path));
    inst.lambda_max = lambda_max;
    inst.lambda_min = lambda_min;
    inst.eps = eps;
    inst.nonzero_delta = delta;
    inst.k_x = parse_k(k_text).at(0);
    inst.k_lambda = k_lambda > 0 ? k_lambda : inst.k_x;

    SolveRequest req = build_eigen_request(inst);
    req.workers = workers;
    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (rep.verdict == Verdict::sat) {
        const auto& x = rep.assignment.at("x");
        const double lambda = rep.assignment.at("lambda").at(0);
        out["lambda"] = lambda;
        out["eigen_residuals"] = eigen_residuals(inst.tensor, x, lambda);
    }
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_nash(Emitter& em, const std::string& game_path, const std::string& constraints_path,
             double eps, const std::string& k_text, int workers) {
    const NormalFormGame game = io::parse_game(io::load_json_file(game_path));
    std::optional<FormulaNode> side;
    if (!constraints_path.empty()) {
        const io::FormulaFile ff = io::parse_formula_file(io::load_json_file(constraints_path));
        side = ff.tree;
    }
    SolveRequest req = build_ne_request(game, std::move(side), eps, parse_k(k_text).at(0));
    req.workers = workers;
    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (rep.verdict == Verdict::sat) {
        std::vector<std::vector<double>> profile;
        for (int j = 0; j < game.players; ++j)
            profile.push_back(rep.assignment.at("x" + std::to_string(j + 1)));
        out["regrets"] = regret(game, profile);
    }
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_shapley(Emitter& em, const std::string& game_path, double bound_override, double eps,
                const std::string& k_text, int workers) {
    ShapleyGame game = io::parse_shapley(io::load_json_file(game_path));
    if (bound_override > 0) game.bound = bound_override;
    SolveRequest req = build_shapley_request(game, eps, parse_k(k_text).at(0));
    req.workers = workers;
    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (rep.verdict == Verdict::sat) {
        std::vector<std::vector<double>> x, y;
        std::vector<double> v;
        for (int s = 0; s < game.states; ++s) {
            x.push_back(rep.assignment.at("x" + std::to_string(s + 1)));
            y.push_back(rep.assignment.at("y" + std::to_string(s + 1)));
            v.push_back(rep.assignment.at("v" + std::to_string(s + 1)).at(0));
        }
        out["values"] = v;
        out["value_at_start"] = v.at(static_cast<std::size_t>(game.start));
        out["fixed_point_gaps"] = shapley_gaps(game, x, y, v);
        // contraction argument: an eps-fixed point lies within
        // eps/(1-lambda) of the true value vector
        out["implied_value_error"] = eps / (1.0 - game.lambda);
    }
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_halving(Emitter& em, const std::string& agents_path, double eps,
                const std::string& k_text, int workers) {
    const HalvingInstance inst = io::parse_halving(io::load_json_file(agents_path), eps);
    SolveRequest req = build_halving_request(inst, parse_k(k_text).at(0));
    req.workers = workers;
    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (rep.verdict == Verdict::sat) {
        const auto& cuts = rep.assignment.at("t");
        out["cuts"] = cuts;
        out["residuals_direct"] = evaluate_cut(inst, cuts);
    }
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_geom(Emitter& em, GeomKind kind, const std::string& graph_path, double K, double eps,
             const std::string& k_text, int workers) {
    const Graph graph = io::parse_graph(io::load_json_file(graph_path));
    SolveRequest req;
    if (kind == GeomKind::seg) {
        req = build_seg_request(SegInstance{graph, K, eps}, parse_k(k_text).at(0));
    } else {
        req = build_udg_request(UdgInstance{graph, K, eps}, parse_k(k_text).at(0));
    }
    req.workers = workers;
    const SolveReport rep = solve(req);
    json out = io::solve_report_json(rep, req.domain);
    if (rep.verdict == Verdict::sat) {
        const auto& vec = rep.assignment.begin()->second;
        out["realization_check"] =
            io::realization_report_json(check_realization(kind, vec, graph, eps));
    }
    return em.emit(std::move(out), verdict_exit(rep));
}

int run_verify(Emitter& em, const std::string& formula_path, const std::string& assignment_path,
               double eps, double eta) {
    const io::FormulaFile ff = io::parse_formula_file(io::load_json_file(formula_path));
    const Formula formula = normalize(ff.tree);
    const VarAssignment assignment = io::parse_assignment(io::load_json_file(assignment_path));
    const VerifyReport rep = verify(formula, assignment, eps, eta);
    json out = io::verify_report_json(rep);
    if (formula.eq_rewrites > 0) out["eq_atoms_normalized"] = formula.eq_rewrites;
    return em.emit(std::move(out), rep.satisfied ? kExitSolved : kExitUnsat);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximate decision of hull-constrained polynomial formulas by k-uniform "
                 "grid enumeration"};
    app.require_subcommand(1);

    std::string formula_path, domain_path, objective_path, constraints_path, matrix_path;
    std::string tensor_path, hull_path, game_path, agents_path, graph_path, assignment_path;
    std::string k_text, sense = "max", out_path;
    double eps = 0.1, eta = 0, alpha = 1, gamma = 1, K = 1, lambda_max = 1, lambda_min = 0;
    double bound_override = 0, delta = 0.5, bound_budget = 1e8;
    std::int64_t n = 1, d = 1, t = 1, m = 1, l = 2;
    int workers = default_workers(), k_cap = 1000, k_lambda = 0;
    std::uint64_t budget = std::numeric_limits<std::uint64_t>::max();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "write the report JSON here instead of stdout");
        sub->add_option("--workers", workers, "worker threads (default ETR_APPROX_WORKERS or 1)");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "decide a formula over a domain");
    solve_cmd->add_option("--formula", formula_path)->required();
    solve_cmd->add_option("--domain", domain_path)->required();
    solve_cmd->add_option("--eps", eps)->required();
    solve_cmd->add_option("--k", k_text)->required();
    solve_cmd->add_option("--objective", objective_path);
    solve_cmd->add_option("--sense", sense)->check(CLI::IsMember({"max", "min"}));
    solve_cmd->add_option("--budget", budget);
    add_common(solve_cmd);

    CLI::App* bound_cmd = app.add_subcommand("bound", "print the sample-size bounds");
    bound_cmd->add_option("--alpha", alpha);
    bound_cmd->add_option("--gamma", gamma);
    bound_cmd->add_option("--n", n);
    bound_cmd->add_option("--d", d);
    bound_cmd->add_option("--t", t);
    bound_cmd->add_option("--m", m);
    bound_cmd->add_option("--eps", eps)->required();
    bound_cmd->add_option("--l", l);
    bound_cmd->add_option("--budget", bound_budget);
    add_common(bound_cmd);

    CLI::App* sqp_cmd = app.add_subcommand("sqp", "maximize x^T A x over the simplex");
    sqp_cmd->add_option("--matrix", matrix_path)->required();
    sqp_cmd->add_option("--eps", eps)->required();
    sqp_cmd->add_option("--k", k_text);
    sqp_cmd->add_option("--k-cap", k_cap);
    add_common(sqp_cmd);

    CLI::App* opt_cmd = app.add_subcommand("opt", "optimize under solution-constraints");
    opt_cmd->add_option("--objective", objective_path)->required();
    opt_cmd->add_option("--constraints", constraints_path);
    opt_cmd->add_option("--domain", domain_path)->required();
    opt_cmd->add_option("--eps", eps)->required();
    opt_cmd->add_option("--k", k_text)->required();
    opt_cmd->add_option("--budget", budget);
    add_common(opt_cmd);

    CLI::App* eigen_cmd = app.add_subcommand("eigen", "approximate tensor eigenpairs");
    eigen_cmd->add_option("--tensor", tensor_path)->required();
    eigen_cmd->add_option("--hull", hull_path)->required();
    eigen_cmd->add_option("--lambda-max", lambda_max)->required();
    eigen_cmd->add_option("--lambda-min", lambda_min);
    eigen_cmd->add_option("--eps", eps)->required();
    eigen_cmd->add_option("--k", k_text)->required();
    eigen_cmd->add_option("--k-lambda", k_lambda);
    eigen_cmd->add_option("--delta", delta, "nonzero guard on ||x||_1");
    add_common(eigen_cmd);

    CLI::App* nash_cmd = app.add_subcommand("nash", "constrained approximate Nash equilibria");
    nash_cmd->add_option("--game", game_path)->required();
    nash_cmd->add_option("--constraints", constraints_path);
    nash_cmd->add_option("--eps", eps)->required();
    nash_cmd->add_option("--k", k_text)->required();
    add_common(nash_cmd);

    CLI::App* shapley_cmd = app.add_subcommand("shapley", "discounted-game value vector");
    shapley_cmd->add_option("--game", game_path)->required();
    shapley_cmd->add_option("--bound", bound_override);
    shapley_cmd->add_option("--eps", eps)->required();
    shapley_cmd->add_option("--k", k_text)->required();
    add_common(shapley_cmd);

    CLI::App* halving_cmd = app.add_subcommand("halving", "consensus halving cuts");
    halving_cmd->add_option("--agents", agents_path)->required();
    halving_cmd->add_option("--eps", eps)->required();
    halving_cmd->add_option("--k", k_text)->required();
    add_common(halving_cmd);

    CLI::App* seg_cmd = app.add_subcommand("geom-seg", "segment graph recognition");
    seg_cmd->add_option("--graph", graph_path)->required();
    seg_cmd->add_option("--K", K)->required();
    seg_cmd->add_option("--eps", eps)->required();
    seg_cmd->add_option("--grid-k", k_text)->required();
    add_common(seg_cmd);

    CLI::App* udg_cmd = app.add_subcommand("geom-udg", "unit disk graph recognition");
    udg_cmd->add_option("--graph", graph_path)->required();
    udg_cmd->add_option("--K", K)->required();
    udg_cmd->add_option("--eps", eps)->required();
    udg_cmd->add_option("--grid-k", k_text)->required();
    add_common(udg_cmd);

    CLI::App* verify_cmd = app.add_subcommand("verify", "re-check a candidate assignment");
    verify_cmd->add_option("--formula", formula_path)->required();
    verify_cmd->add_option("--assignment", assignment_path)->required();
    verify_cmd->add_option("--eps", eps)->required();
    verify_cmd->add_option("--eta", eta, "float guard on non-strict comparisons");
    add_common(verify_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    Emitter em;
    em.workers = workers;
    em.out_path = out_path;

    try {
        CLI::App* sub = app.get_subcommands().front();
        em.subcommand = sub->get_name();
        em.params["eps"] = eps;
        if (workers != 1) em.params["workers"] = workers;

        if (sub == solve_cmd) {
            em.params["k"] = k_text;
            em.input_file("formula", formula_path);
            em.input_file("domain", domain_path);
            if (!objective_path.empty()) {
                em.input_file("objective", objective_path);
                em.params["sense"] = sense;
            }
            if (budget != std::numeric_limits<std::uint64_t>::max()) em.params["budget"] = budget;
            return run_solve(em, formula_path, domain_path, eps, k_text, objective_path, sense,
                             budget, workers);
        }
        if (sub == bound_cmd) {
            em.params.update(json{{"alpha", alpha},
                                  {"gamma", gamma},
                                  {"n", n},
                                  {"d", d},
                                  {"t", t},
                                  {"m", m},
                                  {"l", l}});
            return run_bound(em, alpha, gamma, n, d, t, m, eps, l, bound_budget);
        }
        if (sub == sqp_cmd) {
            em.params["k"] = k_text.empty() ? "auto" : k_text;
            em.params["k_cap"] = k_cap;
            em.input_file("matrix", matrix_path);
            return run_sqp(em, matrix_path, eps, k_text, k_cap, workers);
        }
        if (sub == opt_cmd) {
            em.params["k"] = k_text;
            em.input_file("objective", objective_path);
            if (!constraints_path.empty()) em.input_file("constraints", constraints_path);
            em.input_file("domain", domain_path);
            return run_opt(em, objective_path, constraints_path, domain_path, eps, k_text,
                           workers, budget);
        }
        if (sub == eigen_cmd) {
            em.params.update(json{{"k", k_text},
                                  {"lambda_max", lambda_max},
                                  {"lambda_min", lambda_min},
                                  {"delta", delta}});
            em.input_file("tensor", tensor_path);
            em.input_file("hull", hull_path);
            return run_eigen(em, tensor_path, hull_path, lambda_max, lambda_min, eps, k_text,
                             k_lambda, delta, workers);
        }
        if (sub == nash_cmd) {
            em.params["k"] = k_text;
            em.input_file("game", game_path);
            if (!constraints_path.empty()) em.input_file("constraints", constraints_path);
            return run_nash(em, game_path, constraints_path, eps, k_text, workers);
        }
        if (sub == shapley_cmd) {
            em.params["k"] = k_text;
            if (bound_override > 0) em.params["bound"] = bound_override;
            em.input_file("game", game_path);
            return run_shapley(em, game_path, bound_override, eps, k_text, workers);
        }
        if (sub == halving_cmd) {
            em.params["k"] = k_text;
            em.input_file("agents", agents_path);
            return run_halving(em, agents_path, eps, k_text, workers);
        }
        if (sub == seg_cmd || sub == udg_cmd) {
            em.params["k"] = k_text;
            em.params["K"] = K;
            em.input_file("graph", graph_path);
            return run_geom(em, sub == seg_cmd ? GeomKind::seg : GeomKind::udg, graph_path, K,
                            eps, k_text, workers);
        }
        if (sub == verify_cmd) {
            em.params["eta"] = eta;
            em.input_file("formula", formula_path);
            em.input_file("assignment", assignment_path);
            return run_verify(em, formula_path, assignment_path, eps, eta);
        }
        std::cerr << "unknown subcommand\n";
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
