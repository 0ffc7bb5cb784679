// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "etra/apps_games.hpp"
#include "etra/apps_geometry.hpp"
#include "etra/apps_optimization.hpp"
#include "etra/solver.hpp"

namespace etra::io {

using nlohmann::json;

json load_json_file(const std::string& path);

/// FNV-1a 64 digest of a file's bytes, hex encoded.
std::string file_digest(const std::string& path);

// --- parsers; file indices are 1-based, internal ones 0-based ---

/// {"p":int,"order":int,"entries":[...]} with "entries" optionally
/// {"coords":[[[i,...],v],...]}; "dims":[...] replaces p/order for
/// mixed axis lengths. Returns the tensor and the optional "a0".
std::pair<DenseTensor, double> parse_tensor(const json& j);

ConvexHull parse_hull(const json& j);
Domain parse_domain(const json& j);
TmvPolynomial parse_poly(const json& j, const std::map<std::string, int>& var_dims);
FormulaNode parse_formula_tree(const json& j, const std::map<std::string, int>& var_dims);

/// {"vars":[{"name","p"},...], "tree": ...}
struct FormulaFile {
    std::map<std::string, int> var_dims;
    FormulaNode tree;
};
FormulaFile parse_formula_file(const json& j);

VarAssignment parse_assignment(const json& j);
NormalFormGame parse_game(const json& j);
ShapleyGame parse_shapley(const json& j);
HalvingInstance parse_halving(const json& j, double eps);
Graph parse_graph(const json& j);

// --- serializers ---

json assignment_json(const VarAssignment& a);
json atom_checks_json(const std::vector<AtomCheck>& checks);
json solve_report_json(const SolveReport& rep, const Domain& domain);
json verify_report_json(const VerifyReport& rep);
json realization_report_json(const RealizationReport& rep);

} // namespace etra::io
