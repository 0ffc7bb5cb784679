// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks against the built binary. ETRA_BIN and ETRA_DATA
// are injected by the test harness.

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

std::string bin() {
    const char* b = std::getenv("ETRA_BIN");
    REQUIRE(b != nullptr);
    return b;
}

std::string data(const std::string& name) {
    const char* d = std::getenv("ETRA_DATA");
    REQUIRE(d != nullptr);
    return std::string(d) + "/" + name;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.output.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

json report_of(const RunResult& res) {
    const json envelope = json::parse(res.output);
    return envelope.at("report");
}

} // namespace

TEST_CASE("bound subcommand prints the reference values") {
    const RunResult res =
        run("bound --alpha 1 --gamma 1 --n 1 --d 1 --t 1 --m 1 --eps 1 --l 3");
    CHECK(res.exit_code == 0);
    const json rep = report_of(res);
    CHECK(rep.at("k_main") == 355.0);
    CHECK(rep.at("k_sqp") == 36.0);
    CHECK(rep.at("k_multilinear") == 3.0);
    CHECK(rep.at("k_standard_degree") == 32.0);
    CHECK(rep.at("grid_size") == "63546"); // C(357,2)
}

TEST_CASE("sqp subcommand approximates the clique optimum") {
    const RunResult res = run("sqp --matrix " + data("k3.json") + " --eps 0.1 --k 60");
    CHECK(res.exit_code == 0);
    const json rep = report_of(res);
    CHECK(rep.at("value").get<double>() >= 0.6167);
    CHECK(rep.at("value").get<double>() <= 2.0 / 3.0 + 1e-12);

    // without --k the bound k_sqp(eps) applies, capped by --k-cap
    const RunResult auto_k = run("sqp --matrix " + data("k3.json") + " --eps 1");
    CHECK(report_of(auto_k).at("k_used") == 36);
    const RunResult capped = run("sqp --matrix " + data("k3.json") + " --eps 0.5 --k-cap 100");
    CHECK(report_of(capped).at("k_used") == 100);
    CHECK(report_of(capped).at("k_truncated") == true);
}

TEST_CASE("solve exit codes follow the verdict") {
    const std::string common = " --domain " + data("domain_simplex2.json") + " --eps 0.1 --k 10";
    CHECK(run("solve --formula " + data("formula_infeasible.json") + common).exit_code == 3);
    CHECK(run("solve --formula " + data("formula_first_half.json") + common).exit_code == 0);
    const RunResult budget = run("solve --formula " + data("formula_infeasible.json") + common +
                                 " --budget 3");
    CHECK(budget.exit_code == 4);
    CHECK(report_of(budget).at("verdict") == "BUDGET_EXHAUSTED");
    // UNSAT carries the guarantee flag
    const RunResult unsat = run("solve --formula " + data("formula_infeasible.json") + common);
    CHECK(report_of(unsat).at("guarantee_met") == false);
}

TEST_CASE("malformed input exits with code 2") {
    CHECK(run("solve --formula /nonexistent.json --domain " + data("domain_simplex2.json") +
              " --eps 0.1 --k 5")
              .exit_code == 2);
    CHECK(run("sqp --matrix " + data("graph_k2.json") + " --eps 0.1").exit_code == 2);
    CHECK(run("nonsense").exit_code == 2);
}

TEST_CASE("reports are byte-identical across worker counts") {
    const std::string cmd = "nash --game " + data("mp_game.json") + " --eps 0.05 --k 12";
    const RunResult w1 = run(cmd + " --workers 1");
    const RunResult w4 = run(cmd + " --workers 4");
    CHECK(w1.exit_code == 0);
    CHECK(w4.exit_code == 0);
    const json r1 = report_of(w1);
    json r4 = report_of(w4);
    CHECK(r1.dump() == r4.dump());
}

TEST_CASE("verify distinguishes passing and failing candidates") {
    const std::string f = data("formula_first_half.json");
    CHECK(run("verify --formula " + f + " --assignment " + data("assignment_halfhalf.json") +
              " --eps 0")
              .exit_code == 0);
    // shift the point below the threshold
    const std::string bad = "/tmp/etra_cli_bad_assignment.json";
    {
        FILE* out = fopen(bad.c_str(), "w");
        REQUIRE(out != nullptr);
        fputs("{\"x\": [0.3, 0.7]}", out);
        fclose(out);
    }
    CHECK(run("verify --formula " + f + " --assignment " + bad + " --eps 0").exit_code == 3);
    CHECK(run("verify --formula " + f + " --assignment " + bad + " --eps 0.5").exit_code == 0);
}

TEST_CASE("geometry subcommands report and verify realizations") {
    const RunResult sat =
        run("geom-udg --graph " + data("graph_k2.json") + " --K 2 --eps 0 --grid-k 8");
    CHECK(sat.exit_code == 0);
    CHECK(report_of(sat).at("realization_check").at("ok") == true);

    const RunResult unsat = run("geom-udg --graph " + data("graph_tri_iso.json") +
                                " --K 0.1 --eps 0.1 --grid-k 3");
    CHECK(unsat.exit_code == 3);

    const RunResult seg =
        run("geom-seg --graph " + data("graph_k2.json") + " --K 4 --eps 0.5 --grid-k 6");
    CHECK(seg.exit_code == 0);
    CHECK(report_of(seg).at("realization_check").at("ok") == true);
}

TEST_CASE("remaining application subcommands run end to end") {
    const RunResult shapley =
        run("shapley --game " + data("shapley_selfloop.json") + " --eps 0.025 --k 100");
    CHECK(shapley.exit_code == 0);
    CHECK(report_of(shapley).at("value_at_start").get<double>() == doctest::Approx(2.0).epsilon(0.05));

    const RunResult halving =
        run("halving --agents " + data("halving_square.json") + " --eps 0.02 --k 100");
    CHECK(halving.exit_code == 0);
    CHECK(report_of(halving).at("residuals_direct").at(0).get<double>() <= 0.02 + 1e-9);

    const RunResult eig = run("eigen --tensor " + data("eigen_diag3.json") + " --hull " +
                              data("hull_simplex3.json") +
                              " --lambda-max 2 --eps 0.05 --k 12 --k-lambda 40");
    CHECK(eig.exit_code == 0);
    for (const auto& r : report_of(eig).at("eigen_residuals"))
        CHECK(r.get<double>() <= 0.05 + 1e-12);
}

TEST_CASE("k auto applies the theoretical bound or refuses") {
    // alpha = gamma = n = d = t = m = 1 at eps = 1: k_main = 355, and the
    // two-vertex hull keeps the grid at 356 points
    const std::string common = "solve --formula " + data("formula_first_half.json") +
                               " --domain " + data("domain_simplex2.json") + " --eps 1 --k auto";
    const RunResult res = run(common);
    CHECK(res.exit_code == 0);
    const json rep = report_of(res);
    CHECK(rep.at("guarantee_met") == true);
    CHECK(rep.at("witness").at("x").at("k") == 355);

    CHECK(run(common + " --budget 100").exit_code == 2); // grid larger than the budget
}

TEST_CASE("worker default comes from the environment") {
    const RunResult res = run("bound --eps 1"); // run() prefixes nothing
    CHECK(json::parse(res.output).at("manifest").at("workers") == 1);

    const std::string cmd = "ETR_APPROX_WORKERS=4 " + bin() + " bound --eps 1 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), got);
    pclose(pipe);
    CHECK(json::parse(output).at("manifest").at("workers") == 4);
}

TEST_CASE("run manifest records inputs and parameters") {
    const RunResult res = run("sqp --matrix " + data("k3.json") + " --eps 0.5 --k 12");
    const json envelope = json::parse(res.output);
    const json manifest = envelope.at("manifest");
    CHECK(manifest.at("subcommand") == "sqp");
    CHECK(manifest.at("params").at("eps") == 0.5);
    CHECK(manifest.at("inputs").size() == 1);
    for (auto it = manifest.at("inputs").begin(); it != manifest.at("inputs").end(); ++it)
        CHECK(it.value().get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(envelope.at("timing").contains("wall_seconds"));
}
