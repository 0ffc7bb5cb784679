// SPDX-License-Identifier: Apache-2.0
#include "etra/apps_optimization.hpp"

#include <algorithm>
#include <cmath>

namespace etra {

void SqpInstance::validate() const {
    if (matrix.order() != 2 || matrix.dims()[0] != matrix.dims()[1])
        throw InputError("SQP matrix must be square (order-2 tensor)", "matrix");
    for (double e : matrix.entries())
        if (e < 0.0 || e > 1.0)
            throw InputError("SQP matrix entries must lie in [0,1]", "matrix");
    if (!(eps > 0)) throw InputError("eps must be positive", "eps");
}

namespace {

StmPolynomial quadratic_form(const DenseTensor& matrix, const std::string& var) {
    StmPolynomial stm;
    stm.tensor = matrix;
    stm.var_names = {var};
    stm.exponents = {2};
    return stm;
}

} // namespace

SqpResult solve_sqp(const SqpInstance& inst, std::optional<int> k_override, int k_cap,
                    int workers) {
    inst.validate();

    SqpResult res;
    if (k_override) {
        res.k_used = *k_override;
    } else {
        const double k_theory = k_sqp(inst.eps);
        res.k_used = static_cast<int>(std::min<double>(k_theory, k_cap));
        res.k_truncated = k_theory > static_cast<double>(k_cap);
    }
    if (res.k_used < 1) throw InputError("k must be >= 1", "k");

    SolveRequest req;
    req.formula = normalize(FormulaNode::conj({}));
    req.domain.bind("x", simplex_hull(inst.p(), 1.0));
    req.eps = inst.eps;
    req.k = {res.k_used};
    Objective obj;
    obj.poly.terms.push_back(quadratic_form(inst.matrix, "x"));
    obj.sense = Objective::Sense::max;
    req.objectives.push_back(std::move(obj));
    req.workers = workers;

    res.report = solve(req);
    if (res.report.verdict != Verdict::sat)
        throw Error("SQP sweep returned no point"); // cannot happen: feasible set is the grid
    res.value = res.report.objective_values.at(0);
    res.point = res.report.witness.at(0);
    res.x = res.report.assignment.at("x");
    return res;
}

double sqp_oracle(const DenseTensor& matrix, int k_fine, std::uint64_t point_budget) {
    if (matrix.order() != 2 || matrix.dims()[0] != matrix.dims()[1])
        throw InputError("oracle needs a square matrix", "matrix");
    if (k_fine < 1) throw InputError("k_fine must be >= 1", "k");
    const int p = matrix.dims()[0];
    const std::uint64_t count = binomial_u64(static_cast<std::uint64_t>(p + k_fine - 1),
                                             static_cast<std::uint64_t>(k_fine));
    if (count == kGridCountSaturated || count > point_budget)
        throw InputError("fine grid exceeds the oracle point budget", "k");

    const auto& a = matrix.entries();
    std::vector<int> beta(static_cast<std::size_t>(p), 0);
    double best = -std::numeric_limits<double>::infinity();

    // recursive composition enumeration, independent of GridStream
    auto rec = [&](auto&& self, int pos, int rest) -> void {
        if (pos == p - 1) {
            beta[static_cast<std::size_t>(pos)] = rest;
            double q = 0;
            for (int i = 0; i < p; ++i) {
                if (beta[static_cast<std::size_t>(i)] == 0) continue;
                const double xi = static_cast<double>(beta[static_cast<std::size_t>(i)]) / k_fine;
                double row = 0;
                for (int j = 0; j < p; ++j)
                    row += a[static_cast<std::size_t>(i * p + j)] *
                           (static_cast<double>(beta[static_cast<std::size_t>(j)]) / k_fine);
                q += xi * row;
            }
            best = std::max(best, q);
            return;
        }
        for (int v = 0; v <= rest; ++v) {
            beta[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, rest - v);
        }
    };
    rec(rec, 0, k_fine);
    return best;
}

SolveRequest build_constrained_opt(TmvPolynomial objective, std::vector<TmvPolynomial> constraints,
                                   Domain domain, double eps, std::vector<int> k) {
    SolveRequest req;
    std::vector<FormulaNode> atoms;
    for (auto& h : constraints) {
        Atom a;
        a.poly = std::move(h);
        a.op = CmpOp::ge;
        atoms.push_back(FormulaNode::leaf(std::move(a)));
    }
    req.formula = normalize(FormulaNode::conj(std::move(atoms)));
    req.domain = std::move(domain);
    req.eps = eps;
    req.k = std::move(k);
    Objective obj;
    obj.poly = std::move(objective);
    obj.sense = Objective::Sense::max;
    req.objectives.push_back(std::move(obj));
    return req;
}

void EigenInstance::validate() const {
    if (tensor.order() != 3 || tensor.dims()[0] != tensor.dims()[1] ||
        tensor.dims()[1] != tensor.dims()[2])
        throw InputError("eigen tensor must be p x p x p", "tensor");
    if (hull.dim() != tensor.dims()[0])
        throw InputError("hull dimension must match tensor axis length", "hull");
    if (!std::isfinite(hull.gamma())) throw InputError("hull gamma must be finite", "hull");
    if (!std::isfinite(lambda_max) || !std::isfinite(lambda_min) || lambda_min > lambda_max)
        throw InputError("need finite lambda_min <= lambda_max", "lambda");
    if (eps < 0) throw InputError("eps must be non-negative", "eps");
    if (k_x < 1 || k_lambda < 1) throw InputError("k must be >= 1", "k");
}

SolveRequest build_eigen_request(const EigenInstance& inst) {
    inst.validate();
    const int p = inst.p();

    std::vector<FormulaNode> atoms;
    for (int kk = 0; kk < p; ++kk) {
        // slice A(.,.,kk) applied to x twice
        std::vector<double> slice(static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                slice[static_cast<std::size_t>(i * p + j)] =
                    inst.tensor[static_cast<std::size_t>((i * p + j) * p + kk)];
        StmPolynomial lhs;
        lhs.tensor = DenseTensor::uniform(p, 2, std::move(slice));
        lhs.var_names = {"x"};
        lhs.exponents = {2};

        // -lambda * x(kk): mixed-dimension tensor over (x, lambda)
        StmPolynomial rhs;
        std::vector<double> one_hot(static_cast<std::size_t>(p), 0.0);
        one_hot[static_cast<std::size_t>(kk)] = -1.0;
        rhs.tensor = BasicTensor<double>({p, 1}, std::move(one_hot));
        rhs.var_names = {"x", "lambda"};
        rhs.exponents = {1, 1};

        Atom eq;
        eq.poly.terms = {std::move(lhs), std::move(rhs)};
        eq.op = CmpOp::eq; // normalize() expands to the relaxed pair
        atoms.push_back(FormulaNode::leaf(std::move(eq)));
    }

    // nonzero guard: sum_i x(i) >= delta
    {
        StmPolynomial ones;
        ones.tensor = DenseTensor::uniform(p, 1, std::vector<double>(static_cast<std::size_t>(p), 1.0));
        ones.var_names = {"x"};
        ones.exponents = {1};
        ones.constant = -inst.nonzero_delta;
        Atom guard;
        guard.poly.terms = {std::move(ones)};
        guard.op = CmpOp::ge;
        atoms.push_back(FormulaNode::leaf(std::move(guard)));
    }

    SolveRequest req;
    req.formula = normalize(FormulaNode::conj(std::move(atoms)));
    req.domain.bind("x", inst.hull);
    req.domain.bind("lambda", segment_hull(inst.lambda_min, inst.lambda_max));
    req.eps = inst.eps;
    req.k = {inst.k_x, inst.k_lambda};
    return req;
}

std::vector<double> eigen_residuals(const DenseTensor& tensor, std::span<const double> x,
                                    double lambda) {
    const int p = tensor.dims()[0];
    if (static_cast<int>(x.size()) != p)
        throw DimensionError("x", "eigenvector length does not match tensor");
    std::vector<double> res(static_cast<std::size_t>(p), 0.0);
    for (int kk = 0; kk < p; ++kk) {
        double lhs = 0;
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                lhs += tensor[static_cast<std::size_t>((i * p + j) * p + kk)] *
                       x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
        res[static_cast<std::size_t>(kk)] = std::fabs(lhs - lambda * x[static_cast<std::size_t>(kk)]);
    }
    return res;
}

} // namespace etra
