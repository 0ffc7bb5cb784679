// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etra/errors.hpp"
#include "etra/rational.hpp"

namespace etra {

namespace detail {
inline double abs_value(double x) { return std::fabs(x); }
inline Rat abs_value(const Rat& x) { return abs(x); }
} // namespace detail

/// Dense coefficient tensor in row-major order (last axis fastest).
/// Axis lengths are usually identical (the uniform `p` of the file
/// schema) but may differ per axis, which the game/eigenvalue builders
/// need when mixing vector variables of different dimension.
template <typename S>
class BasicTensor {
public:
    static constexpr std::size_t kMaxEntries = 200000000; // dense storage cap

    /// Order-0 tensor holding a single scalar entry.
    explicit BasicTensor(S scalar = S(0)) : dims_{}, entries_{std::move(scalar)} {
        recompute_alpha();
    }

    BasicTensor(std::vector<int> dims, std::vector<S> entries)
        : dims_(std::move(dims)), entries_(std::move(entries)) {
        unsigned __int128 expect = 1;
        for (int d : dims_) {
            if (d < 1) throw InputError("tensor axis length must be >= 1", "dims");
            expect *= static_cast<unsigned __int128>(d);
            if (expect > kMaxEntries)
                throw InputError("tensor would exceed the dense entry limit", "dims");
        }
        if (entries_.size() != static_cast<std::size_t>(expect))
            throw InputError("tensor entry count does not match axis lengths", "entries");
        recompute_alpha();
    }

    /// Uniform axis-length constructor matching the file schema.
    static BasicTensor uniform(int p, int order, std::vector<S> entries) {
        if (order < 0) throw InputError("tensor order must be >= 0", "order");
        if (order > 0 && p < 1) throw InputError("axis length p must be >= 1", "p");
        return BasicTensor(std::vector<int>(static_cast<std::size_t>(order), p),
                           std::move(entries));
    }

    /// All-zero tensor of the given shape.
    static BasicTensor zeros(std::vector<int> dims) {
        unsigned __int128 n = 1;
        for (int d : dims) {
            if (d < 1) throw InputError("tensor axis length must be >= 1", "dims");
            n *= static_cast<unsigned __int128>(d);
            if (n > kMaxEntries)
                throw InputError("tensor would exceed the dense entry limit", "dims");
        }
        return BasicTensor(std::move(dims), std::vector<S>(static_cast<std::size_t>(n), S(0)));
    }

    /// Sparse coordinate-list construction, materialized densely.
    /// Coordinates are 0-based here; the file loader converts.
    static BasicTensor from_coords(std::vector<int> dims,
                                   const std::vector<std::pair<std::vector<int>, S>>& coords) {
        BasicTensor t = zeros(std::move(dims));
        for (const auto& [idx, value] : coords) t.mutable_at(idx) = value;
        t.refresh_alpha();
        return t;
    }

    int order() const noexcept { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<S>& entries() const noexcept { return entries_; }

    /// Uniform axis length; order-0 tensors report p = 0.
    int p() const {
        if (dims_.empty()) return 0;
        for (int d : dims_)
            if (d != dims_[0]) throw Error("tensor has mixed axis lengths; no single p");
        return dims_[0];
    }

    const S& alpha() const noexcept { return alpha_; }

    const S& operator[](std::size_t flat) const { return entries_[flat]; }

    /// 0-based multi-index access.
    const S& at(std::span<const int> idx) const { return entries_[flat_index(idx)]; }

    S& mutable_at(std::span<const int> idx) { return entries_[flat_index(idx)]; }

    /// Call after a batch of mutable_at writes.
    void refresh_alpha() { recompute_alpha(); }

    std::size_t flat_index(std::span<const int> idx) const {
        if (idx.size() != dims_.size())
            throw InputError("tensor index rank mismatch", "coords");
        std::size_t flat = 0;
        for (std::size_t a = 0; a < dims_.size(); ++a) {
            if (idx[a] < 0 || idx[a] >= dims_[a])
                throw InputError("tensor index out of range", "coords");
            flat = flat * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(idx[a]);
        }
        return flat;
    }

private:
    void recompute_alpha() {
        alpha_ = S(0);
        for (const S& e : entries_) {
            S a = detail::abs_value(e);
            if (alpha_ < a) alpha_ = a;
        }
    }

    std::vector<int> dims_;
    std::vector<S> entries_;
    S alpha_;
};

using DenseTensor = BasicTensor<double>;

/// Simple tensor multivariate polynomial: one coefficient tensor
/// contracted with each variable repeated `exponents[j]` times, plus a
/// constant. Tensor axes are grouped per variable in var_names order.
template <typename S>
struct StmPoly {
    BasicTensor<S> tensor;
    std::vector<std::string> var_names;
    std::vector<int> exponents; // d_j per variable, >= 0
    S constant = S(0);          // a0

    int max_degree() const {
        int d = 0;
        for (int e : exponents) d = std::max(d, e);
        return d;
    }

    int total_order() const {
        int o = 0;
        for (int e : exponents) o += e;
        return o;
    }

    void validate() const {
        if (var_names.size() != exponents.size())
            throw InputError("var_names/exponents length mismatch");
        for (int e : exponents)
            if (e < 0) throw InputError("negative exponent");
        if (total_order() != tensor.order())
            throw InputError("tensor order does not equal the exponent sum");
    }
};

/// Sum of STM polynomials sharing a variable space. When every term
/// carries a distinct exponent combination, the length is at most
/// (d+1)^n; nothing here depends on that, so it is not enforced.
template <typename S>
struct TmvPoly {
    std::vector<StmPoly<S>> terms;

    int length() const { return static_cast<int>(terms.size()); }

    int max_degree() const {
        int d = 0;
        for (const auto& t : terms) d = std::max(d, t.max_degree());
        return d;
    }
};

using StmPolynomial = StmPoly<double>;
using TmvPolynomial = TmvPoly<double>;

/// Variable assignment: vector values by variable name.
template <typename S>
using Assignment = std::map<std::string, std::vector<S>>;

using VarAssignment = Assignment<double>;

/// Contraction with variable vectors resolved by the caller:
/// vars[j] is the value of var_names[j]. Iterative odometer over the
/// tensor entries with a partial-product stack; no recursion so the
/// grid scanner can chunk work across threads.
template <typename S>
S eval_stm_vectors(const StmPoly<S>& stm, std::span<const std::vector<S>* const> vars) {
    const auto& dims = stm.tensor.dims();
    const int order = stm.tensor.order();

    // axis -> variable slot
    static thread_local std::vector<int> axis_var;
    axis_var.clear();
    for (std::size_t j = 0; j < stm.exponents.size(); ++j) {
        const auto& vec = *vars[j];
        int want = stm.exponents[j] > 0 ? dims[axis_var.size()] : 0;
        if (stm.exponents[j] > 0 && static_cast<int>(vec.size()) != want)
            throw DimensionError(stm.var_names[j],
                                 "variable '" + stm.var_names[j] + "' has length " +
                                     std::to_string(vec.size()) + ", expected " +
                                     std::to_string(want));
        for (int r = 0; r < stm.exponents[j]; ++r) axis_var.push_back(static_cast<int>(j));
    }

    const auto& e = stm.tensor.entries();
    if (order == 0) return e[0] + stm.constant;

    if (order == 1) {
        const auto& x = *vars[static_cast<std::size_t>(axis_var[0])];
        S acc = S(0);
        for (std::size_t i = 0; i < e.size(); ++i) acc += x[i] * e[i];
        return acc + stm.constant;
    }
    if (order == 2) {
        const auto& x = *vars[static_cast<std::size_t>(axis_var[0])];
        const auto& y = *vars[static_cast<std::size_t>(axis_var[1])];
        const std::size_t n1 = static_cast<std::size_t>(dims[1]);
        S acc = S(0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            S row = S(0);
            const S* re = e.data() + i * n1;
            for (std::size_t j = 0; j < n1; ++j) row += y[j] * re[j];
            acc += x[i] * row;
        }
        return acc + stm.constant;
    }

    static thread_local std::vector<int> idx;
    static thread_local std::vector<S> partial;
    idx.assign(static_cast<std::size_t>(order), 0);
    partial.assign(static_cast<std::size_t>(order) + 1, S(1));
    for (int a = 0; a < order; ++a)
        partial[static_cast<std::size_t>(a) + 1] =
            partial[static_cast<std::size_t>(a)] *
            (*vars[static_cast<std::size_t>(axis_var[static_cast<std::size_t>(a)])])[0];

    S acc = S(0);
    std::size_t flat = 0;
    for (;;) {
        acc += partial[static_cast<std::size_t>(order)] * e[flat];
        int a = order - 1;
        while (a >= 0) {
            if (++idx[static_cast<std::size_t>(a)] < dims[static_cast<std::size_t>(a)]) break;
            idx[static_cast<std::size_t>(a)] = 0;
            --a;
        }
        if (a < 0) break;
        ++flat;
        for (int b = a; b < order; ++b)
            partial[static_cast<std::size_t>(b) + 1] =
                partial[static_cast<std::size_t>(b)] *
                (*vars[static_cast<std::size_t>(axis_var[static_cast<std::size_t>(b)])])
                    [static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])];
    }
    return acc + stm.constant;
}

/// Full contraction of an STM polynomial under a named assignment.
template <typename S>
S eval_stm(const StmPoly<S>& stm, const Assignment<S>& assignment) {
    static thread_local std::vector<const std::vector<S>*> vars;
    vars.clear();
    for (const auto& name : stm.var_names) {
        auto it = assignment.find(name);
        if (it == assignment.end())
            throw DimensionError(name, "variable '" + name + "' is unassigned");
        vars.push_back(&it->second);
    }
    return eval_stm_vectors(stm, std::span<const std::vector<S>* const>(vars));
}

/// Sum of the term contractions.
template <typename S>
S eval_tmv(const TmvPoly<S>& poly, const Assignment<S>& assignment) {
    S acc = S(0);
    for (const auto& term : poly.terms) acc += eval_stm(term, assignment);
    return acc;
}

/// The parameters Theorem-style bound calculators consume.
struct PolyStats {
    int n = 0;      // distinct vector variables
    int p = 0;      // largest variable dimension
    int d = 0;      // max degree
    int t = 0;      // term count
    double alpha = 0; // max |coefficient|, constant terms included
};

PolyStats poly_stats(const TmvPolynomial& poly);

} // namespace etra
