// SPDX-License-Identifier: Apache-2.0
#include "etra/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "etra/errors.hpp"

namespace etra {

namespace {

void require_eps(double eps) {
    if (!(eps > 0)) throw InputError("eps must be positive", "eps");
}

void require_count(std::int64_t v, const char* name) {
    if (v < 1) throw InputError(std::string(name) + " must be >= 1", name);
}

double ceil_pos(double v) {
    if (!std::isfinite(v)) throw OverflowError("bound does not fit the float range");
    return std::ceil(v);
}

/// Little big-integer for printing exact binomials: base 10^9 limbs,
/// least significant first.
class BigNat {
public:
    explicit BigNat(std::uint64_t v) {
        while (v > 0) {
            limbs_.push_back(static_cast<std::uint32_t>(v % kBase));
            v /= kBase;
        }
        if (limbs_.empty()) limbs_.push_back(0);
    }

    void mul(std::uint64_t m) {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs_) {
            unsigned __int128 cur = static_cast<unsigned __int128>(limb) * m + carry;
            limb = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        while (carry > 0) {
            limbs_.push_back(static_cast<std::uint32_t>(carry % kBase));
            carry /= kBase;
        }
    }

    void div(std::uint64_t d) {
        unsigned __int128 rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            unsigned __int128 cur = rem * kBase + limbs_[i];
            limbs_[i] = static_cast<std::uint32_t>(cur / d);
            rem = cur % d;
        }
        while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
    }

    std::string str() const {
        std::string out = std::to_string(limbs_.back());
        for (std::size_t i = limbs_.size() - 1; i-- > 0;) {
            std::string part = std::to_string(limbs_[i]);
            out += std::string(9 - part.size(), '0') + part;
        }
        return out;
    }

private:
    static constexpr std::uint64_t kBase = 1000000000;
    std::vector<std::uint32_t> limbs_;
};

} // namespace

double k_main(const BoundInputs& in) {
    require_eps(in.eps);
    require_count(in.n, "n");
    require_count(in.d, "d");
    require_count(in.t, "t");
    require_count(in.m, "m");
    if (in.alpha < 0 || in.gamma < 0) throw InputError("alpha/gamma must be non-negative");

    const double ap = std::max(in.alpha, 1.0);
    const double gp = std::max(in.gamma, 1.0);
    const double n = static_cast<double>(in.n);
    const double d = static_cast<double>(in.d);
    const double t = static_cast<double>(in.t);
    const double m = static_cast<double>(in.m);
    const double pre = 512.0 * std::pow(in.alpha, 6) * std::pow(in.gamma, 2 * d + 2) *
                       std::pow(n, 6) * std::pow(d, 6) * std::pow(t, 5);
    const double logterm = std::log(2.0 * ap * gp * d * n * m);
    return ceil_pos(pre * logterm / std::pow(in.eps, 5));
}

double k_nontensor(double alpha, double gamma, std::int64_t d, std::int64_t t, double l,
                   double eps) {
    require_eps(eps);
    require_count(d, "d");
    require_count(t, "t");
    if (!(l >= 1)) throw InputError("l must be >= 1", "l");
    const double dd = static_cast<double>(d);
    const double v = alpha * alpha * std::pow(gamma, 2 * dd - 2) *
                     std::pow(std::exp2(dd) - 1.0, 2) * static_cast<double>(t) *
                     static_cast<double>(t) * std::log(l) / (eps * eps);
    return ceil_pos(v);
}

double k_sqp(double eps) {
    require_eps(eps);
    return ceil_pos(32.0 * std::log(3.0 / eps) / (eps * eps * eps));
}

double k_multilinear(double alpha, double gamma, std::int64_t n, std::int64_t m, double eps) {
    require_eps(eps);
    require_count(n, "n");
    require_count(m, "m");
    const double nn = static_cast<double>(n);
    return ceil_pos(2.0 * alpha * alpha * gamma * gamma * nn * nn *
                    std::log(3.0 * nn * static_cast<double>(m)) / (eps * eps));
}

double k_standard_degree(double alpha, double gamma, std::int64_t d, double eps) {
    require_eps(eps);
    require_count(d, "d");
    const double dd = static_cast<double>(d);
    return ceil_pos(32.0 * std::pow(alpha, 6) * std::pow(gamma, 2 * dd) * std::pow(dd, 6) /
                    std::pow(eps, 4));
}

double perturbation_bound(double consts, double terms, std::int64_t d, double gamma, double eps) {
    if (consts < 0 || terms < 0 || gamma < 0 || eps < 0)
        throw InputError("perturbation bound inputs must be non-negative");
    if (d < 0) throw InputError("degree must be non-negative", "d");
    if (d == 0) return 0.0; // constant polynomials never move
    const double dd = static_cast<double>(d);
    return std::pow(gamma, dd - 1) * (std::exp2(dd) - 1.0) * consts * terms * eps;
}

double grid_size_log10(std::int64_t l, double k) {
    if (l < 1) throw InputError("l must be >= 1", "l");
    if (!(k >= 1)) return 0.0;
    // log10 C(l+k-1, k) = (lgamma(l+k) - lgamma(k+1) - lgamma(l)) / ln 10
    return (std::lgamma(static_cast<double>(l) + k) - std::lgamma(k + 1.0) -
            std::lgamma(static_cast<double>(l))) /
           std::log(10.0);
}

std::string grid_size_str(std::int64_t l, double k) {
    if (l < 1) throw InputError("l must be >= 1", "l");
    if (!(k >= 1)) return "1";
    if (k < 9.2e18 && k == std::floor(k)) {
        const auto ki = static_cast<std::uint64_t>(k);
        BigNat acc(1);
        for (std::uint64_t i = 1; i < static_cast<std::uint64_t>(l); ++i) {
            acc.mul(ki + i);
            acc.div(i); // exact: prefix products are binomials
        }
        return acc.str();
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "~1e%.0f", grid_size_log10(l, k));
    return buf;
}

KReport k_main_report(const BoundInputs& in, std::int64_t l, double point_budget) {
    KReport rep;
    rep.k = k_main(in);
    rep.grid_size = grid_size_str(l, rep.k);
    rep.grid_log10 = grid_size_log10(l, rep.k);
    rep.enumerable = rep.grid_log10 <= std::log10(point_budget);
    return rep;
}

} // namespace etra
