// SPDX-License-Identifier: Apache-2.0
#include "etra/tensor.hpp"

#include <algorithm>
#include <set>

namespace etra {

PolyStats poly_stats(const TmvPolynomial& poly) {
    PolyStats s;
    std::set<std::string> names;
    for (const auto& term : poly.terms) {
        term.validate();
        for (std::size_t j = 0; j < term.var_names.size(); ++j) {
            names.insert(term.var_names[j]);
            s.d = std::max(s.d, term.exponents[j]);
        }
        int axis = 0;
        for (std::size_t j = 0; j < term.var_names.size(); ++j) {
            if (term.exponents[j] > 0) s.p = std::max(s.p, term.tensor.dims()[axis]);
            axis += term.exponents[j];
        }
        s.alpha = std::max(s.alpha, term.tensor.alpha());
        s.alpha = std::max(s.alpha, std::fabs(term.constant));
    }
    s.n = static_cast<int>(names.size());
    s.t = poly.length();
    return s;
}

} // namespace etra
