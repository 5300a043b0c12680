#pragma once

#include <cmath>
#include <vector>

#include "crossint/errors.hpp"

namespace crossint {

/// Aitken extrapolation of a deterministic scalar sequence: output element i-1
/// is psi_i - g_i * (psi_i - psi_{i-1}) / (g_i - g_{i-1}) with
/// g_i = psi_{i+1} - psi_i. Exact on geometric convergence. When consecutive
/// differences stagnate below the relative guard, the raw value psi_{i+1}
/// passes through unchanged so the output is always finite.
inline std::vector<double> aitken(const std::vector<double>& psi, double guard = 1e-13) {
    if (psi.size() < 3)
        throw InvalidInputError("aitken: sequence must have at least 3 elements");
    if (!(guard > 0.0))
        throw InvalidInputError("aitken: guard must be > 0");

    std::vector<double> out;
    out.reserve(psi.size() - 2);
    for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
        const double g_prev = psi[i] - psi[i - 1];
        const double g_cur = psi[i + 1] - psi[i];
        const double dg = g_cur - g_prev;
        if (std::abs(dg) <= guard * std::abs(g_cur) ||
            std::abs(g_prev) <= guard * std::abs(psi[i])) {
            out.push_back(psi[i + 1]);
            continue;
        }
        const double value = psi[i] - g_cur * g_prev / dg;
        out.push_back(std::isfinite(value) ? value : psi[i + 1]);
    }
    return out;
}

} // namespace crossint
