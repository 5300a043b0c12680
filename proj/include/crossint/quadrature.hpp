#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "crossint/errors.hpp"

namespace crossint {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Phi(z), the standard normal CDF, via the complementary error function.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

/// Phi^{-1}(p) for p in (0, 1), by Newton iteration on normal_cdf.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw InvalidInputError("normal_quantile: p must be in (0, 1)");
    double x = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double density = std::exp(-0.5 * x * x) * 0.39894228040143267794;
        const double step = (normal_cdf(x) - p) / density;
        x -= step;
        if (std::abs(step) < 1e-14) break;
    }
    return x;
}

struct QuadratureRule {
    enum class Kind { GaussHermite, AdaptiveKronrod };
    Kind kind = Kind::AdaptiveKronrod;
    int order = 40;           // Gauss-Hermite only
    double tolerance = 1e-12; // adaptive only

    static QuadratureRule gauss_hermite(int order) {
        if (order < 1) throw InvalidInputError("QuadratureRule: order must be >= 1");
        return {Kind::GaussHermite, order, 0.0};
    }
    static QuadratureRule adaptive(double tol) {
        if (!(tol > 0.0)) throw InvalidInputError("QuadratureRule: tolerance must be > 0");
        return {Kind::AdaptiveKronrod, 0, tol};
    }
};

namespace detail {

/// Nodes and weights for \int e^{-t^2} g(t) dt, computed by Newton iteration
/// on the normalized Hermite recurrence.
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const HermiteRule& hermite_rule(int n) {
    static std::map<int, HermiteRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    HermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    const double pim4 = 0.75112554446494248285870300477623; // pi^{-1/4}
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// 15-point Kronrod / 7-point Gauss pair on [-1, 1].
inline constexpr double kKronrodX[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct IntervalEstimate {
    double lo, hi, value, error;
};

template <class F>
IntervalEstimate gk15(const F& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kron = kKronrodW[7] * fc;
    double gauss = kGaussW[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double fv = f(c - h * kKronrodX[j]) + f(c + h * kKronrodX[j]);
        kron += kKronrodW[j] * fv;
        if (j % 2 == 1) gauss += kGaussW[j / 2] * fv;
    }
    kron *= h;
    gauss *= h;
    return {lo, hi, kron, std::abs(kron - gauss)};
}

template <class F>
double adaptive_gk(const F& f, double lo, double hi, double tol) {
    std::vector<IntervalEstimate> segs;
    segs.push_back(gk15(f, lo, hi));
    if (!std::isfinite(segs.back().value))
        throw NumericalError("adaptive_quad: integrand produced a non-finite value");
    const std::size_t max_segments = 4000;
    while (true) {
        double total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total_err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (total_err <= tol) break;
        if (segs.size() >= max_segments) {
            std::sort(segs.begin(), segs.end(),
                      [](const IntervalEstimate& a, const IntervalEstimate& b) { return a.lo < b.lo; });
            double v = 0.0;
            for (const auto& s : segs) v += s.value;
            throw AccuracyError("adaptive_quad: subdivision limit exceeded", v, total_err);
        }
        const IntervalEstimate w = segs[worst];
        const double mid = 0.5 * (w.lo + w.hi);
        segs[worst] = gk15(f, w.lo, mid);
        segs.push_back(gk15(f, mid, w.hi));
        if (!std::isfinite(segs[worst].value) || !std::isfinite(segs.back().value))
            throw NumericalError("adaptive_quad: integrand produced a non-finite value");
    }
    // Sum in a fixed spatial order so the result does not depend on the
    // subdivision history representation.
    std::sort(segs.begin(), segs.end(),
              [](const IntervalEstimate& a, const IntervalEstimate& b) { return a.lo < b.lo; });
    double v = 0.0;
    for (const auto& s : segs) v += s.value;
    return v;
}

} // namespace detail

/// \int N(x; mean, variance) f(x) dx by Gauss-Hermite quadrature.
/// Exact for polynomial f of degree <= 2*order - 1.
template <class F>
double gauss_hermite(const F& f, double mean, double variance, int order) {
    if (order < 1) throw InvalidInputError("gauss_hermite: order must be >= 1");
    if (!(variance > 0.0)) throw InvalidInputError("gauss_hermite: variance must be > 0");
    const auto& rule = detail::hermite_rule(order);
    const double scale = std::sqrt(2.0 * variance);
    const double inv_sqrt_pi = 0.56418958354775628694807945156077;
    double sum = 0.0;
    for (int i = 0; i < order; ++i)
        sum += rule.weights[i] * f(mean + scale * rule.nodes[i]);
    return inv_sqrt_pi * sum;
}

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over (lo, hi), either
/// endpoint may be infinite. Infinite ranges are mapped to a finite t-interval
/// with the rational transform x = t / (1 - t^2), t in (-1, 1) (shifted to the
/// finite endpoint for semi-infinite ranges).
template <class F>
double adaptive_quad(const F& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw InvalidInputError("adaptive_quad: tol must be > 0");
    if (!(lo < hi)) throw InvalidInputError("adaptive_quad: require lo < hi");

    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf)
        return detail::adaptive_gk(f, lo, hi, tol);

    const double shift = lo_inf ? (hi_inf ? 0.0 : hi) : lo;
    auto g = [&](double t) {
        const double u = 1.0 - t * t;
        const double x = shift + t / u;
        const double w = (1.0 + t * t) / (u * u);
        const double fx = f(x);
        return fx == 0.0 ? 0.0 : fx * w;
    };
    const double t_lo = lo_inf ? -1.0 : 0.0;
    const double t_hi = hi_inf ? 1.0 : 0.0;
    return detail::adaptive_gk(g, t_lo, t_hi, tol);
}

} // namespace crossint
