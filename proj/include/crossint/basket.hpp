#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "crossint/errors.hpp"
#include "crossint/gaussian.hpp"
#include "crossint/quadrature.hpp"
#include "crossint/ttcross.hpp"

namespace crossint {

/// European basket call under Black-Scholes dynamics: payoff
/// max(0, sum_i w_i e^{x_i} - K) propagated by the Gaussian weight.
struct BasketConfig {
    Vector weights;
    double strike = 1.0;
    GaussianSpec gaussian;
    double t_star = 1.0;

    int dim() const { return static_cast<int>(weights.size()); }

    /// Table-of-defaults problem: w_i = 1/d, K = 1, mu_i = -0.5,
    /// sigma_ij = rho + (1 - rho) delta_ij, r = 0.
    static BasketConfig defaults(int d, double rho = 0.0) {
        BasketConfig cfg;
        cfg.weights = Vector::Constant(d, 1.0 / d);
        cfg.strike = 1.0;
        cfg.gaussian = GaussianSpec::equicorrelated(d, Vector::Constant(d, -0.5), rho);
        cfg.gaussian.horizon = 1.0;
        return cfg;
    }
};

inline double basket_payoff(const BasketConfig& cfg, const Vector& x) {
    if (x.size() != cfg.weights.size())
        throw InvalidInputError("basket_payoff: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += cfg.weights(i) * std::exp(x(i));
    return std::max(0.0, s - cfg.strike);
}

/// Arguments of the analytic integral \int N(x; mean, variance)
/// max(0, scale e^x + offset) dx.
struct Call1DKernelArgs {
    double scale;
    double offset;
    double mean;
    double variance;
};

inline double call_kernel_1d(const Call1DKernelArgs& args) {
    if (!(args.scale > 0.0)) throw InvalidInputError("call_kernel_1d: scale must be > 0");
    if (!(args.variance > 0.0)) throw InvalidInputError("call_kernel_1d: variance must be > 0");
    const double fwd = args.scale * std::exp(args.mean + 0.5 * args.variance);
    if (args.offset >= 0.0) return fwd + args.offset;
    const double x_star = std::log(-args.offset / args.scale);
    const double sd = std::sqrt(args.variance);
    return fwd * normal_cdf((args.mean + args.variance - x_star) / sd) +
           args.offset * normal_cdf((args.mean - x_star) / sd);
}

/// The same integral restricted to [lo, hi]. Infinite limits recover
/// call_kernel_1d; the integrand is zero below x* = log(-offset/scale) when
/// the offset is negative, so the effective lower limit is max(lo, x*).
inline double call_kernel_1d_truncated(const Call1DKernelArgs& args, double lo, double hi) {
    if (!(args.scale > 0.0)) throw InvalidInputError("call_kernel_1d: scale must be > 0");
    if (!(args.variance > 0.0)) throw InvalidInputError("call_kernel_1d: variance must be > 0");
    double a = lo;
    if (args.offset < 0.0) a = std::max(a, std::log(-args.offset / args.scale));
    if (!(a < hi)) return 0.0;
    const double sd = std::sqrt(args.variance);
    const double fwd = args.scale * std::exp(args.mean + 0.5 * args.variance);
    const double m1 = args.mean + args.variance;
    return fwd * (normal_cdf((hi - m1) / sd) - normal_cdf((a - m1) / sd)) +
           args.offset * (normal_cdf((hi - args.mean) / sd) - normal_cdf((a - args.mean) / sd));
}

/// Basket problem with its propagation weight factored once. Provides the
/// full integrand (density times payoff) and the machinery to expose it as a
/// cross-interpolation target with analytic 1-D integrals.
class BasketProblem {
public:
    explicit BasketProblem(BasketConfig cfg)
        : cfg_(std::move(cfg)),
          gauss_(std::make_shared<GaussianModel>(cfg_.gaussian)) {
        if (cfg_.weights.minCoeff() <= 0.0)
            throw InvalidInputError("BasketProblem: weights must be positive");
    }

    const BasketConfig& config() const { return cfg_; }
    const std::shared_ptr<const GaussianModel>& gaussian() const { return gauss_; }
    int dim() const { return cfg_.dim(); }

    double payoff(const Vector& x) const { return basket_payoff(cfg_, x); }

    /// Density times payoff; the density underflows to zero long before the
    /// exponentials in the payoff overflow, so zero short-circuits first.
    double integrand(const Vector& x) const {
        const double g = gauss_->density(x);
        return g == 0.0 ? 0.0 : g * payoff(x);
    }

    /// Analytic 1-D integral of the integrand along dimension `a` with
    /// coordinates below `a` pinned from `left` and above from `right`.
    double integrate_1d(int a, const Vector* left, const Vector* right) const {
        const int d = dim();
        Vector pin(d);
        for (int i = 0; i < a; ++i) pin(i) = left ? (*left)(i) : 0.0;
        pin(a) = 0.0;
        for (int i = a + 1; i < d; ++i) pin(i) = right ? (*right)(i) : 0.0;

        double offset = -cfg_.strike;
        for (int i = 0; i < d; ++i)
            if (i != a) offset += cfg_.weights(i) * std::exp(pin(i));

        const Conditional1D c = gauss_->condition(pin, a);
        return std::exp(c.log_weight) *
               call_kernel_1d({cfg_.weights(a), offset, c.mean, c.variance});
    }

    /// The integrand as a TTXModel target. For diagonal covariance a fast
    /// pinned evaluator with per-node prefix/suffix caches is attached so
    /// slice evaluations cost O(1) instead of O(d).
    TargetFunction target_function() const {
        TargetFunction tf;
        tf.dim = dim();
        auto self = std::make_shared<BasketProblem>(*this);
        tf.eval = [self](const Vector& x) { return self->integrand(x); };
        tf.integrate_1d = [self](int a, const Vector* l, const Vector* r) {
            return self->integrate_1d(a, l, r);
        };
        tf.gh_mean = cfg_.gaussian.mu;
        tf.gh_var = cfg_.gaussian.sigma.diagonal();
        if (gauss_->diagonal_covariance()) {
            tf.make_pinned = [self](const std::vector<Vector>& nodes) {
                return self->make_pinned_evaluator(nodes);
            };
            // Separable-weight factorization: integrand = (product of 1-D
            // marginal densities) * discounted payoff. Assembling the cross
            // connection matrices on the payoff core keeps them conditioned
            // like the payoff itself, instead of spanning the density's
            // dynamic range across distant node pairs.
            tf.log_weight_1d = [self](int a, double x) {
                const double m = self->cfg_.gaussian.mu(a);
                const double v = self->cfg_.gaussian.sigma(a, a);
                const double r = x - m;
                return -0.5 * (std::log(2.0 * M_PI * v) + r * r / v);
            };
            tf.make_pinned_core = [self](const std::vector<Vector>& nodes) {
                return self->make_pinned_core_evaluator(nodes);
            };
            tf.core_integral_1d = [self](int a, const Vector* l, const Vector* r) {
                return self->core_integral_1d(a, l, r);
            };
            tf.core_integral_1d_box = [self](int a, const Vector* l, const Vector* r,
                                             double lo, double hi) {
                return self->core_integral_1d_box(a, l, r, lo, hi);
            };
        }
        return tf;
    }

private:
    /// Discounted payoff on a pinned slice (the integrand divided by the
    /// product of marginal densities), with per-node prefix/suffix sums of the
    /// weighted exponentials so each call costs O(1).
    PinnedEvaluator make_pinned_core_evaluator(const std::vector<Vector>& nodes) const {
        const int d = dim();
        const int n = static_cast<int>(nodes.size());
        const double discount =
            std::exp(-cfg_.gaussian.rate * cfg_.gaussian.horizon);
        struct CoreCache {
            std::vector<double> s_prefix, s_suffix;
        };
        auto caches = std::make_shared<std::vector<CoreCache>>(n);
        for (int k = 0; k < n; ++k) {
            CoreCache& c = (*caches)[k];
            c.s_prefix.assign(d, 0.0);
            c.s_suffix.assign(d, 0.0);
            for (int a = 1; a < d; ++a)
                c.s_prefix[a] = c.s_prefix[a - 1] + cfg_.weights(a - 1) * std::exp(nodes[k](a - 1));
            for (int a = d - 2; a >= 0; --a)
                c.s_suffix[a] = c.s_suffix[a + 1] + cfg_.weights(a + 1) * std::exp(nodes[k](a + 1));
        }
        const double strike = cfg_.strike;
        const Vector weights = cfg_.weights;
        return [caches, weights, strike, discount, d](int a, int k, int l, double x) {
            const double s_left = a > 0 ? (*caches)[k].s_prefix[a] : 0.0;
            const double s_right = a < d - 1 ? (*caches)[l].s_suffix[a] : 0.0;
            const double s = s_left + weights(a) * std::exp(x) + s_right - strike;
            return s > 0.0 ? discount * s : 0.0;
        };
    }

    /// \int N(x; mu_a, sigma_aa) * discounted-payoff-core dx along dimension
    /// `a` — the weighted core integral: the pinned dimensions' densities are
    /// deliberately left out (they cancel across the chain).
    double core_integral_1d(int a, const Vector* left, const Vector* right) const {
        const double discount =
            std::exp(-cfg_.gaussian.rate * cfg_.gaussian.horizon);
        return discount * call_kernel_1d({cfg_.weights(a), pinned_offset(a, left, right),
                                          cfg_.gaussian.mu(a), cfg_.gaussian.sigma(a, a)});
    }

    /// The weighted core integral restricted to [lo, hi] along dimension `a`.
    double core_integral_1d_box(int a, const Vector* left, const Vector* right,
                                double lo, double hi) const {
        const double discount =
            std::exp(-cfg_.gaussian.rate * cfg_.gaussian.horizon);
        return discount *
               call_kernel_1d_truncated({cfg_.weights(a), pinned_offset(a, left, right),
                                         cfg_.gaussian.mu(a), cfg_.gaussian.sigma(a, a)},
                                        lo, hi);
    }

    double pinned_offset(int a, const Vector* left, const Vector* right) const {
        const int d = dim();
        double offset = -cfg_.strike;
        for (int i = 0; i < a; ++i) offset += cfg_.weights(i) * std::exp(left ? (*left)(i) : 0.0);
        for (int i = a + 1; i < d; ++i)
            offset += cfg_.weights(i) * std::exp(right ? (*right)(i) : 0.0);
        return offset;
    }

    PinnedEvaluator make_pinned_evaluator(const std::vector<Vector>& nodes) const {
        const int d = dim();
        const int n = static_cast<int>(nodes.size());
        const Vector mu = cfg_.gaussian.mu;
        const Vector var = cfg_.gaussian.sigma.diagonal();
        const double discount = -cfg_.gaussian.rate * cfg_.gaussian.horizon;

        // Per node: prefix/suffix sums of the log marginal densities and of
        // the weighted exponentials, indexed so slot a uses prefix[a] for
        // dimensions < a and suffix[a] for dimensions > a.
        auto log_marginal = [mu, var](int i, double x) {
            const double r = x - mu(i);
            return -0.5 * (std::log(2.0 * M_PI * var(i)) + r * r / var(i));
        };
        struct NodeCache {
            std::vector<double> lw_prefix, lw_suffix, s_prefix, s_suffix;
        };
        auto caches = std::make_shared<std::vector<NodeCache>>(n);
        for (int k = 0; k < n; ++k) {
            NodeCache& c = (*caches)[k];
            c.lw_prefix.assign(d, 0.0);
            c.s_prefix.assign(d, 0.0);
            c.lw_suffix.assign(d, 0.0);
            c.s_suffix.assign(d, 0.0);
            for (int a = 1; a < d; ++a) {
                c.lw_prefix[a] = c.lw_prefix[a - 1] + log_marginal(a - 1, nodes[k](a - 1));
                c.s_prefix[a] = c.s_prefix[a - 1] + cfg_.weights(a - 1) * std::exp(nodes[k](a - 1));
            }
            for (int a = d - 2; a >= 0; --a) {
                c.lw_suffix[a] = c.lw_suffix[a + 1] + log_marginal(a + 1, nodes[k](a + 1));
                c.s_suffix[a] = c.s_suffix[a + 1] + cfg_.weights(a + 1) * std::exp(nodes[k](a + 1));
            }
        }

        const double strike = cfg_.strike;
        const Vector weights = cfg_.weights;
        return [caches, log_marginal, weights, strike, discount, d](int a, int k, int l,
                                                                    double x) {
            const double lw_left = a > 0 ? (*caches)[k].lw_prefix[a] : 0.0;
            const double s_left = a > 0 ? (*caches)[k].s_prefix[a] : 0.0;
            const double lw_right = a < d - 1 ? (*caches)[l].lw_suffix[a] : 0.0;
            const double s_right = a < d - 1 ? (*caches)[l].s_suffix[a] : 0.0;
            const double s = s_left + weights(a) * std::exp(x) + s_right - strike;
            if (s <= 0.0) return 0.0;
            return std::exp(lw_left + log_marginal(a, x) + lw_right + discount) * s;
        };
    }

    BasketConfig cfg_;
    std::shared_ptr<const GaussianModel> gauss_;
};

/// Closed-form single-asset value (Black-Scholes in log coordinates); the
/// d = 1 oracle for every other method.
inline double exact_d1(const BasketConfig& cfg) {
    if (cfg.dim() != 1) throw InvalidInputError("exact_d1: requires d == 1");
    const double value = call_kernel_1d(
        {cfg.weights(0), -cfg.strike, cfg.gaussian.mu(0), cfg.gaussian.sigma(0, 0)});
    return value * std::exp(-cfg.gaussian.rate * cfg.gaussian.horizon);
}

} // namespace crossint
