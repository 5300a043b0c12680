#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "crossint/basket.hpp"
#include "crossint/errors.hpp"
#include "crossint/gaussian.hpp"
#include "crossint/linalg.hpp"
#include "crossint/quadrature.hpp"

namespace crossint {

/// Sine-series expansion of the call payoff max(0, S - K) on S in [0, K d]:
/// ((d-1)/d) S + sum_m c_m sin(m pi S / (K d)) with
/// c_m = -(2 K d)/(m^2 pi^2) sin(m pi / d).
struct FourierSeriesSpec {
    double strike = 1.0;
    int dim = 1;
    int n_terms = 0;
};

inline double series_coeff(const FourierSeriesSpec& spec, int m) {
    if (m < 1) throw InvalidInputError("series_coeff: m must be >= 1");
    return -(2.0 * spec.strike * spec.dim) / (m * m * M_PI * M_PI) *
           std::sin(m * M_PI / spec.dim);
}

inline double eval_series(const FourierSeriesSpec& spec, double s, int n_terms) {
    if (s < 0.0 || s > spec.strike * spec.dim)
        throw InvalidInputError("eval_series: S outside [0, K d]");
    double value = (spec.dim - 1.0) / spec.dim * s;
    double comp = 0.0; // Kahan compensation
    for (int m = 1; m <= n_terms; ++m) {
        const double term =
            series_coeff(spec, m) * std::sin(m * M_PI * s / (spec.strike * spec.dim));
        const double y = term - comp;
        const double t = value + y;
        comp = (t - value) - y;
        value = t;
    }
    return value;
}

/// The 2x2 rotation matrix R[theta]; element (2,1) is sin(theta), so products
/// of rotations carry sin(sum theta_i) in that slot.
inline Eigen::Matrix2d rotation(double theta) {
    Eigen::Matrix2d r;
    const double c = std::cos(theta), s = std::sin(theta);
    r << c, -s, s, c;
    return r;
}

/// {w_i e^{x_i}} in [0, K]^d, i.e. x_i <= b_i = ln(K / w_i) for every i.
struct BoxDomain {
    Vector uppers;

    bool inside(const Vector& x) const {
        for (int i = 0; i < x.size(); ++i)
            if (x(i) > uppers(i)) return false;
        return true;
    }
};

/// Fourier tensor train valuation of the basket call against a
/// diagonal-covariance Gaussian. The payoff splits into an in-box sine series
/// (separable through 2x2 rotation products) plus closed-form linear pieces:
///   psi = int_B G * series + int_{R^d} G (S - K) - int_B G (S - K).
class FourierTTModel {
public:
    FourierTTModel(FourierSeriesSpec series, Vector weights, GaussianSpec gaussian,
                   double quad_tol = 1e-13)
        : series_(series), weights_(std::move(weights)), gaussian_(std::move(gaussian)),
          quad_tol_(quad_tol) {
        const int d = series_.dim;
        if (weights_.size() != d || gaussian_.dim() != d)
            throw InvalidInputError("FourierTTModel: dimension mismatch");
        if (weights_.minCoeff() <= 0.0)
            throw InvalidInputError("FourierTTModel: weights must be positive");
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j && gaussian_.sigma(i, j) != 0.0)
                    throw InvalidInputError("FourierTTModel: covariance must be diagonal");
        box_.uppers = Vector(d);
        for (int i = 0; i < d; ++i)
            box_.uppers(i) = std::log(series_.strike / weights_(i));
    }

    const FourierSeriesSpec& series() const { return series_; }
    const BoxDomain& box() const { return box_; }
    double quad_tol() const { return quad_tol_; }
    std::int64_t quadrature_count() const { return quadratures_; }
    std::int64_t matrix_integral_count() const { return matrix_integrals_; }

    /// 2x2 matrix int_{-inf}^{b_i} N(x; mu_i, sigma_ii) R[theta_i(x)] dx with
    /// theta_i(x) = m pi w_i e^x / (K d). Each entry is integrated separately.
    Eigen::Matrix2d term_matrix(int i, int m) const {
        const double mu = gaussian_.mu(i);
        const double var = gaussian_.sigma(i, i);
        const double b = box_.uppers(i);
        const double angle_scale = m * M_PI * weights_(i) / (series_.strike * series_.dim);
        const double norm = 1.0 / std::sqrt(2.0 * M_PI * var);

        auto entry = [&](auto&& trig) {
            ++quadratures_;
            return adaptive_quad(
                [&](double x) {
                    const double r = x - mu;
                    return norm * std::exp(-0.5 * r * r / var) * trig(angle_scale * std::exp(x));
                },
                -kInf, b, quad_tol_);
        };
        ++matrix_integrals_;
        Eigen::Matrix2d t;
        t(0, 0) = entry([](double th) { return std::cos(th); });
        t(0, 1) = entry([](double th) { return -std::sin(th); });
        t(1, 0) = entry([](double th) { return std::sin(th); });
        t(1, 1) = entry([](double th) { return std::cos(th); });
        return t;
    }

    /// int_B (prod marginals) sin(m pi S / (K d)) dx: the (2,1) element of the
    /// full rotation-matrix product.
    double sine_integral(int m) const {
        Eigen::Matrix2d p = term_matrix(0, m);
        for (int i = 1; i < series_.dim; ++i)
            p = p * term_matrix(i, m);
        return p(1, 0);
    }

    /// Closed-form pieces that do not involve the sine series, already
    /// including the discount factor.
    double base_value() const {
        const double discount = std::exp(-gaussian_.rate * gaussian_.horizon);
        const double inside_linear = (series_.dim - 1.0) / series_.dim * box_expected_s();
        const double outside = full_value_plain() - (box_expected_s() - series_.strike * box_mass());
        return discount * (inside_linear + outside);
    }

    double term_value(int m) const {
        const double discount = std::exp(-gaussian_.rate * gaussian_.horizon);
        return discount * series_coeff(series_, m) * sine_integral(m);
    }

    /// Estimate with the sine series truncated at n_terms (defaults to the
    /// spec's n_terms). Terms are accumulated in index order with compensated
    /// summation; they span many orders of magnitude at high truncation.
    double integrate(int n_terms = -1) const {
        if (n_terms < 0) n_terms = series_.n_terms;
        double value = base_value();
        double comp = 0.0;
        for (int m = 1; m <= n_terms; ++m) {
            const double y = term_value(m) - comp;
            const double t = value + y;
            comp = (t - value) - y;
            value = t;
        }
        return value;
    }

    // Building blocks of the box decomposition, exposed for testing.

    /// prod_j Phi((b_j - mu_j)/sqrt(sigma_jj)) = int_B (prod marginals).
    double box_mass() const {
        double p = 1.0;
        for (int j = 0; j < series_.dim; ++j) p *= box_prob(j);
        return p;
    }

    /// int_B (prod marginals) * S.
    double box_expected_s() const {
        double total = 0.0;
        for (int i = 0; i < series_.dim; ++i) {
            double p = 1.0;
            for (int j = 0; j < series_.dim; ++j)
                if (j != i) p *= box_prob(j);
            total += p * weights_(i) *
                     truncated_lognormal_mean(gaussian_.mu(i), gaussian_.sigma(i, i),
                                              box_.uppers(i));
        }
        return total;
    }

    /// int_{R^d} (prod marginals) (S - K) = sum_i w_i e^{mu_i + sigma_ii/2} - K.
    double full_value_plain() const {
        double s = 0.0;
        for (int i = 0; i < series_.dim; ++i)
            s += weights_(i) * std::exp(gaussian_.mu(i) + 0.5 * gaussian_.sigma(i, i));
        return s - series_.strike;
    }

private:
    double box_prob(int j) const {
        return normal_cdf((box_.uppers(j) - gaussian_.mu(j)) /
                          std::sqrt(gaussian_.sigma(j, j)));
    }

    FourierSeriesSpec series_;
    Vector weights_;
    GaussianSpec gaussian_;
    BoxDomain box_;
    double quad_tol_;
    mutable std::int64_t quadratures_ = 0;
    mutable std::int64_t matrix_integrals_ = 0;
};

inline FourierTTModel fourier_model(const BasketConfig& cfg, int n_terms,
                                    double quad_tol = 1e-13) {
    FourierSeriesSpec spec{cfg.strike, cfg.dim(), n_terms};
    return FourierTTModel(spec, cfg.weights, cfg.gaussian, quad_tol);
}

/// High-truncation Fourier-TT value anchoring all error columns. With
/// n_terms = 0 the truncation doubles until consecutive estimates differ by
/// less than 1e-13.
inline double reference_value(const BasketConfig& cfg, int n_terms = 0) {
    const FourierTTModel model = fourier_model(cfg, n_terms);
    if (n_terms > 0) return model.integrate(n_terms);

    double value = model.base_value();
    double comp = 0.0;
    int m = 0;
    double prev = value;
    for (int n = 64; n <= 16384; n *= 2) {
        for (; m < n; ) {
            ++m;
            const double y = model.term_value(m) - comp;
            const double t = value + y;
            comp = (t - value) - y;
            value = t;
        }
        if (std::abs(value - prev) < 1e-13 && n > 64) return value;
        prev = value;
    }
    throw AccuracyError("reference_value: series truncation did not settle", value, 0.0);
}

} // namespace crossint
