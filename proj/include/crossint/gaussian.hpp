#pragma once

#include <cmath>
#include <vector>

#include "crossint/errors.hpp"
#include "crossint/linalg.hpp"
#include "crossint/quadrature.hpp"
#include "crossint/rng.hpp"

namespace crossint {

/// Parameters of the Gaussian propagation weight: N(mu, sigma) times the
/// discount factor exp(-rate * horizon).
struct GaussianSpec {
    Vector mu;
    Matrix sigma;
    double rate = 0.0;
    double horizon = 1.0;

    int dim() const { return static_cast<int>(mu.size()); }

    static GaussianSpec standard(int d) {
        GaussianSpec s;
        s.mu = Vector::Zero(d);
        s.sigma = Matrix::Identity(d, d);
        return s;
    }

    /// sigma_ij = rho + (1 - rho) delta_ij.
    static GaussianSpec equicorrelated(int d, const Vector& mu, double rho) {
        GaussianSpec s;
        s.mu = mu;
        s.sigma = Matrix::Constant(d, d, rho);
        s.sigma.diagonal().setOnes();
        return s;
    }
};

/// One-dimensional conditional slice of a multivariate Gaussian:
/// exp(log_weight) * N(x; mean, variance) equals the joint density with the
/// remaining coordinates pinned.
struct Conditional1D {
    double log_weight;
    double mean;
    double variance;
};

/// Multivariate Gaussian with cached factorizations: density evaluation,
/// conditioning of one free coordinate on the rest, and sampling.
class GaussianModel {
public:
    explicit GaussianModel(GaussianSpec spec) : spec_(std::move(spec)) {
        const int d = spec_.dim();
        if (spec_.sigma.rows() != d || spec_.sigma.cols() != d)
            throw InvalidInputError("GaussianModel: sigma must be dim x dim");
        chol_ = cholesky_lower(spec_.sigma);
        precision_ = chol_.transpose().template triangularView<Eigen::Upper>().solve(
            chol_.template triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d)));
        double log_det = 0.0;
        for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(chol_(i, i));
        log_norm_ = -0.5 * (d * std::log(2.0 * M_PI) + log_det) - spec_.rate * spec_.horizon;
        diagonal_ = true;
        for (int i = 0; i < d && diagonal_; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j && spec_.sigma(i, j) != 0.0) { diagonal_ = false; break; }
        if (!diagonal_) build_pinned_caches();
    }

    const GaussianSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    bool diagonal_covariance() const { return diagonal_; }
    const Matrix& cholesky() const { return chol_; }

    double log_density(const Vector& x) const {
        if (x.size() != spec_.mu.size())
            throw InvalidInputError("GaussianModel: dimension mismatch");
        const Vector r = x - spec_.mu;
        return log_norm_ - 0.5 * r.dot(precision_ * r);
    }

    double density(const Vector& x) const { return std::exp(log_density(x)); }

    /// Conditional of coordinate `free` given all others pinned at the values
    /// in `point` (the entry point[free] is ignored).
    Conditional1D condition(const Vector& point, int free) const {
        const int d = dim();
        if (point.size() != d) throw InvalidInputError("condition: dimension mismatch");
        if (free < 0 || free >= d) throw InvalidInputError("condition: free dimension out of range");

        const double p_aa = precision_(free, free);
        Conditional1D c;
        c.variance = 1.0 / p_aa;
        if (diagonal_) {
            c.mean = spec_.mu(free);
            double lw = -spec_.rate * spec_.horizon;
            for (int i = 0; i < d; ++i) {
                if (i == free) continue;
                const double v = spec_.sigma(i, i);
                const double r = point(i) - spec_.mu(i);
                lw += -0.5 * (std::log(2.0 * M_PI * v) + r * r / v);
            }
            c.log_weight = lw;
            return c;
        }

        double dot = 0.0;
        for (int i = 0; i < d; ++i)
            if (i != free) dot += precision_(free, i) * (point(i) - spec_.mu(i));
        c.mean = spec_.mu(free) - dot / p_aa;

        const auto& cache = pinned_[free];
        Vector r(d - 1);
        for (int i = 0, k = 0; i < d; ++i)
            if (i != free) r(k++) = point(i) - spec_.mu(i);
        const Vector y = cache.chol.template triangularView<Eigen::Lower>().solve(r);
        c.log_weight = cache.log_norm - 0.5 * y.squaredNorm();
        return c;
    }

    Vector sample(Rng& rng) const {
        const int d = dim();
        Vector z(d);
        for (int i = 0; i < d; ++i) z(i) = rng.normal();
        return spec_.mu + chol_ * z;
    }

private:
    struct PinnedCache {
        Matrix chol;     // Cholesky of sigma with row/col `free` removed
        double log_norm; // log normalization of that marginal, with discount
    };

    void build_pinned_caches() {
        const int d = dim();
        pinned_.resize(d);
        for (int a = 0; a < d; ++a) {
            Matrix reduced(d - 1, d - 1);
            for (int i = 0, ri = 0; i < d; ++i) {
                if (i == a) continue;
                for (int j = 0, rj = 0; j < d; ++j) {
                    if (j == a) continue;
                    reduced(ri, rj++) = spec_.sigma(i, j);
                }
                ++ri;
            }
            PinnedCache cache;
            try {
                cache.chol = cholesky_lower(reduced);
            } catch (const NotPositiveDefiniteError&) {
                throw NumericalError("condition: singular pinned-block covariance");
            }
            double log_det = 0.0;
            for (int i = 0; i < d - 1; ++i) log_det += 2.0 * std::log(cache.chol(i, i));
            cache.log_norm =
                -0.5 * ((d - 1) * std::log(2.0 * M_PI) + log_det) - spec_.rate * spec_.horizon;
            pinned_[a] = std::move(cache);
        }
    }

    GaussianSpec spec_;
    Matrix chol_;
    Matrix precision_;
    double log_norm_;
    bool diagonal_;
    std::vector<PinnedCache> pinned_;
};

/// \int_{-inf}^{upper} N(x; mean, variance) e^x dx in closed form.
inline double truncated_lognormal_mean(double mean, double variance, double upper) {
    if (!(variance > 0.0))
        throw InvalidInputError("truncated_lognormal_mean: variance must be > 0");
    if (upper == -kInf) return 0.0;
    const double full = std::exp(mean + 0.5 * variance);
    if (upper == kInf) return full;
    return full * normal_cdf((upper - mean - variance) / std::sqrt(variance));
}

} // namespace crossint
