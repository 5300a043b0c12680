#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "crossint/errors.hpp"
#include "crossint/gaussian.hpp"
#include "crossint/rng.hpp"

namespace crossint {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
    double payoff_std = 0.0;
};

/// One-pass (Welford) mean/variance accumulator with an associative merge, so
/// chunked estimation with a fixed merge order reproduces the streaming result.
struct McAccumulator {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const McAccumulator& other) {
        if (other.n == 0) return;
        if (n == 0) { *this = other; return; }
        const double delta = other.mean - mean;
        const double total = static_cast<double>(n + other.n);
        m2 += other.m2 + delta * delta * (static_cast<double>(n) * other.n) / total;
        mean += delta * other.n / total;
        n += other.n;
    }

    McEstimate estimate() const {
        if (n < 2) throw InvalidInputError("McAccumulator: need at least 2 samples");
        McEstimate e;
        e.n_samples = n;
        e.mean = mean;
        e.payoff_std = std::sqrt(m2 / static_cast<double>(n - 1));
        e.std_error = e.payoff_std / std::sqrt(static_cast<double>(n));
        return e;
    }
};

/// Plain Monte Carlo estimate of E[payoff(X)] for X from `dist`.
/// Deterministic for a given seed.
inline McEstimate mc_estimate(const std::function<double(const Vector&)>& payoff,
                              const GaussianModel& dist, long long n, std::uint64_t seed) {
    if (n < 2) throw InvalidInputError("mc_estimate: need n >= 2");
    Rng rng(seed);
    McAccumulator acc;
    for (long long i = 0; i < n; ++i)
        acc.add(payoff(dist.sample(rng)));
    return acc.estimate();
}

/// Chunked variant: chunk c uses the stream Rng(seed).split(c), and chunk
/// statistics are merged in chunk order. Suitable for parallel evaluation;
/// the result depends only on (seed, n, chunk_size).
inline McEstimate mc_estimate_chunked(const std::function<double(const Vector&)>& payoff,
                                      const GaussianModel& dist, long long n,
                                      std::uint64_t seed, long long chunk_size) {
    if (n < 2) throw InvalidInputError("mc_estimate_chunked: need n >= 2");
    if (chunk_size < 1) throw InvalidInputError("mc_estimate_chunked: chunk_size must be >= 1");
    const Rng base(seed);
    McAccumulator total;
    long long done = 0;
    for (std::uint64_t c = 0; done < n; ++c) {
        const long long count = std::min(chunk_size, n - done);
        Rng rng = base.split(c);
        McAccumulator acc;
        for (long long i = 0; i < count; ++i)
            acc.add(payoff(dist.sample(rng)));
        total.merge(acc);
        done += count;
    }
    return total.estimate();
}

} // namespace crossint
