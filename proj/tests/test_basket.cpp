#include <doctest.h>

#include <cmath>

#include "crossint/basket.hpp"
#include "crossint/quadrature.hpp"
#include "crossint/rng.hpp"

using namespace crossint;

TEST_CASE("basket payoff matches its definition") {
    BasketConfig cfg = BasketConfig::defaults(2);
    Vector x(2);
    x << 0.0, 0.0;
    CHECK(basket_payoff(cfg, x) == doctest::Approx(0.0));
    x << 1.0, 0.5;
    CHECK(basket_payoff(cfg, x) ==
          doctest::Approx(0.5 * std::exp(1.0) + 0.5 * std::exp(0.5) - 1.0).epsilon(1e-15));
    x << -5.0, -5.0;
    CHECK(basket_payoff(cfg, x) == 0.0);
    CHECK_THROWS_AS(basket_payoff(cfg, Vector::Zero(3)), InvalidInputError);
}

TEST_CASE("call kernel with nonnegative offset is the forward plus offset") {
    CHECK(call_kernel_1d({2.0, 0.5, 0.1, 0.3}) ==
          doctest::Approx(2.0 * std::exp(0.1 + 0.15) + 0.5).epsilon(1e-15));
}

TEST_CASE("call kernel at-the-money value equals 2 Phi(1/2) - 1") {
    // scale = 1, offset = -1, mean = -1/2, variance = 1 collapses to
    // Phi(0.5) - Phi(-0.5).
    CHECK(call_kernel_1d({1.0, -1.0, -0.5, 1.0}) ==
          doctest::Approx(0.38292492254802621).epsilon(1e-14));
}

TEST_CASE("call kernel matches adaptive quadrature on random arguments") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        Call1DKernelArgs args;
        args.scale = 0.2 + rng.uniform();
        args.offset = 2.0 * rng.normal();
        args.mean = rng.normal();
        args.variance = 0.3 + rng.uniform();
        // Integrate only past the kink, where the integrand is smooth.
        const double lo = args.offset >= 0.0
                              ? -kInf
                              : std::log(-args.offset / args.scale);
        const double quad = adaptive_quad(
            [&](double x) {
                const double r = x - args.mean;
                const double density = std::exp(-0.5 * r * r / args.variance) /
                                       std::sqrt(2.0 * M_PI * args.variance);
                if (density == 0.0) return 0.0;
                return density * (args.scale * std::exp(x) + args.offset);
            },
            lo, kInf, 1e-13);
        CHECK(std::abs(call_kernel_1d(args) - quad) < 1e-11);
    }
}

TEST_CASE("truncated call kernel matches quadrature and recovers the full kernel") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        Call1DKernelArgs args;
        args.scale = 0.2 + rng.uniform();
        args.offset = 2.0 * rng.normal();
        args.mean = rng.normal();
        args.variance = 0.3 + rng.uniform();
        const double lo = args.mean - 1.0 - rng.uniform();
        const double hi = args.mean + 1.0 + rng.uniform();
        const double quad = adaptive_quad(
            [&](double x) {
                const double r = x - args.mean;
                const double density = std::exp(-0.5 * r * r / args.variance) /
                                       std::sqrt(2.0 * M_PI * args.variance);
                const double core = args.scale * std::exp(x) + args.offset;
                return core > 0.0 ? density * core : 0.0;
            },
            lo, hi, 1e-13);
        // The payoff kink can land inside [lo, hi], limiting the adaptive
        // quadrature reference to ~1e-10 accuracy.
        CHECK(std::abs(call_kernel_1d_truncated(args, lo, hi) - quad) < 1e-9);
        // Infinite limits recover the untruncated kernel.
        CHECK(call_kernel_1d_truncated(args, -kInf, kInf) ==
              doctest::Approx(call_kernel_1d(args)).epsilon(1e-14));
    }
    // An interval entirely below the kink integrates to zero.
    CHECK(call_kernel_1d_truncated({1.0, -10.0, 0.0, 1.0}, -1.0, 1.0) == 0.0);
}

TEST_CASE("call kernel validates input") {
    CHECK_THROWS_AS(call_kernel_1d_truncated({-1.0, 0.0, 0.0, 1.0}, 0.0, 1.0),
                    InvalidInputError);
    CHECK_THROWS_AS(call_kernel_1d({-1.0, 0.0, 0.0, 1.0}), InvalidInputError);
    CHECK_THROWS_AS(call_kernel_1d({1.0, 0.0, 0.0, 0.0}), InvalidInputError);
}

TEST_CASE("single-asset closed form agrees with the kernel and quadrature") {
    const BasketConfig cfg = BasketConfig::defaults(1);
    CHECK(exact_d1(cfg) == doctest::Approx(0.38292492254802621).epsilon(1e-14));

    BasketProblem problem(cfg);
    const double quad = adaptive_quad(
        [&](double x) {
            Vector v(1);
            v(0) = x;
            return problem.integrand(v);
        },
        -kInf, kInf, 1e-13);
    CHECK(exact_d1(cfg) == doctest::Approx(quad).epsilon(1e-11));
}

TEST_CASE("discounting scales the single-asset value by exp(-r t)") {
    BasketConfig cfg = BasketConfig::defaults(1);
    const double undiscounted = exact_d1(cfg);
    cfg.gaussian.rate = 0.05;
    cfg.gaussian.horizon = 2.0;
    CHECK(exact_d1(cfg) ==
          doctest::Approx(undiscounted * std::exp(-0.1)).epsilon(1e-14));
}

TEST_CASE("analytic slice integral matches quadrature, diagonal covariance") {
    BasketProblem problem(BasketConfig::defaults(3));
    Rng rng(12);
    for (int a = 0; a < 3; ++a) {
        Vector left(3), right(3);
        for (int i = 0; i < 3; ++i) {
            left(i) = rng.normal() - 0.5;
            right(i) = rng.normal() - 0.5;
        }
        const double analytic = problem.integrate_1d(a, &left, &right);
        const double quad = adaptive_quad(
            [&](double x) {
                Vector v(3);
                for (int i = 0; i < a; ++i) v(i) = left(i);
                v(a) = x;
                for (int i = a + 1; i < 3; ++i) v(i) = right(i);
                return problem.integrand(v);
            },
            -kInf, kInf, 1e-13);
        CHECK(std::abs(analytic - quad) < 1e-11);
    }
}

TEST_CASE("analytic slice integral matches quadrature, correlated covariance") {
    BasketProblem problem(BasketConfig::defaults(3, 0.4));
    Rng rng(13);
    for (int a = 0; a < 3; ++a) {
        Vector pins(3);
        for (int i = 0; i < 3; ++i) pins(i) = rng.normal() - 0.5;
        const double analytic = problem.integrate_1d(a, &pins, &pins);
        const double quad = adaptive_quad(
            [&](double x) {
                Vector v = pins;
                v(a) = x;
                return problem.integrand(v);
            },
            -kInf, kInf, 1e-13);
        CHECK(std::abs(analytic - quad) < 1e-11);
    }
}

TEST_CASE("edge slices use only one side of pins") {
    BasketProblem problem(BasketConfig::defaults(2));
    Vector right(2);
    right << 0.0, 0.3;
    const double analytic = problem.integrate_1d(0, nullptr, &right);
    const double quad = adaptive_quad(
        [&](double x) {
            Vector v(2);
            v << x, 0.3;
            return problem.integrand(v);
        },
        -kInf, kInf, 1e-13);
    CHECK(std::abs(analytic - quad) < 1e-11);
}

TEST_CASE("pinned evaluator reproduces the integrand on node slices") {
    const int d = 5;
    BasketProblem problem(BasketConfig::defaults(d));
    TargetFunction tf = problem.target_function();
    REQUIRE(static_cast<bool>(tf.make_pinned));

    Rng rng(30);
    std::vector<Vector> nodes;
    for (int k = 0; k < 4; ++k) {
        Vector v(d);
        for (int i = 0; i < d; ++i) v(i) = rng.normal() - 0.5;
        nodes.push_back(v);
    }
    const PinnedEvaluator fast = tf.make_pinned(nodes);
    for (int a = 0; a < d; ++a) {
        for (int k = 0; k < 4; ++k) {
            for (int l = 0; l < 4; ++l) {
                const double x = rng.normal();
                Vector v(d);
                for (int i = 0; i < a; ++i) v(i) = nodes[k](i);
                v(a) = x;
                for (int i = a + 1; i < d; ++i) v(i) = nodes[l](i);
                CHECK(fast(a, k, l, x) ==
                      doctest::Approx(problem.integrand(v)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("problem validation") {
    BasketConfig cfg = BasketConfig::defaults(2);
    cfg.weights(0) = 0.0;
    CHECK_THROWS_AS(BasketProblem{cfg}, InvalidInputError);
    CHECK_THROWS_AS(exact_d1(BasketConfig::defaults(2)), InvalidInputError);
}
