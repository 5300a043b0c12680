#include <doctest.h>

#include <cmath>
#include <vector>

#include "crossint/rng.hpp"

using namespace crossint;

TEST_CASE("identical seeds give identical streams") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    Rng c(123), d(124);
    bool all_equal = true;
    for (int i = 0; i < 10; ++i) all_equal = all_equal && (c.next_u64() == d.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform draws lie strictly inside (0, 1)") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal draws have the right first two moments") {
    Rng rng(2024);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("split streams are deterministic and distinct") {
    Rng base(99);
    Rng s0 = base.split(0);
    Rng s0_again = Rng(99).split(0);
    for (int i = 0; i < 20; ++i) CHECK(s0.next_u64() == s0_again.next_u64());

    Rng a = base.split(1), b = base.split(2);
    bool all_equal = true;
    for (int i = 0; i < 10; ++i) all_equal = all_equal && (a.next_u64() == b.next_u64());
    CHECK_FALSE(all_equal);
}
