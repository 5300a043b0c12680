#include <doctest.h>

#include <cmath>

#include "crossint/linalg.hpp"
#include "crossint/rng.hpp"

using namespace crossint;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

void check_penrose(const Matrix& m, const Matrix& p, double tol) {
    CHECK(((m * p * m) - m).cwiseAbs().maxCoeff() < tol);
    CHECK(((p * m * p) - p).cwiseAbs().maxCoeff() < tol);
    CHECK(((m * p).transpose() - m * p).cwiseAbs().maxCoeff() < tol);
    CHECK(((p * m).transpose() - p * m).cwiseAbs().maxCoeff() < tol);
}

} // namespace

TEST_CASE("pinv of the identity is the identity") {
    const Matrix id = Matrix::Identity(3, 3);
    CHECK((pinv(id, 1e-12) - id).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("pinv of a rank-deficient diagonal inverts the nonzero part") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 2.0;
    const Matrix p = pinv(m, 1e-12);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p(1, 1) == doctest::Approx(0.0));
    CHECK(p(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("pinv satisfies the four Penrose identities on a seeded 4x3 matrix") {
    Rng rng(42);
    const Matrix m = random_matrix(4, 3, rng);
    check_penrose(m, pinv(m, 1e-12), 1e-10);
}

TEST_CASE("pinv Penrose identities hold for random shapes up to 20x20") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 20);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 20);
        const Matrix m = random_matrix(rows, cols, rng);
        check_penrose(m, pinv(m, 1e-12), 1e-10);
    }
}

TEST_CASE("pinv equals the inverse for a well-conditioned matrix") {
    Rng rng(11);
    Matrix m = random_matrix(5, 5, rng);
    m += 5.0 * Matrix::Identity(5, 5);
    CHECK((pinv(m) - m.inverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pinv rejects bad input") {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = std::nan("");
    CHECK_THROWS_AS(pinv(m), InvalidInputError);
    CHECK_THROWS_AS(pinv(Matrix::Identity(2, 2), 0.0), InvalidInputError);
    CHECK_THROWS_AS(pinv(Matrix::Identity(2, 2), 1.5), InvalidInputError);
}

TEST_CASE("cholesky of the identity is the identity") {
    const Matrix id = Matrix::Identity(4, 4);
    CHECK((cholesky_lower(id) - id).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cholesky matches the 2x2 recurrence by hand") {
    Matrix sigma(2, 2);
    sigma << 1.0, 0.5, 0.5, 1.0;
    const Matrix l = cholesky_lower(sigma);
    CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(l(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(l(0, 1) == doctest::Approx(0.0));
    CHECK(l(1, 1) == doctest::Approx(0.86602540378443865).epsilon(1e-15));
}

TEST_CASE("cholesky succeeds on the d=10 equicorrelated covariance") {
    const int d = 10;
    Matrix sigma = Matrix::Constant(d, d, 0.5);
    sigma.diagonal().setOnes();
    const Matrix l = cholesky_lower(sigma);
    CHECK((l * l.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 12);
        const Matrix a = random_matrix(n, n, rng);
        const Matrix sigma = a * a.transpose() + Matrix::Identity(n, n);
        const Matrix l = cholesky_lower(sigma);
        CHECK((l * l.transpose() - sigma).cwiseAbs().maxCoeff() <
              1e-12 * sigma.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("cholesky rejects indefinite matrices") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(cholesky_lower(m), NotPositiveDefiniteError);
}
