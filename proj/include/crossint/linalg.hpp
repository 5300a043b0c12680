#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "crossint/errors.hpp"

namespace crossint {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
inline Matrix pinv(const Matrix& m, double rel_tol = 1e-12) {
    if (!m.allFinite())
        throw InvalidInputError("pinv: matrix has non-finite entries");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw InvalidInputError("pinv: rel_tol must lie in (0, 1)");

    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return Matrix::Zero(m.cols(), m.rows());

    const double cutoff = rel_tol * s(0);
    Vector inv_s(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        inv_s(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
    return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

/// Lower-triangular L with L L^T = sigma.
inline Matrix cholesky_lower(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols())
        throw InvalidInputError("cholesky: matrix must be square");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("cholesky: matrix is not positive definite");
    return llt.matrixL();
}

} // namespace crossint
