#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "hjdg/grid.hpp"

namespace hjdg {

template <typename Scalar>
bool is_symmetric(const MatrixX<Scalar>& M, Scalar tol = Scalar(1e-12)) {
    if (M.rows() != M.cols()) return false;
    const Scalar scale = std::max(Scalar(1), M.template lpNorm<Eigen::Infinity>());
    return (M - M.transpose()).template lpNorm<Eigen::Infinity>() <= tol * scale;
}

/// m^-(M): the lowest eigenvalue of a symmetric matrix, or 0 when all
/// eigenvalues are positive.
template <typename Scalar>
Scalar m_minus(const MatrixX<Scalar>& M) {
    if (!is_symmetric(M))
        throw std::invalid_argument("m_minus: matrix is not symmetric within 1e-12");
    if (M.rows() == 1) return std::min(M(0, 0), Scalar(0));
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(M, Eigen::EigenvaluesOnly);
    return std::min(es.eigenvalues().minCoeff(), Scalar(0));
}

/// Spectral (operator) norm of a symmetric matrix.
template <typename Scalar>
Scalar spectral_norm_sym(const MatrixX<Scalar>& M) {
    if (M.rows() == 1) return std::abs(M(0, 0));
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace hjdg
