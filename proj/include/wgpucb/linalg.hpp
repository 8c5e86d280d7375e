#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace wgpucb {

/// Cholesky factor of a symmetric positive definite matrix plus the diagonal
/// boost that was needed to obtain it.
struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double boost = 0.0;

    Eigen::Index size() const { return llt.matrixLLT().rows(); }
    /// log det of the factored matrix, 2 * sum(log diag(L)).
    double log_determinant() const;
};

/// Factors `a`, escalating through diagonal boosts 1e-10, 1e-8, 1e-6 when the
/// plain factorization fails. Throws NumericalError once the ladder is exhausted.
Factorization robust_cholesky(const Eigen::MatrixXd& a, std::string_view what);

/// log det(I + a) for symmetric PSD `a`.
double log_det_identity_plus(const Eigen::MatrixXd& a, std::string_view what);

}  // namespace wgpucb
