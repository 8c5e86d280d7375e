#include "wgpucb/linalg.hpp"

#include "wgpucb/errors.hpp"

#include <array>
#include <string>

namespace wgpucb {

double Factorization::log_determinant() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Factorization robust_cholesky(const Eigen::MatrixXd& a, std::string_view what) {
    constexpr std::array<double, 4> ladder{0.0, 1e-10, 1e-8, 1e-6};
    for (const double boost : ladder) {
        Factorization f;
        f.boost = boost;
        if (boost == 0.0) {
            f.llt.compute(a);
        } else {
            Eigen::MatrixXd boosted = a;
            boosted.diagonal().array() += boost;
            f.llt.compute(boosted);
        }
        if (f.llt.info() == Eigen::Success && f.llt.matrixLLT().diagonal().allFinite()) {
            return f;
        }
    }
    const double lo = a.rows() > 0 ? a.diagonal().minCoeff() : 0.0;
    const double hi = a.rows() > 0 ? a.diagonal().maxCoeff() : 0.0;
    throw NumericalError(std::string(what) + ": Cholesky factorization failed after jitter escalation",
                         static_cast<std::size_t>(a.rows()), lo, hi);
}

double log_det_identity_plus(const Eigen::MatrixXd& a, std::string_view what) {
    if (a.rows() == 0) {
        return 0.0;
    }
    Eigen::MatrixXd m = a;
    m.diagonal().array() += 1.0;
    return robust_cholesky(m, what).log_determinant();
}

}  // namespace wgpucb
