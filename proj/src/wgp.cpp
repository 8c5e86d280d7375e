#include "wgpucb/wgp.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wgpucb {

void WeightScheme::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InputError("discount factor eta must lie in (0, 1], got " + std::to_string(eta));
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InputError("lambda must be positive, got " + std::to_string(lambda));
    }
    if (!(truncation_eps >= 0.0 && truncation_eps < 1.0)) {
        throw InputError("truncation_eps must lie in [0, 1), got " + std::to_string(truncation_eps));
    }
}

double WeightScheme::relative_weight(std::size_t t, std::size_t s) const {
    if (s > t) {
        throw InputError("relative_weight: round s is after t");
    }
    return std::pow(eta, static_cast<double>(t - s));
}

std::size_t WeightScheme::effective_horizon() const {
    if (eta >= 1.0 || truncation_eps <= 0.0) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(std::log(1.0 / truncation_eps) / std::log(1.0 / eta)));
}

void BanditHistory::append(ArmIndex arm, double y) { append(arm, y, last_round() + 1); }

void BanditHistory::append(ArmIndex arm, double y, std::size_t round) {
    if (arm >= arm_count_) {
        throw InputError("arm index " + std::to_string(arm) + " outside a grid of " + std::to_string(arm_count_));
    }
    if (round == 0 || round <= last_round()) {
        throw ProtocolError("history rounds must strictly increase from 1 (got " + std::to_string(round) +
                            " after " + std::to_string(last_round()) + ")");
    }
    if (!std::isfinite(y)) {
        throw InputError("non-finite reward at round " + std::to_string(round));
    }
    rounds_.push_back({arm, y, round});
}

BanditHistory BanditHistory::window(std::size_t first, std::size_t last) const {
    BanditHistory out(arm_count_);
    for (const auto& obs : rounds_) {
        if (obs.round >= first && obs.round <= last) {
            out.rounds_.push_back(obs);
        }
    }
    return out;
}

std::vector<ArmIndex> BanditHistory::arms() const {
    std::vector<ArmIndex> out;
    out.reserve(rounds_.size());
    for (const auto& obs : rounds_) {
        out.push_back(obs.arm);
    }
    return out;
}

std::vector<double> relative_weights(const BanditHistory& history, const WeightScheme& scheme) {
    const std::size_t t = history.last_round();
    std::vector<double> u;
    u.reserve(history.size());
    for (const auto& obs : history.rounds()) {
        u.push_back(scheme.relative_weight(t, obs.round));
    }
    return u;
}

namespace {

struct Retained {
    std::vector<ArmIndex> arms;
    Eigen::VectorXd sqrt_u;
    Eigen::VectorXd y;
};

Retained retain(const BanditHistory& history, std::span<const double> weights, double cutoff) {
    if (weights.size() != history.size()) {
        throw InputError("weight count does not match the history length");
    }
    Retained r;
    std::vector<double> su;
    std::vector<double> ys;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double u = weights[i];
        if (!(u > 0.0 && u <= 1.0)) {
            throw InputError("relative weights must lie in (0, 1]");
        }
        if (u < cutoff) {
            continue;
        }
        r.arms.push_back(history[i].arm);
        su.push_back(std::sqrt(u));
        ys.push_back(history[i].y);
    }
    r.sqrt_u = Eigen::Map<const Eigen::VectorXd>(su.data(), static_cast<Eigen::Index>(su.size()));
    r.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return r;
}

// Clamps variances into [0, prior] and counts clamps above the warning threshold.
void clamp_variance(Eigen::VectorXd& var, const Eigen::VectorXd& prior, int& warnings, double& max_clamp) {
    warnings = 0;
    max_clamp = 0.0;
    for (Eigen::Index i = 0; i < var.size(); ++i) {
        double clamp = 0.0;
        if (var(i) < 0.0) {
            clamp = -var(i);
            var(i) = 0.0;
        } else if (var(i) > prior(i)) {
            clamp = var(i) - prior(i);
            var(i) = prior(i);
        }
        max_clamp = std::max(max_clamp, clamp);
        if (clamp > kClampWarningThreshold) {
            ++warnings;
        }
    }
}

// Dual form given the retained Gram block, the retained-by-grid cross block and the prior variances.
WeightedPosterior dual_fit(const Retained& r, const Eigen::MatrixXd& k_sub, const Eigen::MatrixXd& k_cross,
                           const Eigen::VectorXd& prior, double lambda, std::size_t t) {
    Eigen::MatrixXd system = r.sqrt_u.asDiagonal() * k_sub * r.sqrt_u.asDiagonal();
    system.diagonal().array() += lambda;
    const Factorization f = robust_cholesky(system, "weighted posterior");
    const auto lower = f.llt.matrixL();

    Eigen::MatrixXd a = r.sqrt_u.asDiagonal() * k_cross;
    lower.solveInPlace(a);
    Eigen::VectorXd z = r.sqrt_u.cwiseProduct(r.y);
    lower.solveInPlace(z);

    Eigen::VectorXd mean = a.transpose() * z;
    Eigen::VectorXd var = prior - a.colwise().squaredNorm().transpose();
    int warnings = 0;
    double max_clamp = 0.0;
    clamp_variance(var, prior, warnings, max_clamp);
    return WeightedPosterior(std::move(mean), std::move(var), t, r.arms.size(), warnings, max_clamp);
}

WeightedPosterior prior_posterior(const Eigen::VectorXd& prior, std::size_t t) {
    return WeightedPosterior(Eigen::VectorXd::Zero(prior.size()), prior, t, 0, 0, 0.0);
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const ArmIndex> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

void check_arms(const BanditHistory& history, std::size_t grid_size) {
    if (history.arm_count() != grid_size) {
        throw InputError("history arm count " + std::to_string(history.arm_count()) +
                         " does not match grid size " + std::to_string(grid_size));
    }
}

}  // namespace

WeightedPosterior fit_weighted_posterior(const BanditHistory& history, const WeightScheme& scheme,
                                         const GridKernel& kernel) {
    scheme.validate();
    const auto u = relative_weights(history, scheme);
    check_arms(history, kernel.size());
    const Retained r = retain(history, u, scheme.truncation_eps);
    const Eigen::VectorXd prior = kernel.gram().diagonal();
    if (r.arms.empty()) {
        return prior_posterior(prior, history.last_round());
    }
    return dual_fit(r, kernel.submatrix(r.arms), kernel.cross(r.arms), prior, scheme.lambda, history.last_round());
}

WeightedPosterior fit_weighted_posterior(const BanditHistory& history, std::span<const double> weights,
                                         double lambda, const GridKernel& kernel) {
    if (!(lambda > 0.0)) {
        throw InputError("lambda must be positive");
    }
    check_arms(history, kernel.size());
    const Retained r = retain(history, weights, 0.0);
    const Eigen::VectorXd prior = kernel.gram().diagonal();
    if (r.arms.empty()) {
        return prior_posterior(prior, history.last_round());
    }
    return dual_fit(r, kernel.submatrix(r.arms), kernel.cross(r.arms), prior, lambda, history.last_round());
}

WeightedPosterior fit_qff_posterior(const BanditHistory& history, const WeightScheme& scheme,
                                    const Eigen::MatrixXd& features, QffForm form) {
    scheme.validate();
    check_arms(history, static_cast<std::size_t>(features.rows()));
    const auto u = relative_weights(history, scheme);
    const Retained r = retain(history, u, scheme.truncation_eps);
    const Eigen::VectorXd prior = features.rowwise().squaredNorm();
    if (r.arms.empty()) {
        return prior_posterior(prior, history.last_round());
    }
    const Eigen::MatrixXd phi = select_rows(features, r.arms);
    const auto dim = features.cols();
    if (form == QffForm::Automatic) {
        form = dim < static_cast<Eigen::Index>(r.arms.size()) ? QffForm::Primal : QffForm::Dual;
    }
    if (form == QffForm::Dual) {
        return dual_fit(r, phi * phi.transpose(), phi * features.transpose(), prior, scheme.lambda,
                        history.last_round());
    }

    // Primal: V = Phi^T U Phi + lambda I, mean = phi(x)^T V^{-1} Phi^T U y, var = lambda ||phi(x)||^2_{V^{-1}}.
    const Eigen::VectorXd uu = r.sqrt_u.array().square();
    Eigen::MatrixXd v = phi.transpose() * uu.asDiagonal() * phi;
    v.diagonal().array() += scheme.lambda;
    const Factorization f = robust_cholesky(v, "QFF primal posterior");
    const Eigen::VectorXd theta = f.llt.solve(phi.transpose() * uu.cwiseProduct(r.y));
    Eigen::VectorXd mean = features * theta;
    Eigen::MatrixXd a = features.transpose();
    f.llt.matrixL().solveInPlace(a);
    Eigen::VectorXd var = scheme.lambda * a.colwise().squaredNorm().transpose();
    int warnings = 0;
    double max_clamp = 0.0;
    clamp_variance(var, prior, warnings, max_clamp);
    return WeightedPosterior(std::move(mean), std::move(var), history.last_round(), r.arms.size(), warnings,
                             max_clamp);
}

bool posterior_scale_invariance_check(const BanditHistory& history, const WeightScheme& scheme,
                                      const GridKernel& kernel, double c) {
    scheme.validate();
    if (!(c >= 1e-3 && c <= 1e3)) {
        throw InputError("scale factor c must lie in [1e-3, 1e3]");
    }
    if (history.last_round() > 50) {
        throw InputError("nominal weights are only evaluated for histories of at most 50 rounds");
    }
    const WeightedPosterior normalized = fit_weighted_posterior(history, scheme, kernel);
    const std::size_t t = history.last_round();
    const Eigen::VectorXd prior = kernel.gram().diagonal();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(prior.size());
    Eigen::VectorXd var = prior;
    if (!history.empty()) {
        const auto arms = history.arms();
        const auto n = static_cast<Eigen::Index>(arms.size());
        Eigen::VectorXd sqrt_w(n);
        Eigen::VectorXd y(n);
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto& obs = history[static_cast<std::size_t>(s)];
            sqrt_w(s) = std::sqrt(c * std::pow(scheme.eta, -static_cast<double>(obs.round)));
            y(s) = obs.y;
        }
        const double lambda_t = scheme.lambda * c * std::pow(scheme.eta, -static_cast<double>(t));
        Eigen::MatrixXd system = sqrt_w.asDiagonal() * kernel.submatrix(arms) * sqrt_w.asDiagonal();
        system.diagonal().array() += lambda_t;
        const Eigen::MatrixXd k_tilde = sqrt_w.asDiagonal() * kernel.cross(arms);
        const Factorization f = robust_cholesky(system, "nominal-weight posterior");
        const Eigen::MatrixXd solved = f.llt.solve(k_tilde);
        mean = solved.transpose() * sqrt_w.cwiseProduct(y);
        var = prior - k_tilde.cwiseProduct(solved).colwise().sum().transpose();
        var = var.cwiseMax(0.0).cwiseMin(prior);
    }
    constexpr double tol = 1e-8;
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        const auto a = static_cast<ArmIndex>(i);
        if (std::abs(mean(i) - normalized.mean(a)) > tol * std::max(1.0, std::abs(mean(i))) ||
            std::abs(var(i) - normalized.variance(a)) > tol * std::max(1.0, std::abs(var(i)))) {
            return false;
        }
    }
    return true;
}

}  // namespace wgpucb
