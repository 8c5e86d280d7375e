#pragma once

#include "wgpucb/kernels.hpp"
#include "wgpucb/qff.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace wgpucb {

/// Exponentially increasing weights w_s = eta^{-s} with regularizer lambda_t = lambda * w_t.
///
/// Only the relative weights w_s / w_t = eta^{t-s} are ever materialized; rounds
/// whose relative weight drops below `truncation_eps` are left out of the fit.
struct WeightScheme {
    double eta = 1.0;
    double lambda = 1.0;
    double truncation_eps = 1e-8;

    void validate() const;
    /// eta^{t-s}.
    double relative_weight(std::size_t t, std::size_t s) const;
    /// Longest history the truncation can retain, ceil(ln(1/eps) / ln(1/eta)); 0 means unbounded.
    std::size_t effective_horizon() const;
};

struct Observation {
    ArmIndex arm = 0;
    double y = 0.0;
    std::size_t round = 0;
};

/// Ordered (arm, reward, round) triples over a grid of `arm_count` arms.
class BanditHistory {
public:
    explicit BanditHistory(std::size_t arm_count) : arm_count_(arm_count) {}

    /// Appends at round last_round() + 1.
    void append(ArmIndex arm, double y);
    /// Appends at an explicit round; rounds must strictly increase.
    void append(ArmIndex arm, double y, std::size_t round);

    std::size_t size() const noexcept { return rounds_.size(); }
    bool empty() const noexcept { return rounds_.empty(); }
    std::size_t arm_count() const noexcept { return arm_count_; }
    /// Round counter of the newest observation, 0 when empty.
    std::size_t last_round() const noexcept { return rounds_.empty() ? 0 : rounds_.back().round; }
    const std::vector<Observation>& rounds() const noexcept { return rounds_; }
    const Observation& operator[](std::size_t i) const { return rounds_[i]; }

    /// Observations with round in [first, last].
    BanditHistory window(std::size_t first, std::size_t last) const;

    std::vector<ArmIndex> arms() const;

private:
    std::size_t arm_count_;
    std::vector<Observation> rounds_;
};

/// Posterior mean and variance over every grid arm.
class WeightedPosterior {
public:
    WeightedPosterior(Eigen::VectorXd mean, Eigen::VectorXd variance, std::size_t t, std::size_t retained,
                      int clamp_warnings, double max_clamp)
        : mean_(std::move(mean)), variance_(std::move(variance)), t_(t), retained_(retained),
          clamp_warnings_(clamp_warnings), max_clamp_(max_clamp) {}

    double mean(ArmIndex x) const { return mean_(static_cast<Eigen::Index>(x)); }
    double variance(ArmIndex x) const { return variance_(static_cast<Eigen::Index>(x)); }
    double stddev(ArmIndex x) const { return std::sqrt(variance(x)); }
    const Eigen::VectorXd& means() const noexcept { return mean_; }
    const Eigen::VectorXd& variances() const noexcept { return variance_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(mean_.size()); }

    /// Round index of the newest observation used.
    std::size_t t() const noexcept { return t_; }
    /// Number of observations that survived truncation.
    std::size_t retained() const noexcept { return retained_; }
    /// Grid points whose variance needed a clamp larger than 1e-6.
    int clamp_warnings() const noexcept { return clamp_warnings_; }
    double max_clamp() const noexcept { return max_clamp_; }

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd variance_;
    std::size_t t_;
    std::size_t retained_;
    int clamp_warnings_;
    double max_clamp_;
};

/// Clamp magnitude above which a variance clamp counts as a warning.
inline constexpr double kClampWarningThreshold = 1e-6;

/// Relative weights eta^{t-s} for every observation, t = history.last_round().
std::vector<double> relative_weights(const BanditHistory& history, const WeightScheme& scheme);

/// Weighted GP posterior in normalized form:
///   mean(x) = kbar(x)^T (Kbar + lambda I)^{-1} ybar,
///   var(x)  = k(x,x) - kbar(x)^T (Kbar + lambda I)^{-1} kbar(x),
/// with Kbar_ij = sqrt(u_i u_j) k(x_i, x_j), kbar(x)_s = sqrt(u_s) k(x_s, x),
/// ybar_s = sqrt(u_s) y_s and u_s = eta^{t-s}.
WeightedPosterior fit_weighted_posterior(const BanditHistory& history, const WeightScheme& scheme,
                                         const GridKernel& kernel);

/// Same with arbitrary relative weights in (0, 1] (one per observation) and no truncation.
WeightedPosterior fit_weighted_posterior(const BanditHistory& history, std::span<const double> weights,
                                         double lambda, const GridKernel& kernel);

enum class QffForm {
    /// Primal when 2m is smaller than the retained history, dual otherwise.
    Automatic,
    /// 2m x 2m Gram form Phi^T U Phi + lambda I.
    Primal,
    /// t x t kernel form.
    Dual,
};

/// Posterior under the QFF kernel phi(x)^T phi(x'); the prior variance is ||phi(x)||^2.
/// `features` is the grid feature matrix from QffMap::feature_matrix.
WeightedPosterior fit_qff_posterior(const BanditHistory& history, const WeightScheme& scheme,
                                    const Eigen::MatrixXd& features, QffForm form = QffForm::Automatic);

/// Recomputes the posterior with nominal weights c * eta^{-s} and lambda_t = lambda * c * eta^{-t}
/// and compares it with the normalized fit at every grid point (tolerance 1e-8).
/// Requires c in [1e-3, 1e3] and at most 50 rounds.
bool posterior_scale_invariance_check(const BanditHistory& history, const WeightScheme& scheme,
                                      const GridKernel& kernel, double c);

}  // namespace wgpucb
