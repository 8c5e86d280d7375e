#pragma once

#include "wgpucb/kernels.hpp"
#include "wgpucb/wgp.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace wgpucb {

enum class EigendecayKind { Polynomial, Exponential };

/// Mercer eigendecay constants of a kernel together with a projection dimension N.
///
/// Polynomial:  c_m <= c_p * m^{-beta_p}.
/// Exponential: c_m <= c_e1 * exp(-c_e2 * m^{beta_e}); only beta_e = 1 has a closed form.
struct EigendecayParams {
    EigendecayKind kind = EigendecayKind::Exponential;
    double c_p = 1.0;
    double beta_p = 2.0;
    double c_e1 = 1.0;
    double c_e2 = 1.0;
    double beta_e = 1.0;
    /// Sup bound on the eigenfeatures.
    double psi = 1.0;
    std::size_t n = 1;
    /// Tail mass sum_{m>N} c_m psi^2.
    double delta_n = 0.0;

    /// Constants validated for the squared-exponential kernel with l = 0.2 on
    /// the 100-point unit grid: c_e1 = 1.2, c_e2 = 0.5, psi = 1.
    static EigendecayParams squared_exponential_default();

    /// Tail-mass upper bound implied by the decay law at projection dimension n.
    double tail_bound(std::size_t n) const;
    /// Copy with projection dimension n and delta_n = tail_bound(n).
    EigendecayParams at_dimension(std::size_t n) const;
    void validate() const;
};

/// Single-weighted bounds use 1 - eta, double-weighted ones 1 - eta^2.
enum class WeightOrder { Single, Double };

/// 1/2 log det(I + alpha_t^{-1} Kbar_t) with Kbar = W^2 K W^2 and alpha_t = lambda w_t^2,
/// evaluated as 1/2 log det(I + lambda^{-1} D K D), D = diag(eta^{t-s}). `points` holds
/// the arms of rounds 1..t in order. Rounds with eta^{t-s} below the scheme's
/// truncation threshold are dropped.
double empirical_double_weighted_mig(const GridKernel& kernel, std::span<const ArmIndex> points,
                                     const WeightScheme& scheme);

/// Same on an explicit history (round counters drive the weights).
double empirical_double_weighted_mig(const GridKernel& kernel, const BanditHistory& history,
                                     const WeightScheme& scheme);

/// Unweighted 1/2 log det(I + lambda^{-1} K_A).
double empirical_mig(const GridKernel& kernel, std::span<const ArmIndex> points, double lambda);

/// 1/2 log det(I + lambda_t^{-1} Phi Phi^T) with single weights eta^{t-s}, computed in the
/// t x t form (Dual) or the 2m x 2m form (Primal); Automatic picks the smaller.
double empirical_qff_mig(const Eigen::MatrixXd& features, std::span<const ArmIndex> points,
                         const WeightScheme& scheme, QffForm form = QffForm::Automatic);

/// (N/2) log(1 + kdot T / (lambda N)) + T delta_N / (2 lambda).
double mig_universal_bound(std::size_t n, std::size_t horizon, double kdot, double lambda, double delta_n);

/// (N/2) log(1 + kdot / (lambda N (1 - eta^p))) + delta_N / (2 lambda (1 - eta^p)), p = 2 for Double.
double mig_weight_bound(std::size_t n, double eta, double kdot, double lambda, double delta_n,
                        WeightOrder order = WeightOrder::Double);

/// Closed-form eigendecay bound for polynomial or exponential (beta_e = 1) decay.
double mig_eigendecay_bound(const EigendecayParams& params, double eta, double kdot, double lambda,
                            WeightOrder order = WeightOrder::Double);

/// min over N in [1, max_n] of the universal bound with delta_N from the decay law.
double best_universal_bound(const EigendecayParams& params, std::size_t horizon, double kdot, double lambda,
                            std::size_t max_n = 200);

/// min over N in [1, max_n] of the weight bound with delta_N from the decay law.
double best_weight_bound(const EigendecayParams& params, double eta, double kdot, double lambda,
                         WeightOrder order = WeightOrder::Double, std::size_t max_n = 200);

}  // namespace wgpucb
