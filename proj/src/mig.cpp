#include "wgpucb/mig.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace wgpucb {

EigendecayParams EigendecayParams::squared_exponential_default() {
    EigendecayParams p;
    p.kind = EigendecayKind::Exponential;
    p.c_e1 = 1.2;
    p.c_e2 = 0.5;
    p.beta_e = 1.0;
    p.psi = 1.0;
    return p.at_dimension(1);
}

double EigendecayParams::tail_bound(std::size_t dim) const {
    const double psi2 = psi * psi;
    const double nn = static_cast<double>(dim);
    switch (kind) {
    case EigendecayKind::Polynomial:
        return c_p * std::pow(nn, 1.0 - beta_p) * psi2 / (beta_p - 1.0);
    case EigendecayKind::Exponential:
        return c_e1 * psi2 / c_e2 * std::exp(-c_e2 * nn);
    }
    return 0.0;
}

EigendecayParams EigendecayParams::at_dimension(std::size_t dim) const {
    EigendecayParams p = *this;
    p.n = dim;
    p.delta_n = tail_bound(dim);
    return p;
}

void EigendecayParams::validate() const {
    if (!(psi > 0.0) || n == 0 || delta_n < 0.0) {
        throw InputError("eigendecay parameters need psi > 0, N >= 1 and delta_N >= 0");
    }
    if (kind == EigendecayKind::Polynomial) {
        if (!(c_p > 0.0) || !(beta_p > 1.0)) {
            throw InputError("polynomial eigendecay needs C_p > 0 and beta_p > 1");
        }
    } else if (!(c_e1 > 0.0) || !(c_e2 > 0.0)) {
        throw InputError("exponential eigendecay needs C_e1 > 0 and C_e2 > 0");
    }
}

namespace {

void require_eta_open(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw InputError("weight-dependent bounds need eta in (0, 1), got " + std::to_string(eta) +
                         "; use the universal bound for eta = 1");
    }
}

double one_minus_eta(double eta, WeightOrder order) {
    return order == WeightOrder::Double ? 1.0 - eta * eta : 1.0 - eta;
}

}  // namespace

double empirical_double_weighted_mig(const GridKernel& kernel, std::span<const ArmIndex> points,
                                     const WeightScheme& scheme) {
    BanditHistory history(kernel.size());
    for (const ArmIndex a : points) {
        history.append(a, 0.0);
    }
    return empirical_double_weighted_mig(kernel, history, scheme);
}

double empirical_double_weighted_mig(const GridKernel& kernel, const BanditHistory& history,
                                     const WeightScheme& scheme) {
    scheme.validate();
    const auto u = relative_weights(history, scheme);
    std::vector<ArmIndex> arms;
    std::vector<double> d;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (u[i] >= scheme.truncation_eps) {
            arms.push_back(history[i].arm);
            d.push_back(u[i]);
        }
    }
    if (arms.empty()) {
        return 0.0;
    }
    const Eigen::Map<const Eigen::VectorXd> dv(d.data(), static_cast<Eigen::Index>(d.size()));
    const Eigen::MatrixXd m = dv.asDiagonal() * kernel.submatrix(arms) * dv.asDiagonal() / scheme.lambda;
    return std::max(0.0, 0.5 * log_det_identity_plus(m, "double-weighted information gain"));
}

double empirical_mig(const GridKernel& kernel, std::span<const ArmIndex> points, double lambda) {
    if (!(lambda > 0.0)) {
        throw InputError("lambda must be positive");
    }
    if (points.empty()) {
        return 0.0;
    }
    return std::max(0.0, 0.5 * log_det_identity_plus(kernel.submatrix(points) / lambda, "information gain"));
}

double empirical_qff_mig(const Eigen::MatrixXd& features, std::span<const ArmIndex> points,
                         const WeightScheme& scheme, QffForm form) {
    scheme.validate();
    if (points.empty()) {
        return 0.0;
    }
    const std::size_t t = points.size();
    std::vector<ArmIndex> arms;
    std::vector<double> su;
    for (std::size_t s = 1; s <= t; ++s) {
        const double u = scheme.relative_weight(t, s);
        if (u >= scheme.truncation_eps) {
            const ArmIndex a = points[s - 1];
            if (a >= static_cast<std::size_t>(features.rows())) {
                throw InputError("arm index outside the feature matrix");
            }
            arms.push_back(a);
            su.push_back(std::sqrt(u));
        }
    }
    const auto r = static_cast<Eigen::Index>(arms.size());
    Eigen::MatrixXd phi(r, features.cols());
    for (Eigen::Index i = 0; i < r; ++i) {
        phi.row(i) = su[static_cast<std::size_t>(i)] * features.row(static_cast<Eigen::Index>(arms[i]));
    }
    if (form == QffForm::Automatic) {
        form = features.cols() < r ? QffForm::Primal : QffForm::Dual;
    }
    const double logdet =
        form == QffForm::Dual
            ? log_det_identity_plus(phi * phi.transpose() / scheme.lambda, "QFF information gain (dual)")
            : log_det_identity_plus(phi.transpose() * phi / scheme.lambda, "QFF information gain (primal)");
    return std::max(0.0, 0.5 * logdet);
}

double mig_universal_bound(std::size_t n, std::size_t horizon, double kdot, double lambda, double delta_n) {
    if (n == 0 || !(kdot > 0.0) || !(lambda > 0.0) || delta_n < 0.0) {
        throw InputError("universal bound needs N >= 1, kdot > 0, lambda > 0, delta_N >= 0");
    }
    if (horizon == 0) {
        return 0.0;
    }
    const double nn = static_cast<double>(n);
    const double tt = static_cast<double>(horizon);
    return 0.5 * nn * std::log1p(kdot * tt / (lambda * nn)) + tt * delta_n / (2.0 * lambda);
}

double mig_weight_bound(std::size_t n, double eta, double kdot, double lambda, double delta_n, WeightOrder order) {
    require_eta_open(eta);
    if (n == 0 || !(kdot > 0.0) || !(lambda > 0.0) || delta_n < 0.0) {
        throw InputError("weight bound needs N >= 1, kdot > 0, lambda > 0, delta_N >= 0");
    }
    const double gap = one_minus_eta(eta, order);
    const double nn = static_cast<double>(n);
    return 0.5 * nn * std::log1p(kdot / (lambda * nn * gap)) + delta_n / (2.0 * lambda * gap);
}

double mig_eigendecay_bound(const EigendecayParams& params, double eta, double kdot, double lambda,
                            WeightOrder order) {
    require_eta_open(eta);
    params.validate();
    if (!(kdot > 0.0) || !(lambda > 0.0)) {
        throw InputError("eigendecay bound needs kdot > 0 and lambda > 0");
    }
    const double gap = one_minus_eta(eta, order);
    const double log_term = std::log1p(kdot / (lambda * gap));
    const double psi2 = params.psi * params.psi;
    if (params.kind == EigendecayKind::Polynomial) {
        const double lead = std::pow(params.c_p * psi2 / (lambda * gap), 1.0 / params.beta_p) *
                            std::pow(log_term, -1.0 / params.beta_p);
        return (lead + 1.0) * log_term;
    }
    if (params.beta_e != 1.0) {
        throw InputError("exponential eigendecay bound is only available for beta_e = 1");
    }
    const double c_beta = std::log(params.c_e1 * psi2 / (lambda * params.c_e2));
    return ((std::log(1.0 / gap) + c_beta) / params.c_e2 + 1.0) * log_term;
}

double best_universal_bound(const EigendecayParams& params, std::size_t horizon, double kdot, double lambda,
                            std::size_t max_n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= max_n; ++n) {
        best = std::min(best, mig_universal_bound(n, horizon, kdot, lambda, params.tail_bound(n)));
    }
    return best;
}

double best_weight_bound(const EigendecayParams& params, double eta, double kdot, double lambda, WeightOrder order,
                         std::size_t max_n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= max_n; ++n) {
        best = std::min(best, mig_weight_bound(n, eta, kdot, lambda, params.tail_bound(n), order));
    }
    return best;
}

}  // namespace wgpucb
