#include "wgpucb/policies.hpp"

#include "wgpucb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wgpucb {

void GPParams::validate() const {
    if (!(b >= 0.0) || !(r >= 0.0) || !(lambda > 0.0) || !(delta > 0.0 && delta < 1.0)) {
        throw InputError("GP parameters need B >= 0, R >= 0, lambda > 0 and delta in (0, 1)");
    }
}

void PolicyConfig::validate() const {
    gp.validate();
    if (!(truncation_eps >= 0.0 && truncation_eps < 1.0)) {
        throw InputError("truncation_eps must lie in [0, 1)");
    }
    std::visit(
        [](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, WgpUcb>) {
                if (!(k.eta > 0.0 && k.eta <= 1.0)) {
                    throw InputError("WGP-UCB eta must lie in (0, 1]");
                }
            } else if constexpr (std::is_same_v<K, Restart>) {
                if (k.period < 1) {
                    throw InputError("restart period must be at least 1");
                }
            } else if constexpr (std::is_same_v<K, SlidingWindow>) {
                if (k.window < 1) {
                    throw InputError("sliding window must be at least 1");
                }
            }
        },
        kind);
    if (beta.mode == BetaMode::Fixed && !(beta.fixed_value >= 0.0)) {
        throw InputError("fixed beta must be nonnegative");
    }
}

double PolicyConfig::eta() const {
    if (const auto* w = std::get_if<WgpUcb>(&kind)) {
        return w->eta;
    }
    return 1.0;
}

double beta_t(const GPParams& gp, double gamma_bar) {
    gp.validate();
    if (!(gamma_bar >= 0.0)) {
        throw InputError("information gain must be nonnegative");
    }
    return gp.b + gp.r / std::sqrt(gp.lambda) * std::sqrt(2.0 * std::log(1.0 / gp.delta) + 2.0 * gamma_bar);
}

ArmIndex select_action(std::span<const double> mean, std::span<const double> sigma, double beta) {
    if (mean.empty()) {
        throw InputError("select_action: empty domain");
    }
    if (mean.size() != sigma.size()) {
        throw InputError("select_action: mean and sigma sizes differ");
    }
    ArmIndex best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double ucb = mean[i] + beta * sigma[i];
        if (ucb > best_value) {
            best_value = ucb;
            best = i;
        }
    }
    return best;
}

ArmIndex select_action(const WeightedPosterior& posterior, double beta) {
    const Eigen::VectorXd sigma = posterior.variances().cwiseSqrt();
    return select_action(std::span<const double>(posterior.means().data(), posterior.size()),
                         std::span<const double>(sigma.data(), posterior.size()), beta);
}

Policy::Policy(PolicyConfig config, std::shared_ptr<const GridKernel> kernel)
    : config_(std::move(config)), kernel_(std::move(kernel)), history_(kernel_ ? kernel_->size() : 0) {
    if (!kernel_) {
        throw InputError("policy needs a kernel");
    }
    config_.validate();
}

WeightScheme Policy::scheme() const {
    return WeightScheme{config_.eta(), config_.gp.lambda, config_.truncation_eps};
}

BanditHistory Policy::retained_history(std::size_t t) const {
    return std::visit(
        [&](const auto& k) -> BanditHistory {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Restart>) {
                const std::size_t start = (t / k.period) * k.period + 1;
                return history_.window(start, t);
            } else if constexpr (std::is_same_v<K, SlidingWindow>) {
                const std::size_t start = t >= k.window ? t - k.window + 1 : 1;
                return history_.window(start, t);
            } else {
                return history_.window(1, t);
            }
        },
        config_.kind);
}

WeightedPosterior Policy::posterior(std::size_t t) const {
    return fit_weighted_posterior(retained_history(t), scheme(), *kernel_);
}

double Policy::gamma_bar(const BanditHistory& retained) const {
    const WeightScheme s = scheme();
    switch (config_.beta.mode) {
    case BetaMode::EmpiricalMig:
        return empirical_double_weighted_mig(*kernel_, retained, s);
    case BetaMode::AnalyticBound:
        if (s.eta < 1.0) {
            return mig_eigendecay_bound(config_.beta.decay, s.eta, kernel_->spec().kdot, s.lambda);
        }
        return best_universal_bound(config_.beta.decay, retained.size(), kernel_->spec().kdot, s.lambda);
    case BetaMode::Fixed:
        return 0.0;
    }
    return 0.0;
}

Decision Policy::step(std::optional<double> feedback, std::size_t round) {
    if (round != next_round_) {
        throw ProtocolError("policy expected round " + std::to_string(next_round_) + ", got " +
                            std::to_string(round));
    }
    if (pending_arm_.has_value() != feedback.has_value()) {
        throw ProtocolError(pending_arm_ ? "missing reward for round " + std::to_string(round - 1)
                                         : "reward supplied before any action was taken");
    }
    if (pending_arm_) {
        history_.append(*pending_arm_, *feedback, round - 1);
    }

    const BanditHistory retained = retained_history(round - 1);
    const WeightedPosterior post = fit_weighted_posterior(retained, scheme(), *kernel_);
    Decision d;
    if (config_.beta.mode == BetaMode::Fixed) {
        d.beta = config_.beta.fixed_value;
    } else {
        d.gamma_bar = gamma_bar(retained);
        d.beta = beta_t(config_.gp, d.gamma_bar);
    }
    d.arm = select_action(post, d.beta);
    d.mean = post.mean(d.arm);
    d.sigma = post.stddev(d.arm);
    d.clamp_warnings = post.clamp_warnings();

    pending_arm_ = d.arm;
    ++next_round_;
    return d;
}

void Policy::finish(double feedback) {
    if (!pending_arm_) {
        throw ProtocolError("no pending action to record a reward for");
    }
    history_.append(*pending_arm_, feedback, next_round_ - 1);
    pending_arm_.reset();
}

TuningOutput tune_parameters(std::size_t horizon, double gamma_dot, std::optional<double> budget) {
    if (horizon == 0 || !(gamma_dot > 0.0)) {
        throw InputError("tuning needs T >= 1 and gamma_dot > 0");
    }
    if (budget && !(*budget > 0.0)) {
        throw InputError("variation budget must be positive when given");
    }
    const double tt = static_cast<double>(horizon);
    double gap = std::pow(gamma_dot, -0.25) / std::sqrt(tt);
    if (budget) {
        gap *= std::sqrt(*budget);
    }
    TuningOutput out;
    out.eta = std::clamp(1.0 - gap, kTunedEtaMin, kTunedEtaMax);
    out.c = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(tt) / (1.0 - out.eta))));
    const double mbar = std::ceil(std::log(tt * tt * tt * std::pow(gamma_dot, 1.5)) / std::log(4.0 / std::exp(1.0)));
    out.mbar = static_cast<int>(std::clamp(mbar, static_cast<double>(kTunedMbarMin), static_cast<double>(kTunedMbarMax)));
    return out;
}

std::size_t order_wise_period(std::size_t horizon, double budget) {
    if (horizon == 0) {
        throw InputError("horizon must be positive");
    }
    if (!(budget > 0.0)) {
        return horizon;
    }
    const double h = std::ceil(std::pow(static_cast<double>(horizon) / budget, 2.0 / 3.0));
    return static_cast<std::size_t>(std::clamp(h, 1.0, static_cast<double>(horizon)));
}

}  // namespace wgpucb
