#pragma once

#include "wgpucb/kernels.hpp"
#include "wgpucb/mig.hpp"
#include "wgpucb/wgp.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace wgpucb {

/// Confidence-width inputs: RKHS norm bound B, sub-Gaussian scale R, regularizer, failure probability.
struct GPParams {
    double b = 1.0;
    double r = 0.1;
    double lambda = 1.0;
    double delta = 0.1;

    void validate() const;
};

enum class BetaMode { EmpiricalMig, AnalyticBound, Fixed };

struct BetaRule {
    BetaMode mode = BetaMode::EmpiricalMig;
    /// Used as beta itself when mode == Fixed.
    double fixed_value = 1.0;
    /// Decay law for AnalyticBound.
    EigendecayParams decay = EigendecayParams::squared_exponential_default();
};

/// Weighted GP-UCB with discount eta.
struct WgpUcb {
    double eta = 0.9;
};
/// Unweighted GP-UCB.
struct IgpUcb {};
/// Drops all data at rounds t = 1 (mod period).
struct Restart {
    std::size_t period = 1;
};
/// Fits on the most recent `window` observations only.
struct SlidingWindow {
    std::size_t window = 1;
};

using PolicyKind = std::variant<WgpUcb, IgpUcb, Restart, SlidingWindow>;

struct PolicyConfig {
    std::string name;
    PolicyKind kind = WgpUcb{};
    GPParams gp;
    BetaRule beta;
    double truncation_eps = 1e-8;

    void validate() const;
    /// Discount used for the posterior: eta for WgpUcb, 1 otherwise.
    double eta() const;
};

/// B + (R / sqrt(lambda)) sqrt(2 log(1/delta) + 2 gamma_bar).
double beta_t(const GPParams& gp, double gamma_bar);

/// argmax of mean + beta * sigma over the grid, lowest index on ties.
ArmIndex select_action(const WeightedPosterior& posterior, double beta);
ArmIndex select_action(std::span<const double> mean, std::span<const double> sigma, double beta);

struct Decision {
    ArmIndex arm = 0;
    double beta = 0.0;
    double gamma_bar = 0.0;
    /// Posterior mean and standard deviation at the chosen arm (fit on rounds before this one).
    double mean = 0.0;
    double sigma = 0.0;
    int clamp_warnings = 0;
};

/// Sequential UCB policy state for one episode.
///
/// Round t must be requested after round t-1, and the reward of round t-1 has
/// to accompany the request for round t.
class Policy {
public:
    Policy(PolicyConfig config, std::shared_ptr<const GridKernel> kernel);

    Decision step(std::optional<double> feedback, std::size_t round);
    /// Records the reward of the last decision without choosing a new action.
    void finish(double feedback);

    /// Observations behind the posterior used to choose round t + 1.
    BanditHistory retained_history(std::size_t t) const;
    /// Posterior after round t.
    WeightedPosterior posterior(std::size_t t) const;
    WeightScheme scheme() const;

    const PolicyConfig& config() const noexcept { return config_; }
    const BanditHistory& history() const noexcept { return history_; }

private:
    double gamma_bar(const BanditHistory& retained) const;

    PolicyConfig config_;
    std::shared_ptr<const GridKernel> kernel_;
    BanditHistory history_;
    std::size_t next_round_ = 1;
    std::optional<ArmIndex> pending_arm_;
};

/// Parameters chosen from the horizon and the combined information gain.
struct TuningOutput {
    double eta = 0.0;
    std::size_t c = 1;
    int mbar = 2;
};

inline constexpr double kTunedEtaMin = 0.5;
inline constexpr double kTunedEtaMax = 1.0 - 1e-4;
inline constexpr int kTunedMbarMin = 2;
inline constexpr int kTunedMbarMax = 12;

/// eta = 1 - gamma^{-1/4} B_T^{1/2} T^{-1/2} (B_T known) or 1 - gamma^{-1/4} T^{-1/2},
/// c = ceil(log T / (1 - eta)), mbar = ceil(log_{4/e}(T^3 gamma^{3/2})); eta and mbar are clamped.
TuningOutput tune_parameters(std::size_t horizon, double gamma_dot, std::optional<double> budget);

/// Order-wise restart period ceil((T / B_T)^{2/3}), clamped to [1, T]. Also the default window.
std::size_t order_wise_period(std::size_t horizon, double budget);

}  // namespace wgpucb
