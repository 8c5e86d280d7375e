#pragma once

#include "wgpucb/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wgpucb {

/// f(x) = sum_i alpha_i k(x, center_i) on a grid.
struct RkhsFunction {
    Eigen::VectorXd alphas;
    std::vector<ArmIndex> centers;
    double rkhs_norm = 0.0;

    /// Dense coefficient vector over the grid (alphas scattered onto their centers).
    Eigen::VectorXd coefficients(std::size_t grid_size) const;
    /// Values at every grid arm.
    Eigen::VectorXd values(const GridKernel& kernel) const;
    double operator()(const GridKernel& kernel, ArmIndex x) const;
};

/// sqrt(c^T K c) for a dense grid coefficient vector.
double rkhs_norm(const GridKernel& kernel, const Eigen::VectorXd& coefficients);

/// Samples M centers without replacement and alphas uniform on [-1, 1].
RkhsFunction sample_rkhs_function(std::size_t m, const GridKernel& kernel, std::uint64_t seed);

/// Samples `count` functions that share one set of M centers.
std::vector<RkhsFunction> sample_rkhs_functions(std::size_t count, std::size_t m, const GridKernel& kernel,
                                                std::uint64_t seed);

/// f_t = phases[k] where k counts the breakpoints <= t.
struct AbruptSchedule {
    std::vector<std::size_t> breakpoints;
    std::vector<RkhsFunction> phases;
};

/// Piecewise-linear path through three anchors: a -> b over t <= T/2, b -> c afterwards.
struct SlowSchedule {
    std::vector<RkhsFunction> anchors;
};

/// Tabulated rewards, row t-1 holds f_t over the arms.
struct TableSchedule {
    Eigen::MatrixXd rewards;
};

struct ChangeSchedule {
    std::variant<AbruptSchedule, SlowSchedule, TableSchedule> kind;
    std::size_t horizon = 0;

    void validate(std::size_t grid_size) const;
    /// Grid coefficients of f_t (Abrupt and Slow only).
    Eigen::VectorXd coefficients_at(std::size_t t, std::size_t grid_size) const;
};

/// f_t(x). Throws InputError for t outside [1, T].
double reward_at(const ChangeSchedule& schedule, const GridKernel& kernel, std::size_t t, ArmIndex x);

/// sum_{t=1}^{T-1} ||f_{t+1} - f_t||_H. Tabulated schedules use the finite-arm norm f^T K^{-1} f.
double realized_budget(const ChangeSchedule& schedule, const GridKernel& kernel);

/// Counter-based Gaussian noise: the draw for (t, arm) depends only on the seed, t and arm.
class NoiseModel {
public:
    NoiseModel(double r, std::uint64_t seed);
    double draw(std::size_t t, ArmIndex arm) const;
    double r() const noexcept { return r_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    double r_;
    std::uint64_t seed_;
};

struct BudgetLedger {
    double declared = 0.0;
    double realized = 0.0;
};

/// Immutable non-stationary environment: kernel, schedule, tabulated rewards and budget.
class Environment {
public:
    Environment(std::string name, std::shared_ptr<const GridKernel> kernel, ChangeSchedule schedule,
                std::optional<double> declared_budget = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    const GridKernel& kernel() const noexcept { return *kernel_; }
    std::shared_ptr<const GridKernel> kernel_ptr() const noexcept { return kernel_; }
    const ChangeSchedule& schedule() const noexcept { return schedule_; }
    std::size_t horizon() const noexcept { return schedule_.horizon; }
    std::size_t arm_count() const noexcept { return kernel_->size(); }
    const BudgetLedger& budget() const noexcept { return budget_; }
    /// Largest RKHS norm of any f_t (the B the confidence width needs).
    double max_rkhs_norm() const noexcept { return max_norm_; }

    double reward(std::size_t t, ArmIndex x) const;
    /// Row t-1 is f_t on the grid.
    const Eigen::MatrixXd& rewards() const noexcept { return rewards_; }
    /// Lowest-index grid argmax of f_t.
    ArmIndex best_arm(std::size_t t) const;
    double best_value(std::size_t t) const;

private:
    std::string name_;
    std::shared_ptr<const GridKernel> kernel_;
    ChangeSchedule schedule_;
    Eigen::MatrixXd rewards_;
    std::vector<ArmIndex> best_;
    BudgetLedger budget_;
    double max_norm_ = 0.0;
};

/// Episode-scoped reward channel: y_t = f_t(x_t) + noise(t, x_t), one observation per round.
class Observer {
public:
    Observer(const Environment& env, NoiseModel noise) : env_(&env), noise_(noise) {}
    double observe(std::size_t t, ArmIndex arm);

private:
    const Environment* env_;
    NoiseModel noise_;
    std::size_t last_round_ = 0;
};

/// Scales every change so the realized budget does not exceed `declared`.
/// Phases (or anchors) keep the first function fixed.
ChangeSchedule cap_budget(ChangeSchedule schedule, const GridKernel& kernel, double declared);

Environment make_abrupt_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon,
                                    std::vector<std::size_t> breakpoints, std::size_t m, std::uint64_t seed,
                                    std::optional<double> declared_budget = std::nullopt);

Environment make_slow_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon, std::size_t m,
                                  std::uint64_t seed, std::optional<double> declared_budget = std::nullopt);

Environment make_stationary_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon,
                                        std::size_t m, std::uint64_t seed);

/// Days x stocks closing prices with their identifiers.
struct PriceMatrix {
    std::vector<std::string> identifiers;
    Eigen::MatrixXd prices;
};

/// Comma-separated file: header row of identifiers, one row of decimals per day.
PriceMatrix read_price_matrix(const std::filesystem::path& path);
void write_price_matrix(const PriceMatrix& matrix, const std::filesystem::path& path);

/// Geometric random walk prices, for tests and demos when no data file is at hand.
PriceMatrix synthesize_price_matrix(std::size_t stocks, std::size_t days, std::uint64_t seed);

/// Arms are stocks, f_t is the min-max normalized closing price of day t and the
/// kernel is the mean-centered full-history covariance scaled to unit max diagonal.
Environment make_price_environment(const PriceMatrix& matrix);

Environment load_price_environment(const std::filesystem::path& path);

}  // namespace wgpucb
