#pragma once

#include "wgpucb/policies.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wgpucb {

enum class EnvironmentKind { Abrupt, Slow, Stationary, Stock };

struct EnvironmentConfig {
    EnvironmentKind kind = EnvironmentKind::Abrupt;
    std::size_t horizon = 500;
    std::vector<std::size_t> breakpoints{100, 200};
    std::size_t grid_size = 100;
    double lengthscale = 0.2;
    std::size_t centers = 100;
    double noise = 0.1;
    /// Declared variation budget; empty declares the realized one.
    std::optional<double> budget;
    /// Stock only. Empty selects a synthetic matrix of `stocks` x `horizon`.
    std::string price_file;
    std::size_t stocks = 29;
};

/// One policy entry; empty optionals mean "auto".
struct PolicyEntry {
    std::string name;
    std::string kind;
    std::optional<double> eta;
    std::optional<std::size_t> period;
    std::optional<std::size_t> window;
};

enum class TuningMode { Automatic, Manual };

struct ExperimentConfig {
    std::string name = "abrupt";
    std::uint64_t seed = 1;
    std::size_t replicates = 20;
    std::filesystem::path output_dir = "results/abrupt";
    std::size_t threads = 0;

    EnvironmentConfig environment;

    std::optional<double> b;
    std::optional<double> r;
    double lambda = 0.01;
    double delta = 0.1;
    BetaMode beta_mode = BetaMode::EmpiricalMig;
    double beta_value = 1.0;
    double truncation_eps = 1e-8;

    TuningMode tuning = TuningMode::Automatic;
    bool budget_known = true;
    std::optional<double> gamma_dot;

    std::vector<PolicyEntry> policies;

    void validate() const;
};

/// Default configuration text (the abrupt experiment with all four policies).
std::string default_config_text();

ExperimentConfig parse_config_string(const std::string& text);
/// Throws InputError naming the path when it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace wgpucb
