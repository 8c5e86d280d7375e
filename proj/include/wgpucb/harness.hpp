#pragma once

#include "wgpucb/config.hpp"
#include "wgpucb/envs.hpp"
#include "wgpucb/policies.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wgpucb {

struct EpisodeRow {
    std::uint64_t seed = 0;
    std::size_t t = 0;
    ArmIndex arm = 0;
    /// Observed (noisy) reward.
    double reward = 0.0;
    double instant_regret = 0.0;
    double cum_regret = 0.0;
    double beta = 0.0;
    double sigma = 0.0;
    /// Posterior mean at the chosen arm; kept in memory, not written to the tables.
    double mean = 0.0;
    int clamps = 0;
};

struct EpisodeRecord {
    std::uint64_t seed = 0;
    std::string policy;
    std::vector<EpisodeRow> rows;

    double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

/// Runs T rounds of one policy. Numerical failures are rethrown with the round attached.
EpisodeRecord run_episode(const Environment& env, const PolicyConfig& policy, const NoiseModel& noise);

/// Plays the exact argmax of f_t every round.
EpisodeRecord run_oracle_episode(const Environment& env, const NoiseModel& noise);

/// Everything derived for one replicate before any policy runs.
struct ReplicateSetup {
    std::uint64_t seed = 0;
    std::shared_ptr<const Environment> env;
    NoiseModel noise{0.0, 0};
    double b = 0.0;
    double r = 0.0;
    double budget = 0.0;
    double gamma_dot = 0.0;
    std::vector<PolicyConfig> policies;
};

ReplicateSetup prepare_replicate(const ExperimentConfig& config, std::size_t replicate);

struct AggregateRow {
    std::size_t t = 0;
    std::string policy;
    double mean = 0.0;
    double std_error = 0.0;
};

struct ExperimentResult {
    std::vector<std::string> policies;
    /// records[p][r] for policy p and replicate r.
    std::vector<std::vector<EpisodeRecord>> records;
    std::vector<AggregateRow> aggregate;
    std::vector<ReplicateSetup> setups;
};

/// Runs every policy on every replicate without touching the file system.
ExperimentResult simulate_experiment(const ExperimentConfig& config);

/// Mean and sample standard error (std / sqrt(n), 0 for n = 1) of cumulative regret per (policy, t).
std::vector<AggregateRow> aggregate_records(const std::vector<std::string>& policies,
                                            const std::vector<std::vector<EpisodeRecord>>& records);

inline constexpr const char* kEpisodeHeader = "seed,policy,t,arm,reward,instant_regret,cum_regret,beta,sigma,clamps";
inline constexpr const char* kAggregateHeader = "t,policy,mean_cum_regret,std_error";

/// Policy name turned into a file stem.
std::string sanitize_file_stem(const std::string& name);

/// Creates the directory and probes that a file can be written there. Throws IoError.
void ensure_writable_directory(const std::filesystem::path& dir);

void write_episode_table(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path);
void write_aggregate_table(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);

/// Validates the output directory, simulates and writes <policy>.csv, aggregate.csv and metadata.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Printed with 9 significant digits.
std::string format_real(double v);

}  // namespace wgpucb
