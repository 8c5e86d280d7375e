#include "wgpucb/harness.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/mig.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <thread>
#include <type_traits>
#include <variant>

namespace wgpucb {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace {

EpisodeRecord play(const Environment& env, const NoiseModel& noise, const std::string& name,
                   const std::function<Decision(std::optional<double>, std::size_t)>& decide) {
    EpisodeRecord rec;
    rec.seed = noise.seed();
    rec.policy = name;
    rec.rows.reserve(env.horizon());
    Observer observer(env, noise);
    std::optional<double> feedback;
    double cum = 0.0;
    for (std::size_t t = 1; t <= env.horizon(); ++t) {
        Decision d;
        try {
            d = decide(feedback, t);
        } catch (const NumericalError& e) {
            throw NumericalError(name + " at round " + std::to_string(t) + ": " + e.what());
        }
        const double y = observer.observe(t, d.arm);
        const double regret = std::max(0.0, env.best_value(t) - env.reward(t, d.arm));
        cum += regret;
        rec.rows.push_back({rec.seed, t, d.arm, y, regret, cum, d.beta, d.sigma, d.mean, d.clamp_warnings});
        feedback = y;
    }
    return rec;
}

}  // namespace

EpisodeRecord run_episode(const Environment& env, const PolicyConfig& policy, const NoiseModel& noise) {
    Policy p(policy, env.kernel_ptr());
    return play(env, noise, policy.name,
                [&](std::optional<double> fb, std::size_t t) { return p.step(fb, t); });
}

EpisodeRecord run_oracle_episode(const Environment& env, const NoiseModel& noise) {
    return play(env, noise, "oracle", [&](std::optional<double>, std::size_t t) {
        Decision d;
        d.arm = env.best_arm(t);
        d.mean = env.best_value(t);
        return d;
    });
}

namespace {

std::shared_ptr<const GridKernel> se_grid_kernel(const EnvironmentConfig& e) {
    return std::make_shared<const GridKernel>(DomainGrid::uniform(e.grid_size),
                                              KernelSpec::squared_exponential(e.lengthscale));
}

Environment build_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& e = cfg.environment;
    switch (e.kind) {
    case EnvironmentKind::Abrupt:
        return make_abrupt_environment(se_grid_kernel(e), e.horizon, e.breakpoints, e.centers, seed, e.budget);
    case EnvironmentKind::Slow:
        return make_slow_environment(se_grid_kernel(e), e.horizon, e.centers, seed, e.budget);
    case EnvironmentKind::Stationary:
        return make_stationary_environment(se_grid_kernel(e), e.horizon, e.centers, seed);
    case EnvironmentKind::Stock: {
        const PriceMatrix prices = e.price_file.empty() ? synthesize_price_matrix(e.stocks, e.horizon, seed)
                                                        : read_price_matrix(e.price_file);
        return make_price_environment(prices);
    }
    }
    throw ConfigError("unknown environment kind");
}

}  // namespace

ReplicateSetup prepare_replicate(const ExperimentConfig& cfg, std::size_t replicate) {
    ReplicateSetup s;
    s.seed = cfg.seed + replicate;
    s.env = std::make_shared<const Environment>(build_environment(cfg, s.seed));
    const Environment& env = *s.env;
    const std::size_t horizon = env.horizon();
    s.b = cfg.b.value_or(env.max_rkhs_norm());
    s.r = cfg.r.value_or(cfg.environment.noise);
    s.noise = NoiseModel(cfg.environment.noise, s.seed);
    s.budget = env.budget().realized;
    const double kdot = env.kernel().spec().kdot;
    s.gamma_dot = cfg.gamma_dot.value_or(
        best_universal_bound(EigendecayParams::squared_exponential_default(), horizon, kdot, cfg.lambda));

    std::optional<double> tuning_budget;
    if (cfg.budget_known && s.budget > 0.0) {
        tuning_budget = env.budget().declared;
    }
    const double tuned_eta = tune_parameters(horizon, s.gamma_dot, tuning_budget).eta;
    const std::size_t period = order_wise_period(horizon, s.budget);

    GPParams gp{s.b, s.r, cfg.lambda, cfg.delta};
    BetaRule beta;
    beta.mode = cfg.beta_mode;
    beta.fixed_value = cfg.beta_value;
    for (const auto& entry : cfg.policies) {
        PolicyConfig pc;
        pc.name = entry.name;
        pc.gp = gp;
        pc.beta = beta;
        pc.truncation_eps = cfg.truncation_eps;
        if (entry.kind == "wgp") {
            pc.kind = WgpUcb{entry.eta.value_or(tuned_eta)};
        } else if (entry.kind == "igp") {
            pc.kind = IgpUcb{};
        } else if (entry.kind == "restart") {
            pc.kind = Restart{entry.period.value_or(period)};
        } else {
            pc.kind = SlidingWindow{entry.window.value_or(period)};
        }
        pc.validate();
        s.policies.push_back(std::move(pc));
    }
    return s;
}

std::vector<AggregateRow> aggregate_records(const std::vector<std::string>& policies,
                                            const std::vector<std::vector<EpisodeRecord>>& records) {
    std::vector<AggregateRow> out;
    for (std::size_t p = 0; p < policies.size(); ++p) {
        const auto& reps = records.at(p);
        if (reps.empty()) {
            continue;
        }
        const std::size_t horizon = reps.front().rows.size();
        const double n = static_cast<double>(reps.size());
        for (std::size_t i = 0; i < horizon; ++i) {
            double sum = 0.0;
            for (const auto& r : reps) {
                sum += r.rows.at(i).cum_regret;
            }
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& r : reps) {
                const double dv = r.rows[i].cum_regret - mean;
                ss += dv * dv;
            }
            const double se = reps.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
            out.push_back({reps.front().rows[i].t, policies[p], mean, se});
        }
    }
    return out;
}

ExperimentResult simulate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    for (const auto& p : cfg.policies) {
        result.policies.push_back(p.name);
    }
    const std::size_t reps = cfg.replicates;
    result.records.assign(result.policies.size(), std::vector<EpisodeRecord>(reps));
    result.setups.resize(reps);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
            try {
                ReplicateSetup setup = prepare_replicate(cfg, r);
                for (std::size_t p = 0; p < setup.policies.size(); ++p) {
                    result.records[p][r] = run_episode(*setup.env, setup.policies[p], setup.noise);
                }
                result.setups[r] = std::move(setup);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = reps;
            }
        }
    };
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, reps);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    result.aggregate = aggregate_records(result.policies, result.records);
    return result;
}

std::string sanitize_file_stem(const std::string& name) {
    std::string out;
    for (const char c : name) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '_' || c == '.';
        out.push_back(keep ? c : '_');
    }
    if (out.empty() || out.front() == '.') {
        out.insert(out.begin(), '_');
    }
    return out;
}

void ensure_writable_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    const auto probe = dir / ".wgpucb_write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) {
            throw IoError("output directory is not writable: " + dir.string());
        }
    }
    std::filesystem::remove(probe, ec);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

}  // namespace

void write_episode_table(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path) {
    std::vector<const EpisodeRecord*> sorted;
    for (const auto& r : records) {
        sorted.push_back(&r);
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
    auto out = open_for_write(path);
    out << kEpisodeHeader << '\n';
    for (const auto* rec : sorted) {
        for (const auto& row : rec->rows) {
            out << row.seed << ',' << rec->policy << ',' << row.t << ',' << row.arm << ',' << format_real(row.reward)
                << ',' << format_real(row.instant_regret) << ',' << format_real(row.cum_regret) << ','
                << format_real(row.beta) << ',' << format_real(row.sigma) << ',' << row.clamps << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_aggregate_table(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << kAggregateHeader << '\n';
    for (const auto& row : rows) {
        out << row.t << ',' << row.policy << ',' << format_real(row.mean) << ',' << format_real(row.std_error) << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    for (const auto& p : cfg.policies) {
        if (p.name.find_first_of(",\"\n") != std::string::npos) {
            throw ConfigError("policy name '" + p.name + "' cannot contain commas, quotes or newlines");
        }
    }
    std::set<std::string> stems{"aggregate"};
    for (const auto& p : cfg.policies) {
        if (!stems.insert(sanitize_file_stem(p.name)).second) {
            throw ConfigError("policy name '" + p.name + "' collides with another output file");
        }
    }
    ensure_writable_directory(cfg.output_dir);

    ExperimentResult result = simulate_experiment(cfg);
    for (std::size_t p = 0; p < result.policies.size(); ++p) {
        write_episode_table(result.records[p], cfg.output_dir / (sanitize_file_stem(result.policies[p]) + ".csv"));
    }
    write_aggregate_table(result.aggregate, cfg.output_dir / "aggregate.csv");

    nlohmann::ordered_json meta;
    meta["name"] = cfg.name;
    meta["horizon"] = cfg.environment.horizon;
    meta["replicates"] = cfg.replicates;
    meta["seed"] = cfg.seed;
    meta["lambda"] = cfg.lambda;
    meta["delta"] = cfg.delta;
    meta["policies"] = result.policies;
    for (const auto& s : result.setups) {
        nlohmann::ordered_json rep;
        rep["seed"] = s.seed;
        rep["B"] = s.b;
        rep["R"] = s.r;
        rep["realized_budget"] = s.budget;
        rep["gamma_dot"] = s.gamma_dot;
        for (const auto& pc : s.policies) {
            nlohmann::ordered_json pj;
            pj["name"] = pc.name;
            std::visit(
                [&](const auto& k) {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, WgpUcb>) {
                        pj["kind"] = "wgp";
                        pj["eta"] = k.eta;
                    } else if constexpr (std::is_same_v<K, IgpUcb>) {
                        pj["kind"] = "igp";
                    } else if constexpr (std::is_same_v<K, Restart>) {
                        pj["kind"] = "restart";
                        pj["period"] = k.period;
                    } else {
                        pj["kind"] = "window";
                        pj["size"] = k.window;
                    }
                },
                pc.kind);
            rep["policies"].push_back(pj);
        }
        meta["replicate_setup"].push_back(rep);
    }
    auto out = open_for_write(cfg.output_dir / "metadata.json");
    out << meta.dump(2) << '\n';
    return result;
}

}  // namespace wgpucb
