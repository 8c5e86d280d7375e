// End-to-end acceptance suite. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.
//
// usage: acceptance <cli-binary> <scratch-dir>

#include "oracles.hpp"

#include "wgpucb/config.hpp"
#include "wgpucb/harness.hpp"
#include "wgpucb/mig.hpp"
#include "wgpucb/policies.hpp"
#include "wgpucb/qff.hpp"
#include "wgpucb/wgp.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>

using namespace wgpucb;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes of every criterion.
constexpr double kPosteriorTol = 1e-8;
constexpr double kPrimalDualTol = 1e-8;
constexpr std::size_t kReductionSeeds = 10;
constexpr std::size_t kReductionHorizon = 100;
constexpr std::size_t kPosteriorCases = 50;
constexpr std::size_t kPosteriorMaxRounds = 30;
constexpr std::size_t kPrimalDualCases = 50;
constexpr std::size_t kMigTrajectories = 20;
constexpr std::size_t kMigHorizon = 300;
constexpr std::size_t kVarianceSumHorizon = 200;
constexpr int kVarianceSumMbar = 6;
constexpr std::size_t kCoverageSeeds = 50;
constexpr std::size_t kCoverageHorizon = 100;
constexpr double kCoverageFraction = 0.9;
constexpr std::size_t kCoverageRunsRequired = 45;
constexpr double kSignTestLevel = 0.05;

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::shared_ptr<const GridKernel> section_grid() {
    static const auto k =
        std::make_shared<const GridKernel>(DomainGrid::uniform(100), KernelSpec::squared_exponential(0.2));
    return k;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome reduction_identity() {
    std::size_t mismatches = 0;
    for (std::size_t seed = 1; seed <= kReductionSeeds; ++seed) {
        const Environment env = make_stationary_environment(section_grid(), kReductionHorizon, 100, seed);
        const NoiseModel noise(0.1, seed);
        PolicyConfig w;
        w.name = "WGP-UCB";
        w.kind = WgpUcb{1.0};
        w.gp = GPParams{env.max_rkhs_norm(), 0.1, 1.0, 0.1};
        w.beta.mode = BetaMode::EmpiricalMig;
        PolicyConfig i = w;
        i.name = "IGP-UCB";
        i.kind = IgpUcb{};
        const auto a = run_episode(env, w, noise);
        const auto b = run_episode(env, i, noise);
        for (std::size_t t = 0; t < kReductionHorizon; ++t) {
            mismatches += a.rows[t].arm != b.rows[t].arm;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatched actions over " +
                                 std::to_string(kReductionSeeds) + " seeds x T = " + std::to_string(kReductionHorizon)};
}

Outcome posterior_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, kPosteriorMaxRounds);
    std::uniform_int_distribution<ArmIndex> arm(0, 99);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto& k = *section_grid();
    double worst = 0.0;
    std::size_t failures = 0;
    for (std::size_t c = 0; c < kPosteriorCases; ++c) {
        const double eta = c % 2 == 0 ? 0.9 : 1.0;
        const std::size_t t = len(rng);
        BanditHistory h(100);
        std::vector<std::size_t> arms, rounds;
        std::vector<double> ys;
        for (std::size_t s = 1; s <= t; ++s) {
            const ArmIndex a = arm(rng);
            const double y = noise(rng);
            h.append(a, y);
            arms.push_back(a);
            ys.push_back(y);
            rounds.push_back(s);
        }
        const auto fit = fit_weighted_posterior(h, WeightScheme{eta, 1.0, 1e-8}, k);
        const auto ref = oracle::nominal_posterior(k.gram(), arms, ys, rounds, eta, 1.0, t);
        for (Eigen::Index x = 0; x < 100; ++x) {
            const double dm = std::abs(fit.mean(x) - ref.mean(x)) / std::max(1.0, std::abs(ref.mean(x)));
            const double dv = std::abs(fit.variance(x) - ref.var(x)) / std::max(1.0, std::abs(ref.var(x)));
            worst = std::max({worst, dm, dv});
            failures += dm > kPosteriorTol || dv > kPosteriorTol;
        }
    }
    return {failures == 0, "worst gap " + fmt("%.3g", worst) + " over " + std::to_string(kPosteriorCases) +
                               " histories x 100 grid points"};
}

Outcome qff_uniform_error() {
    const std::vector<double> xs = oracle::linspace(101);
    const DomainGrid grid = DomainGrid::uniform(101);
    std::size_t violations = 0;
    double tightest = 0.0;
    for (double l : {0.2, 0.5, 1.0}) {
        const Eigen::MatrixXd exact = oracle::se_gram(xs, l);
        for (int mbar : {4, 6, 8}) {
            const Eigen::MatrixXd phi = build_qff(mbar, 1, l).feature_matrix(grid);
            const double sup = (phi * phi.transpose() - exact).cwiseAbs().maxCoeff();
            const double bound = qff_error_bound(mbar, 1, l);
            violations += sup > bound;
            tightest = std::max(tightest, sup / bound);
        }
    }
    return {violations == 0, std::to_string(violations) + " violations, largest error/bound ratio " +
                                 fmt("%.3g", tightest)};
}

/// |a - b| / |b|, or the absolute gap when b is within 1e-8 of zero.
double relative(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(b)); }

Outcome primal_dual() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> mbar_d(2, 8);
    std::uniform_int_distribution<std::size_t> len(5, 60);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<ArmIndex> arm(0, 99);
    std::normal_distribution<double> noise(0.0, 1.0);
    const DomainGrid grid = DomainGrid::uniform(100);
    double worst = 0.0;
    for (std::size_t c = 0; c < kPrimalDualCases; ++c) {
        const int mbar = mbar_d(rng);
        const double l = 0.15 + 0.85 * unit(rng);
        const double eta = 0.8 + 0.2 * unit(rng);
        const double lambda = std::pow(10.0, -2.0 + 2.0 * unit(rng));
        const std::size_t t = len(rng);
        const Eigen::MatrixXd phi = build_qff(mbar, 1, l).feature_matrix(grid);
        BanditHistory h(100);
        for (std::size_t s = 0; s < t; ++s) {
            h.append(arm(rng), noise(rng));
        }
        const WeightScheme s{eta, lambda, 0.0};
        const auto p = fit_qff_posterior(h, s, phi, QffForm::Primal);
        const auto d = fit_qff_posterior(h, s, phi, QffForm::Dual);
        for (Eigen::Index x = 0; x < 100; ++x) {
            worst = std::max({worst, relative(p.mean(x), d.mean(x)), relative(p.variance(x), d.variance(x))});
        }
        const auto pts = h.arms();
        worst = std::max(worst, relative(empirical_qff_mig(phi, pts, s, QffForm::Primal),
                                         empirical_qff_mig(phi, pts, s, QffForm::Dual)));
    }
    return {worst <= kPrimalDualTol, "worst relative gap " + fmt("%.3g", worst) + " over " +
                                         std::to_string(kPrimalDualCases) + " instances"};
}

/// Trajectory of arms: uniform random, or greedy on the posterior variance of `fit`.
std::vector<ArmIndex> trajectory(bool greedy, std::size_t horizon, std::mt19937_64& rng,
                                 const std::function<WeightedPosterior(const BanditHistory&)>& fit) {
    std::uniform_int_distribution<ArmIndex> arm(0, 99);
    BanditHistory h(100);
    std::vector<ArmIndex> out;
    for (std::size_t t = 1; t <= horizon; ++t) {
        ArmIndex a = arm(rng);
        if (greedy && t > 1) {
            Eigen::Index best = 0;
            fit(h).variances().maxCoeff(&best);
            a = static_cast<ArmIndex>(best);
        }
        h.append(a, 0.0);
        out.push_back(a);
    }
    return out;
}

Outcome mig_certification() {
    const auto& k = *section_grid();
    const auto decay = EigendecayParams::squared_exponential_default();
    // constants checked against the spectrum of the scaled grid Gram matrix
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::se_gram(oracle::linspace(100), 0.2) / 100.0,
                                                            Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    std::size_t spectrum_violations = 0;
    for (Eigen::Index m = 0; m < ev.size(); ++m) {
        spectrum_violations += ev(m) > decay.c_e1 * std::exp(-decay.c_e2 * static_cast<double>(m + 1));
    }

    std::mt19937_64 rng(7);
    std::size_t violations = 0;
    double ratio = 0.0;
    for (double eta : {0.9, 0.95, 0.99}) {
        const WeightScheme s{eta, 1.0, 0.0};
        const double thm = best_weight_bound(decay, eta, k.spec().kdot, 1.0, WeightOrder::Double);
        const double cor = mig_eigendecay_bound(decay, eta, k.spec().kdot, 1.0, WeightOrder::Double);
        for (std::size_t j = 0; j < kMigTrajectories; ++j) {
            const bool greedy = j % 4 == 0;
            const auto pts = trajectory(greedy, kMigHorizon, rng,
                                        [&](const BanditHistory& h) { return fit_weighted_posterior(h, s, k); });
            for (std::size_t t : {50u, 100u, 200u, 300u}) {
                const std::span<const ArmIndex> prefix(pts.data(), t);
                const double g = empirical_double_weighted_mig(k, prefix, s);
                violations += g > thm;
                violations += g > cor;
                ratio = std::max(ratio, g / std::min(thm, cor));
            }
        }
    }
    const bool ok = violations == 0 && spectrum_violations == 0;
    return {ok, std::to_string(violations) + " violations, largest gain/bound " + fmt("%.3g", ratio) + ", " +
                    std::to_string(spectrum_violations) + " spectrum violations"};
}

Outcome variance_sum_bound() {
    const DomainGrid grid = DomainGrid::uniform(100);
    const QffMap q = build_qff(kVarianceSumMbar, 1, 0.2);
    const Eigen::MatrixXd phi = q.feature_matrix(grid);
    const double lambda = 1.0;
    const double tt = static_cast<double>(kVarianceSumHorizon);
    std::mt19937_64 rng(31);
    std::size_t violations = 0;
    double ratio = 0.0;
    for (double eta : {0.95, 0.99}) {
        const WeightScheme s{eta, lambda, 0.0};
        for (int j = 0; j < 10; ++j) {
            const bool greedy = j % 2 == 0;
            const auto pts = trajectory(greedy, kVarianceSumHorizon, rng,
                                        [&](const BanditHistory& h) { return fit_qff_posterior(h, s, phi); });
            double sum = 0.0;
            BanditHistory h(100);
            for (const ArmIndex a : pts) {
                sum += fit_qff_posterior(h, s, phi).stddev(a);
                h.append(a, 0.0);
            }
            const double gamma = empirical_qff_mig(phi, pts, s);
            const double bound = std::sqrt(4.0 * lambda * tt * gamma +
                                           2.0 * lambda * static_cast<double>(q.m) * tt * tt * std::log(1.0 / eta));
            violations += sum > bound;
            ratio = std::max(ratio, sum / bound);
        }
    }
    return {violations == 0, std::to_string(violations) + " violations, largest sum/bound " + fmt("%.3g", ratio)};
}

Outcome confidence_coverage() {
    ExperimentConfig cfg = parse_config_string(default_config_text());
    cfg.environment.kind = EnvironmentKind::Stationary;
    cfg.environment.horizon = kCoverageHorizon;
    cfg.environment.noise = 0.1;
    cfg.delta = 0.1;
    cfg.lambda = 0.01;
    cfg.policies = {{"WGP-UCB", "wgp", {}, {}, {}}};
    std::size_t good_runs = 0;
    double lowest = 1.0;
    for (std::size_t r = 0; r < kCoverageSeeds; ++r) {
        const ReplicateSetup setup = prepare_replicate(cfg, r);
        const auto rec = run_episode(*setup.env, setup.policies[0], setup.noise);
        std::size_t covered = 0;
        for (const auto& row : rec.rows) {
            covered += std::abs(setup.env->reward(row.t, row.arm) - row.mean) <= row.beta * row.sigma;
        }
        const double frac = static_cast<double>(covered) / static_cast<double>(rec.rows.size());
        lowest = std::min(lowest, frac);
        good_runs += frac >= kCoverageFraction;
    }
    return {good_runs >= kCoverageRunsRequired,
            std::to_string(good_runs) + "/" + std::to_string(kCoverageSeeds) + " runs with coverage >= 0.9, lowest " +
                fmt("%.3f", lowest)};
}

double sign_test_p(std::size_t wins, std::size_t n) {
    // P(X >= wins) for X ~ Binomial(n, 1/2)
    double p = 0.0;
    for (std::size_t k = wins; k <= n; ++k) {
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    }
    return p;
}

Outcome section_reproduction(const fs::path& scratch) {
    ExperimentConfig abrupt = parse_config_string(default_config_text());
    abrupt.output_dir = scratch / "abrupt";
    const auto res = run_experiment(abrupt);
    const auto& w = res.records[0];
    const auto& g = res.records[1];
    double mw = 0.0;
    double mg = 0.0;
    std::size_t wins = 0;
    std::size_t decided = 0;
    for (std::size_t r = 0; r < w.size(); ++r) {
        mw += w[r].final_regret();
        mg += g[r].final_regret();
        if (w[r].final_regret() != g[r].final_regret()) {
            ++decided;
            wins += w[r].final_regret() < g[r].final_regret();
        }
    }
    mw /= static_cast<double>(w.size());
    mg /= static_cast<double>(g.size());
    const double p = sign_test_p(wins, decided);

    ExperimentConfig slow = abrupt;
    slow.environment.kind = EnvironmentKind::Slow;
    slow.output_dir = scratch / "slow";
    const auto sres = run_experiment(slow);
    std::string ordering;
    std::vector<std::pair<double, std::string>> finals;
    for (std::size_t p_i = 0; p_i < sres.policies.size(); ++p_i) {
        double m = 0.0;
        for (const auto& rec : sres.records[p_i]) {
            m += rec.final_regret();
        }
        finals.emplace_back(m / static_cast<double>(sres.records[p_i].size()), sres.policies[p_i]);
    }
    std::sort(finals.begin(), finals.end());
    for (const auto& [m, name] : finals) {
        ordering += (ordering.empty() ? "" : " < ") + name + " " + fmt("%.1f", m);
    }
    const bool tables = fs::exists(scratch / "slow" / "aggregate.csv") && fs::exists(scratch / "slow" / "WGP-UCB.csv");
    const bool ok = mw < mg && p < kSignTestLevel && tables;
    return {ok, "abrupt mean final regret WGP-UCB " + fmt("%.1f", mw) + " vs IGP-UCB " + fmt("%.1f", mg) +
                    ", WGP-UCB lower in " + std::to_string(wins) + "/" + std::to_string(decided) +
                    " seeds, sign test p = " + fmt("%.2g", p) + "; slow: " + ordering};
}

std::string run_command(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return out;
    }
    std::array<char, 256> buf{};
    while (fgets(buf.data(), buf.size(), pipe)) {
        out += buf.data();
    }
    pclose(pipe);
    return out;
}

Outcome cli_spot_checks(const std::string& cli) {
    const auto six = [](double v) { return fmt("%.6g", v) + "\n"; };
    const double l3 = std::log(3.0);
    struct Case {
        std::string args;
        std::string expected;
    };
    const std::vector<Case> cases{
        {"bound --kind weight --N 1 --kdot 1 --lambda 1 --eta2 0.5 --deltaN 0", six(0.5 * l3)},
        {"bound --kind weight --N 1 --kdot 1 --lambda 1 --eta2 0.5 --deltaN 0.2", six(0.5 * l3 + 0.2)},
        {"bound --kind universal --N 1 --T 1 --kdot 1 --lambda 1 --deltaN 0", six(0.5 * std::log(2.0))},
        {"bound --kind universal --N 2 --T 4 --kdot 1 --lambda 1 --deltaN 0.1", six(l3 + 0.2)},
        {"bound --kind universal --N 3 --T 0 --kdot 1 --lambda 1 --deltaN 0.1", six(0.0)},
        {"bound --kind eigendecay --decay polynomial --Cp 1 --betap 2 --psi 1 --kdot 1 --lambda 1 --eta2 0.5",
         six(std::sqrt(2.0) * std::sqrt(l3) + l3)},
        {"bound --kind eigendecay --decay exponential --Ce1 1 --Ce2 1 --psi 1 --kdot 1 --lambda 1 --eta2 0.5",
         six((std::log(2.0) + 1.0) * l3)},
        {"tune --T 100 --gammadot 1 --BT 1", "eta = 0.9\nc = " + std::to_string(static_cast<int>(std::ceil(std::log(100.0) / 0.1))) + "\n"},
        {"tune --T 100 --gammadot 1", "eta = 0.9\n"},
    };
    std::size_t failures = 0;
    std::string first_failure;
    for (const auto& c : cases) {
        const std::string out = run_command("\"" + cli + "\" " + c.args);
        if (out.rfind(c.expected, 0) != 0) {
            ++failures;
            if (first_failure.empty()) {
                first_failure = "; '" + c.args + "' printed '" + out + "'";
            }
        }
    }
    return {failures == 0,
            std::to_string(cases.size() - failures) + "/" + std::to_string(cases.size()) + " outputs match" +
                first_failure};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <cli-binary> <scratch-dir>\n", argv[0]);
        return 1;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    fs::create_directories(scratch);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reduction identity", reduction_identity},
        {"posterior oracle equivalence", posterior_oracle},
        {"QFF uniform error", qff_uniform_error},
        {"primal/dual agreement", primal_dual},
        {"information gain certification", mig_certification},
        {"variance-sum bound", variance_sum_bound},
        {"confidence coverage", confidence_coverage},
        {"abrupt and slow experiments", [&] { return section_reproduction(scratch); }},
        {"closed-form CLI spot checks", [&] { return cli_spot_checks(cli); }},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s (%.1f s): %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.passed;
    }
    return failed == 0 ? 0 : 1;
}
