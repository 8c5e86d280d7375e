#include "wgpucb/checks.hpp"

#include "wgpucb/envs.hpp"
#include "wgpucb/harness.hpp"
#include "wgpucb/kernels.hpp"
#include "wgpucb/mig.hpp"
#include "wgpucb/policies.hpp"
#include "wgpucb/qff.hpp"
#include "wgpucb/wgp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

namespace wgpucb {

namespace {

BanditHistory random_history(std::size_t arms, std::size_t t, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> arm(0, arms - 1);
    std::normal_distribution<double> y(0.0, 1.0);
    BanditHistory h(arms);
    for (std::size_t s = 0; s < t; ++s) {
        h.append(arm(rng), y(rng));
    }
    return h;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

CheckResult kernel_psd() {
    const GridKernel k(DomainGrid::uniform(40), KernelSpec::squared_exponential(0.2));
    double shift = 0.0;
    Point x(1), y(1), h(1);
    x << 0.13;
    y << 0.47;
    h << 0.31;
    shift = std::abs(se_kernel(x + h, y + h, 0.2) - se_kernel(x, y, 0.2));
    const bool ok = is_positive_semidefinite(k.gram()) && shift < 1e-12;
    return {"kernel PSD and translation invariance", ok, "shift gap " + format_real(shift)};
}

CheckResult hermite_nodes() {
    double worst = 0.0;
    for (int mbar = 1; mbar <= 12; ++mbar) {
        const QffMap map = build_qff(mbar, 1, 1.0);
        worst = std::max(worst, std::abs(map.node_weights.sum() - 1.0));
        const auto roots = hermite_roots(mbar);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            worst = std::max(worst, std::abs(roots[i] + roots[roots.size() - 1 - i]));
        }
    }
    return {"Hermite roots symmetric, weights sum to one", worst < 1e-10, "worst gap " + format_real(worst)};
}

CheckResult qff_error() {
    const double l = 0.5;
    const int mbar = 4;
    const DomainGrid grid = DomainGrid::uniform(51);
    const QffMap map = build_qff(mbar, 1, l);
    const Eigen::MatrixXd phi = map.feature_matrix(grid);
    const Eigen::MatrixXd approx = phi * phi.transpose();
    const GridKernel k(grid, KernelSpec::squared_exponential(l));
    const double sup = (approx - k.gram()).cwiseAbs().maxCoeff();
    const double bound = qff_error_bound(mbar, 1, l);
    return {"QFF uniform error within bound", sup <= bound, format_real(sup) + " <= " + format_real(bound)};
}

CheckResult scale_invariance() {
    std::mt19937_64 rng(7);
    const GridKernel k(DomainGrid::uniform(30), KernelSpec::squared_exponential(0.2));
    bool ok = true;
    for (const double eta : {0.9, 1.0}) {
        const BanditHistory h = random_history(k.size(), 20, rng);
        ok = ok && posterior_scale_invariance_check(h, WeightScheme{eta, 1.0, 0.0}, k, 10.0);
    }
    return {"weighted posterior scale invariance", ok, ""};
}

CheckResult reduction() {
    auto kernel = std::make_shared<const GridKernel>(DomainGrid::uniform(50), KernelSpec::squared_exponential(0.2));
    const Environment env = make_stationary_environment(kernel, 30, 50, 3);
    const NoiseModel noise(0.1, 3);
    PolicyConfig w{"w", WgpUcb{1.0}, GPParams{env.max_rkhs_norm(), 0.1, 1.0, 0.1}, {}, 1e-8};
    PolicyConfig i = w;
    i.name = "i";
    i.kind = IgpUcb{};
    const auto a = run_episode(env, w, noise);
    const auto b = run_episode(env, i, noise);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < a.rows.size(); ++t) {
        mismatches += a.rows[t].arm != b.rows[t].arm;
    }
    return {"discount one reduces to unweighted GP-UCB", mismatches == 0,
            std::to_string(mismatches) + " mismatched actions"};
}

CheckResult primal_dual() {
    std::mt19937_64 rng(11);
    const DomainGrid grid = DomainGrid::uniform(30);
    const QffMap map = build_qff(4, 1, 0.3);
    const Eigen::MatrixXd phi = map.feature_matrix(grid);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const BanditHistory h = random_history(grid.size(), 12, rng);
        const WeightScheme s{0.9, 1.0, 0.0};
        const auto p = fit_qff_posterior(h, s, phi, QffForm::Primal);
        const auto d = fit_qff_posterior(h, s, phi, QffForm::Dual);
        for (std::size_t x = 0; x < grid.size(); ++x) {
            worst = std::max({worst, relative_gap(p.mean(x), d.mean(x)), relative_gap(p.variance(x), d.variance(x))});
        }
        const std::vector<ArmIndex> pts = h.arms();
        worst = std::max(worst, relative_gap(empirical_qff_mig(phi, pts, s, QffForm::Primal),
                                             empirical_qff_mig(phi, pts, s, QffForm::Dual)));
    }
    return {"QFF primal and dual forms agree", worst < 1e-8, "worst relative gap " + format_real(worst)};
}

CheckResult mig_certificate() {
    std::mt19937_64 rng(5);
    const GridKernel k(DomainGrid::uniform(100), KernelSpec::squared_exponential(0.2));
    std::uniform_int_distribution<ArmIndex> arm(0, k.size() - 1);
    std::vector<ArmIndex> pts(100);
    for (auto& p : pts) {
        p = arm(rng);
    }
    const double eta = 0.9;
    const WeightScheme s{eta, 1.0, 0.0};
    const double gamma = empirical_double_weighted_mig(k, pts, s);
    const double bound = best_weight_bound(EigendecayParams::squared_exponential_default(), eta, 1.0, 1.0,
                                           WeightOrder::Double);
    return {"empirical information gain within the weight bound", gamma <= bound,
            format_real(gamma) + " <= " + format_real(bound)};
}

CheckResult budget_ledger() {
    auto kernel = std::make_shared<const GridKernel>(DomainGrid::uniform(50), KernelSpec::squared_exponential(0.2));
    const Environment abrupt = make_abrupt_environment(kernel, 60, {20, 40}, 30, 9, 2.0);
    const Environment slow = make_slow_environment(kernel, 60, 30, 9, 2.0);
    const bool ok = abrupt.budget().realized <= abrupt.budget().declared &&
                    slow.budget().realized <= slow.budget().declared;
    return {"realized variation within declared budget", ok,
            format_real(abrupt.budget().realized) + ", " + format_real(slow.budget().realized) + " <= 2"};
}

CheckResult regret_monotone() {
    auto kernel = std::make_shared<const GridKernel>(DomainGrid::uniform(50), KernelSpec::squared_exponential(0.2));
    const Environment env = make_abrupt_environment(kernel, 40, {15, 30}, 30, 4);
    const NoiseModel noise(0.1, 4);
    bool ok = true;
    for (const PolicyKind& kind : std::vector<PolicyKind>{WgpUcb{0.9}, IgpUcb{}, Restart{10}, SlidingWindow{10}}) {
        PolicyConfig pc{"p", kind, GPParams{env.max_rkhs_norm(), 0.1, 0.01, 0.1}, {}, 1e-8};
        const auto rec = run_episode(env, pc, noise);
        double prev = 0.0;
        for (const auto& row : rec.rows) {
            ok = ok && row.instant_regret >= 0.0 && row.cum_regret >= prev;
            prev = row.cum_regret;
        }
    }
    const auto oracle = run_oracle_episode(env, NoiseModel(0.0, 4));
    ok = ok && oracle.final_regret() == 0.0;
    return {"cumulative regret nondecreasing, oracle regret zero", ok, ""};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks() {
    const std::vector<std::function<CheckResult()>> checks{kernel_psd,  hermite_nodes,       qff_error,
                                                           scale_invariance, reduction, primal_dual,
                                                           mig_certificate, budget_ledger, regret_monotone};
    std::vector<CheckResult> out;
    for (const auto& c : checks) {
        out.push_back(c());
    }
    return out;
}

}  // namespace wgpucb
