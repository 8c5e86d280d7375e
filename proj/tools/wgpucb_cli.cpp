#include "wgpucb/checks.hpp"
#include "wgpucb/config.hpp"
#include "wgpucb/errors.hpp"
#include "wgpucb/harness.hpp"
#include "wgpucb/mig.hpp"
#include "wgpucb/policies.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct BoundArgs {
    std::string kind = "weight";
    std::size_t n = 1;
    std::size_t horizon = 0;
    double kdot = 1.0;
    double lambda = 1.0;
    std::optional<double> eta;
    std::optional<double> eta2;
    double delta_n = 0.0;
    bool single = false;
    std::string decay = "exponential";
    double c_p = 1.0;
    double beta_p = 2.0;
    double c_e1 = 1.0;
    double c_e2 = 1.0;
    double psi = 1.0;
};

void print_value(double v) { std::printf("%.6g\n", v); }

double resolve_eta(const BoundArgs& a) {
    if (a.eta && a.eta2) {
        throw wgpucb::InputError("give either --eta or --eta2, not both");
    }
    if (a.eta2) {
        if (!(*a.eta2 > 0.0 && *a.eta2 < 1.0)) {
            throw wgpucb::InputError("--eta2 must lie in (0, 1)");
        }
        return std::sqrt(*a.eta2);
    }
    if (!a.eta) {
        throw wgpucb::InputError("the " + a.kind + " bound needs --eta or --eta2");
    }
    return *a.eta;
}

int run_bound(const BoundArgs& a) {
    const auto order = a.single ? wgpucb::WeightOrder::Single : wgpucb::WeightOrder::Double;
    if (a.kind == "universal") {
        print_value(wgpucb::mig_universal_bound(a.n, a.horizon, a.kdot, a.lambda, a.delta_n));
    } else if (a.kind == "weight") {
        print_value(wgpucb::mig_weight_bound(a.n, resolve_eta(a), a.kdot, a.lambda, a.delta_n, order));
    } else if (a.kind == "eigendecay") {
        wgpucb::EigendecayParams p;
        if (a.decay == "polynomial") {
            p.kind = wgpucb::EigendecayKind::Polynomial;
        } else if (a.decay == "exponential") {
            p.kind = wgpucb::EigendecayKind::Exponential;
        } else {
            throw wgpucb::InputError("--decay must be polynomial or exponential");
        }
        p.c_p = a.c_p;
        p.beta_p = a.beta_p;
        p.c_e1 = a.c_e1;
        p.c_e2 = a.c_e2;
        p.psi = a.psi;
        print_value(wgpucb::mig_eigendecay_bound(p, resolve_eta(a), a.kdot, a.lambda, order));
    } else {
        throw wgpucb::InputError("--kind must be universal, weight or eigendecay");
    }
    return 0;
}

int run_experiment_command(const std::string& path, std::size_t threads, const std::string& output) {
    wgpucb::ExperimentConfig cfg = wgpucb::load_config(path);
    if (threads > 0) {
        cfg.threads = threads;
    }
    if (!output.empty()) {
        cfg.output_dir = output;
    }
    const auto result = wgpucb::run_experiment(cfg);
    const std::size_t horizon = cfg.environment.horizon;
    std::printf("%s: %zu replicates, T = %zu, tables in %s\n", cfg.name.c_str(), cfg.replicates, horizon,
                cfg.output_dir.string().c_str());
    for (const auto& row : result.aggregate) {
        if (row.t == horizon) {
            std::printf("  %-12s final cumulative regret %.4f +/- %.4f\n", row.policy.c_str(), row.mean,
                        row.std_error);
        }
    }
    return 0;
}

int run_checks() {
    bool all = true;
    for (const auto& c : wgpucb::run_invariant_checks()) {
        std::printf("%s %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                    c.detail.c_str());
        all = all && c.passed;
    }
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted GP-UCB bandits for non-stationary reward functions"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    std::string config_path;
    bool print_defaults = false;
    std::size_t threads = 0;
    std::string output;
    run->add_option("config", config_path, "Config file");
    run->add_flag("--print-defaults", print_defaults, "Print the default config and exit");
    run->add_option("--threads", threads, "Worker threads (0 = all cores)");
    run->add_option("--output", output, "Override the output directory");

    auto* bound = app.add_subcommand("bound", "Print an analytic information-gain bound");
    BoundArgs b;
    bound->add_option("--kind", b.kind, "universal | weight | eigendecay")->capture_default_str();
    bound->add_option("--N", b.n, "Projection dimension")->capture_default_str();
    bound->add_option("--T", b.horizon, "Horizon (universal bound)")->capture_default_str();
    bound->add_option("--kdot", b.kdot, "Kernel bound")->capture_default_str();
    bound->add_option("--lambda", b.lambda, "Regularizer")->capture_default_str();
    bound->add_option("--eta", b.eta, "Discount");
    bound->add_option("--eta2", b.eta2, "Squared discount");
    bound->add_option("--deltaN", b.delta_n, "Tail mass")->capture_default_str();
    bound->add_flag("--single", b.single, "Single-weighted denominators");
    bound->add_option("--decay", b.decay, "polynomial | exponential")->capture_default_str();
    bound->add_option("--Cp", b.c_p)->capture_default_str();
    bound->add_option("--betap", b.beta_p)->capture_default_str();
    bound->add_option("--Ce1", b.c_e1)->capture_default_str();
    bound->add_option("--Ce2", b.c_e2)->capture_default_str();
    bound->add_option("--psi", b.psi)->capture_default_str();

    auto* tune = app.add_subcommand("tune", "Print the tuned discount, restart constant and QFF size");
    std::size_t horizon = 0;
    double gamma_dot = 0.0;
    std::optional<double> budget;
    tune->add_option("--T", horizon, "Horizon")->required();
    tune->add_option("--gammadot", gamma_dot, "Unweighted information gain bound")->required();
    tune->add_option("--BT", budget, "Variation budget (omit when unknown)");

    auto* check = app.add_subcommand("check", "Run the invariant suite on small instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            if (print_defaults) {
                std::cout << wgpucb::default_config_text();
                return 0;
            }
            if (config_path.empty()) {
                std::cerr << "run: a config file is required\n";
                return 1;
            }
            return run_experiment_command(config_path, threads, output);
        }
        if (*bound) {
            return run_bound(b);
        }
        if (*tune) {
            const auto t = wgpucb::tune_parameters(horizon, gamma_dot, budget);
            std::printf("eta = %.6g\nc = %zu\nmbar = %d\n", t.eta, t.c, t.mbar);
            return 0;
        }
        if (*check) {
            return run_checks();
        }
    } catch (const wgpucb::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
