#include "wgpucb/config.hpp"

#include "wgpucb/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace wgpucb {

namespace pt = boost::property_tree;

std::string default_config_text() {
    return R"(; WGP-UCB experiment configuration.
; Values set to auto are derived for every replicate from its environment.

[experiment]
name = abrupt
seed = 1
replicates = 20
output = results/abrupt
; 0 uses every hardware thread
threads = 0

[environment]
; abrupt | slow | stationary | stock
kind = abrupt
horizon = 500
breakpoints = 100,200
grid = 100
lengthscale = 0.2
centers = 100
noise = 0.1
; declared variation budget B_T, or auto to declare the realized one
budget = auto
; stock only: comma-separated price file; empty uses a synthetic matrix
price_file =
stocks = 29

[gp]
; auto: largest RKHS norm of any reward function in the environment
B = auto
; auto: the environment noise scale
R = auto
lambda = 0.01
delta = 0.1
; empirical | analytic | fixed
beta = empirical
beta_value = 1.0
truncation = 1e-8

[tuning]
; auto derives eta, restart period and window from the horizon and budget
mode = auto
budget_known = true
gamma = auto

[policy:WGP-UCB]
kind = wgp
eta = auto

[policy:IGP-UCB]
kind = igp

[policy:R-GP-UCB]
kind = restart
period = auto

[policy:SW-GP-UCB]
kind = window
size = auto
)";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_auto(const std::string& v) { return v.empty() || lower(v) == "auto"; }

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d < 0.0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
        throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" + v + "'");
    }
    return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    const auto l = lower(v);
    if (l == "true" || l == "yes" || l == "1") {
        return true;
    }
    if (l == "false" || l == "no" || l == "0") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::optional<double> optional_double(const std::string& key, const std::string& v) {
    if (is_auto(v)) {
        return std::nullopt;
    }
    return to_double(key, v);
}

std::optional<std::size_t> optional_count(const std::string& key, const std::string& v) {
    if (is_auto(v)) {
        return std::nullopt;
    }
    return to_count(key, v);
}

class Section {
public:
    Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {
        for (const auto& [key, _] : tree_) {
            unused_.insert(key);
        }
    }

    std::optional<std::string> get(const std::string& key) {
        unused_.erase(key);
        if (const auto child = tree_.get_child_optional(pt::ptree::path_type(key, '\0'))) {
            return child->get_value<std::string>();
        }
        return std::nullopt;
    }

    std::string qualified(const std::string& key) const { return name_ + "." + key; }

    void reject_unknown() const {
        if (!unused_.empty()) {
            throw ConfigError("unknown config key '" + name_ + "." + *unused_.begin() + "'");
        }
    }

private:
    std::string name_;
    const pt::ptree& tree_;
    std::set<std::string> unused_;
};

EnvironmentKind parse_env_kind(const std::string& v) {
    const auto l = lower(v);
    if (l == "abrupt") return EnvironmentKind::Abrupt;
    if (l == "slow") return EnvironmentKind::Slow;
    if (l == "stationary") return EnvironmentKind::Stationary;
    if (l == "stock") return EnvironmentKind::Stock;
    throw ConfigError("environment.kind must be abrupt, slow, stationary or stock, got '" + v + "'");
}

std::vector<std::size_t> parse_breakpoints(const std::string& v) {
    std::vector<std::size_t> out;
    std::istringstream in(v);
    for (std::string item; std::getline(in, item, ',');) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (!item.empty()) {
            out.push_back(to_count("environment.breakpoints", item));
        }
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    ExperimentConfig cfg;
    bool policies_seen = false;
    for (const auto& [section_name, body] : tree) {
        Section s(section_name, body);
        if (section_name == "experiment") {
            if (auto v = s.get("name")) cfg.name = *v;
            if (auto v = s.get("seed")) cfg.seed = to_count(s.qualified("seed"), *v);
            if (auto v = s.get("replicates")) cfg.replicates = to_count(s.qualified("replicates"), *v);
            if (auto v = s.get("output")) cfg.output_dir = *v;
            if (auto v = s.get("threads")) cfg.threads = to_count(s.qualified("threads"), *v);
        } else if (section_name == "environment") {
            auto& e = cfg.environment;
            if (auto v = s.get("kind")) e.kind = parse_env_kind(*v);
            if (auto v = s.get("horizon")) e.horizon = to_count(s.qualified("horizon"), *v);
            if (auto v = s.get("breakpoints")) e.breakpoints = parse_breakpoints(*v);
            if (auto v = s.get("grid")) e.grid_size = to_count(s.qualified("grid"), *v);
            if (auto v = s.get("lengthscale")) e.lengthscale = to_double(s.qualified("lengthscale"), *v);
            if (auto v = s.get("centers")) e.centers = to_count(s.qualified("centers"), *v);
            if (auto v = s.get("noise")) e.noise = to_double(s.qualified("noise"), *v);
            if (auto v = s.get("budget")) e.budget = optional_double(s.qualified("budget"), *v);
            if (auto v = s.get("price_file")) e.price_file = *v;
            if (auto v = s.get("stocks")) e.stocks = to_count(s.qualified("stocks"), *v);
        } else if (section_name == "gp") {
            if (auto v = s.get("B")) cfg.b = optional_double(s.qualified("B"), *v);
            if (auto v = s.get("R")) cfg.r = optional_double(s.qualified("R"), *v);
            if (auto v = s.get("lambda")) cfg.lambda = to_double(s.qualified("lambda"), *v);
            if (auto v = s.get("delta")) cfg.delta = to_double(s.qualified("delta"), *v);
            if (auto v = s.get("beta")) {
                const auto l = lower(*v);
                if (l == "empirical") cfg.beta_mode = BetaMode::EmpiricalMig;
                else if (l == "analytic") cfg.beta_mode = BetaMode::AnalyticBound;
                else if (l == "fixed") cfg.beta_mode = BetaMode::Fixed;
                else throw ConfigError("gp.beta must be empirical, analytic or fixed, got '" + *v + "'");
            }
            if (auto v = s.get("beta_value")) cfg.beta_value = to_double(s.qualified("beta_value"), *v);
            if (auto v = s.get("truncation")) cfg.truncation_eps = to_double(s.qualified("truncation"), *v);
        } else if (section_name == "tuning") {
            if (auto v = s.get("mode")) {
                const auto l = lower(*v);
                if (l == "auto") cfg.tuning = TuningMode::Automatic;
                else if (l == "manual") cfg.tuning = TuningMode::Manual;
                else throw ConfigError("tuning.mode must be auto or manual, got '" + *v + "'");
            }
            if (auto v = s.get("budget_known")) cfg.budget_known = to_bool(s.qualified("budget_known"), *v);
            if (auto v = s.get("gamma")) cfg.gamma_dot = optional_double(s.qualified("gamma"), *v);
        } else if (section_name.rfind("policy:", 0) == 0) {
            if (!policies_seen) {
                cfg.policies.clear();
                policies_seen = true;
            }
            PolicyEntry p;
            p.name = section_name.substr(7);
            if (p.name.empty()) {
                throw ConfigError("policy section needs a name, as in [policy:WGP-UCB]");
            }
            const auto kind = s.get("kind");
            if (!kind) {
                throw ConfigError("policy '" + p.name + "' has no kind");
            }
            p.kind = lower(*kind);
            if (auto v = s.get("eta")) p.eta = optional_double(s.qualified("eta"), *v);
            if (auto v = s.get("period")) p.period = optional_count(s.qualified("period"), *v);
            if (auto v = s.get("size")) p.window = optional_count(s.qualified("size"), *v);
            cfg.policies.push_back(std::move(p));
        } else {
            throw ConfigError("unknown config section [" + section_name + "]");
        }
        s.reject_unknown();
    }
    if (!policies_seen) {
        cfg.policies = {{"WGP-UCB", "wgp", {}, {}, {}},
                        {"IGP-UCB", "igp", {}, {}, {}},
                        {"R-GP-UCB", "restart", {}, {}, {}},
                        {"SW-GP-UCB", "window", {}, {}, {}}};
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_string(text.str());
}

void ExperimentConfig::validate() const {
    const auto& e = environment;
    if (e.horizon < 1) throw ConfigError("environment.horizon must be at least 1");
    if (replicates < 1) throw ConfigError("experiment.replicates must be at least 1");
    if (policies.empty()) throw ConfigError("at least one policy is required");
    if (e.kind != EnvironmentKind::Stock) {
        if (e.grid_size < 1) throw ConfigError("environment.grid must be at least 1");
        if (e.centers < 1 || e.centers > e.grid_size) throw ConfigError("environment.centers must lie in [1, grid]");
        if (!(e.lengthscale > 0.0)) throw ConfigError("environment.lengthscale must be positive");
    }
    if (!(e.noise >= 0.0)) throw ConfigError("environment.noise must be nonnegative");
    if (e.budget && !(*e.budget >= 0.0)) throw ConfigError("environment.budget must be nonnegative");
    if (b && !(*b >= 0.0)) throw ConfigError("gp.B must be nonnegative");
    if (r && !(*r >= 0.0)) throw ConfigError("gp.R must be nonnegative");
    if (!(lambda > 0.0)) throw ConfigError("gp.lambda must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("gp.delta must lie in (0, 1)");
    if (!(truncation_eps >= 0.0 && truncation_eps < 1.0)) throw ConfigError("gp.truncation must lie in [0, 1)");
    if (gamma_dot && !(*gamma_dot > 0.0)) throw ConfigError("tuning.gamma must be positive");
    std::set<std::string> names;
    for (const auto& p : policies) {
        if (!names.insert(p.name).second) throw ConfigError("duplicate policy name '" + p.name + "'");
        if (p.kind != "wgp" && p.kind != "igp" && p.kind != "restart" && p.kind != "window") {
            throw ConfigError("policy '" + p.name + "': kind must be wgp, igp, restart or window");
        }
        if (p.eta && !(*p.eta > 0.0 && *p.eta <= 1.0)) throw ConfigError("policy '" + p.name + "': eta must lie in (0, 1]");
        if (p.period && *p.period < 1) throw ConfigError("policy '" + p.name + "': period must be at least 1");
        if (p.window && *p.window < 1) throw ConfigError("policy '" + p.name + "': size must be at least 1");
        if (tuning == TuningMode::Manual) {
            if ((p.kind == "wgp" && !p.eta) || (p.kind == "restart" && !p.period) ||
                (p.kind == "window" && !p.window)) {
                throw ConfigError("policy '" + p.name + "': manual tuning needs an explicit parameter");
            }
        }
    }
}

}  // namespace wgpucb
