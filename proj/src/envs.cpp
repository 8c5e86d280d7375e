#include "wgpucb/envs.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace wgpucb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double quadratic_norm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& c) {
    return std::sqrt(std::max(0.0, c.dot(gram * c)));
}

RkhsFunction from_coefficients(const Eigen::VectorXd& coefficients, const GridKernel& kernel) {
    RkhsFunction f;
    std::vector<double> alphas;
    for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
        if (coefficients(i) != 0.0) {
            f.centers.push_back(static_cast<ArmIndex>(i));
            alphas.push_back(coefficients(i));
        }
    }
    f.alphas = Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    f.rkhs_norm = rkhs_norm(kernel, coefficients);
    return f;
}

}  // namespace

Eigen::VectorXd RkhsFunction::coefficients(std::size_t grid_size) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_size));
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (centers[i] >= grid_size) {
            throw InputError("RKHS function center outside the grid");
        }
        c(static_cast<Eigen::Index>(centers[i])) += alphas(static_cast<Eigen::Index>(i));
    }
    return c;
}

Eigen::VectorXd RkhsFunction::values(const GridKernel& kernel) const {
    return kernel.gram() * coefficients(kernel.size());
}

double RkhsFunction::operator()(const GridKernel& kernel, ArmIndex x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        v += alphas(static_cast<Eigen::Index>(i)) * kernel(x, centers[i]);
    }
    return v;
}

double rkhs_norm(const GridKernel& kernel, const Eigen::VectorXd& coefficients) {
    if (static_cast<std::size_t>(coefficients.size()) != kernel.size()) {
        throw InputError("coefficient vector does not match the grid");
    }
    return quadratic_norm(kernel.gram(), coefficients);
}

std::vector<RkhsFunction> sample_rkhs_functions(std::size_t count, std::size_t m, const GridKernel& kernel,
                                                std::uint64_t seed) {
    if (m == 0 || m > kernel.size()) {
        throw InputError("number of centers must lie in [1, grid size]");
    }
    std::mt19937_64 rng(seed);
    std::vector<ArmIndex> all(kernel.size());
    std::iota(all.begin(), all.end(), ArmIndex{0});
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<ArmIndex> centers(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(centers.begin(), centers.end());

    const Eigen::MatrixXd k_centers = kernel.submatrix(centers);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<RkhsFunction> out;
    out.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        RkhsFunction fn;
        fn.centers = centers;
        fn.alphas.resize(static_cast<Eigen::Index>(m));
        for (Eigen::Index i = 0; i < fn.alphas.size(); ++i) {
            fn.alphas(i) = unif(rng);
        }
        fn.rkhs_norm = quadratic_norm(k_centers, fn.alphas);
        out.push_back(std::move(fn));
    }
    return out;
}

RkhsFunction sample_rkhs_function(std::size_t m, const GridKernel& kernel, std::uint64_t seed) {
    return std::move(sample_rkhs_functions(1, m, kernel, seed).front());
}

void ChangeSchedule::validate(std::size_t grid_size) const {
    if (horizon == 0) {
        throw InputError("schedule horizon must be positive");
    }
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, AbruptSchedule>) {
                if (s.phases.size() != s.breakpoints.size() + 1) {
                    throw InputError("abrupt schedule needs one more phase than breakpoints");
                }
                for (std::size_t i = 0; i < s.breakpoints.size(); ++i) {
                    if (s.breakpoints[i] == 0 || (i > 0 && s.breakpoints[i] <= s.breakpoints[i - 1])) {
                        throw InputError("breakpoints must be positive and strictly increasing");
                    }
                }
            } else if constexpr (std::is_same_v<S, SlowSchedule>) {
                if (s.anchors.size() != 3) {
                    throw InputError("slow schedule needs exactly three anchors");
                }
            } else {
                if (static_cast<std::size_t>(s.rewards.rows()) != horizon ||
                    static_cast<std::size_t>(s.rewards.cols()) != grid_size) {
                    throw InputError("reward table must be horizon x arms");
                }
            }
        },
        kind);
}

Eigen::VectorXd ChangeSchedule::coefficients_at(std::size_t t, std::size_t grid_size) const {
    if (t < 1 || t > horizon) {
        throw InputError("round " + std::to_string(t) + " outside [1, " + std::to_string(horizon) + "]");
    }
    if (const auto* a = std::get_if<AbruptSchedule>(&kind)) {
        const auto phase = static_cast<std::size_t>(
            std::upper_bound(a->breakpoints.begin(), a->breakpoints.end(), t) - a->breakpoints.begin());
        return a->phases[phase].coefficients(grid_size);
    }
    if (const auto* s = std::get_if<SlowSchedule>(&kind)) {
        const double tt = static_cast<double>(t);
        const double big_t = static_cast<double>(horizon);
        const bool first_half = 2 * t <= horizon;
        const double w = first_half ? 2.0 * tt / big_t : (2.0 * tt - big_t) / big_t;
        const Eigen::VectorXd from = s->anchors[first_half ? 0 : 1].coefficients(grid_size);
        const Eigen::VectorXd to = s->anchors[first_half ? 1 : 2].coefficients(grid_size);
        if (w == 1.0) {
            return to;
        }
        return from + w * (to - from);
    }
    throw InputError("tabulated schedules have no kernel coefficients");
}

double reward_at(const ChangeSchedule& schedule, const GridKernel& kernel, std::size_t t, ArmIndex x) {
    if (x >= kernel.size()) {
        throw InputError("arm index outside the grid");
    }
    if (const auto* table = std::get_if<TableSchedule>(&schedule.kind)) {
        if (t < 1 || t > schedule.horizon) {
            throw InputError("round " + std::to_string(t) + " outside [1, " + std::to_string(schedule.horizon) + "]");
        }
        return table->rewards(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(x));
    }
    return kernel.gram().row(static_cast<Eigen::Index>(x)).dot(schedule.coefficients_at(t, kernel.size()));
}

double realized_budget(const ChangeSchedule& schedule, const GridKernel& kernel) {
    schedule.validate(kernel.size());
    double total = 0.0;
    if (const auto* table = std::get_if<TableSchedule>(&schedule.kind)) {
        const Factorization f = robust_cholesky(kernel.gram(), "finite-arm RKHS norm");
        for (std::size_t t = 1; t < schedule.horizon; ++t) {
            const Eigen::VectorXd d = (table->rewards.row(static_cast<Eigen::Index>(t)) -
                                       table->rewards.row(static_cast<Eigen::Index>(t - 1)))
                                          .transpose();
            total += std::sqrt(std::max(0.0, d.dot(f.llt.solve(d))));
        }
        return total;
    }
    Eigen::VectorXd prev = schedule.coefficients_at(1, kernel.size());
    for (std::size_t t = 2; t <= schedule.horizon; ++t) {
        Eigen::VectorXd cur = schedule.coefficients_at(t, kernel.size());
        const Eigen::VectorXd diff = cur - prev;
        if (diff.squaredNorm() > 0.0) {
            total += rkhs_norm(kernel, diff);
        }
        prev = std::move(cur);
    }
    return total;
}

NoiseModel::NoiseModel(double r, std::uint64_t seed) : r_(r), seed_(seed) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw InputError("noise scale R must be nonnegative");
    }
}

double NoiseModel::draw(std::size_t t, ArmIndex arm) const {
    if (r_ == 0.0) {
        return 0.0;
    }
    const std::uint64_t key = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(t) ^
                                                            splitmix64(0xa5a5a5a5ULL + static_cast<std::uint64_t>(arm))));
    std::mt19937_64 gen(key);
    std::normal_distribution<double> normal(0.0, r_);
    return normal(gen);
}

Environment::Environment(std::string name, std::shared_ptr<const GridKernel> kernel, ChangeSchedule schedule,
                         std::optional<double> declared_budget)
    : name_(std::move(name)), kernel_(std::move(kernel)), schedule_(std::move(schedule)) {
    if (!kernel_) {
        throw InputError("environment needs a kernel");
    }
    const std::size_t n = kernel_->size();
    schedule_.validate(n);
    const auto big_t = static_cast<Eigen::Index>(schedule_.horizon);

    if (const auto* table = std::get_if<TableSchedule>(&schedule_.kind)) {
        rewards_ = table->rewards;
        const Factorization f = robust_cholesky(kernel_->gram(), "finite-arm RKHS norm");
        for (Eigen::Index t = 0; t < big_t; ++t) {
            const Eigen::VectorXd row = rewards_.row(t).transpose();
            max_norm_ = std::max(max_norm_, std::sqrt(std::max(0.0, row.dot(f.llt.solve(row)))));
        }
    } else {
        rewards_.resize(big_t, static_cast<Eigen::Index>(n));
        for (Eigen::Index t = 0; t < big_t; ++t) {
            rewards_.row(t) = (kernel_->gram() * schedule_.coefficients_at(static_cast<std::size_t>(t + 1), n)).transpose();
        }
        const auto& fns = std::holds_alternative<AbruptSchedule>(schedule_.kind)
                              ? std::get<AbruptSchedule>(schedule_.kind).phases
                              : std::get<SlowSchedule>(schedule_.kind).anchors;
        for (const auto& f : fns) {
            max_norm_ = std::max(max_norm_, rkhs_norm(*kernel_, f.coefficients(n)));
        }
    }

    best_.resize(schedule_.horizon);
    for (Eigen::Index t = 0; t < big_t; ++t) {
        Eigen::Index arg = 0;
        rewards_.row(t).maxCoeff(&arg);
        best_[static_cast<std::size_t>(t)] = static_cast<ArmIndex>(arg);
    }

    budget_.realized = realized_budget(schedule_, *kernel_);
    budget_.declared = declared_budget.value_or(budget_.realized);
    if (budget_.realized > budget_.declared) {
        throw InputError("schedule realizes a variation budget of " + std::to_string(budget_.realized) +
                         ", above the declared " + std::to_string(budget_.declared));
    }
}

double Environment::reward(std::size_t t, ArmIndex x) const {
    if (t < 1 || t > horizon()) {
        throw InputError("round " + std::to_string(t) + " outside [1, " + std::to_string(horizon()) + "]");
    }
    if (x >= arm_count()) {
        throw InputError("arm index " + std::to_string(x) + " outside the grid");
    }
    return rewards_(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(x));
}

ArmIndex Environment::best_arm(std::size_t t) const {
    if (t < 1 || t > horizon()) {
        throw InputError("round outside the horizon");
    }
    return best_[t - 1];
}

double Environment::best_value(std::size_t t) const { return reward(t, best_arm(t)); }

double Observer::observe(std::size_t t, ArmIndex arm) {
    if (t <= last_round_) {
        throw ProtocolError("round " + std::to_string(t) + " was already observed (last observed round " +
                            std::to_string(last_round_) + ")");
    }
    const double y = env_->reward(t, arm) + noise_.draw(t, arm);
    last_round_ = t;
    return y;
}

ChangeSchedule cap_budget(ChangeSchedule schedule, const GridKernel& kernel, double declared) {
    if (!(declared >= 0.0)) {
        throw InputError("declared budget must be nonnegative");
    }
    if (std::holds_alternative<TableSchedule>(schedule.kind)) {
        throw InputError("tabulated schedules cannot be rescaled to a budget");
    }
    const double realized = realized_budget(schedule, kernel);
    if (realized <= declared) {
        return schedule;
    }
    auto& fns = std::holds_alternative<AbruptSchedule>(schedule.kind) ? std::get<AbruptSchedule>(schedule.kind).phases
                                                                       : std::get<SlowSchedule>(schedule.kind).anchors;
    const std::vector<RkhsFunction> original = fns;
    const Eigen::VectorXd base = original.front().coefficients(kernel.size());
    double scale = declared / realized * (1.0 - 1e-12);
    for (int attempt = 0; attempt < 8; ++attempt) {
        for (std::size_t i = 1; i < fns.size(); ++i) {
            fns[i] = scale > 0.0 ? from_coefficients(base + scale * (original[i].coefficients(kernel.size()) - base), kernel)
                                 : original.front();
        }
        if (realized_budget(schedule, kernel) <= declared) {
            return schedule;
        }
        scale *= 1.0 - 1e-9;
    }
    throw NumericalError("could not rescale the schedule below the declared budget");
}

Environment make_abrupt_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon,
                                    std::vector<std::size_t> breakpoints, std::size_t m, std::uint64_t seed,
                                    std::optional<double> declared_budget) {
    ChangeSchedule schedule;
    schedule.horizon = horizon;
    AbruptSchedule abrupt;
    abrupt.phases = sample_rkhs_functions(breakpoints.size() + 1, m, *kernel, seed);
    abrupt.breakpoints = std::move(breakpoints);
    schedule.kind = std::move(abrupt);
    if (declared_budget) {
        schedule = cap_budget(std::move(schedule), *kernel, *declared_budget);
    }
    return Environment("abrupt", std::move(kernel), std::move(schedule), declared_budget);
}

Environment make_slow_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon, std::size_t m,
                                  std::uint64_t seed, std::optional<double> declared_budget) {
    ChangeSchedule schedule;
    schedule.horizon = horizon;
    schedule.kind = SlowSchedule{sample_rkhs_functions(3, m, *kernel, seed)};
    if (declared_budget) {
        schedule = cap_budget(std::move(schedule), *kernel, *declared_budget);
    }
    return Environment("slow", std::move(kernel), std::move(schedule), declared_budget);
}

Environment make_stationary_environment(std::shared_ptr<const GridKernel> kernel, std::size_t horizon,
                                        std::size_t m, std::uint64_t seed) {
    ChangeSchedule schedule;
    schedule.horizon = horizon;
    schedule.kind = AbruptSchedule{{}, sample_rkhs_functions(1, m, *kernel, seed)};
    return Environment("stationary", std::move(kernel), std::move(schedule));
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

}  // namespace

PriceMatrix read_price_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open price file " + path.string());
    }
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw IngestionError("empty price file", 1, 1);
    }
    PriceMatrix out;
    out.identifiers = split_csv(lines.front());
    for (std::size_t c = 0; c < out.identifiers.size(); ++c) {
        if (out.identifiers[c].empty()) {
            throw IngestionError("missing stock identifier", 1, c + 1);
        }
    }
    const std::size_t cols = out.identifiers.size();
    const std::size_t days = lines.size() - 1;
    if (days == 0) {
        throw IngestionError("price file has no data rows", 2, 1);
    }
    out.prices.resize(static_cast<Eigen::Index>(days), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < days; ++r) {
        const std::size_t row = r + 2;
        const auto cells = split_csv(lines[r + 1]);
        if (cells.size() != cols) {
            throw IngestionError("ragged row with " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(cols),
                                 row, std::min(cells.size(), cols) + 1);
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string& cell = cells[c];
            if (cell.empty()) {
                throw IngestionError("missing value", row, c + 1);
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw IngestionError("non-numeric value '" + cell + "'", row, c + 1);
            }
            out.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return out;
}

void write_price_matrix(const PriceMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write price file " + path.string());
    }
    for (std::size_t c = 0; c < matrix.identifiers.size(); ++c) {
        out << (c ? "," : "") << matrix.identifiers[c];
    }
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < matrix.prices.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.prices.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", matrix.prices(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

PriceMatrix synthesize_price_matrix(std::size_t stocks, std::size_t days, std::uint64_t seed) {
    if (stocks == 0 || days == 0) {
        throw InputError("synthetic price matrix needs at least one stock and one day");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> start(20.0, 200.0);
    std::uniform_real_distribution<double> loading(0.2, 1.2);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Student-t returns give the heavy tails real closing prices show.
    std::student_t_distribution<double> heavy(3.0);

    PriceMatrix out;
    out.prices.resize(static_cast<Eigen::Index>(days), static_cast<Eigen::Index>(stocks));
    std::vector<double> level(stocks);
    std::vector<double> beta(stocks);
    for (std::size_t s = 0; s < stocks; ++s) {
        out.identifiers.push_back("S" + std::to_string(s + 1));
        level[s] = start(rng);
        beta[s] = loading(rng);
    }
    for (std::size_t d = 0; d < days; ++d) {
        const double market = 0.01 * normal(rng);
        for (std::size_t s = 0; s < stocks; ++s) {
            if (d > 0) {
                level[s] *= std::exp(0.0002 + beta[s] * market + 0.008 * heavy(rng));
            }
            out.prices(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) = level[s];
        }
    }
    return out;
}

Environment make_price_environment(const PriceMatrix& matrix) {
    const Eigen::MatrixXd& p = matrix.prices;
    if (p.rows() == 0 || p.cols() == 0) {
        throw InputError("empty price matrix");
    }
    const double lo = p.minCoeff();
    const double hi = p.maxCoeff();
    Eigen::MatrixXd normalized =
        hi > lo ? Eigen::MatrixXd((p.array() - lo) / (hi - lo)) : Eigen::MatrixXd::Zero(p.rows(), p.cols());

    const Eigen::MatrixXd centered = p.rowwise() - p.colwise().mean();
    const double denom = std::max<double>(1.0, static_cast<double>(p.rows() - 1));
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;

    auto kernel = std::make_shared<const GridKernel>(DomainGrid::uniform(static_cast<std::size_t>(p.cols())),
                                                     KernelSpec::empirical_covariance(cov));
    ChangeSchedule schedule;
    schedule.horizon = static_cast<std::size_t>(p.rows());
    schedule.kind = TableSchedule{std::move(normalized)};
    return Environment("stock", std::move(kernel), std::move(schedule));
}

Environment load_price_environment(const std::filesystem::path& path) {
    return make_price_environment(read_price_matrix(path));
}

}  // namespace wgpucb
