#include "wgpucb/qff.hpp"

#include "wgpucb/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace wgpucb {

double hermite(int n, double x) {
    if (n < 0) {
        throw InputError("hermite: negative degree");
    }
    if (n == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> hermite_roots(int mbar) {
    if (mbar < 1 || mbar > 64) {
        throw InputError("hermite_roots: mbar must be in [1, 64], got " + std::to_string(mbar));
    }
    const auto n = static_cast<Eigen::Index>(mbar);
    // Jacobi matrix of the weight exp(-x^2): zero diagonal, off-diagonal sqrt(k/2).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 1; k < n; ++k) {
        sub(k - 1) = std::sqrt(static_cast<double>(k) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + n);

    // One Newton step on H_mbar, with H'_n = 2n H_{n-1}.
    for (double& r : roots) {
        const double d = 2.0 * mbar * hermite(mbar - 1, r);
        if (d != 0.0) {
            const double step = hermite(mbar, r) / d;
            if (std::isfinite(step)) {
                r -= step;
            }
        }
    }
    for (std::size_t i = 0; i < roots.size() / 2; ++i) {
        const double a = 0.5 * (roots[roots.size() - 1 - i] - roots[i]);
        roots[i] = -a;
        roots[roots.size() - 1 - i] = a;
    }
    if (roots.size() % 2 == 1) {
        roots[roots.size() / 2] = 0.0;
    }
    return roots;
}

QffMap build_qff(int mbar, int dimension, double lengthscale) {
    if (mbar < 1 || dimension < 1 || !(lengthscale > 0.0)) {
        throw InputError("build_qff: mbar, dimension and lengthscale must be positive");
    }
    double count = 1.0;
    for (int j = 0; j < dimension; ++j) {
        count *= mbar;
        if (count > static_cast<double>(kMaxQffNodes)) {
            throw ConfigError("build_qff: mbar^d exceeds " + std::to_string(kMaxQffNodes) + " nodes");
        }
    }
    const auto roots = hermite_roots(mbar);

    // log of 2^{mbar-1} mbar! / mbar^2 and 1/H_{mbar-1}(rho)^2 per 1-D node.
    const double log_numerator = (mbar - 1) * std::log(2.0) + std::lgamma(mbar + 1.0) - 2.0 * std::log(mbar);
    std::vector<double> log_w1(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        log_w1[i] = log_numerator - 2.0 * std::log(std::abs(hermite(mbar - 1, roots[i])));
    }

    QffMap map;
    map.mbar = mbar;
    map.dimension = dimension;
    map.m = static_cast<std::size_t>(count);
    map.lengthscale = lengthscale;
    map.nodes.resize(static_cast<Eigen::Index>(map.m), dimension);
    map.node_weights.resize(static_cast<Eigen::Index>(map.m));
    // Node i enumerates the Cartesian product with the last coordinate fastest.
    for (std::size_t i = 0; i < map.m; ++i) {
        std::size_t rem = i;
        double log_v = 0.0;
        for (int j = dimension - 1; j >= 0; --j) {
            const std::size_t digit = rem % static_cast<std::size_t>(mbar);
            rem /= static_cast<std::size_t>(mbar);
            map.nodes(static_cast<Eigen::Index>(i), j) = roots[digit];
            log_v += log_w1[digit];
        }
        map.node_weights(static_cast<Eigen::Index>(i)) = std::exp(log_v);
    }
    map.eps_m = qff_error_bound(mbar, dimension, lengthscale);
    return map;
}

Eigen::VectorXd QffMap::features(const Point& x) const {
    if (x.size() != dimension) {
        throw InputError("qff_features: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(dimension) + ")");
    }
    const auto mm = static_cast<Eigen::Index>(m);
    const Eigen::VectorXd arg = (std::numbers::sqrt2 / lengthscale) * (nodes * x);
    const Eigen::ArrayXd root_v = node_weights.array().sqrt();
    Eigen::VectorXd phi(2 * mm);
    phi.head(mm) = root_v * arg.array().cos();
    phi.tail(mm) = root_v * arg.array().sin();
    return phi;
}

Eigen::MatrixXd QffMap::feature_matrix(const DomainGrid& grid) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(2 * m));
    for (std::size_t a = 0; a < grid.size(); ++a) {
        out.row(static_cast<Eigen::Index>(a)) = features(grid.point(a)).transpose();
    }
    return out;
}

Eigen::VectorXd qff_features(const QffMap& map, const Point& x) { return map.features(x); }

double qff_error_bound(int mbar, int dimension, double lengthscale) {
    if (mbar < 1 || dimension < 1 || !(lengthscale > 0.0)) {
        throw InputError("qff_error_bound: mbar, dimension and lengthscale must be positive");
    }
    const double d = dimension;
    const double log_bound = std::log(d) + (d - 1.0) * std::log(2.0) - 0.5 * std::log(2.0) -
                             mbar * std::log(static_cast<double>(mbar)) +
                             mbar * (1.0 - std::log(4.0 * lengthscale * lengthscale));
    return std::exp(log_bound);
}

}  // namespace wgpucb
