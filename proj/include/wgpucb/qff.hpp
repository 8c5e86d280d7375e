#pragma once

#include "wgpucb/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace wgpucb {

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
double hermite(int n, double x);

/// Roots of H_mbar, ascending and exactly symmetric about zero. 1 <= mbar <= 64.
std::vector<double> hermite_roots(int mbar);

/// Quadrature Fourier feature map for the squared-exponential kernel on [0,1]^d.
///
/// Nodes are the d-fold Cartesian product of the Hermite roots; the feature
/// vector stacks a cosine block and a sine block, so its length is 2m with
/// m = mbar^d. Feature inner products approximate k uniformly within `eps_m`.
struct QffMap {
    int mbar = 0;
    int dimension = 0;
    std::size_t m = 0;
    /// m x d, row i is node rho_i.
    Eigen::MatrixXd nodes;
    /// v(rho_i), all positive; they sum to 1 up to quadrature roundoff.
    Eigen::VectorXd node_weights;
    double lengthscale = 1.0;
    double eps_m = 0.0;

    std::size_t feature_count() const noexcept { return 2 * m; }

    Eigen::VectorXd features(const Point& x) const;
    /// Row a holds the features of grid point a.
    Eigen::MatrixXd feature_matrix(const DomainGrid& grid) const;
};

/// Largest admissible node count mbar^d.
inline constexpr std::size_t kMaxQffNodes = 100000;

QffMap build_qff(int mbar, int dimension, double lengthscale);

Eigen::VectorXd qff_features(const QffMap& map, const Point& x);

/// Uniform error bound for SE on [0,1]^d:
/// d 2^{d-1} / (sqrt(2) mbar^mbar) * (e / (4 l^2))^mbar.
double qff_error_bound(int mbar, int dimension, double lengthscale);

}  // namespace wgpucb
