#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace wgpucb {

using Point = Eigen::VectorXd;

/// Position of an action inside a DomainGrid. Grid points are compared by index only.
using ArmIndex = std::size_t;

enum class KernelFamily { SquaredExponential, EmpiricalCovariance };

/// Kernel family plus the constants the information-gain bounds consume.
///
/// New families slot in by extending `KernelFamily` and `evaluate`; everything
/// downstream works on the grid Gram matrix.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double lengthscale = 1.0;
    /// Arm-indexed covariance, EmpiricalCovariance only. Max diagonal entry is 1.
    Eigen::MatrixXd covariance_table;
    /// Upper bound on |k(x, x')|.
    double kdot = 1.0;
    /// Assumed bound on k(x, x).
    double variance_cap = 1.0;

    static KernelSpec squared_exponential(double lengthscale);

    /// Builds an empirical-covariance kernel. The table is symmetrized, receives
    /// diagonal jitter, and is rescaled so that its largest diagonal entry is 1.
    static KernelSpec empirical_covariance(const Eigen::MatrixXd& table);

    /// Throws InputError when an invariant is violated.
    void validate() const;
};

/// Finite, ordered set of distinct points in [0,1]^d.
class DomainGrid {
public:
    /// Rows of `points` are the grid points.
    explicit DomainGrid(Eigen::MatrixXd points);

    /// `size` evenly spaced points covering [0,1] (a single point sits at 0).
    static DomainGrid uniform(std::size_t size);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    Point point(ArmIndex i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
    const Eigen::MatrixXd& points() const noexcept { return points_; }

private:
    Eigen::MatrixXd points_;
};

/// exp(-||x - x2||^2 / (2 l^2)).
double se_kernel(const Point& x, const Point& x2, double lengthscale);

/// k(grid[i], grid[j]) for any family.
double evaluate(const KernelSpec& spec, const DomainGrid& grid, ArmIndex i, ArmIndex j);

/// Squared-exponential Gram matrix over explicit points.
Eigen::MatrixXd kernel_matrix(std::span<const Point> points, const KernelSpec& spec);

/// Gram matrix over a subset of grid arms, any family.
Eigen::MatrixXd kernel_matrix(const DomainGrid& grid, std::span<const ArmIndex> arms, const KernelSpec& spec);

/// Entry s is k(points[s], x). Squared-exponential family.
Eigen::VectorXd kernel_vector(std::span<const Point> points, const Point& x, const KernelSpec& spec);

/// Entry s is k(grid[arms[s]], grid[x]), any family.
Eigen::VectorXd kernel_vector(const DomainGrid& grid, std::span<const ArmIndex> arms, ArmIndex x,
                              const KernelSpec& spec);

/// Diagonal jitter applied to standalone kernel matrices: 1e-10 * max(1, trace / size).
double standalone_jitter(const Eigen::MatrixXd& k);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& k);

/// PSD check with tolerance `rel_tol * trace` on the smallest eigenvalue.
bool is_positive_semidefinite(const Eigen::MatrixXd& k, double rel_tol = 1e-8);

/// Kernel bound to a grid with the full Gram matrix precomputed.
///
/// Every posterior, MIG and environment computation reads kernel values from
/// here, so the kernel family is resolved once.
class GridKernel {
public:
    GridKernel(DomainGrid grid, KernelSpec spec);

    const DomainGrid& grid() const noexcept { return grid_; }
    const KernelSpec& spec() const noexcept { return spec_; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    std::size_t size() const noexcept { return grid_.size(); }
    double operator()(ArmIndex i, ArmIndex j) const {
        return gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    /// Gram submatrix over `arms` (rows and columns in the given order).
    Eigen::MatrixXd submatrix(std::span<const ArmIndex> arms) const;
    /// Rows `arms`, all grid columns.
    Eigen::MatrixXd cross(std::span<const ArmIndex> arms) const;

private:
    DomainGrid grid_;
    KernelSpec spec_;
    Eigen::MatrixXd gram_;
};

}  // namespace wgpucb
