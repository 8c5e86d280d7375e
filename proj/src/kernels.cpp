#include "wgpucb/kernels.hpp"

#include "wgpucb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wgpucb {

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
    KernelSpec spec;
    spec.family = KernelFamily::SquaredExponential;
    spec.lengthscale = lengthscale;
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::empirical_covariance(const Eigen::MatrixXd& table) {
    if (table.rows() == 0 || table.rows() != table.cols()) {
        throw InputError("covariance table must be square and nonempty");
    }
    if (!table.allFinite()) {
        throw InputError("covariance table contains non-finite entries");
    }
    if ((table - table.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, table.cwiseAbs().maxCoeff())) {
        throw InputError("covariance table is not symmetric");
    }
    Eigen::MatrixXd sym = 0.5 * (table + table.transpose());
    sym.diagonal().array() += standalone_jitter(sym);
    const double max_diag = sym.diagonal().maxCoeff();
    if (!(max_diag > 0.0)) {
        throw InputError("covariance table has no positive diagonal entry");
    }
    KernelSpec spec;
    spec.family = KernelFamily::EmpiricalCovariance;
    spec.covariance_table = sym / max_diag;
    spec.kdot = spec.covariance_table.cwiseAbs().maxCoeff();
    spec.variance_cap = 1.0;
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    switch (family) {
    case KernelFamily::SquaredExponential:
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
            throw InputError("squared-exponential lengthscale must be positive, got " + std::to_string(lengthscale));
        }
        if (kdot != 1.0 || variance_cap != 1.0) {
            throw InputError("squared-exponential kernel requires kdot = 1 and variance_cap = 1");
        }
        break;
    case KernelFamily::EmpiricalCovariance: {
        const auto n = covariance_table.rows();
        if (n == 0 || covariance_table.cols() != n) {
            throw InputError("empirical covariance kernel needs a square table");
        }
        if (!covariance_table.isApprox(covariance_table.transpose(), 1e-12)) {
            throw InputError("covariance table is not symmetric");
        }
        if (covariance_table.diagonal().maxCoeff() > variance_cap + 1e-12) {
            throw InputError("covariance table violates k(x,x) <= variance_cap");
        }
        if (!is_positive_semidefinite(covariance_table)) {
            throw InputError("covariance table is not positive semidefinite");
        }
        if (!(kdot > 0.0)) {
            throw InputError("kdot must be positive");
        }
        break;
    }
    }
}

DomainGrid::DomainGrid(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() == 0 || points_.cols() == 0) {
        throw InputError("domain grid must contain at least one point of positive dimension");
    }
    if ((points_.array() < 0.0).any() || (points_.array() > 1.0).any() || !points_.allFinite()) {
        throw InputError("domain grid coordinates must lie in [0,1]");
    }
    for (Eigen::Index i = 0; i < points_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < points_.rows(); ++j) {
            if (points_.row(i) == points_.row(j)) {
                throw InputError("domain grid points must be distinct (rows " + std::to_string(i) + " and " +
                                 std::to_string(j) + ")");
            }
        }
    }
}

DomainGrid DomainGrid::uniform(std::size_t size) {
    if (size == 0) {
        throw InputError("grid size must be positive");
    }
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(size), 1);
    if (size == 1) {
        pts(0, 0) = 0.0;
    } else {
        for (std::size_t i = 0; i < size; ++i) {
            pts(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i) / static_cast<double>(size - 1);
        }
    }
    return DomainGrid(std::move(pts));
}

double se_kernel(const Point& x, const Point& x2, double lengthscale) {
    if (x.size() != x2.size()) {
        throw InputError("se_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(x2.size()) + ")");
    }
    if (!(lengthscale > 0.0)) {
        throw InputError("se_kernel: lengthscale must be positive");
    }
    const double two_l2 = 2.0 * lengthscale * lengthscale;
    return std::exp(-(x - x2).squaredNorm() / two_l2);
}

double evaluate(const KernelSpec& spec, const DomainGrid& grid, ArmIndex i, ArmIndex j) {
    if (i >= grid.size() || j >= grid.size()) {
        throw InputError("arm index out of range");
    }
    switch (spec.family) {
    case KernelFamily::SquaredExponential:
        return se_kernel(grid.point(i), grid.point(j), spec.lengthscale);
    case KernelFamily::EmpiricalCovariance:
        if (static_cast<std::size_t>(spec.covariance_table.rows()) != grid.size()) {
            throw InputError("covariance table size does not match the grid");
        }
        return spec.covariance_table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return 0.0;
}

namespace {

void require_se(const KernelSpec& spec, const char* what) {
    if (spec.family != KernelFamily::SquaredExponential) {
        throw InputError(std::string(what) + ": point-based evaluation needs the squared-exponential family");
    }
}

}  // namespace

Eigen::MatrixXd kernel_matrix(std::span<const Point> points, const KernelSpec& spec) {
    require_se(spec, "kernel_matrix");
    if (points.empty()) {
        throw InputError("kernel_matrix: empty point list");
    }
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = se_kernel(points[i], points[i], spec.lengthscale);
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = k(j, i) = se_kernel(points[i], points[j], spec.lengthscale);
        }
    }
    return k;
}

Eigen::MatrixXd kernel_matrix(const DomainGrid& grid, std::span<const ArmIndex> arms, const KernelSpec& spec) {
    if (arms.empty()) {
        throw InputError("kernel_matrix: empty arm list");
    }
    const auto n = static_cast<Eigen::Index>(arms.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = evaluate(spec, grid, arms[i], arms[j]);
        }
    }
    return k;
}

Eigen::VectorXd kernel_vector(std::span<const Point> points, const Point& x, const KernelSpec& spec) {
    require_se(spec, "kernel_vector");
    Eigen::VectorXd v(static_cast<Eigen::Index>(points.size()));
    for (std::size_t s = 0; s < points.size(); ++s) {
        v(static_cast<Eigen::Index>(s)) = se_kernel(points[s], x, spec.lengthscale);
    }
    return v;
}

Eigen::VectorXd kernel_vector(const DomainGrid& grid, std::span<const ArmIndex> arms, ArmIndex x,
                              const KernelSpec& spec) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arms.size()));
    for (std::size_t s = 0; s < arms.size(); ++s) {
        v(static_cast<Eigen::Index>(s)) = evaluate(spec, grid, arms[s], x);
    }
    return v;
}

double standalone_jitter(const Eigen::MatrixXd& k) {
    if (k.rows() == 0) {
        return 1e-10;
    }
    return 1e-10 * std::max(1.0, k.trace() / static_cast<double>(k.rows()));
}

double min_eigenvalue(const Eigen::MatrixXd& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool is_positive_semidefinite(const Eigen::MatrixXd& k, double rel_tol) {
    if (k.rows() == 0) {
        return true;
    }
    const double scale = std::max(1.0, std::abs(k.trace()));
    return min_eigenvalue(k) >= -rel_tol * scale;
}

GridKernel::GridKernel(DomainGrid grid, KernelSpec spec) : grid_(std::move(grid)), spec_(std::move(spec)) {
    spec_.validate();
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (spec_.family == KernelFamily::EmpiricalCovariance) {
        if (spec_.covariance_table.rows() != n) {
            throw InputError("covariance table size does not match the grid");
        }
        gram_ = spec_.covariance_table;
        return;
    }
    gram_.resize(n, n);
    const double two_l2 = 2.0 * spec_.lengthscale * spec_.lengthscale;
    const auto& pts = grid_.points();
    for (Eigen::Index i = 0; i < n; ++i) {
        gram_(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            gram_(i, j) = gram_(j, i) = std::exp(-(pts.row(i) - pts.row(j)).squaredNorm() / two_l2);
        }
    }
}

Eigen::MatrixXd GridKernel::submatrix(std::span<const ArmIndex> arms) const {
    const auto n = static_cast<Eigen::Index>(arms.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            k(i, j) = gram_(static_cast<Eigen::Index>(arms[i]), static_cast<Eigen::Index>(arms[j]));
        }
    }
    return k;
}

Eigen::MatrixXd GridKernel::cross(std::span<const ArmIndex> arms) const {
    Eigen::MatrixXd k(static_cast<Eigen::Index>(arms.size()), gram_.cols());
    for (std::size_t s = 0; s < arms.size(); ++s) {
        k.row(static_cast<Eigen::Index>(s)) = gram_.row(static_cast<Eigen::Index>(arms[s]));
    }
    return k;
}

}  // namespace wgpucb
