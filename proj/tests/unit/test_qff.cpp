#include "oracles.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/kernels.hpp"
#include "wgpucb/qff.hpp"

#include <doctest.h>

#include <cmath>

using namespace wgpucb;

TEST_CASE("hermite roots small cases") {
    CHECK(hermite_roots(1) == std::vector<double>{0.0});
    const auto r2 = hermite_roots(2);
    REQUIRE(r2.size() == 2);
    CHECK(r2[0] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r2[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r2[1] == doctest::Approx(0.707107).epsilon(1e-6));
    const auto r3 = hermite_roots(3);
    REQUIRE(r3.size() == 3);
    CHECK(r3[0] == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-15));
    CHECK(r3[1] == 0.0);
    CHECK(r3[2] == doctest::Approx(1.224745).epsilon(1e-6));
}

TEST_CASE("hermite roots agree with bisection and have small residuals") {
    for (int n = 1; n <= 20; ++n) {
        const auto roots = hermite_roots(n);
        const auto ref = oracle::hermite_roots_bisection(n);
        REQUIRE(roots.size() == ref.size());
        for (std::size_t i = 0; i < roots.size(); ++i) {
            CHECK(roots[i] == doctest::Approx(ref[i]).epsilon(1e-10));
            CHECK(roots[i] == -roots[roots.size() - 1 - i]);
            // derivative H_n' = 2n H_{n-1} sets the local scale
            const double scale = std::abs(2.0 * n * hermite(n - 1, roots[i])) * (1.0 + std::abs(roots[i]));
            CHECK(std::abs(hermite(n, roots[i])) <= 1e-8 * scale);
        }
    }
    for (int n : {30, 48, 64}) {
        const auto roots = hermite_roots(n);
        CHECK(roots.size() == static_cast<std::size_t>(n));
        CHECK(std::is_sorted(roots.begin(), roots.end()));
        for (const double r : roots) {
            const double scale = std::abs(2.0 * n * hermite(n - 1, r)) * (1.0 + std::abs(r));
            CHECK(std::abs(hermite(n, r)) <= 1e-8 * scale);
        }
    }
    CHECK_THROWS_AS(hermite_roots(0), InputError);
    CHECK_THROWS_AS(hermite_roots(65), InputError);
}

TEST_CASE("hermite recurrence matches the explicit series") {
    for (int n = 0; n <= 12; ++n) {
        for (double x : {-1.7, -0.3, 0.0, 0.4, 2.2}) {
            CHECK(hermite(n, x) == doctest::Approx(oracle::hermite_series(n, x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("build_qff node sets and weights") {
    const QffMap one = build_qff(1, 1, 0.3);
    REQUIRE(one.m == 1);
    CHECK(one.nodes(0, 0) == 0.0);
    CHECK(one.node_weights(0) == doctest::Approx(1.0).epsilon(1e-15));

    const QffMap two = build_qff(2, 2, 0.3);
    CHECK(two.m == 4);
    CHECK(two.feature_count() == 8);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(std::abs(two.nodes(i, 0)) == doctest::Approx(std::sqrt(0.5)));
        CHECK(std::abs(two.nodes(i, 1)) == doctest::Approx(std::sqrt(0.5)));
    }

    const QffMap w2 = build_qff(2, 1, 0.3);
    CHECK(w2.node_weights(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w2.node_weights(1) == doctest::Approx(0.5).epsilon(1e-14));

    for (int mbar = 1; mbar <= 30; ++mbar) {
        const QffMap q = build_qff(mbar, 1, 0.5);
        CHECK(q.node_weights.minCoeff() > 0.0);
        CHECK(q.node_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
        // Gauss-Hermite weights divided by sqrt(pi): 2^{n-1} n! / (n^2 H_{n-1}(x)^2)
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(q.m); ++i) {
            const double x = q.nodes(i, 0);
            const double h = oracle::hermite_series(mbar - 1, x);
            const double ref = std::pow(2.0, mbar - 1) * std::tgamma(mbar + 1.0) / (mbar * mbar * h * h);
            CHECK(q.node_weights(i) == doctest::Approx(ref).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(build_qff(20, 4, 0.5), ConfigError);
    CHECK(build_qff(5, 3, 0.5).eps_m == qff_error_bound(5, 3, 0.5));
}

TEST_CASE("qff features") {
    const QffMap one = build_qff(1, 1, 0.2);
    for (double x : {0.0, 0.37, 1.0}) {
        Point p(1);
        p << x;
        const Eigen::VectorXd phi = qff_features(one, p);
        REQUIRE(phi.size() == 2);
        CHECK(phi(0) == 1.0);
        CHECK(phi(1) == 0.0);
    }

    const QffMap q = build_qff(6, 1, 0.4);
    Point a(1), b(1);
    a << 0.12;
    b << 0.81;
    const Eigen::VectorXd fa = qff_features(q, a);
    const Eigen::VectorXd fb = qff_features(q, b);
    CHECK(fa.dot(fb) == fb.dot(fa));
    CHECK(fa.squaredNorm() == doctest::Approx(q.node_weights.sum()).epsilon(1e-14));
    CHECK(fb.squaredNorm() == doctest::Approx(q.node_weights.sum()).epsilon(1e-14));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(q.m); ++i) {
        const double arg = std::sqrt(2.0) / 0.4 * q.nodes(i, 0) * 0.12;
        CHECK(fa(i) == doctest::Approx(std::sqrt(q.node_weights(i)) * std::cos(arg)).epsilon(1e-14));
        CHECK(fa(i + 6) == doctest::Approx(std::sqrt(q.node_weights(i)) * std::sin(arg)).epsilon(1e-14));
    }
    Point bad(2);
    bad << 0.1, 0.2;
    CHECK_THROWS_AS(qff_features(q, bad), InputError);

    const Eigen::MatrixXd phi = q.feature_matrix(DomainGrid::uniform(40));
    CHECK(min_eigenvalue(phi * phi.transpose()) >= -1e-10);
}

TEST_CASE("qff error bound closed form") {
    CHECK(qff_error_bound(4, 1, 0.5) == doctest::Approx(std::exp(4.0) / (std::sqrt(2.0) * 256.0)).epsilon(1e-12));
    CHECK(qff_error_bound(4, 1, 0.5) == doctest::Approx(0.1508).epsilon(1e-3));
    const double ref8 = std::pow(std::exp(1.0) / 4.0, 8) / (std::sqrt(2.0) * std::pow(8.0, 8));
    CHECK(qff_error_bound(8, 1, 1.0) == doctest::Approx(ref8).epsilon(1e-12));
    CHECK(qff_error_bound(8, 1, 1.0) < qff_error_bound(4, 1, 1.0));
    CHECK(qff_error_bound(3, 2, 0.5) ==
          doctest::Approx(2.0 * 2.0 / (std::sqrt(2.0) * 27.0) * std::pow(std::exp(1.0), 3)).epsilon(1e-12));
}

TEST_CASE("qff approximation stays within the bound") {
    const DomainGrid grid = DomainGrid::uniform(101);
    for (double l : {0.2, 0.5, 1.0}) {
        const GridKernel k(grid, KernelSpec::squared_exponential(l));
        for (int mbar : {4, 6, 8}) {
            const QffMap q = build_qff(mbar, 1, l);
            const Eigen::MatrixXd phi = q.feature_matrix(grid);
            const double sup = (phi * phi.transpose() - k.gram()).cwiseAbs().maxCoeff();
            CHECK(sup <= q.eps_m);
        }
    }
}

TEST_CASE("build_qff is deterministic") {
    const QffMap a = build_qff(7, 2, 0.3);
    const QffMap b = build_qff(7, 2, 0.3);
    CHECK(a.nodes == b.nodes);
    CHECK(a.node_weights == b.node_weights);
}
