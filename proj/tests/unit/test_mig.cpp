#include "oracles.hpp"

#include "wgpucb/errors.hpp"
#include "wgpucb/mig.hpp"

#include <doctest.h>

#include <random>

using namespace wgpucb;

namespace {

const GridKernel& grid_kernel() {
    static const GridKernel k(DomainGrid::uniform(100), KernelSpec::squared_exponential(0.2));
    return k;
}

std::vector<ArmIndex> random_points(std::size_t t, std::mt19937_64& rng) {
    std::uniform_int_distribution<ArmIndex> arm(0, 99);
    std::vector<ArmIndex> pts(t);
    for (auto& p : pts) {
        p = arm(rng);
    }
    return pts;
}

}  // namespace

TEST_CASE("empirical double-weighted gain small cases") {
    const WeightScheme unit{1.0, 1.0, 0.0};
    CHECK(empirical_double_weighted_mig(grid_kernel(), std::vector<ArmIndex>{}, unit) == 0.0);
    CHECK(empirical_double_weighted_mig(grid_kernel(), std::vector<ArmIndex>{7}, unit) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(empirical_double_weighted_mig(grid_kernel(), std::vector<ArmIndex>{7, 7}, unit) ==
          doctest::Approx(0.549306).epsilon(1e-6));
}

TEST_CASE("empirical gain equals the nominal double-weighted determinant") {
    std::mt19937_64 rng(2);
    for (double eta : {0.8, 0.95}) {
        const auto pts = random_points(25, rng);
        const double got = empirical_double_weighted_mig(grid_kernel(), pts, WeightScheme{eta, 0.7, 0.0});
        // W^2 K W^2 with w_s = eta^{-s}, alpha_t = lambda w_t^2
        const std::size_t t = pts.size();
        Eigen::MatrixXd kbar = grid_kernel().submatrix(pts);
        for (std::size_t i = 0; i < t; ++i) {
            for (std::size_t j = 0; j < t; ++j) {
                kbar(i, j) *= std::pow(eta, -static_cast<double>(i + 1)) * std::pow(eta, -static_cast<double>(j + 1));
            }
        }
        const double alpha = 0.7 * std::pow(eta, -2.0 * t);
        CHECK(got == doctest::Approx(oracle::half_log_det_identity_plus(kbar / alpha)).epsilon(1e-8));
    }
}

TEST_CASE("unit discount gives the standard information gain") {
    std::mt19937_64 rng(8);
    const auto pts = random_points(40, rng);
    const double a = empirical_double_weighted_mig(grid_kernel(), pts, WeightScheme{1.0, 0.3, 0.0});
    CHECK(a == doctest::Approx(empirical_mig(grid_kernel(), pts, 0.3)).epsilon(1e-12));
    CHECK(a == doctest::Approx(oracle::half_log_det_identity_plus(grid_kernel().submatrix(pts) / 0.3)).epsilon(1e-10));
}

TEST_CASE("qff gain") {
    const DomainGrid grid = DomainGrid::uniform(100);
    const Eigen::MatrixXd one = build_qff(1, 1, 0.2).feature_matrix(grid);
    const WeightScheme unit{1.0, 1.0, 0.0};
    CHECK(empirical_qff_mig(one, std::vector<ArmIndex>{}, unit) == 0.0);
    CHECK(empirical_qff_mig(one, std::vector<ArmIndex>{5}, unit) == doctest::Approx(0.5 * std::log(2.0)));

    const Eigen::MatrixXd phi = build_qff(4, 1, 0.2).feature_matrix(grid);
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 10; ++rep) {
        const auto pts = random_points(20, rng);
        const WeightScheme s{0.9, 1.0, 0.0};
        const double primal = empirical_qff_mig(phi, pts, s, QffForm::Primal);
        const double dual = empirical_qff_mig(phi, pts, s, QffForm::Dual);
        CHECK(std::abs(primal - dual) <= 1e-8 * dual);
        // single weights sqrt(eta^{t-s}) on the features
        Eigen::MatrixXd rows(20, phi.cols());
        for (int i = 0; i < 20; ++i) {
            rows.row(i) = std::sqrt(std::pow(0.9, 19 - i)) * phi.row(static_cast<Eigen::Index>(pts[i]));
        }
        CHECK(dual == doctest::Approx(oracle::half_log_det_identity_plus(rows * rows.transpose())).epsilon(1e-10));
    }
}

TEST_CASE("universal bound") {
    CHECK(mig_universal_bound(3, 0, 1.0, 1.0, 0.5) == 0.0);
    CHECK(mig_universal_bound(1, 1, 1.0, 1.0, 0.0) == doctest::Approx(0.5 * std::log(2.0)));
    CHECK(mig_universal_bound(2, 4, 1.0, 1.0, 0.1) == doctest::Approx(std::log(3.0) + 0.2));
    CHECK(mig_universal_bound(2, 4, 1.0, 1.0, 0.1) == doctest::Approx(1.298612).epsilon(1e-6));
}

TEST_CASE("weight bound") {
    const double eta = std::sqrt(0.5);
    CHECK(mig_weight_bound(1, eta, 1.0, 1.0, 0.0) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
    CHECK(mig_weight_bound(1, eta, 1.0, 1.0, 0.2) == doctest::Approx(0.5 * std::log(3.0) + 0.2).epsilon(1e-12));
    CHECK(mig_weight_bound(1, 0.5, 1.0, 1.0, 0.0, WeightOrder::Single) == doctest::Approx(0.5 * std::log(3.0)));
    CHECK_THROWS_AS(mig_weight_bound(1, 1.0, 1.0, 1.0, 0.0), InputError);
    CHECK_THROWS_AS(mig_weight_bound(1, 0.0, 1.0, 1.0, 0.0), InputError);
}

TEST_CASE("eigendecay closed forms") {
    const double eta = std::sqrt(0.5);
    EigendecayParams poly;
    poly.kind = EigendecayKind::Polynomial;
    poly.c_p = 1.0;
    poly.beta_p = 2.0;
    poly.psi = 1.0;
    const double l3 = std::log(3.0);
    CHECK(mig_eigendecay_bound(poly, eta, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0) * std::sqrt(l3) + l3));
    CHECK(mig_eigendecay_bound(poly, eta, 1.0, 1.0) == doctest::Approx(2.580).epsilon(1e-3));

    EigendecayParams expo;
    expo.kind = EigendecayKind::Exponential;
    expo.c_e1 = 1.0;
    expo.c_e2 = 1.0;
    expo.psi = 1.0;
    CHECK(mig_eigendecay_bound(expo, eta, 1.0, 1.0) == doctest::Approx((std::log(2.0) + 1.0) * l3));
    CHECK(mig_eigendecay_bound(expo, eta, 1.0, 1.0) == doctest::Approx(1.860).epsilon(1e-3));

    CHECK(mig_eigendecay_bound(expo, 0.9, 1.0, 1.0) >= mig_eigendecay_bound(expo, 0.5, 1.0, 1.0));
    CHECK(mig_eigendecay_bound(poly, 0.9, 1.0, 1.0) >= mig_eigendecay_bound(poly, 0.5, 1.0, 1.0));

    expo.beta_e = 2.0;
    CHECK_THROWS_AS(mig_eigendecay_bound(expo, eta, 1.0, 1.0), InputError);
}

TEST_CASE("tail bounds") {
    EigendecayParams p = EigendecayParams::squared_exponential_default();
    CHECK(p.tail_bound(3) == doctest::Approx(1.2 / 0.5 * std::exp(-1.5)));
    p.kind = EigendecayKind::Polynomial;
    p.c_p = 2.0;
    p.beta_p = 3.0;
    CHECK(p.tail_bound(4) == doctest::Approx(2.0 * std::pow(4.0, -2.0) / 2.0));
    const auto at = p.at_dimension(4);
    CHECK(at.n == 4);
    CHECK(at.delta_n == p.tail_bound(4));
}

TEST_CASE("default SE constants majorize the grid spectrum") {
    const Eigen::MatrixXd k = oracle::se_gram(oracle::linspace(100), 0.2) / 100.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    const auto p = EigendecayParams::squared_exponential_default();
    for (Eigen::Index m = 0; m < ev.size(); ++m) {
        CHECK(ev(m) <= p.c_e1 * std::exp(-p.c_e2 * static_cast<double>(m + 1)));
    }
}

TEST_CASE("empirical gains stay under the weight bounds") {
    std::mt19937_64 rng(12);
    const auto decay = EigendecayParams::squared_exponential_default();
    for (double eta : {0.9, 0.95, 0.99}) {
        const double bound = best_weight_bound(decay, eta, 1.0, 1.0);
        for (int rep = 0; rep < 3; ++rep) {
            const auto pts = random_points(150, rng);
            CHECK(empirical_double_weighted_mig(grid_kernel(), pts, WeightScheme{eta, 1.0, 0.0}) <= bound);
        }
        CHECK(best_weight_bound(decay, eta, 1.0, 1.0) <= mig_weight_bound(7, eta, 1.0, 1.0, decay.tail_bound(7)));
    }
    CHECK(best_universal_bound(decay, 100, 1.0, 1.0) <= mig_universal_bound(10, 100, 1.0, 1.0, decay.tail_bound(10)));
}
