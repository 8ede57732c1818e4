#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shapecov/baselines.hpp"
#include "support/test_util.hpp"

using namespace shapecov;

namespace {

HermitianMatrix toeplitz_theta0(int p) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(p, p);
    for (int i = 0; i + 1 < p; ++i) {
        t(i, i + 1) = Complex(0.2, 0.2);
        t(i + 1, i) = Complex(0.2, -0.2);
    }
    for (int i = 0; i + 2 < p; ++i) {
        t(i, i + 2) = Complex(0.04, 0.04);
        t(i + 2, i) = Complex(0.04, -0.04);
    }
    return HermitianMatrix(t);
}

SampleSet from_columns(const Eigen::MatrixXcd& cols) {
    RawSampleSet raw;
    raw.p = static_cast<int>(cols.rows());
    raw.n = static_cast<int>(cols.cols());
    raw.samples = cols;
    return normalize_to_cae(raw);
}

}  // namespace

TEST_CASE("sample covariance closed-form cases") {
    Eigen::MatrixXcd cols(2, 3);
    cols.col(0) << 1.0, 0.0;
    cols.col(1) << 1.0, 0.0;
    cols.col(2) << 1.0, 0.0;
    const EstimateReport r = sample_covariance(from_columns(cols));
    Eigen::MatrixXcd e11 = Eigen::MatrixXcd::Zero(2, 2);
    e11(0, 0) = 1.0;
    CHECK((r.theta().mat() - e11).norm() < 1e-15);

    Eigen::MatrixXcd one(2, 1);
    one.col(0) << Complex(0.6, 0.0), Complex(0.0, 0.8);
    const EstimateReport r1 = sample_covariance(from_columns(one));
    CHECK(hermitian_eig(r1.theta()).values.minCoeff() > -1e-15);
    CHECK(r1.theta().trace() == doctest::Approx(1.0).epsilon(1e-12));

    const SampleSet big = sample_cae(HermitianMatrix::identity(2), 100000, 3);
    const EstimateReport rb = sample_covariance(big);
    CHECK((rb.theta().mat() - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).norm() < 0.05);
    // with a trace gauge the same estimate lands on the identity
    const EstimateReport rg = sample_covariance(big, 2.0);
    CHECK((rg.theta().mat() - Eigen::MatrixXcd::Identity(2, 2)).norm() < 0.05);
}

TEST_CASE("tyler handles the scalar case in one step") {
    const SampleSet s = sample_cae(HermitianMatrix::identity(1), 8, 9);
    const EstimateReport r = tyler(s);
    CHECK(r.existed);
    CHECK(r.theta().mat()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tyler converges to a fixed point of its own map") {
    const HermitianMatrix t0 = toeplitz_theta0(3);
    const SampleSet s = sample_cae(t0, 30, 19);
    const EstimateReport r = tyler(s);
    REQUIRE(r.existed);
    CHECK(r.residual < 1e-8);
    CHECK(r.theta().trace() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("tyler reports nonexistence for n <= p") {
    const SampleSet s = sample_cae(HermitianMatrix::identity(4), 3, 7);
    const EstimateReport r = tyler(s);
    CHECK_FALSE(r.existed);
    CHECK_FALSE(r.theta_hat.has_value());
    CHECK_THROWS_AS(r.theta(), std::runtime_error);
}

TEST_CASE("tyler is invariant to per-sample scaling") {
    const HermitianMatrix t0 = toeplitz_theta0(3);
    RawSampleSet raw = sample_compound_gaussian(t0, 24, TextureLaw::constant(), 45);
    auto rs = testutil::stream(46);
    RawSampleSet scaled = raw;
    scaled.gaussian_part.resize(0, 0);  // force normalization of the scaled vectors
    for (int i = 0; i < scaled.n; ++i) {
        const Complex c(rs.normal() + 3.5, rs.normal());  // arbitrary nonzero scalars
        scaled.samples.col(i) *= c;
    }
    raw.gaussian_part.resize(0, 0);
    const EstimateReport a = tyler(normalize_to_cae(raw));
    const EstimateReport b = tyler(normalize_to_cae(scaled));
    REQUIRE(a.existed);
    REQUIRE(b.existed);
    CHECK((a.theta().mat() - b.theta().mat()).norm() < 1e-12);
}

TEST_CASE("tyler fixed point is unique across initializations") {
    const HermitianMatrix t0 = toeplitz_theta0(4);
    const SampleSet s = sample_cae(t0, 20, 77);
    const EstimateReport from_identity = tyler(s);
    auto rs = testutil::stream(78);
    TylerOptions opts;
    opts.init = testutil::random_pd(4, rs);
    const EstimateReport from_random = tyler(s, opts);
    REQUIRE(from_identity.existed);
    REQUIRE(from_random.existed);
    CHECK((from_identity.theta().mat() - from_random.theta().mat()).norm() < 1e-8);
}

TEST_CASE("tyler maximizes the CAE likelihood locally") {
    const HermitianMatrix t0 = toeplitz_theta0(3);
    const SampleSet s = sample_cae(t0, 30, 101);
    const EstimateReport r = tyler(s);
    REQUIRE(r.existed);
    const double nll_tyler = cae_negative_log_likelihood(r.theta(), s);
    auto rs = testutil::stream(102);
    for (int rep = 0; rep < 50; ++rep) {
        HermitianMatrix cand = rep % 2 == 0
            ? testutil::random_pd(3, rs).with_trace(3.0)
            : HermitianMatrix(r.theta().mat() +
                              0.05 * testutil::random_hermitian(3, rs).mat() +
                              0.2 * Eigen::MatrixXcd::Identity(3, 3))
                  .with_trace(3.0);
        if (hermitian_eig(cand).values.minCoeff() <= 1e-9) continue;
        CHECK(nll_tyler <= cae_negative_log_likelihood(cand, s) + 1e-9);
    }
}

TEST_CASE("projection estimator contracts toward structured truth") {
    const int p = 3;
    const HermitianMatrix t0 = toeplitz_theta0(p);
    const AffineStructure s = scale_fix(toeplitz_structure(p), static_cast<double>(p));
    REQUIRE(s.membership_residual(t0) < 1e-10);
    for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
        const SampleSet samples = sample_cae(t0, 30, seed);
        const EstimateReport ty = tyler(samples);
        REQUIRE(ty.existed);
        const EstimateReport pr = projection_estimator(samples, s);
        CHECK(pr.method == "proj(tyler)");
        const double err_proj = (pr.theta().mat() - t0.mat()).norm();
        const double err_tyler = (ty.theta().with_trace(p).mat() - t0.mat()).norm();
        CHECK(err_proj <= err_tyler + 1e-9);
        CHECK(s.membership_residual(pr.theta()) < 1e-6);
    }
}

TEST_CASE("projection estimator falls back to sample covariance") {
    const int p = 4;
    const HermitianMatrix t0 = toeplitz_theta0(p);
    const AffineStructure s = scale_fix(toeplitz_structure(p), static_cast<double>(p));
    const SampleSet samples = sample_cae(t0, 3, 21);  // n < p
    const EstimateReport pr = projection_estimator(samples, s);
    CHECK(pr.method == "proj(sc)");
    CHECK(pr.theta().trace() == doctest::Approx(static_cast<double>(p)).epsilon(1e-9));
}

TEST_CASE("projection estimator is consistent at large n") {
    const int p = 3;
    const HermitianMatrix t0 = toeplitz_theta0(p);
    const AffineStructure s = scale_fix(toeplitz_structure(p), static_cast<double>(p));
    const SampleSet samples = sample_cae(t0, 100000, 5);
    const EstimateReport pr = projection_estimator(samples, s);
    CHECK((pr.theta().mat() - t0.mat()).norm() < 0.05);
}
