#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shapecov/hermitian.hpp"
#include "support/jacobi_eig.hpp"
#include "support/test_util.hpp"

using namespace shapecov;

TEST_CASE("construction validates hermitian symmetry") {
    Eigen::MatrixXcd bad(2, 2);
    bad << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;  // not hermitian
    CHECK_THROWS_AS(HermitianMatrix{bad}, std::invalid_argument);

    Eigen::MatrixXcd ok(2, 2);
    ok << 1.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 1.0;
    const HermitianMatrix m(ok);
    CHECK(m.mat()(0, 1) == std::conj(m.mat()(1, 0)));
    CHECK(m.mat()(0, 0).imag() == 0.0);

    CHECK_THROWS_AS(HermitianMatrix{Eigen::MatrixXcd(0, 0)}, std::invalid_argument);
}

TEST_CASE("quad_form identity and diagonal cases") {
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(2);
    e1[0] = 1.0;
    CHECK(quad_form(HermitianMatrix::identity(2), e1) == doctest::Approx(1.0).epsilon(1e-14));

    auto rs = testutil::stream(11);
    const Eigen::VectorXcd u = testutil::random_unit_vector(3, rs);
    CHECK(quad_form(HermitianMatrix::identity(3), u) == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 0.5;
    Eigen::VectorXcd x(2);
    x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    CHECK(quad_form(HermitianMatrix(d), x) == doctest::Approx(1.25).epsilon(1e-14));

    CHECK_THROWS_AS(quad_form(HermitianMatrix::identity(2), Eigen::VectorXcd::Ones(3)),
                    std::invalid_argument);
}

TEST_CASE("psd_project clamps and fixes points") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    const HermitianMatrix proj = psd_project(HermitianMatrix(d));
    CHECK(std::abs(proj.mat()(0, 0).real() - 1.0) < 1e-14);
    CHECK(std::abs(proj.mat()(1, 1).real()) < 1e-14);

    auto rs = testutil::stream(5);
    const HermitianMatrix pd = testutil::random_pd(3, rs);
    const HermitianMatrix same = psd_project(pd);
    CHECK((same.mat() - pd.mat()).norm() < 1e-12);
}

TEST_CASE("psd_project agrees with an independent eigensolver oracle") {
    auto rs = testutil::stream(42);
    for (int rep = 0; rep < 20; ++rep) {
        const HermitianMatrix m = testutil::random_hermitian(4, rs);
        const HermitianMatrix ours = psd_project(m);
        const oracle::JacobiEig je = oracle::jacobi_hermitian_eig(m.mat());
        Eigen::VectorXd w = je.values.cwiseMax(0.0);
        const Eigen::MatrixXcd theirs = je.vectors * w.asDiagonal() * je.vectors.adjoint();
        CHECK((ours.mat() - theirs).norm() < 1e-6);
        // eigenvalue floor of the projection itself
        CHECK(oracle::jacobi_hermitian_eig(ours.mat()).values.minCoeff() >= -1e-12);
    }
}

TEST_CASE("psd_project is idempotent and a contraction toward the cone") {
    auto rs = testutil::stream(7);
    for (int rep = 0; rep < 20; ++rep) {
        const HermitianMatrix m = testutil::random_hermitian(5, rs);
        const HermitianMatrix once = psd_project(m);
        const HermitianMatrix twice = psd_project(once);
        CHECK((twice.mat() - once.mat()).norm() < 1e-10);

        const HermitianMatrix x = psd_project(testutil::random_hermitian(5, rs));
        CHECK((once.mat() - x.mat()).norm() <= (m.mat() - x.mat()).norm() + 1e-12);
    }
}

TEST_CASE("real_vectorize layout, isometry and linearity") {
    const Eigen::VectorXd vi = real_vectorize(HermitianMatrix::identity(2));
    CHECK(vi.isApprox(Eigen::Vector4d(1, 1, 0, 0)));

    Eigen::MatrixXcd sw = Eigen::MatrixXcd::Zero(2, 2);
    sw(0, 1) = 1.0;
    sw(1, 0) = 1.0;
    const Eigen::VectorXd vs = real_vectorize(HermitianMatrix(sw));
    CHECK(vs.isApprox(Eigen::Vector4d(0, 0, std::sqrt(2.0), 0)));

    auto rs = testutil::stream(9);
    for (int rep = 0; rep < 20; ++rep) {
        const HermitianMatrix a = testutil::random_hermitian(4, rs);
        const HermitianMatrix b = testutil::random_hermitian(4, rs);
        CHECK(real_vectorize(a).norm() == doctest::Approx(a.mat().norm()).epsilon(1e-12));
        // linearity
        const HermitianMatrix comb(2.0 * a.mat() - 0.5 * b.mat());
        CHECK((real_vectorize(comb) - (2.0 * real_vectorize(a) - 0.5 * real_vectorize(b))).norm() <
              1e-12);
        // inner products match Re tr(MN)
        const double dot = real_vectorize(a).dot(real_vectorize(b));
        CHECK(dot == doctest::Approx((a.mat() * b.mat()).trace().real()).epsilon(1e-10));
        // round trip
        CHECK((real_unvectorize(real_vectorize(a), 4).mat() - a.mat()).norm() < 1e-14);
    }
}

TEST_CASE("matrix_norm basic values and inequalities") {
    CHECK(matrix_norm(HermitianMatrix::identity(3), NormKind::frobenius) ==
          doctest::Approx(std::sqrt(3.0)));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -1.0;
    CHECK(matrix_norm(HermitianMatrix(d), NormKind::spectral) == doctest::Approx(3.0));
    CHECK(matrix_norm(HermitianMatrix(d), NormKind::trace) == doctest::Approx(4.0));

    auto rs = testutil::stream(13);
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 4;
        const HermitianMatrix m = testutil::random_hermitian(p, rs);
        const double fro = matrix_norm(m, NormKind::frobenius);
        const double spec = matrix_norm(m, NormKind::spectral);
        const double nuc = matrix_norm(m, NormKind::trace);
        CHECK(nuc >= spec - 1e-12);
        CHECK(spec >= fro / std::sqrt(static_cast<double>(p)) - 1e-12);
    }
}

TEST_CASE("norm_prox closed-form cases") {
    for (const NormKind kind : {NormKind::frobenius, NormKind::spectral, NormKind::trace}) {
        const HermitianMatrix z = norm_prox(HermitianMatrix::zero(3), kind, 0.7);
        CHECK(z.mat().norm() == 0.0);
    }
    CHECK_THROWS_AS(norm_prox(HermitianMatrix::identity(2), NormKind::frobenius, 0.0),
                    std::invalid_argument);

    auto rs = testutil::stream(21);
    const HermitianMatrix small(0.3 * testutil::random_hermitian(3, rs).mat() /
                                testutil::random_hermitian(3, rs).mat().norm());
    CHECK(norm_prox(small, NormKind::frobenius, 1.0).mat().norm() == 0.0);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 0.5;
    const HermitianMatrix tp = norm_prox(HermitianMatrix(d), NormKind::trace, 1.0);
    CHECK(tp.mat()(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(tp.mat()(1, 1).real()) < 1e-12);
}

TEST_CASE("norm_prox satisfies the prox optimality property") {
    auto rs = testutil::stream(33);
    for (const NormKind kind : {NormKind::frobenius, NormKind::spectral, NormKind::trace}) {
        const HermitianMatrix m = testutil::random_hermitian(4, rs);
        const double t = 0.8;
        const HermitianMatrix prox = norm_prox(m, kind, t);
        const double fp =
            t * matrix_norm(prox, kind) + 0.5 * (prox.mat() - m.mat()).squaredNorm();
        for (int rep = 0; rep < 100; ++rep) {
            const HermitianMatrix x(prox.mat() + 0.2 * testutil::random_hermitian(4, rs).mat());
            const double fx = t * matrix_norm(x, kind) + 0.5 * (x.mat() - m.mat()).squaredNorm();
            CHECK(fp <= fx + 1e-10);
        }
    }
}
