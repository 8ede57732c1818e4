#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shapecov/sampling.hpp"
#include "support/test_util.hpp"

using namespace shapecov;

namespace {

HermitianMatrix anisotropic_theta0_p3() {
    Eigen::MatrixXcd t(3, 3);
    t << 2.0, Complex(0.4, 0.3), Complex(0.1, -0.2),
        Complex(0.4, -0.3), 1.2, Complex(0.2, 0.1),
        Complex(0.1, 0.2), Complex(0.2, -0.1), 0.8;
    return HermitianMatrix(t);
}

// (1/n) sum of p * x x^H / (x^H theta^-1 x)
Eigen::MatrixXcd weighted_second_moment(const HermitianMatrix& theta, const SampleSet& s) {
    const Eigen::MatrixXcd tinv =
        theta.mat().llt().solve(Eigen::MatrixXcd::Identity(s.p, s.p));
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(s.p, s.p);
    for (int i = 0; i < s.n; ++i) {
        const double q = (s.samples.col(i).adjoint() * tinv * s.samples.col(i))(0, 0).real();
        acc += (s.samples.col(i) * s.samples.col(i).adjoint()) * (s.p / q);
    }
    return acc / s.n;
}

}  // namespace

TEST_CASE("compound gaussian second moment obeys the law of large numbers") {
    RawSampleSet raw =
        sample_compound_gaussian(HermitianMatrix::identity(2), 100000, TextureLaw::constant(), 7);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
    for (int i = 0; i < raw.n; ++i) {
        acc += raw.samples.col(i) * raw.samples.col(i).adjoint();
    }
    acc /= raw.n;
    CHECK((acc - Eigen::MatrixXcd::Identity(2, 2)).norm() < 0.05);
}

TEST_CASE("generator rejects bad inputs") {
    CHECK_THROWS_AS(
        sample_compound_gaussian(HermitianMatrix::identity(2), 0, TextureLaw::constant(), 1),
        std::invalid_argument);
    Eigen::MatrixXcd sing = Eigen::MatrixXcd::Zero(2, 2);
    sing(0, 0) = 1.0;  // rank deficient
    CHECK_THROWS_AS(
        sample_compound_gaussian(HermitianMatrix(sing), 4, TextureLaw::constant(), 1),
        std::invalid_argument);
    CHECK_THROWS_AS(TextureLaw::chi_square(0.0), std::invalid_argument);
}

TEST_CASE("sampling is deterministic in (seed, trial)") {
    const HermitianMatrix t0 = anisotropic_theta0_p3();
    const RawSampleSet a = sample_compound_gaussian(t0, 50, TextureLaw::chi_square(3.0), 99, 4);
    const RawSampleSet b = sample_compound_gaussian(t0, 50, TextureLaw::chi_square(3.0), 99, 4);
    CHECK(a.samples == b.samples);
    const RawSampleSet c = sample_compound_gaussian(t0, 50, TextureLaw::chi_square(3.0), 99, 5);
    CHECK(a.samples != c.samples);
}

TEST_CASE("normalize_to_cae scales and is idempotent") {
    RawSampleSet raw;
    raw.p = 2;
    raw.n = 1;
    raw.samples.resize(2, 1);
    raw.samples(0, 0) = 3.0;
    raw.samples(1, 0) = Complex(0.0, 4.0);
    const SampleSet s = normalize_to_cae(raw);
    CHECK(std::abs(s.samples(0, 0) - Complex(0.6, 0.0)) < 1e-15);
    CHECK(std::abs(s.samples(1, 0) - Complex(0.0, 0.8)) < 1e-15);

    RawSampleSet again;
    again.p = 2;
    again.n = 1;
    again.samples = s.samples;
    const SampleSet twice = normalize_to_cae(again);
    CHECK((twice.samples - s.samples).norm() < 1e-15);

    raw.samples(0, 0) = 0.0;
    raw.samples(1, 0) = 0.0;
    CHECK_THROWS_AS(normalize_to_cae(raw), std::runtime_error);
}

TEST_CASE("moment identity: mean of p*xx^H/(x^H theta0^-1 x) recovers theta0") {
    const HermitianMatrix t0 = anisotropic_theta0_p3();
    const SampleSet s = sample_cae(t0, 100000, 31);
    const Eigen::MatrixXcd m = weighted_second_moment(t0, s);
    CHECK((m - t0.mat()).norm() < 0.05);
}

TEST_CASE("sample_cae p=1 yields unit-modulus scalars") {
    const SampleSet s = sample_cae(HermitianMatrix::identity(1), 16, 5);
    for (int i = 0; i < s.n; ++i) {
        CHECK(std::abs(std::abs(s.samples(0, i)) - 1.0) < 1e-12);
    }
}

TEST_CASE("sample_cae golden fixture, p=2 n=4 seed=2024") {
    Eigen::MatrixXcd t(2, 2);
    t << 2.0, Complex(0.5, 0.25), Complex(0.5, -0.25), 1.0;
    const SampleSet s = sample_cae(HermitianMatrix(t), 4, 2024);
    const Complex expected[4][2] = {
        {Complex(0.092698374680362988, -0.19820277933609212),
         Complex(-0.53937850657322417, -0.81313805484794865)},
        {Complex(0.43455146497550134, -0.72736804962432211),
         Complex(-0.16676931332585682, -0.50427050360513626)},
        {Complex(0.57798781762007478, 0.63605286374651293),
         Complex(-0.38255294797344297, 0.33914610302857867)},
        {Complex(0.36276433364644628, -0.86876169896606648),
         Complex(0.28627435091799297, 0.17805096082337094)},
    };
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 2; ++k) {
            CHECK(s.samples(k, i).real() == expected[i][k].real());
            CHECK(s.samples(k, i).imag() == expected[i][k].imag());
        }
    }
}

TEST_CASE("texture law does not affect the normalized samples") {
    const HermitianMatrix t0 = anisotropic_theta0_p3();
    const SampleSet chi =
        normalize_to_cae(sample_compound_gaussian(t0, 64, TextureLaw::chi_square(3.0), 17));
    const SampleSet con =
        normalize_to_cae(sample_compound_gaussian(t0, 64, TextureLaw::constant(), 17));
    CHECK(chi.samples == con.samples);  // bitwise: shared Gaussian sub-stream

    const SampleSet chi9 =
        normalize_to_cae(sample_compound_gaussian(t0, 64, TextureLaw::chi_square(9.0), 17));
    CHECK(chi.samples == chi9.samples);
}

TEST_CASE("unitary equivariance of the weighted second moment") {
    const int p = 3;
    const int n = 60000;
    const HermitianMatrix t0 = anisotropic_theta0_p3();
    // a fixed unitary from the QR of a seeded matrix
    auto rs = testutil::stream(77);
    const Eigen::MatrixXcd u =
        Eigen::HouseholderQR<Eigen::MatrixXcd>(testutil::random_complex_matrix(p, rs))
            .householderQ();
    const HermitianMatrix rotated(u * t0.mat() * u.adjoint());

    const Eigen::MatrixXcd m0 = weighted_second_moment(t0, sample_cae(t0, n, 123));
    const Eigen::MatrixXcd m1 = weighted_second_moment(rotated, sample_cae(rotated, n, 321));
    // both should estimate their own theta0; compare rotated copies within MC noise
    const double dev = (u * m0 * u.adjoint() - m1).norm();
    const double se = 3.0 * t0.mat().norm() * p / std::sqrt(static_cast<double>(n));
    CHECK(dev < se);
}

TEST_CASE("samples survive a CSV round trip bit-exactly") {
    const HermitianMatrix t0 = anisotropic_theta0_p3();
    const SampleSet s = sample_cae(t0, 12, 55);
    std::stringstream buf;
    write_samples_csv(s, buf);
    const SampleSet back = read_samples_csv(buf);
    CHECK(back.p == s.p);
    CHECK(back.n == s.n);
    CHECK(back.seed == s.seed);
    CHECK(back.samples == s.samples);
}
