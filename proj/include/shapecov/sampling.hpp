#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "shapecov/hermitian.hpp"

namespace shapecov {

enum class TextureKind { chi_square, constant };

/// Law of the positive texture variate tau in the compound-Gaussian model
/// x = sqrt(tau) * v. Normalization to the sphere cancels tau, so the
/// choice only matters for raw (unnormalized) samples.
struct TextureLaw {
    TextureKind kind = TextureKind::constant;
    double degrees_of_freedom = 3.0;  // chi_square only, must be > 0

    static TextureLaw constant() { return TextureLaw{TextureKind::constant, 3.0}; }
    static TextureLaw chi_square(double df);
};

/// Unnormalized compound-Gaussian draws plus provenance. The Gaussian
/// direction L*u of each draw is kept alongside sqrt(tau)*L*u so that
/// sphere normalization can cancel the texture exactly instead of up to
/// rounding.
struct RawSampleSet {
    int p = 0;
    int n = 0;
    Eigen::MatrixXcd samples;        // p x n, sqrt(tau_i) * L u_i per column
    Eigen::MatrixXcd gaussian_part;  // p x n, L u_i per column
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    TextureLaw texture;
};

/// n unit-norm complex p-vectors on the sphere plus provenance. Every
/// column has Euclidean norm 1 to within 1e-12.
struct SampleSet {
    int p = 0;
    int n = 0;
    Eigen::MatrixXcd samples;  // p x n, unit-norm columns
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    TextureLaw texture;
};

/// Deterministic random stream. Streams are derived from a 64-bit key so
/// that per-sample sub-streams are reproducible independently of draw
/// order; all transforms (Box-Muller, Marsaglia-Tsang) are spelled out so
/// output is bit-identical across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : gen_(key) {}

    double uniform();  // in (0, 1)
    double normal();
    Complex circular_complex_normal();  // (g1 + i*g2)/sqrt(2)
    double gamma(double shape, double scale);
    double chi_square(double df) { return gamma(0.5 * df, 2.0); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// 64-bit stream key for (seed, trial, sample index, purpose tag).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, std::uint64_t index,
                         std::uint64_t tag);

/// Draws s_i = sqrt(tau_i) * L u_i with L a Cholesky factor of theta0,
/// u_i standard circular complex Gaussian and tau_i from the texture law.
/// The Gaussian and texture variates come from separate per-sample
/// sub-streams keyed by (seed, trial, i), so changing the texture law
/// leaves the Gaussian draws untouched.
RawSampleSet sample_compound_gaussian(const HermitianMatrix& theta0, int n,
                                      const TextureLaw& texture, std::uint64_t seed,
                                      std::uint64_t trial = 0);

/// Projects every raw draw to the unit sphere (x = s/||s||).
SampleSet normalize_to_cae(const RawSampleSet& raw);

/// Compound-Gaussian draw followed by sphere normalization, with constant
/// texture (the texture cancels under normalization anyway).
SampleSet sample_cae(const HermitianMatrix& theta0, int n, std::uint64_t seed,
                     std::uint64_t trial = 0);

/// log p(x; theta) on the sphere, including the normalizing constant.
double cae_log_density(const HermitianMatrix& theta, const Eigen::VectorXcd& x);

/// Sum over samples of log|Theta| + p*log(x^H Theta^-1 x). Throws if
/// theta is not positive definite.
double cae_negative_log_likelihood(const HermitianMatrix& theta, const SampleSet& samples);

/// CSV layout: line 1 "p,n,seed", line 2 the values, then one row per
/// sample with columns re_0,im_0,...,re_{p-1},im_{p-1}. Doubles are
/// printed with round-trip precision.
void write_samples_csv(const SampleSet& set, std::ostream& out);
SampleSet read_samples_csv(std::istream& in);
void write_samples_csv_file(const SampleSet& set, const std::string& path);
SampleSet read_samples_csv_file(const std::string& path);

}  // namespace shapecov
