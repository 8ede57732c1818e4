#include "shapecov/sampling.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "shapecov/csv.hpp"

namespace shapecov {

TextureLaw TextureLaw::chi_square(double df) {
    if (!(df > 0)) {
        throw std::invalid_argument("TextureLaw: degrees_of_freedom must be > 0, got " +
                                    std::to_string(df));
    }
    return TextureLaw{TextureKind::chi_square, df};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, std::uint64_t index,
                         std::uint64_t tag) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ trial);
    k = splitmix64(k ^ index);
    k = splitmix64(k ^ tag);
    return k;
}

double RandomStream::uniform() {
    // 53-bit mantissa, offset by half an ulp so the result is in (0,1)
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Complex RandomStream::circular_complex_normal() {
    const double g1 = normal();
    const double g2 = normal();
    return Complex(g1, g2) / std::sqrt(2.0);
}

double RandomStream::gamma(double shape, double scale) {
    if (!(shape > 0) || !(scale > 0)) {
        throw std::invalid_argument("gamma: shape and scale must be positive");
    }
    // Marsaglia-Tsang; shapes below 1 boosted via U^(1/shape)
    double boost = 1.0;
    if (shape < 1.0) {
        boost = std::pow(uniform(), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * scale * d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * scale * d * v;
    }
}

namespace {

constexpr std::uint64_t kGaussTag = 0x6761757373ULL;    // "gauss"
constexpr std::uint64_t kTextureTag = 0x74657874ULL;    // "text"

}  // namespace

RawSampleSet sample_compound_gaussian(const HermitianMatrix& theta0, int n,
                                      const TextureLaw& texture, std::uint64_t seed,
                                      std::uint64_t trial) {
    if (n < 1) throw std::invalid_argument("sample_compound_gaussian: need n >= 1");
    if (texture.kind == TextureKind::chi_square && !(texture.degrees_of_freedom > 0)) {
        throw std::invalid_argument("sample_compound_gaussian: chi_square df must be > 0");
    }
    const int p = theta0.dim();
    HermitianEig eig = hermitian_eig(theta0);
    if (!(eig.values.minCoeff() > 1e-12 * eig.values.maxCoeff())) {
        throw std::invalid_argument("sample_compound_gaussian: theta0 is not positive definite");
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(theta0.mat());
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("sample_compound_gaussian: Cholesky factorization failed");
    }
    const Eigen::MatrixXcd L = llt.matrixL();

    RawSampleSet out;
    out.p = p;
    out.n = n;
    out.seed = seed;
    out.trial = trial;
    out.texture = texture;
    out.samples.resize(p, n);
    out.gaussian_part.resize(p, n);
    Eigen::VectorXcd u(p);
    for (int i = 0; i < n; ++i) {
        RandomStream gs(stream_key(seed, trial, static_cast<std::uint64_t>(i), kGaussTag));
        for (int k = 0; k < p; ++k) u[k] = gs.circular_complex_normal();
        double tau = 1.0;
        if (texture.kind == TextureKind::chi_square) {
            RandomStream ts(stream_key(seed, trial, static_cast<std::uint64_t>(i), kTextureTag));
            tau = ts.chi_square(texture.degrees_of_freedom);
        }
        out.gaussian_part.col(i) = L * u;
        out.samples.col(i) = std::sqrt(tau) * out.gaussian_part.col(i);
    }
    return out;
}

SampleSet normalize_to_cae(const RawSampleSet& raw) {
    SampleSet out;
    out.p = raw.p;
    out.n = raw.n;
    out.seed = raw.seed;
    out.trial = raw.trial;
    out.texture = raw.texture;
    out.samples.resize(raw.p, raw.n);
    // normalize the texture-free direction when available: x = s/||s|| with
    // the positive scalar sqrt(tau) cancelled exactly
    const bool have_direction =
        raw.gaussian_part.rows() == raw.p && raw.gaussian_part.cols() == raw.n;
    const Eigen::MatrixXcd& src = have_direction ? raw.gaussian_part : raw.samples;
    for (int i = 0; i < raw.n; ++i) {
        const double nm = src.col(i).norm();
        if (!(nm >= 1e-300)) {
            throw std::runtime_error("normalize_to_cae: sample " + std::to_string(i) +
                                     " has (near-)zero norm; upstream generator bug");
        }
        out.samples.col(i) = src.col(i) / nm;
    }
    return out;
}

SampleSet sample_cae(const HermitianMatrix& theta0, int n, std::uint64_t seed,
                     std::uint64_t trial) {
    return normalize_to_cae(
        sample_compound_gaussian(theta0, n, TextureLaw::constant(), seed, trial));
}

double cae_log_density(const HermitianMatrix& theta, const Eigen::VectorXcd& x) {
    const int p = theta.dim();
    Eigen::LLT<Eigen::MatrixXcd> llt(theta.mat());
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("cae_log_density: theta is not positive definite");
    }
    double log_det = 0.0;
    for (int i = 0; i < p; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i).real());
    const double q = x.dot(llt.solve(x)).real();
    if (!(q > 0)) throw std::runtime_error("cae_log_density: nonpositive quadratic form");
    double log_const = 0.0;
    for (int k = 2; k <= p - 1; ++k) log_const += std::log(static_cast<double>(k));
    log_const -= p * std::log(std::numbers::pi);
    return log_const - log_det - p * std::log(q);
}

double cae_negative_log_likelihood(const HermitianMatrix& theta, const SampleSet& samples) {
    const int p = theta.dim();
    if (samples.p != p) throw std::invalid_argument("cae_negative_log_likelihood: dim mismatch");
    Eigen::LLT<Eigen::MatrixXcd> llt(theta.mat());
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("cae_negative_log_likelihood: theta is not positive definite");
    }
    double log_det = 0.0;
    for (int i = 0; i < p; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i).real());
    double total = 0.0;
    for (int i = 0; i < samples.n; ++i) {
        const double q = samples.samples.col(i).dot(llt.solve(samples.samples.col(i))).real();
        if (!(q > 0)) {
            throw std::runtime_error("cae_negative_log_likelihood: nonpositive quadratic form");
        }
        total += log_det + p * std::log(q);
    }
    return total;
}

void write_samples_csv(const SampleSet& set, std::ostream& out) {
    out << "p,n,seed\n";
    out << set.p << "," << set.n << "," << set.seed << "\n";
    for (int i = 0; i < set.n; ++i) {
        for (int k = 0; k < set.p; ++k) {
            if (k > 0) out << ",";
            out << csv::format_double(set.samples(k, i).real()) << ","
                << csv::format_double(set.samples(k, i).imag());
        }
        out << "\n";
    }
}

SampleSet read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "p,n,seed") {
        throw std::runtime_error("read_samples_csv: expected header 'p,n,seed'");
    }
    if (!std::getline(in, line)) throw std::runtime_error("read_samples_csv: missing metadata row");
    const std::vector<std::string> meta = csv::split_fields(line);
    if (meta.size() != 3) throw std::runtime_error("read_samples_csv: malformed metadata row");
    SampleSet set;
    set.p = std::stoi(meta[0]);
    set.n = std::stoi(meta[1]);
    set.seed = std::stoull(meta[2]);
    set.texture = TextureLaw::constant();
    if (set.p < 1 || set.n < 1) throw std::runtime_error("read_samples_csv: bad dimensions");
    set.samples.resize(set.p, set.n);
    for (int i = 0; i < set.n; ++i) {
        if (!std::getline(in, line)) {
            throw std::runtime_error("read_samples_csv: missing sample row " + std::to_string(i));
        }
        const std::vector<std::string> f = csv::split_fields(line);
        if (f.size() != static_cast<std::size_t>(2 * set.p)) {
            throw std::runtime_error("read_samples_csv: sample row " + std::to_string(i) +
                                     " has " + std::to_string(f.size()) + " fields, expected " +
                                     std::to_string(2 * set.p));
        }
        for (int k = 0; k < set.p; ++k) {
            set.samples(k, i) = Complex(csv::parse_double(f[2 * k]), csv::parse_double(f[2 * k + 1]));
        }
        const double nm = set.samples.col(i).norm();
        if (std::abs(nm - 1.0) > 1e-9) {
            throw std::runtime_error("read_samples_csv: sample " + std::to_string(i) +
                                     " is not unit-norm (" + std::to_string(nm) + ")");
        }
    }
    return set;
}

void write_samples_csv_file(const SampleSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_samples_csv(set, out);
}

SampleSet read_samples_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_samples_csv(in);
}

}  // namespace shapecov
