#pragma once

// Self-contained cyclic-Jacobi eigensolver for complex hermitian
// matrices. Test-only oracle, deliberately independent of the Eigen
// solver used by the library.
//
// Each step applies A <- R^H A R with the plane rotation
//   R(p,p) = c, R(p,q) = s, R(q,p) = -conj(s), R(q,q) = c,
// where s = sin(theta) * phase(a_pq), c = cos(theta) and
// theta = atan2(2|a_pq|, a_qq - a_pp) / 2 zeroes the (p,q) entry.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Core>

namespace oracle {

struct JacobiEig {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // columns
};

inline JacobiEig jacobi_hermitian_eig(Eigen::MatrixXcd a, int max_sweeps = 100) {
    using std::conj;
    using C = std::complex<double>;
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);
    const double scale2 = std::max(1.0, a.squaredNorm());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) off += std::norm(a(i, j));
        }
        if (off < 1e-30 * scale2) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const C apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) continue;
                const C phase = apq / mag;
                const double theta =
                    0.5 * std::atan2(2.0 * mag, a(q, q).real() - a(p, p).real());
                const double c = std::cos(theta);
                const C s = std::sin(theta) * phase;

                for (int k = 0; k < n; ++k) {  // A <- A R
                    const C akp = a(k, p);
                    const C akq = a(k, q);
                    a(k, p) = c * akp - conj(s) * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {  // A <- R^H A
                    const C apk = a(p, k);
                    const C aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = conj(s) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {  // V <- V R
                    const C vkp = v(k, p);
                    const C vkq = v(k, q);
                    v(k, p) = c * vkp - conj(s) * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    JacobiEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]).real();
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

}  // namespace oracle
