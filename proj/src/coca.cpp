#include "shapecov/coca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "shapecov/csv.hpp"

namespace shapecov {

double CocaProblem::effective_d_floor() const {
    return d_floor > 0 ? d_floor : 1e-8 * static_cast<double>(structure.p());
}

bool schur_check(const HermitianMatrix& theta, const Eigen::VectorXcd& x, double d) {
    const int p = theta.dim();
    if (x.size() != p) throw std::invalid_argument("schur_check: dimension mismatch");
    HermitianEig eig = hermitian_eig(theta);
    if (!(eig.values.minCoeff() > 1e-14 * std::max(1.0, eig.values.maxCoeff()))) {
        throw std::invalid_argument("schur_check: theta is singular");
    }
    HermitianMatrix slack(theta.mat() - (d / p) * (x * x.adjoint()));
    return hermitian_eig(slack).values.minCoeff() >= -1e-10;
}

double gmm_objective(const HermitianMatrix& theta, const SampleSet& samples, NormKind norm_kind) {
    const int p = theta.dim();
    if (samples.p != p) throw std::invalid_argument("gmm_objective: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXcd> llt(theta.mat());
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("gmm_objective: theta is not positive definite");
    }
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(p, p);
    for (int i = 0; i < samples.n; ++i) {
        const double q = samples.samples.col(i).dot(llt.solve(samples.samples.col(i))).real();
        if (!(q > 0)) throw std::invalid_argument("gmm_objective: nonpositive quadratic form");
        acc.noalias() += (samples.samples.col(i) * samples.samples.col(i).adjoint()) / q;
    }
    acc = theta.mat() - acc * (static_cast<double>(p) / samples.n);
    return matrix_norm(HermitianMatrix(acc), norm_kind);
}

namespace {

// PSD projection with a Cholesky fast path: a positive definite input is
// its own projection, and LLT is several times cheaper than an
// eigendecomposition at these sizes.
Eigen::VectorXd psd_project_vec(const Eigen::VectorXd& v, int p) {
    const HermitianMatrix m = real_unvectorize(v, p);
    Eigen::LLT<Eigen::MatrixXcd> llt(m.mat());
    if (llt.info() == Eigen::Success) return v;
    return real_vectorize(psd_project(m));
}

// Euclidean projection onto {a >= 0, sum(a) <= bound}.
Eigen::VectorXd nonneg_l1_project(const Eigen::VectorXd& v, double bound) {
    Eigen::VectorXd clamped = v.cwiseMax(0.0);
    if (clamped.sum() <= bound) return clamped;
    // project onto the simplex {a >= 0, sum(a) = bound}
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double cand = (cum - bound) / static_cast<double>(i + 1);
        if (u[i] - cand > 0) theta = cand;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

struct WarmStart {
    Eigen::VectorXd a;
    Eigen::VectorXd d;
};

WarmStart make_warm_start(const CocaProblem& prob, bool enabled) {
    const int p = prob.structure.p();
    const int n = prob.samples.n;
    const int k = prob.structure.k();
    const double target = prob.structure.trace_target();
    const double floor = prob.effective_d_floor();
    WarmStart ws;
    ws.a = Eigen::VectorXd::Zero(k);
    ws.d = Eigen::VectorXd::Constant(n, static_cast<double>(p));
    if (!enabled) {
        ws.d = ws.d.cwiseMax(floor);
        return ws;
    }
    EstimateReport ty = tyler(prob.samples);
    HermitianMatrix base = ty.existed ? ty.theta().with_trace(target)
                                      : sample_covariance(prob.samples, target).theta();
    ws.a = prob.structure.nonneg_coeffs() ? prob.structure.nonneg_coeffs_project(base)
                                          : prob.structure.affine_coeffs(base);
    // d_i = p / (x_i^H Theta_warm^-1 x_i) against the first usable PD matrix
    for (const HermitianMatrix& cand : {prob.structure.assemble(ws.a), base}) {
        Eigen::LLT<Eigen::MatrixXcd> llt(cand.mat());
        if (llt.info() != Eigen::Success) continue;
        bool ok = true;
        Eigen::VectorXd d(n);
        for (int i = 0; i < n; ++i) {
            const double q =
                prob.samples.samples.col(i).dot(llt.solve(prob.samples.samples.col(i))).real();
            if (!(q > 1e-14)) {
                ok = false;
                break;
            }
            d[i] = p / q;
        }
        if (ok) {
            ws.d = d;
            break;
        }
    }
    ws.d = ws.d.cwiseMax(floor);
    return ws;
}

}  // namespace

EstimateReport coca_solve(const CocaProblem& prob, const CocaOptions& opts) {
    if (!prob.structure.scale_fixed()) {
        throw std::invalid_argument("coca_solve: structure must be scale-fixed");
    }
    if (prob.samples.p != prob.structure.p()) {
        throw std::invalid_argument("coca_solve: samples and structure dimension mismatch");
    }
    if (prob.samples.n < 1) throw std::invalid_argument("coca_solve: need n >= 1");

    const int p = prob.samples.p;
    const int n = prob.samples.n;
    const int k = prob.structure.k();
    const int pp = p * p;
    const double floor = prob.effective_d_floor();
    const bool nonneg = prob.structure.nonneg_coeffs();
    const std::optional<double> l1_bound = prob.structure.l1_bound();
    const double target = prob.structure.trace_target();

    const Eigen::MatrixXd& J = prob.structure.basis_vec();      // pp x k
    const Eigen::VectorXd& d0v = prob.structure.offset_vec();   // pp

    Eigen::MatrixXd Xv(pp, n);  // vectorized sample outer products
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd xi = prob.samples.samples.col(i);
        Xv.col(i) = real_vectorize(HermitianMatrix(Eigen::MatrixXcd(xi * xi.adjoint())));
    }

    // normal matrix of the (a, d) least-squares block; independent of rho
    Eigen::MatrixXd G(k + n, k + n);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::MatrixXd JtX = J.transpose() * Xv;
    G.topLeftCorner(k, k) = (n + 2) * JtJ;
    if (nonneg) G.topLeftCorner(k, k) += Eigen::MatrixXd::Identity(k, k);
    G.topRightCorner(k, n) = -(1.0 / n + 1.0 / p) * JtX;
    G.bottomLeftCorner(n, k) = G.topRightCorner(k, n).transpose();
    G.bottomRightCorner(n, n) =
        (1.0 / (static_cast<double>(n) * n)) * (Xv.transpose() * Xv) +
        (1.0 / (static_cast<double>(p) * p) + 1.0) * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> G_llt(G);
    if (G_llt.info() != Eigen::Success) {
        throw std::runtime_error("coca_solve: least-squares block factorization failed");
    }

    WarmStart ws = make_warm_start(prob, opts.warm_start);
    Eigen::VectorXd a = ws.a;
    Eigen::VectorXd d = ws.d;

    auto theta_vec = [&](const Eigen::VectorXd& av) -> Eigen::VectorXd { return d0v + J * av; };

    // consensus copies and scaled duals
    Eigen::VectorXd ThV = theta_vec(a);
    Eigen::VectorXd R = ThV - Xv * d / n;
    Eigen::VectorXd Z0 = real_vectorize(psd_project(real_unvectorize(ThV, p)));
    Eigen::MatrixXd Z(pp, n);
    for (int i = 0; i < n; ++i) {
        Z.col(i) = real_vectorize(psd_project(real_unvectorize(ThV - (d[i] / p) * Xv.col(i), p)));
    }
    Eigen::VectorXd w = d.cwiseMax(floor);
    Eigen::VectorXd v = nonneg ? Eigen::VectorXd(a.cwiseMax(0.0)) : Eigen::VectorXd();
    Eigen::VectorXd UR = Eigen::VectorXd::Zero(pp);
    Eigen::VectorXd U0 = Eigen::VectorXd::Zero(pp);
    Eigen::MatrixXd UZ = Eigen::MatrixXd::Zero(pp, n);
    Eigen::VectorXd uw = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd uv = nonneg ? Eigen::VectorXd::Zero(k) : Eigen::VectorXd();

    double rho = opts.rho;
    const double primal_dim = std::sqrt(static_cast<double>(pp) * (n + 2) + n + (nonneg ? k : 0));
    const double dual_dim = std::sqrt(static_cast<double>(k + n));
    std::vector<double> hist_pri;
    std::vector<double> hist_dual;

    Eigen::VectorXd rhs(k + n);
    Eigen::MatrixXd PZ(pp, n);
    bool converged = false;
    int it = 0;
    double rpri = 0.0;
    double rdual = 0.0;

    for (; it < opts.max_iter; ++it) {
        // (a, d) update: least squares against consensus targets
        const Eigen::VectorXd tR = R - UR - d0v;
        const Eigen::VectorXd t0 = Z0 - U0 - d0v;
        Eigen::MatrixXd tZ = Z - UZ;
        tZ.colwise() -= d0v;
        rhs.head(k) = J.transpose() * (tR + t0 + tZ.rowwise().sum());
        if (nonneg) rhs.head(k) += v - uv;
        rhs.tail(n) = -(Xv.transpose() * tR) / n -
                      (Xv.array() * tZ.array()).colwise().sum().transpose().matrix() / p +
                      (w - uw);
        const Eigen::VectorXd y = G_llt.solve(rhs);
        if (!y.allFinite()) {
            throw CocaInfeasibleError("coca_solve: iterates diverged (non-finite solve)");
        }
        a = y.head(k);
        d = y.tail(n);

        ThV = theta_vec(a);
        const Eigen::VectorXd PR = ThV - Xv * d / n;
        PZ = (-Xv) * d.asDiagonal() / p;
        PZ.colwise() += ThV;

        const Eigen::VectorXd R_old = R;
        const Eigen::VectorXd Z0_old = Z0;
        const Eigen::MatrixXd Z_old = Z;
        const Eigen::VectorXd w_old = w;
        const Eigen::VectorXd v_old = v;

        // over-relaxed block inputs
        const double al = opts.over_relax;
        const Eigen::VectorXd hR = al * PR + (1.0 - al) * R_old;
        const Eigen::VectorXd h0 = al * ThV + (1.0 - al) * Z0_old;
        const Eigen::MatrixXd hZ = al * PZ + (1.0 - al) * Z_old;
        const Eigen::VectorXd hw = al * d + (1.0 - al) * w_old;
        const Eigen::VectorXd hv = nonneg ? Eigen::VectorXd(al * a + (1.0 - al) * v_old)
                                          : Eigen::VectorXd();

        // block proximal / projection updates
        R = real_vectorize(norm_prox(real_unvectorize(hR + UR, p), prob.norm_kind, 1.0 / rho));
        Z0 = psd_project_vec(h0 + U0, p);
        for (int i = 0; i < n; ++i) {
            Z.col(i) = psd_project_vec(hZ.col(i) + UZ.col(i), p);
        }
        w = (hw + uw).cwiseMax(floor);
        if (nonneg) {
            v = l1_bound ? nonneg_l1_project(hv + uv, *l1_bound)
                         : Eigen::VectorXd((hv + uv).cwiseMax(0.0));
        }

        // scaled dual updates
        UR += hR - R;
        U0 += h0 - Z0;
        UZ += hZ - Z;
        uw += hw - w;
        if (nonneg) uv += hv - v;

        // residuals and stopping (Boyd-style scaling) on the unrelaxed values
        double pri2 = (PR - R).squaredNorm() + (ThV - Z0).squaredNorm() +
                      (PZ - Z).squaredNorm() + (d - w).squaredNorm();
        if (nonneg) pri2 += (a - v).squaredNorm();
        rpri = std::sqrt(pri2);

        Eigen::VectorXd dy(k + n);
        dy.head(k) = J.transpose() *
                     ((R - R_old) + (Z0 - Z0_old) + (Z - Z_old).rowwise().sum());
        if (nonneg) dy.head(k) += v - v_old;
        dy.tail(n) = -(Xv.transpose() * (R - R_old)) / n -
                     (Xv.array() * (Z - Z_old).array()).colwise().sum().transpose().matrix() / p +
                     (w - w_old);
        rdual = rho * dy.norm();

        double ax2 = PR.squaredNorm() + ThV.squaredNorm() + PZ.squaredNorm() + d.squaredNorm();
        double b2 = R.squaredNorm() + Z0.squaredNorm() + Z.squaredNorm() + w.squaredNorm();
        if (nonneg) {
            ax2 += a.squaredNorm();
            b2 += v.squaredNorm();
        }
        Eigen::VectorXd uy(k + n);
        uy.head(k) = J.transpose() * (UR + U0 + UZ.rowwise().sum());
        if (nonneg) uy.head(k) += uv;
        uy.tail(n) = -(Xv.transpose() * UR) / n -
                     (Xv.array() * UZ.array()).colwise().sum().transpose().matrix() / p + uw;
        const double eps_pri =
            primal_dim * opts.tol_abs + opts.tol_rel * std::sqrt(std::max(ax2, b2));
        const double eps_dual = dual_dim * opts.tol_abs + opts.tol_rel * rho * uy.norm();

        if (opts.diagnostics && (it % std::max(1, opts.diagnostics_every) == 0)) {
            const double obj = matrix_norm(real_unvectorize(PR, p), prob.norm_kind);
            *opts.diagnostics << it << "," << csv::format_double(rpri) << ","
                              << csv::format_double(rdual) << "," << csv::format_double(obj)
                              << "\n";
        }
        if (it % 100 == 0) {
            hist_pri.push_back(rpri);
            hist_dual.push_back(rdual);
        }
        if (rpri <= eps_pri && rdual <= eps_dual) {
            converged = true;
            ++it;
            break;
        }

        const double u_inf = std::max({UR.cwiseAbs().maxCoeff(), uw.cwiseAbs().maxCoeff(),
                                       UZ.cwiseAbs().maxCoeff()});
        if (!std::isfinite(rpri) || u_inf > 1e14) {
            throw CocaInfeasibleError(
                "coca_solve: diverging dual variables; the structure set is empty or "
                "nearly empty");
        }

        // residual balancing, factor 2 at ratio 10
        if (rpri > 10.0 * rdual && rho < 1e8) {
            rho *= 2.0;
            UR /= 2.0;
            U0 /= 2.0;
            UZ /= 2.0;
            uw /= 2.0;
            if (nonneg) uv /= 2.0;
        } else if (rdual > 10.0 * rpri && rho > 1e-8) {
            rho /= 2.0;
            UR *= 2.0;
            U0 *= 2.0;
            UZ *= 2.0;
            uw *= 2.0;
            if (nonneg) uv *= 2.0;
        }
    }

    if (!converged) {
        std::ostringstream msg;
        msg << "coca_solve: no convergence in " << opts.max_iter << " iterations (primal "
            << rpri << ", dual " << rdual << ")";
        throw CocaConvergenceError(msg.str(), std::move(hist_pri), std::move(hist_dual));
    }

    HermitianMatrix theta = prob.structure.assemble(a);

    // feasibility polish: pull every weight back inside its own cap so the
    // returned (theta, d) satisfies the scalar form of each LMI exactly
    Eigen::LLT<Eigen::MatrixXcd> llt(theta.mat());
    if (llt.info() == Eigen::Success) {
        for (int i = 0; i < n; ++i) {
            const double q =
                prob.samples.samples.col(i).dot(llt.solve(prob.samples.samples.col(i))).real();
            if (q > 1e-14) d[i] = std::min(d[i], p / q);
            d[i] = std::max(d[i], floor);
        }
    }

    EstimateReport report;
    report.method = "coca(" + to_string(prob.norm_kind) + ")";
    report.iterations = it;
    report.residual = rpri;
    report.existed = true;
    const Eigen::VectorXd final_res = real_vectorize(theta) - Xv * d / n;
    report.objective = matrix_norm(real_unvectorize(final_res, p), prob.norm_kind);
    report.theta_hat = theta.with_trace(target);
    report.coefficients = a;
    if (n < p + 1) {
        // tightness guarantee needs n >= p+1; report the conditioning of the
        // active constraint set so non-uniqueness is visible
        std::vector<int> active;
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd slack = real_vectorize(theta) - (d[i] / p) * Xv.col(i);
            const double me = hermitian_eig(real_unvectorize(slack, p)).values.minCoeff();
            if (me < 1e-6 * std::max(1.0, target)) active.push_back(i);
        }
        Eigen::MatrixXd W(pp, k + static_cast<int>(active.size()));
        W.leftCols(k) = J;
        for (std::size_t j = 0; j < active.size(); ++j) W.col(k + j) = Xv.col(active[j]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        const double cond = smin > 0 ? svd.singularValues()(0) / smin
                                     : std::numeric_limits<double>::infinity();
        std::ostringstream note;
        note << "n < p+1: zero-objective solution may be non-unique; active-set condition "
             << cond;
        report.note = note.str();
    }
    return report;
}

EstimateReport coca_unconstrained(const SampleSet& samples, NormKind norm_kind,
                                  const CocaOptions& opts) {
    CocaProblem prob{samples, full_structure(samples.p, samples.p), norm_kind, 0.0};
    EstimateReport report = coca_solve(prob, opts);
    report.method = "coca_unconstrained(" + to_string(norm_kind) + ")";
    return report;
}

}  // namespace shapecov
