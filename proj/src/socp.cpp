#include "rsma/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nesterov-Todd scaling of the composite cone. For the nonneg block the
// scaling is diagonal; for each SOC block it is W = beta * (2 v v' - J) with
// J = diag(1, -I) and v'Jv = 1 (hyperbolic Householder form).
struct NtScaling {
    Eigen::VectorXd d;     // nonneg block, W = diag(d)
    struct Soc {
        double beta = 1.0;
        Eigen::VectorXd v;
    };
    std::vector<Soc> socs;
    Eigen::VectorXd lambda;  // scaled point, lambda = W z = W^{-T} s
};

double jdot(const Eigen::Ref<const Eigen::VectorXd>& u) {
    // u0^2 - ||u1||^2
    return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

// Smallest cone "eigenvalue" of a point (per block): s_i for nonneg entries,
// s0 - ||s1|| for SOC blocks.
double min_eig(const ConeSpec& K, const Eigen::VectorXd& u) {
    double m = kInf;
    for (int i = 0; i < K.nonneg; ++i) m = std::min(m, u(i));
    int off = K.nonneg;
    for (int q : K.soc) {
        m = std::min(m, u(off) - u.segment(off + 1, q - 1).norm());
        off += q;
    }
    if (K.dim() == 0) m = 1.0;
    return m;
}

// Cone identity element e (1 on nonneg entries, (1,0,..) per SOC block).
Eigen::VectorXd cone_identity(const ConeSpec& K) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K.dim());
    e.head(K.nonneg).setOnes();
    int off = K.nonneg;
    for (int q : K.soc) {
        e(off) = 1.0;
        off += q;
    }
    return e;
}

Eigen::VectorXd apply_W(const ConeSpec& K, const NtScaling& W,
                        const Eigen::VectorXd& u);

NtScaling compute_scaling(const ConeSpec& K, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& z) {
    NtScaling W;
    W.d = (s.head(K.nonneg).array() / z.head(K.nonneg).array()).sqrt();
    int off = K.nonneg;
    for (int q : K.soc) {
        auto sk = s.segment(off, q);
        auto zk = z.segment(off, q);
        const double a = std::sqrt(jdot(sk));
        const double b = std::sqrt(jdot(zk));
        Eigen::VectorXd st = sk / a, zt = zk / b;
        const double gamma = std::sqrt((1.0 + st.dot(zt)) / 2.0);
        NtScaling::Soc sc;
        sc.beta = std::sqrt(a / b);
        // scaling point wb = (st + J zt) / (2 gamma); Householder vector
        // v = (wb + e0) / sqrt(2 (1 + wb0)) with unit hyperbolic norm
        Eigen::VectorXd wb = zt;
        wb(0) *= -1.0;
        wb = (st - wb) / (2.0 * gamma);
        wb(0) += 1.0;
        sc.v = wb / std::sqrt(2.0 * wb(0));
        W.socs.push_back(std::move(sc));
        off += q;
    }
    W.lambda = apply_W(K, W, z);
    return W;
}

// y = W u  (W symmetric)
Eigen::VectorXd apply_W(const ConeSpec& K, const NtScaling& W,
                        const Eigen::VectorXd& u) {
    Eigen::VectorXd y(u.size());
    y.head(K.nonneg) = W.d.array() * u.head(K.nonneg).array();
    int off = K.nonneg;
    for (size_t i = 0; i < K.soc.size(); ++i) {
        const int q = K.soc[i];
        const auto& sc = W.socs[i];
        auto uk = u.segment(off, q);
        Eigen::VectorXd Ju = uk;
        Ju.tail(q - 1) *= -1.0;
        y.segment(off, q) = sc.beta * (2.0 * sc.v * sc.v.dot(uk) - Ju);
        off += q;
    }
    return y;
}

// y = W^{-1} u
Eigen::VectorXd apply_Winv(const ConeSpec& K, const NtScaling& W,
                           const Eigen::VectorXd& u) {
    Eigen::VectorXd y(u.size());
    y.head(K.nonneg) = u.head(K.nonneg).array() / W.d.array();
    int off = K.nonneg;
    for (size_t i = 0; i < K.soc.size(); ++i) {
        const int q = K.soc[i];
        const auto& sc = W.socs[i];
        auto uk = u.segment(off, q);
        Eigen::VectorXd Ju = uk;
        Ju.tail(q - 1) *= -1.0;
        Eigen::VectorXd Jv = sc.v;
        Jv.tail(q - 1) *= -1.0;
        // H^{-1} u = 2 (Jv)(v'Ju) - Ju
        y.segment(off, q) = (2.0 * Jv * sc.v.dot(Ju) - Ju) / sc.beta;
        off += q;
    }
    return y;
}

// Dense W'W = W^2 (block diagonal), used in the KKT matrix.
Eigen::MatrixXd form_W2(const ConeSpec& K, const NtScaling& W) {
    const int m = K.dim();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    M.diagonal().head(K.nonneg) = W.d.array().square();
    int off = K.nonneg;
    for (size_t i = 0; i < K.soc.size(); ++i) {
        const int q = K.soc[i];
        const auto& sc = W.socs[i];
        Eigen::VectorXd Jv = sc.v;
        Jv.tail(q - 1) *= -1.0;
        const double b2 = sc.beta * sc.beta;
        Eigen::MatrixXd B = 4.0 * sc.v.squaredNorm() * (sc.v * sc.v.transpose());
        B.noalias() -= 2.0 * sc.v * Jv.transpose();
        B.noalias() -= 2.0 * Jv * sc.v.transpose();
        B.diagonal().array() += 1.0;
        M.block(off, off, q, q) = b2 * B;
        off += q;
    }
    return M;
}

// Jordan product u o w.
Eigen::VectorXd jprod(const ConeSpec& K, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& w) {
    Eigen::VectorXd y(u.size());
    y.head(K.nonneg) = u.head(K.nonneg).array() * w.head(K.nonneg).array();
    int off = K.nonneg;
    for (int q : K.soc) {
        auto uk = u.segment(off, q);
        auto wk = w.segment(off, q);
        y(off) = uk.dot(wk);
        y.segment(off + 1, q - 1) =
            uk(0) * wk.tail(q - 1) + wk(0) * uk.tail(q - 1);
        off += q;
    }
    return y;
}

// Solve lambda o x = d for x.
Eigen::VectorXd jsolve(const ConeSpec& K, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& d) {
    Eigen::VectorXd x(d.size());
    x.head(K.nonneg) = d.head(K.nonneg).array() / lambda.head(K.nonneg).array();
    int off = K.nonneg;
    for (int q : K.soc) {
        auto lk = lambda.segment(off, q);
        auto dk = d.segment(off, q);
        const double det = jdot(lk);
        const double x0 =
            (lk(0) * dk(0) - lk.tail(q - 1).dot(dk.tail(q - 1))) / det;
        x(off) = x0;
        x.segment(off + 1, q - 1) =
            (dk.tail(q - 1) - x0 * lk.tail(q - 1)) / lk(0);
        off += q;
    }
    return x;
}

// Largest step alpha such that u + alpha*du stays in the cone (up to the
// boundary); returns +inf when unconstrained.
double step_to_boundary(const ConeSpec& K, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& du) {
    double alpha = kInf;
    for (int i = 0; i < K.nonneg; ++i) {
        if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
    }
    int off = K.nonneg;
    for (int q : K.soc) {
        auto uk = u.segment(off, q);
        auto dk = du.segment(off, q);
        const double a = jdot(dk);
        const double b = 2.0 * (uk(0) * dk(0) - uk.tail(q - 1).dot(dk.tail(q - 1)));
        const double c = jdot(uk);
        // first positive root of a t^2 + b t + c = 0 along the path
        double root = kInf;
        const double disc = b * b - 4.0 * a * c;
        if (std::abs(a) < 1e-300) {
            if (b < 0.0) root = -c / b;
        } else if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // numerically stable root pair
            const double q1 = -0.5 * (b + (b >= 0 ? sq : -sq));
            double r1 = q1 / a;
            double r2 = (std::abs(q1) > 1e-300) ? c / q1 : kInf;
            if (r1 > r2) std::swap(r1, r2);
            if (r1 > 1e-14)
                root = r1;
            else if (r2 > 1e-14 && (a < 0.0 || b < 0.0))
                root = r2;
        }
        if (dk(0) < 0.0) root = std::min(root, -uk(0) / dk(0));
        alpha = std::min(alpha, root);
        off += q;
    }
    return alpha;
}

struct KktSolver {
    // Symmetric indefinite kernel
    //   [ rI   A'    G'  ]
    //   [ A   -rI    0   ]
    //   [ G    0   -(W2+rI) ]
    // factored with partial-pivot LU; solves refined against the
    // unregularized matrix.
    int n, p, m;
    Eigen::MatrixXd Kreg;    // regularized, factored
    Eigen::MatrixXd Kexact;  // without regularization, for refinement
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;

    void factor(const SocpData& P, const Eigen::MatrixXd& W2, double reg) {
        n = static_cast<int>(P.c.size());
        p = static_cast<int>(P.b.size());
        m = static_cast<int>(P.h.size());
        const int N = n + p + m;
        Kexact.setZero(N, N);
        Kexact.block(0, n, n, p) = P.A.transpose();
        Kexact.block(0, n + p, n, m) = P.G.transpose();
        Kexact.block(n, 0, p, n) = P.A;
        Kexact.block(n + p, 0, m, n) = P.G;
        Kexact.block(n + p, n + p, m, m) = -W2;
        Kreg = Kexact;
        Kreg.diagonal().head(n).array() += reg;
        Kreg.diagonal().segment(n, p).array() -= reg;
        Kreg.diagonal().tail(m).array() -= reg;
        lu.compute(Kreg);
    }

    // Solve K [dx;dy;dz] = [r1;r2;r3] with one refinement pass.
    void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
               const Eigen::VectorXd& r3, Eigen::VectorXd& dx,
               Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
        Eigen::VectorXd rhs(n + p + m);
        rhs << r1, r2, r3;
        Eigen::VectorXd sol = lu.solve(rhs);
        for (int it = 0; it < 2; ++it) {
            Eigen::VectorXd resid = rhs - Kexact * sol;
            if (resid.lpNorm<Eigen::Infinity>() <
                1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
                break;
            sol += lu.solve(resid);
        }
        dx = sol.head(n);
        dy = sol.segment(n, p);
        dz = sol.tail(m);
    }
};

struct Equilibration {
    Eigen::VectorXd col;    // variable scaling
    Eigen::VectorXd rowA;   // equality row scaling
    Eigen::VectorXd rowG;   // cone row scaling (uniform within SOC blocks)
};

Equilibration identity_scaling(const SocpData& P) {
    Equilibration E;
    E.col = Eigen::VectorXd::Ones(P.c.size());
    E.rowA = Eigen::VectorXd::Ones(P.b.size());
    E.rowG = Eigen::VectorXd::Ones(P.h.size());
    return E;
}

// Ruiz-style equilibration; SOC blocks receive one common row factor so the
// cone is preserved.
Equilibration equilibrate(SocpData& P) {
    const int n = static_cast<int>(P.c.size());
    const int p = static_cast<int>(P.b.size());
    Equilibration E = identity_scaling(P);
    auto clampf = [](double v) {
        if (v < 1e-8 || !std::isfinite(v)) return 1.0;
        return v;
    };
    for (int pass = 0; pass < 3; ++pass) {
        for (int i = 0; i < p; ++i) {
            const double f = clampf(std::sqrt(P.A.row(i).lpNorm<Eigen::Infinity>()));
            P.A.row(i) /= f;
            P.b(i) /= f;
            E.rowA(i) /= f;
        }
        for (int i = 0; i < P.cones.nonneg; ++i) {
            const double f = clampf(std::sqrt(P.G.row(i).lpNorm<Eigen::Infinity>()));
            P.G.row(i) /= f;
            P.h(i) /= f;
            E.rowG(i) /= f;
        }
        int off = P.cones.nonneg;
        for (int q : P.cones.soc) {
            double mx = 0.0;
            for (int r = 0; r < q; ++r)
                mx = std::max(mx, P.G.row(off + r).lpNorm<Eigen::Infinity>());
            const double f = clampf(std::sqrt(mx));
            P.G.middleRows(off, q) /= f;
            P.h.segment(off, q) /= f;
            E.rowG.segment(off, q) /= f;
            off += q;
        }
        for (int j = 0; j < n; ++j) {
            double mx = 0.0;
            if (p > 0) mx = P.A.col(j).lpNorm<Eigen::Infinity>();
            if (P.h.size() > 0) mx = std::max(mx, P.G.col(j).lpNorm<Eigen::Infinity>());
            const double f = clampf(std::sqrt(mx));
            P.A.col(j) /= f;
            P.G.col(j) /= f;
            P.c(j) *= 1.0 / f;
            E.col(j) /= f;
        }
    }
    return E;
}

}  // namespace

SocpSolution solve_socp(const SocpData& prob, const SocpSettings& st) {
    SocpData P = prob;  // working copy (may be equilibrated)
    const int n = static_cast<int>(P.c.size());
    const int p = static_cast<int>(P.b.size());
    const int m = static_cast<int>(P.h.size());
    const ConeSpec& K = P.cones;

    SocpSolution out;
    out.x = Eigen::VectorXd::Zero(n);
    out.y = Eigen::VectorXd::Zero(p);
    out.z = Eigen::VectorXd::Zero(m);
    out.s = Eigen::VectorXd::Zero(m);
    if (m == 0) {
        // No cone constraints: nothing in this artifact produces such
        // programs; treat as failure rather than special-casing.
        return out;
    }

    Equilibration E = st.equilibrate ? equilibrate(P) : identity_scaling(P);

    const double reg = st.static_reg;
    const int nu = K.degree();
    const Eigen::VectorXd e = cone_identity(K);

    // Norms of the original data, for relative residuals.
    const double normb = std::max(1.0, prob.b.size() ? prob.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double normh = std::max(1.0, prob.h.lpNorm<Eigen::Infinity>());
    const double normc = std::max(1.0, prob.c.lpNorm<Eigen::Infinity>());

    // --- initial point ---
    Eigen::VectorXd x(n), y(p), z(m), s(m);
    {
        KktSolver kkt;
        kkt.factor(P, Eigen::MatrixXd::Identity(m, m), reg);
        Eigen::VectorXd dx, dy, dz;
        kkt.solve(Eigen::VectorXd::Zero(n), P.b, P.h, dx, dy, dz);
        x = dx;
        s = -dz;
        const double ap = -min_eig(K, s);
        if (ap >= 0.0) s += (1.0 + ap) * e;
        kkt.solve(-P.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), dx,
                  dy, dz);
        y = dy;
        z = dz;
        const double ad = -min_eig(K, z);
        if (ad >= 0.0) z += (1.0 + ad) * e;
    }
    double tau = 1.0, kappa = 1.0;

    auto finish_point = [&](SocpStatus status_, double scale) {
        out.status = status_;
        out.x = (E.col.size() ? (E.col.array() * x.array()).matrix() : x) / scale;
        out.y = (E.rowA.size() && p ? (E.rowA.array() * y.array()).matrix() : y) / scale;
        out.z = (E.rowG.size() ? (E.rowG.array() * z.array()).matrix() : z) / scale;
        // s lives in the scaled row geometry: s = h - Gx, unscale accordingly
        Eigen::VectorXd su = s;
        for (int i = 0; i < m; ++i) su(i) = s(i) / E.rowG(i);
        out.s = su / scale;
        out.objective = prob.c.dot(out.x);
    };

    double best_err = kInf;

    KktSolver kkt;
    for (int iter = 0; iter <= st.max_iters; ++iter) {
        // residuals of the self-dual system
        Eigen::VectorXd r1 = P.A.transpose() * y + P.G.transpose() * z + P.c * tau;
        Eigen::VectorXd r2 = -(P.A * x) + P.b * tau;
        Eigen::VectorXd r3 = -(P.G * x) + P.h * tau - s;
        const double cx = P.c.dot(x), by = p ? P.b.dot(y) : 0.0, hz = P.h.dot(z);
        const double r4 = -cx - by - hz - kappa;

        const double gap = s.dot(z);
        const double mu = (gap + tau * kappa) / (nu + 1);

        const double pres =
            std::max(r2.size() ? r2.lpNorm<Eigen::Infinity>() / normb : 0.0,
                     r3.lpNorm<Eigen::Infinity>() / normh) /
            tau;
        const double dres = r1.lpNorm<Eigen::Infinity>() / normc / tau;
        const double pcost = cx / tau, dcost = -(by + hz) / tau;
        const double absgap = gap / (tau * tau);
        const double relgap =
            absgap / std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));

        const double err = std::max({pres, dres, std::min(absgap, relgap)});
        if (err < best_err) best_err = err;

        out.pres = pres;
        out.dres = dres;
        out.gap = absgap;
        out.relgap = relgap;
        out.iterations = iter;

        if (pres <= st.feastol && dres <= st.feastol &&
            (absgap <= st.abstol || relgap <= st.reltol)) {
            finish_point(SocpStatus::Optimal, tau);
            return out;
        }
        // infeasibility certificates
        if (by + hz < 0.0) {
            const double certres =
                (P.A.transpose() * y + P.G.transpose() * z).lpNorm<Eigen::Infinity>() /
                normc / (-(by + hz));
            if (certres <= st.feastol) {
                finish_point(SocpStatus::Infeasible, -(by + hz));
                return out;
            }
        }
        if (cx < 0.0) {
            const double certres =
                std::max(p ? (P.A * x).lpNorm<Eigen::Infinity>() / normb : 0.0,
                         (P.G * x + s).lpNorm<Eigen::Infinity>() / normh) /
                (-cx);
            if (certres <= st.feastol) {
                finish_point(SocpStatus::Unbounded, -cx);
                return out;
            }
        }
        if (iter == st.max_iters) break;

        const NtScaling W = compute_scaling(K, s, z);
        kkt.factor(P, form_W2(K, W), reg);

        // tau-column system
        Eigen::VectorXd u1x, u1y, u1z;
        kkt.solve(-P.c, P.b, P.h, u1x, u1y, u1z);
        const double den0 =
            kappa / tau - (P.c.dot(u1x) + (p ? P.b.dot(u1y) : 0.0) + P.h.dot(u1z));
        if (!std::isfinite(den0) || std::abs(den0) < 1e-300) break;

        auto take_direction = [&](double sigma, const Eigen::VectorXd& ds_rhs,
                                  double dk_rhs, Eigen::VectorXd& Dx,
                                  Eigen::VectorXd& Dy, Eigen::VectorXd& Dz,
                                  Eigen::VectorXd& Ds, double& Dtau,
                                  double& Dkappa) {
            const double om = 1.0 - sigma;
            const Eigen::VectorXd rhat1 = -om * r1;
            const Eigen::VectorXd rhat2 = -om * r2;
            const Eigen::VectorXd Wlds = apply_W(K, W, jsolve(K, W.lambda, ds_rhs));
            const Eigen::VectorXd rt3 = -om * r3 + Wlds;
            const double rt4 = -om * r4 + dk_rhs / tau;
            Eigen::VectorXd u2x, u2y, u2z;
            kkt.solve(rhat1, -rhat2, -rt3, u2x, u2y, u2z);
            Dtau = (rt4 + P.c.dot(u2x) + (p ? P.b.dot(u2y) : 0.0) + P.h.dot(u2z)) /
                   den0;
            Dx = u2x + Dtau * u1x;
            Dy = u2y + Dtau * u1y;
            Dz = u2z + Dtau * u1z;
            Ds = Wlds - apply_W(K, W, apply_W(K, W, Dz));
            Dkappa = (dk_rhs - kappa * Dtau) / tau;
        };

        // affine (predictor) direction
        Eigen::VectorXd dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        take_direction(0.0, -jprod(K, W.lambda, W.lambda), -tau * kappa, dxa,
                       dya, dza, dsa, dtaua, dkappaa);

        double alpha = step_to_boundary(K, s, dsa);
        alpha = std::min(alpha, step_to_boundary(K, z, dza));
        if (dtaua < 0.0) alpha = std::min(alpha, -tau / dtaua);
        if (dkappaa < 0.0) alpha = std::min(alpha, -kappa / dkappaa);
        alpha = std::min(alpha, 1.0);
        const double sigma = std::pow(std::clamp(1.0 - alpha, 0.0, 1.0), 3.0);

        // combined (corrector) direction
        const Eigen::VectorXd dst = apply_Winv(K, W, dsa);  // W^{-T} ds_aff
        const Eigen::VectorXd dzt = apply_W(K, W, dza);     // W dz_aff
        Eigen::VectorXd ds_rhs =
            sigma * mu * e - jprod(K, W.lambda, W.lambda) - jprod(K, dst, dzt);
        const double dk_rhs = sigma * mu - tau * kappa - dtaua * dkappaa;

        Eigen::VectorXd dx, dy, dz, ds;
        double dtau, dkappa;
        take_direction(sigma, ds_rhs, dk_rhs, dx, dy, dz, ds, dtau, dkappa);

        double amax = step_to_boundary(K, s, ds);
        amax = std::min(amax, step_to_boundary(K, z, dz));
        if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
        if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
        const double step = std::min(1.0, 0.99 * amax);
        if (!std::isfinite(step) || step <= 1e-14) break;

        x += step * dx;
        y += step * dy;
        z += step * dz;
        s += step * ds;
        tau += step * dtau;
        kappa += step * dkappa;
        if (tau < 1e-300) break;
    }

    // Stalled: accept at relaxed tolerances, otherwise report failure with
    // the current (normalized) point attached.
    if (out.pres <= st.feastol_inacc && out.dres <= st.feastol_inacc &&
        (out.gap <= st.abstol_inacc || out.relgap <= st.abstol_inacc)) {
        finish_point(SocpStatus::Optimal, tau);
        return out;
    }
    {
        const double by = p ? P.b.dot(y) : 0.0;
        const double hz = P.h.dot(z);
        if (by + hz < 0.0) {
            const double certres =
                (P.A.transpose() * y + P.G.transpose() * z).lpNorm<Eigen::Infinity>() /
                normc / (-(by + hz));
            if (certres <= st.feastol_inacc) {
                finish_point(SocpStatus::Infeasible, -(by + hz));
                return out;
            }
        }
        const double cx = P.c.dot(x);
        if (cx < 0.0) {
            const double certres =
                std::max(p ? (P.A * x).lpNorm<Eigen::Infinity>() / normb : 0.0,
                         (P.G * x + s).lpNorm<Eigen::Infinity>() / normh) /
                (-cx);
            if (certres <= st.feastol_inacc) {
                finish_point(SocpStatus::Unbounded, -cx);
                return out;
            }
        }
    }
    finish_point(SocpStatus::NumericalFailure, std::max(tau, 1e-300));
    out.status = SocpStatus::NumericalFailure;
    return out;
}

}  // namespace rsma
