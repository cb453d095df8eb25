#include "rsma/baseline.hpp"

#include <cmath>
#include <random>

#include "rsma/conic.hpp"

namespace rsma {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kStreamFloor = 1e-9;  // SINR below which a stream is dropped

cvec svd_common_direction(const ChannelSet& ch) {
    Eigen::MatrixXcd H(ch.M, ch.K);
    for (int k = 0; k < ch.K; ++k) H.col(k) = ch.h[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H * H.adjoint());
    return eig.eigenvectors().col(ch.M - 1);  // dominant
}

}  // namespace

PrecoderSet init_precoders(const ProblemSpec& prob, const ScaConfig& cfg) {
    const int K = prob.K(), M = prob.M();
    const SchemePlan plan = SchemePlan::of(prob);
    PrecoderSet p = PrecoderSet::zeros(K, M);

    if (cfg.init_strategy == ScaInit::Random) {
        std::mt19937_64 rng(cfg.random_seed);
        std::normal_distribution<double> gauss;
        auto rand_vec = [&] {
            cvec v(M);
            for (int m = 0; m < M; ++m) v(m) = {gauss(rng), gauss(rng)};
            return v;
        };
        if (plan.has_common) p.common = rand_vec();
        for (int k = 0; k < K; ++k)
            if (plan.private_active[k]) p.priv[k] = rand_vec();
        const double tp = p.total_power();
        if (tp > 0.0) {
            const double scale = std::sqrt(prob.power / tp);
            p.common *= scale;
            for (auto& pk : p.priv) pk *= scale;
        }
        return p;
    }

    std::vector<int> active;
    for (int k = 0; k < K; ++k)
        if (plan.private_active[k] && prob.channels.norm_sq(k) > 0.0)
            active.push_back(k);

    double fc = plan.has_common ? cfg.common_power_fraction : 0.0;
    if (active.empty()) fc = plan.has_common ? 1.0 : 0.0;
    if (plan.has_common) p.common = std::sqrt(fc * prob.power) * svd_common_direction(prob.channels);
    if (!active.empty()) {
        const double per = (1.0 - fc) * prob.power / active.size();
        for (int k : active)
            p.priv[k] = std::sqrt(per) * prob.channels.h[k] / prob.channels.h[k].norm();
    }
    return p;
}

namespace {

struct ScaIterationResult {
    bool solved = false;
    PrecoderSet precoders;
    Eigen::VectorXd C;
};

// One inner approximation around (p_hat, sinrs_hat): SINR constraints via
// quadratic-over-linear tangents, rates via an inverse-sqrt minorant of
// log2(1+x), both tight at the expansion point.
ScaIterationResult solve_subproblem(const ProblemSpec& prob,
                                    const SchemePlan& plan,
                                    const PrecoderSet& p_hat,
                                    const Sinrs& hat, double lambda,
                                    double solver_tol) {
    const int K = prob.K(), M = prob.M();
    ScaIterationResult out;

    const double s_hat = hat.common.size() ? hat.common.minCoeff() : 0.0;
    std::vector<bool> priv_on(K, false);
    for (int k = 0; k < K; ++k) {
        priv_on[k] = plan.private_active[k] && hat.priv(k) > kStreamFloor;
        // keep a stream whose QoS cannot be served otherwise
        if (plan.private_active[k] && !priv_on[k] && prob.r_threshold(k) > 0.0 &&
            (!plan.has_common || plan.common_rate_pinned[k]))
            priv_on[k] = hat.priv(k) > 0.0;
    }
    bool common_on = plan.has_common && s_hat > kStreamFloor;
    if (plan.has_common && !common_on && prob.scheme.kind == SchemeKind::NOMA2)
        common_on = s_hat > 0.0;
    if (!common_on && std::none_of(priv_on.begin(), priv_on.end(), [](bool b) { return b; }))
        return out;

    ConicProgram prog;
    VarRef pc, s_var, rc;
    std::vector<VarRef> pk(K), C(K), gam(K), rk(K);
    if (common_on) pc = prog.add_var("p_common", 2 * M);
    for (int k = 0; k < K; ++k)
        if (priv_on[k]) pk[k] = prog.add_var("p_" + std::to_string(k), 2 * M);
    for (int k = 0; k < K; ++k)
        if (common_on && !plan.common_rate_pinned[k])
            C[k] = prog.add_var("C_" + std::to_string(k));
    for (int k = 0; k < K; ++k)
        if (priv_on[k]) {
            gam[k] = prog.add_var("gamma_" + std::to_string(k));
            rk[k] = prog.add_var("r_" + std::to_string(k));
        }
    if (common_on) {
        s_var = prog.add_var("s");
        rc = prog.add_var("r_common");
    }

    auto interference = [&](int k, bool include_own) {
        std::vector<LinExpr> v;
        for (int j = 0; j < K; ++j) {
            if (!priv_on[j] || (!include_own && j == k)) continue;
            const CExpr hp = channel_dot(prob.channels.h[k], pk[j]);
            v.push_back(hp.re);
            v.push_back(hp.im);
        }
        v.push_back(LinExpr::of(1.0));
        return v;
    };

    // rate minorant: r <= log2(1+g_hat) + (2/ln2)(1 - sqrt(1+g_hat)*z),
    // z >= (1+gamma)^{-1/2} via w^2 <= 1+gamma, z*w >= 1.
    auto add_rate_minorant = [&](VarRef r, VarRef gamma, double g_hat,
                                 const std::string& id) {
        const VarRef w = prog.add_var("w_" + id);
        const VarRef z = prog.add_var("z_" + id);
        prog.add_rsoc(LinExpr::var(gamma) + LinExpr::of(1.0), LinExpr::of(1.0),
                      {LinExpr::var(w)}, "minorant-sqrt[" + id + "]");
        prog.add_rsoc(LinExpr::var(z), LinExpr::var(w), {LinExpr::of(1.0)},
                      "minorant-recip[" + id + "]");
        const double A = rate_of(g_hat) + 2.0 / kLn2;
        const double B = (2.0 / kLn2) * std::sqrt(1.0 + g_hat);
        prog.add_le(LinExpr::var(r) + B * LinExpr::var(z) - LinExpr::of(A),
                    "minorant-rate[" + id + "]");
        prog.add_ge(LinExpr::var(gamma), "sinr-nonneg[" + id + "]");
    };

    // tangent of |h^H p|^2 / sinr at the expansion point, kept above the
    // interference power
    auto add_sinr_tangent = [&](const cvec& h, VarRef p, VarRef sinr,
                                const std::complex<double>& c0, double g_hat,
                                std::vector<LinExpr> interf, const std::string& id) {
        const CExpr hp = channel_dot(h, p);
        LinExpr T = (2.0 * c0.real() / g_hat) * hp.re + (2.0 * c0.imag() / g_hat) * hp.im;
        T -= (std::norm(c0) / (g_hat * g_hat)) * LinExpr::var(sinr);
        prog.add_rsoc(T, LinExpr::of(1.0), std::move(interf), "sinr-tangent[" + id + "]");
    };

    for (int k = 0; k < K; ++k) {
        if (!priv_on[k]) continue;
        const std::string id = std::to_string(k);
        const double g_hat = std::max(hat.priv(k), kStreamFloor);
        add_rate_minorant(rk[k], gam[k], g_hat, id);
        add_sinr_tangent(prob.channels.h[k], pk[k], gam[k],
                         p_hat.priv[k].size() ? prob.channels.h[k].dot(p_hat.priv[k])
                                              : std::complex<double>(0, 0),
                         g_hat, interference(k, false), id);
    }
    if (common_on) {
        const double sh = std::max(s_hat, kStreamFloor);
        add_rate_minorant(rc, s_var, sh, "common");
        for (int k = 0; k < K; ++k)
            add_sinr_tangent(prob.channels.h[k], pc, s_var,
                             prob.channels.h[k].dot(p_hat.common), sh,
                             interference(k, true), "common" + std::to_string(k));
        LinExpr csum;
        for (int k = 0; k < K; ++k)
            if (C[k].valid()) {
                csum += LinExpr::var(C[k]);
                prog.add_ge(LinExpr::var(C[k]), "common-rate-nonneg[" + std::to_string(k) + "]");
            }
        prog.add_le(csum - LinExpr::var(rc), "common-rate-split");
    }

    for (int k = 0; k < K; ++k) {
        if (prob.r_threshold(k) <= 0.0) continue;
        LinExpr lhs;
        if (C[k].valid()) lhs += LinExpr::var(C[k]);
        if (priv_on[k]) lhs += LinExpr::var(rk[k]);
        prog.add_ge(lhs - LinExpr::of(prob.r_threshold(k)),
                    "qos-floor[" + std::to_string(k) + "]");
    }

    std::vector<LinExpr> pow_entries;
    auto push_entries = [&](VarRef v) {
        for (int i = 0; i < v.size; ++i) pow_entries.push_back(LinExpr::var(v, i));
    };
    if (pc.valid()) push_entries(pc);
    for (int k = 0; k < K; ++k)
        if (pk[k].valid()) push_entries(pk[k]);
    prog.add_soc(pow_entries, LinExpr::of(std::sqrt(prob.power)), "power-budget");

    LinExpr objective;  // maximize sum u (C + r) - lambda*(mu q + P_c)
    for (int k = 0; k < K; ++k) {
        LinExpr term;
        if (C[k].valid()) term += LinExpr::var(C[k]);
        if (priv_on[k]) term += LinExpr::var(rk[k]);
        term *= prob.u(k);
        objective -= term;
    }
    if (lambda * prob.mu > 0.0) {
        const VarRef q = prog.add_var("power_epi");
        prog.add_rsoc(LinExpr::var(q), LinExpr::of(1.0), pow_entries, "power-epigraph");
        objective += (lambda * prob.mu) * LinExpr::var(q);
    }
    prog.minimize(objective);

    const ConicSolution sol = solve(prog, solver_tol);
    if (sol.status != ConicStatus::Optimal) return out;

    out.solved = true;
    out.precoders = PrecoderSet::zeros(K, M);
    auto read_cvec = [&](VarRef v) {
        cvec w(M);
        for (int m = 0; m < M; ++m) w(m) = sol.cvalue(v, m);
        return w;
    };
    if (pc.valid()) out.precoders.common = read_cvec(pc);
    for (int k = 0; k < K; ++k)
        if (pk[k].valid()) out.precoders.priv[k] = read_cvec(pk[k]);
    out.C = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k)
        if (C[k].valid()) out.C(k) = std::max(0.0, sol.value(C[k]));
    return out;
}

// Largest weighted common-rate split that the exact SINRs support; keeps the
// reported point consistent with the recomputed rates.
Eigen::VectorXd settle_common_rates(const ProblemSpec& prob, const SchemePlan& plan,
                                    const Sinrs& s, const Eigen::VectorXd& C_raw) {
    const int K = prob.K();
    Eigen::VectorXd C = Eigen::VectorXd::Zero(K);
    if (!plan.has_common) return C;
    double budget = rate_of(s.common.minCoeff());
    for (int k = 0; k < K; ++k) {
        if (plan.common_rate_pinned[k]) continue;
        const double floor_k = std::max(
            0.0, prob.r_threshold(k) - rate_of(s.priv(k)));
        C(k) = std::min(floor_k, budget);
        budget -= C(k);
    }
    // distribute what is left by weight, heaviest user first
    std::vector<int> order;
    for (int k = 0; k < K; ++k)
        if (!plan.common_rate_pinned[k]) order.push_back(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return prob.u(a) > prob.u(b); });
    for (int k : order) {
        const double want = std::max(0.0, C_raw(k) - C(k));
        const double add = std::min(want, budget);
        C(k) += add;
        budget -= add;
    }
    if (budget > 0.0 && !order.empty()) C(order.front()) += budget;
    return C;
}

}  // namespace

ScaResult sca_solve(const ProblemSpec& prob, const ScaConfig& cfg) {
    const SchemePlan plan = SchemePlan::of(prob);
    ScaResult res;

    PrecoderSet p_hat = init_precoders(prob, cfg);
    Sinrs hat = compute_sinrs(prob.channels, p_hat);
    Eigen::VectorXd C_hat =
        settle_common_rates(prob, plan, hat, Eigen::VectorXd::Zero(prob.K()));
    double obj = objective_value(prob, p_hat, C_hat, hat.priv);
    double lambda = (prob.objective == ObjectiveKind::EE) ? obj : 0.0;
    res.objective_history.push_back(obj);

    bool any_solved = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const ScaIterationResult step =
            solve_subproblem(prob, plan, p_hat, hat, lambda, cfg.solver_tol);
        ++res.iterations;
        if (!step.solved) break;
        any_solved = true;

        PrecoderSet p_new = step.precoders;
        if (cfg.damping < 1.0) {
            p_new.common = cfg.damping * p_new.common + (1.0 - cfg.damping) * p_hat.common;
            for (int k = 0; k < prob.K(); ++k)
                p_new.priv[k] =
                    cfg.damping * p_new.priv[k] + (1.0 - cfg.damping) * p_hat.priv[k];
        }
        const Sinrs s_new = compute_sinrs(prob.channels, p_new);
        const Eigen::VectorXd C_new = settle_common_rates(prob, plan, s_new, step.C);
        const double obj_new = objective_value(prob, p_new, C_new, s_new.priv);

        p_hat = std::move(p_new);
        hat = s_new;
        C_hat = C_new;
        res.objective_history.push_back(obj_new);
        if (prob.objective == ObjectiveKind::EE) lambda = obj_new;
        const bool converged =
            std::abs(obj_new - obj) <= cfg.conv_tol * std::max(1.0, std::abs(obj_new));
        obj = obj_new;
        if (converged) {
            res.status = ScaStatus::Converged;
            break;
        }
    }
    if (!any_solved) res.status = ScaStatus::InfeasibleStart;

    res.report = check_feasibility(prob, p_hat, C_hat);
    return res;
}

}  // namespace rsma
