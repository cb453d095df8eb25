#include "rsma/conic.hpp"

#include <cmath>
#include <sstream>

namespace rsma {

CExpr channel_dot(const cvec& h, VarRef p) {
    CExpr out;
    const int M = static_cast<int>(h.size());
    for (int m = 0; m < M; ++m) {
        const double hr = h(m).real(), hi = h(m).imag();
        // conj(h_m) * (re + j im) = (hr*re + hi*im) + j (hr*im - hi*re)
        out.re.add(p, 2 * m, hr).add(p, 2 * m + 1, hi);
        out.im.add(p, 2 * m, -hi).add(p, 2 * m + 1, hr);
    }
    return out;
}

VarRef ConicProgram::add_var(const std::string& name, int size) {
    VarRef ref{n_, size};
    vars_.push_back({name, n_, size});
    n_ += size;
    return ref;
}

void ConicProgram::add_eq(LinExpr e, std::string tag) {
    eqs_.push_back({std::move(e), std::move(tag)});
}
void ConicProgram::add_le(LinExpr e, std::string tag) {
    ineqs_.push_back({std::move(e), std::move(tag)});
}
void ConicProgram::add_ge(LinExpr e, std::string tag) {
    ineqs_.push_back({-std::move(e), std::move(tag)});
}
void ConicProgram::add_soc(std::vector<LinExpr> norm, LinExpr bound,
                           std::string tag) {
    socs_.push_back({std::move(norm), std::move(bound), std::move(tag)});
}
void ConicProgram::add_rsoc(LinExpr u, LinExpr v, std::vector<LinExpr> w,
                            std::string tag) {
    rsocs_.push_back({std::move(u), std::move(v), std::move(w), std::move(tag)});
}

namespace {

void scatter(Eigen::MatrixXd& M, int row, const LinExpr& e, double sign) {
    for (auto [idx, c] : e.terms) M(row, idx) += sign * c;
}

}  // namespace

SocpData ConicProgram::compile() const {
    SocpData P;
    const int n = n_;
    const int p = static_cast<int>(eqs_.size());

    P.c = Eigen::VectorXd::Zero(n);
    for (auto [idx, c] : objective_.terms) P.c(idx) += c;

    P.A = Eigen::MatrixXd::Zero(p, n);
    P.b = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i) {
        scatter(P.A, i, eqs_[i].expr, 1.0);
        P.b(i) = -eqs_[i].expr.constant;
    }

    int m = static_cast<int>(ineqs_.size());
    P.cones.nonneg = m;
    for (const auto& s : socs_) m += 1 + static_cast<int>(s.norm.size());
    for (const auto& r : rsocs_) m += 2 + static_cast<int>(r.w.size());

    P.G = Eigen::MatrixXd::Zero(m, n);
    P.h = Eigen::VectorXd::Zero(m);
    int row = 0;
    for (const auto& con : ineqs_) {
        // expr <= 0: slack = -expr >= 0
        scatter(P.G, row, con.expr, 1.0);
        P.h(row) = -con.expr.constant;
        ++row;
    }
    auto put_soc = [&](const LinExpr& bound, const std::vector<LinExpr>& norm) {
        P.cones.soc.push_back(1 + static_cast<int>(norm.size()));
        scatter(P.G, row, bound, -1.0);
        P.h(row) = bound.constant;
        ++row;
        for (const auto& t : norm) {
            scatter(P.G, row, t, -1.0);
            P.h(row) = t.constant;
            ++row;
        }
    };
    for (const auto& s : socs_) put_soc(s.bound, s.norm);
    for (const auto& r : rsocs_) {
        // u v >= ||w||^2, u,v >= 0  <=>  ||(2w, u - v)|| <= u + v
        std::vector<LinExpr> norm;
        norm.reserve(r.w.size() + 1);
        for (const auto& wi : r.w) {
            LinExpr two = wi;
            two *= 2.0;
            norm.push_back(std::move(two));
        }
        norm.push_back(r.u - r.v);
        put_soc(r.u + r.v, norm);
    }
    return P;
}

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "conic program: " << n_ << " vars, " << eqs_.size() << " eq, "
       << ineqs_.size() << " ineq, " << socs_.size() << " soc, "
       << rsocs_.size() << " rsoc\n";
    for (const auto& v : vars_)
        os << "  var " << v.name << " [" << v.offset << ":" << v.offset + v.size
           << ")\n";
    auto fmt = [&](const LinExpr& e) {
        std::ostringstream t;
        bool first = true;
        for (auto [idx, c] : e.terms) {
            t << (first ? "" : " + ") << c << "*x" << idx;
            first = false;
        }
        if (e.constant != 0.0 || first) t << (first ? "" : " + ") << e.constant;
        return t.str();
    };
    os << "minimize " << fmt(objective_) << "\n";
    for (const auto& c : eqs_) os << "  [" << c.tag << "] " << fmt(c.expr) << " == 0\n";
    for (const auto& c : ineqs_) os << "  [" << c.tag << "] " << fmt(c.expr) << " <= 0\n";
    for (const auto& c : socs_) {
        os << "  [" << c.tag << "] ||";
        for (size_t i = 0; i < c.norm.size(); ++i)
            os << (i ? ", " : "") << fmt(c.norm[i]);
        os << "|| <= " << fmt(c.bound) << "\n";
    }
    for (const auto& c : rsocs_) {
        os << "  [" << c.tag << "] (" << fmt(c.u) << ")*(" << fmt(c.v) << ") >= ||";
        for (size_t i = 0; i < c.w.size(); ++i) os << (i ? ", " : "") << fmt(c.w[i]);
        os << "||^2\n";
    }
    return os.str();
}

ConicSolution solve(const ConicProgram& prog, double solver_tol) {
    const SocpData data = prog.compile();
    SocpSettings st;
    st.feastol = st.abstol = st.reltol = std::max(solver_tol * 0.25, 1e-12);
    st.feastol_inacc = std::max(1e-6, solver_tol * 50.0);
    st.abstol_inacc = std::max(5e-6, solver_tol * 100.0);
    const SocpSolution raw = solve_socp(data, st);

    ConicSolution out;
    out.x = raw.x;
    out.iterations = raw.iterations;
    out.objective = raw.objective + prog.objective().constant;
    out.dual_objective = -(data.b.size() ? data.b.dot(raw.y) : 0.0) -
                         data.h.dot(raw.z) + prog.objective().constant;

    const double normb = 1.0 + (data.b.size() ? data.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double normh = 1.0 + data.h.lpNorm<Eigen::Infinity>();
    const double normc = 1.0 + data.c.lpNorm<Eigen::Infinity>();

    switch (raw.status) {
        case SocpStatus::Optimal: {
            const double pres = std::max(
                data.b.size() ? (data.A * raw.x - data.b).lpNorm<Eigen::Infinity>() / normb : 0.0,
                (data.G * raw.x + raw.s - data.h).lpNorm<Eigen::Infinity>() / normh);
            const double dres =
                (data.A.transpose() * raw.y + data.G.transpose() * raw.z + data.c)
                    .lpNorm<Eigen::Infinity>() /
                normc;
            const double relgap = std::abs(out.objective - out.dual_objective) /
                                  (1.0 + std::abs(out.objective));
            out.pres = pres;
            out.dres = dres;
            out.gap = relgap;
            const double gap_tol = std::max(1e-6, 100.0 * solver_tol);
            out.status = (pres <= solver_tol && dres <= solver_tol && relgap <= gap_tol)
                             ? ConicStatus::Optimal
                             : ConicStatus::NumericalFailure;
            break;
        }
        case SocpStatus::Infeasible: {
            // certificate: A'y + G'z = 0, b'y + h'z = -1 (normalized)
            const double certres =
                (data.A.transpose() * raw.y + data.G.transpose() * raw.z)
                    .lpNorm<Eigen::Infinity>() /
                normc;
            const double byhz =
                (data.b.size() ? data.b.dot(raw.y) : 0.0) + data.h.dot(raw.z);
            out.pres = certres;
            out.status = (byhz < 0.0 && certres <= 1e-6) ? ConicStatus::Infeasible
                                                         : ConicStatus::NumericalFailure;
            break;
        }
        case SocpStatus::Unbounded: {
            const double certres = std::max(
                data.b.size() ? (data.A * raw.x).lpNorm<Eigen::Infinity>() / normb : 0.0,
                (data.G * raw.x + raw.s).lpNorm<Eigen::Infinity>() / normh);
            out.status = (data.c.dot(raw.x) < 0.0 && certres <= 1e-6)
                             ? ConicStatus::Unbounded
                             : ConicStatus::NumericalFailure;
            break;
        }
        default:
            out.status = ConicStatus::NumericalFailure;
    }
    return out;
}

std::optional<EnvelopeCut> envelope_cuts(double alpha_lo, double alpha_hi, int k) {
    if (alpha_lo < -1e-12 || alpha_hi > 2.0 * M_PI + 1e-12 || alpha_lo > alpha_hi + 1e-12)
        throw std::invalid_argument("envelope_cuts: need 0 <= lo <= hi <= 2pi");
    if (alpha_hi - alpha_lo > M_PI) return std::nullopt;
    EnvelopeCut cut;
    cut.k = k;
    cut.sin_lo = std::sin(alpha_lo);
    cut.cos_lo = std::cos(alpha_lo);
    cut.sin_hi = std::sin(alpha_hi);
    cut.cos_hi = std::cos(alpha_hi);
    cut.a = 0.5 * (cut.cos_lo + cut.cos_hi);
    cut.b = 0.5 * (cut.sin_lo + cut.sin_hi);
    return cut;
}

namespace {

// Shared variable layout of the bounding / g-tilde subproblems.
struct BuildCtx {
    const ProblemSpec& prob;
    SchemePlan plan;
    ConicProgram prog;
    SubproblemRefs refs;
    int K, M;

    explicit BuildCtx(const ProblemSpec& p)
        : prob(p), plan(SchemePlan::of(p)), K(p.K()), M(p.M()) {}

    void make_stream_vars() {
        refs.t = prog.add_var("t");
        if (plan.has_common) refs.p_common = prog.add_var("p_common", 2 * M);
        refs.p_private.assign(K, VarRef{});
        refs.common_rate.assign(K, VarRef{});
        for (int k = 0; k < K; ++k)
            if (plan.private_active[k])
                refs.p_private[k] = prog.add_var("p_" + std::to_string(k), 2 * M);
        for (int k = 0; k < K; ++k)
            if (plan.has_common && !plan.common_rate_pinned[k])
                refs.common_rate[k] = prog.add_var("C_" + std::to_string(k));
        if (plan.has_common && K >= 2) {
            refs.d.assign(K, VarRef{});
            refs.e.assign(K, VarRef{});
            for (int k = 1; k < K; ++k) {
                refs.d[k] = prog.add_var("d_" + std::to_string(k));
                refs.e[k] = prog.add_var("e_" + std::to_string(k), 2);
            }
        }
    }

    // Interference terms seen by user k: active private streams (optionally
    // without its own) plus the unit-noise constant.
    std::vector<LinExpr> noise_plus_interference(int k, bool include_own,
                                                 bool include_common = false) const {
        std::vector<LinExpr> terms;
        for (int j = 0; j < K; ++j) {
            if (!plan.private_active[j]) continue;
            if (!include_own && j == k) continue;
            const CExpr hp = channel_dot(prob.channels.h[k], refs.p_private[j]);
            terms.push_back(hp.re);
            terms.push_back(hp.im);
        }
        if (include_common && refs.p_common.valid()) {
            const CExpr hp = channel_dot(prob.channels.h[k], refs.p_common);
            terms.push_back(hp.re);
            terms.push_back(hp.im);
        }
        terms.push_back(LinExpr::of(1.0));
        return terms;
    }

    // coef * ||terms|| <= bound; degenerates to a linear row when coef = 0.
    void scaled_soc(double coef, std::vector<LinExpr> terms, LinExpr bound,
                    const std::string& tag) {
        if (coef <= 0.0) {
            prog.add_ge(std::move(bound), tag);
            return;
        }
        for (auto& t : terms) t *= coef;
        prog.add_soc(std::move(terms), std::move(bound), tag);
    }

    void rotation_constraints() {
        for (int k = 0; k < K; ++k) {
            if (!plan.private_active[k]) continue;
            const CExpr hp = channel_dot(prob.channels.h[k], refs.p_private[k]);
            prog.add_eq(hp.im, "rotate-private-imag[" + std::to_string(k) + "]");
            prog.add_ge(hp.re, "rotate-private-real[" + std::to_string(k) + "]");
        }
        if (refs.p_common.valid()) {
            const CExpr hp = channel_dot(prob.channels.h[0], refs.p_common);
            prog.add_eq(hp.im, "rotate-common-imag");
            prog.add_ge(hp.re, "rotate-common-real");
        }
    }

    void common_link_constraints(double d_cap) {
        if (!(plan.has_common && K >= 2)) return;
        for (int k = 1; k < K; ++k) {
            const CExpr hp = channel_dot(prob.channels.h[k], refs.p_common);
            prog.add_eq(LinExpr::var(refs.e[k], 0) - hp.re,
                        "link-e-real[" + std::to_string(k) + "]");
            prog.add_eq(LinExpr::var(refs.e[k], 1) - hp.im,
                        "link-e-imag[" + std::to_string(k) + "]");
            prog.add_ge(LinExpr::var(refs.d[k]), "d-nonneg[" + std::to_string(k) + "]");
            prog.add_le(LinExpr::var(refs.d[k]) - LinExpr::of(d_cap),
                        "d-cap[" + std::to_string(k) + "]");
        }
    }

    // sum_k u_k (C_k + rate_k); rate_k is either the gamma'_k variable or a
    // frozen constant for pinned/fixed users.
    LinExpr weighted_rate_sum(const std::vector<LinExpr>& rate_terms) const {
        LinExpr sum;
        for (int k = 0; k < K; ++k) {
            LinExpr term = rate_terms[k];
            if (refs.common_rate[k].valid()) term += LinExpr::var(refs.common_rate[k]);
            term *= prob.u(k);
            sum += term;
        }
        return sum;
    }

    std::vector<LinExpr> all_precoder_entries() const {
        std::vector<LinExpr> entries;
        auto push = [&](VarRef v) {
            for (int i = 0; i < v.size; ++i) entries.push_back(LinExpr::var(v, i));
        };
        if (refs.p_common.valid()) push(refs.p_common);
        for (int k = 0; k < K; ++k)
            if (refs.p_private[k].valid()) push(refs.p_private[k]);
        return entries;
    }

    void power_constraint() {
        prog.add_soc(all_precoder_entries(), LinExpr::of(std::sqrt(prob.power)),
                     "power-budget");
    }

    // sum u_k (C_k + rate_k) >= delta * (mu ||p||^2 + P_c); omitted for
    // delta = 0 where it is implied by nonnegativity.
    void delta_level_constraint(double delta, const LinExpr& weighted_sum) {
        if (delta <= 0.0) return;
        if (prob.mu > 0.0) {
            LinExpr w = weighted_sum - LinExpr::of(delta * prob.p_circuit);
            w *= 1.0 / (delta * prob.mu);
            prog.add_rsoc(w, LinExpr::of(1.0), all_precoder_entries(),
                          "objective-level-epigraph");
        } else {
            prog.add_ge(weighted_sum - LinExpr::of(delta * prob.p_circuit),
                        "objective-level-floor");
        }
    }

    // C_k >= max{0, R_th_k - rate_k}; pinned common rates force the floor
    // onto the private rate.
    void qos_constraints(const std::vector<LinExpr>& rate_terms) {
        for (int k = 0; k < K; ++k) {
            const std::string id = std::to_string(k);
            if (refs.common_rate[k].valid()) {
                prog.add_ge(LinExpr::var(refs.common_rate[k]), "common-rate-nonneg[" + id + "]");
                if (prob.r_threshold(k) > 0.0)
                    prog.add_ge(LinExpr::var(refs.common_rate[k]) + rate_terms[k] -
                                    LinExpr::of(prob.r_threshold(k)),
                                "qos-floor[" + id + "]");
            } else if (prob.r_threshold(k) > 0.0) {
                prog.add_ge(rate_terms[k] - LinExpr::of(prob.r_threshold(k)),
                            "qos-floor[" + id + "]");
            }
        }
    }

    // sum_k C_k <= s_log (variable or frozen constant).
    void common_split_constraint(const LinExpr& s_rate) {
        if (!plan.has_common) return;
        LinExpr sum;
        bool any = false;
        for (int k = 0; k < K; ++k)
            if (refs.common_rate[k].valid()) {
                sum += LinExpr::var(refs.common_rate[k]);
                any = true;
            }
        if (!any) return;
        prog.add_le(sum - s_rate, "common-rate-split");
    }

    double d_cap_for(double s_ref) const {
        return 4.0 * std::sqrt((1.0 + std::max(s_ref, 0.0)) *
                               (1.0 + prob.power * prob.channels.max_norm_sq())) +
               10.0;
    }
};

// Bounded variable with interval [lo, hi]; collapses to an equality on
// near-degenerate intervals.
void interval_rows(ConicProgram& prog, VarRef v, double lo, double hi,
                   const std::string& tag) {
    if (hi - lo < 1e-12) {
        prog.add_eq(LinExpr::var(v) - LinExpr::of(0.5 * (lo + hi)), tag + "-pin");
        return;
    }
    prog.add_ge(LinExpr::var(v) - LinExpr::of(lo), tag + "-lo");
    prog.add_le(LinExpr::var(v) - LinExpr::of(hi), tag + "-hi");
}

}  // namespace

BuiltProgram build_bounding_socp(const Box& box, double delta,
                                 const ProblemSpec& prob) {
    if (!box.valid()) throw std::invalid_argument("build_bounding_socp: malformed box");
    BuildCtx ctx(prob);
    const int K = ctx.K;
    ctx.make_stream_vars();
    ctx.prog.minimize(LinExpr::var(ctx.refs.t));

    // rate-substituted variables gamma'_k, s' with box interval rows
    ctx.refs.gamma_log.assign(K, VarRef{});
    std::vector<LinExpr> rate_terms(K, LinExpr::of(0.0));
    for (int k = 0; k < K; ++k) {
        if (!ctx.plan.private_active[k]) continue;  // pinned: rate stays 0
        ctx.refs.gamma_log[k] = ctx.prog.add_var("gamma_log_" + std::to_string(k));
        interval_rows(ctx.prog, ctx.refs.gamma_log[k], rate_of(box.gamma_lo(k)),
                      rate_of(box.gamma_hi(k)), "gamma-log-box[" + std::to_string(k) + "]");
        rate_terms[k] = LinExpr::var(ctx.refs.gamma_log[k]);
    }
    LinExpr s_rate = LinExpr::of(0.0);
    if (ctx.plan.has_common) {
        ctx.refs.s_log = ctx.prog.add_var("s_log");
        interval_rows(ctx.prog, ctx.refs.s_log, rate_of(box.s_lo), rate_of(box.s_hi),
                      "s-log-box");
        s_rate = LinExpr::var(ctx.refs.s_log);
    }

    const LinExpr t = LinExpr::var(ctx.refs.t);

    // SINR cone rows at the box lower corner
    if (ctx.plan.has_common) {
        const CExpr h1pc = channel_dot(prob.channels.h[0], ctx.refs.p_common);
        ctx.scaled_soc(std::sqrt(box.s_lo), ctx.noise_plus_interference(0, true),
                       t + h1pc.re, "common-sinr-rotated-user0");
        for (int k = 1; k < K; ++k)
            ctx.scaled_soc(std::sqrt(box.s_lo), ctx.noise_plus_interference(k, true),
                           t + LinExpr::var(ctx.refs.d[k]),
                           "common-sinr-cover[" + std::to_string(k) + "]");
    }
    for (int k = 0; k < K; ++k) {
        if (!ctx.plan.private_active[k]) continue;
        const CExpr hkpk = channel_dot(prob.channels.h[k], ctx.refs.p_private[k]);
        ctx.scaled_soc(std::sqrt(box.gamma_lo(k)),
                       ctx.noise_plus_interference(k, false), t + hkpk.re,
                       "private-sinr[" + std::to_string(k) + "]");
    }

    // arc cuts on the common-stream phases
    if (ctx.plan.has_common && K >= 2) {
        for (int k = 1; k < K; ++k) {
            const auto cut = envelope_cuts(box.alpha_lo(k - 1), box.alpha_hi(k - 1), k);
            if (!cut) continue;
            const std::string id = std::to_string(k);
            const LinExpr re = LinExpr::var(ctx.refs.e[k], 0);
            const LinExpr im = LinExpr::var(ctx.refs.e[k], 1);
            ctx.prog.add_le(cut->sin_lo * re - cut->cos_lo * im, "arc-cut-lo[" + id + "]");
            ctx.prog.add_ge(cut->sin_hi * re - cut->cos_hi * im, "arc-cut-hi[" + id + "]");
            const double ab2 = cut->a * cut->a + cut->b * cut->b;
            ctx.prog.add_ge(cut->a * re + cut->b * im -
                                ab2 * (LinExpr::var(ctx.refs.d[k]) - t),
                            "arc-cut-chord[" + id + "]");
        }
    }

    ctx.rotation_constraints();
    ctx.common_link_constraints(ctx.d_cap_for(box.s_hi));
    ctx.qos_constraints(rate_terms);
    ctx.common_split_constraint(s_rate);
    ctx.delta_level_constraint(delta, ctx.weighted_rate_sum(rate_terms));
    ctx.power_constraint();

    return {std::move(ctx.prog), std::move(ctx.refs)};
}

BuiltProgram build_gtilde_program(const XPoint& x, double delta,
                                  const ProblemSpec& prob) {
    BuildCtx ctx(prob);
    const int K = ctx.K;
    ctx.make_stream_vars();
    ctx.prog.minimize(LinExpr::var(ctx.refs.t));
    const LinExpr t = LinExpr::var(ctx.refs.t);

    std::vector<LinExpr> rate_terms(K);
    for (int k = 0; k < K; ++k) rate_terms[k] = LinExpr::of(rate_of(x.gamma_p(k)));

    if (ctx.plan.has_common) {
        const CExpr h1pc = channel_dot(prob.channels.h[0], ctx.refs.p_common);
        ctx.scaled_soc(std::sqrt(x.s), ctx.noise_plus_interference(0, true),
                       t + h1pc.re, "common-sinr-rotated-user0");
        for (int k = 1; k < K; ++k)
            ctx.scaled_soc(std::sqrt(x.s), ctx.noise_plus_interference(k, true),
                           t + LinExpr::var(ctx.refs.d[k]),
                           "common-sinr-cover[" + std::to_string(k) + "]");
    }
    for (int k = 0; k < K; ++k) {
        if (!ctx.plan.private_active[k]) continue;
        const CExpr hkpk = channel_dot(prob.channels.h[k], ctx.refs.p_private[k]);
        ctx.scaled_soc(std::sqrt(x.gamma_p(k)),
                       ctx.noise_plus_interference(k, false), t + hkpk.re,
                       "private-sinr[" + std::to_string(k) + "]");
    }

    // fixed-phase rays: e_k = r_k (cos a_k, sin a_k), r_k >= max{0, d_k - t}
    if (ctx.plan.has_common && K >= 2) {
        for (int k = 1; k < K; ++k) {
            const std::string id = std::to_string(k);
            const double ak = x.alpha(k - 1);
            const VarRef r = ctx.prog.add_var("ray_" + id);
            ctx.prog.add_eq(LinExpr::var(ctx.refs.e[k], 0) -
                                std::cos(ak) * LinExpr::var(r),
                            "ray-real[" + id + "]");
            ctx.prog.add_eq(LinExpr::var(ctx.refs.e[k], 1) -
                                std::sin(ak) * LinExpr::var(r),
                            "ray-imag[" + id + "]");
            ctx.prog.add_ge(LinExpr::var(r), "ray-nonneg[" + id + "]");
            ctx.prog.add_ge(LinExpr::var(r) - LinExpr::var(ctx.refs.d[k]) + t,
                            "ray-cover[" + id + "]");
        }
    }

    ctx.rotation_constraints();
    ctx.common_link_constraints(ctx.d_cap_for(x.s));
    ctx.qos_constraints(rate_terms);
    ctx.common_split_constraint(LinExpr::of(rate_of(x.s)));
    ctx.delta_level_constraint(delta, ctx.weighted_rate_sum(rate_terms));
    ctx.power_constraint();

    return {std::move(ctx.prog), std::move(ctx.refs)};
}

BuiltProgram build_common_rate_lp(const Eigen::VectorXd& gamma_star,
                                  double s_star, const PrecoderSet& precoders,
                                  double delta, const ProblemSpec& prob) {
    BuildCtx ctx(prob);
    const int K = ctx.K;
    ctx.refs.common_rate.assign(K, VarRef{});
    LinExpr weighted, total;
    double fixed_weighted_rate = 0.0;
    for (int k = 0; k < K; ++k) {
        fixed_weighted_rate += prob.u(k) * rate_of(gamma_star(k));
        if (!ctx.plan.has_common || ctx.plan.common_rate_pinned[k]) continue;
        ctx.refs.common_rate[k] = ctx.prog.add_var("C_" + std::to_string(k));
        weighted += prob.u(k) * LinExpr::var(ctx.refs.common_rate[k]);
        total += LinExpr::var(ctx.refs.common_rate[k]);
    }
    ctx.prog.minimize(-weighted);

    if (delta > 0.0 || prob.mu > 0.0) {
        const double rhs =
            delta * (prob.mu * precoders.total_power() + prob.p_circuit) -
            fixed_weighted_rate;
        ctx.prog.add_ge(weighted - LinExpr::of(rhs), "objective-level-floor");
    }
    ctx.prog.add_le(total - LinExpr::of(rate_of(std::max(s_star, 0.0))),
                    "common-rate-split");
    for (int k = 0; k < K; ++k) {
        const double floor_k =
            std::max(0.0, prob.r_threshold(k) - rate_of(gamma_star(k)));
        const std::string id = std::to_string(k);
        if (ctx.refs.common_rate[k].valid()) {
            ctx.prog.add_ge(LinExpr::var(ctx.refs.common_rate[k]) - LinExpr::of(floor_k),
                            "common-rate-floor[" + id + "]");
        } else if (floor_k > 0.0) {
            // pinned C_k cannot cover the QoS floor: constant infeasible row
            ctx.prog.add_le(LinExpr::of(floor_k), "common-rate-floor[" + id + "]");
        }
    }
    return {std::move(ctx.prog), std::move(ctx.refs)};
}

}  // namespace rsma
