#include "rsma/model.hpp"

#include <algorithm>
#include <cmath>

namespace rsma {

void ChannelSet::validate() const {
    if (K < 1 || M < 1) throw std::invalid_argument("ChannelSet: K, M >= 1 required");
    if (static_cast<int>(h.size()) != K)
        throw std::invalid_argument("ChannelSet: channel count != K");
    bool any_nonzero = false;
    for (const auto& hk : h) {
        if (hk.size() != M)
            throw std::invalid_argument("ChannelSet: channel length != M");
        if (!hk.allFinite())
            throw std::invalid_argument("ChannelSet: non-finite channel entry");
        if (hk.squaredNorm() > 0.0) any_nonzero = true;
    }
    if (!any_nonzero) throw std::invalid_argument("ChannelSet: all channels zero");
}

double ChannelSet::max_norm_sq() const {
    double m = 0.0;
    for (const auto& hk : h) m = std::max(m, hk.squaredNorm());
    return m;
}

double ChannelSet::min_norm_sq() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& hk : h) m = std::min(m, hk.squaredNorm());
    return m;
}

double PrecoderSet::total_power() const {
    double p = common.size() ? common.squaredNorm() : 0.0;
    for (const auto& pk : priv) p += pk.squaredNorm();
    return p;
}

PrecoderSet PrecoderSet::zeros(int K, int M) {
    PrecoderSet p;
    p.common = cvec::Zero(M);
    p.priv.assign(K, cvec::Zero(M));
    return p;
}

ProblemSpec ProblemSpec::wsr(ChannelSet ch, Eigen::VectorXd u,
                             Eigen::VectorXd r_th, double P,
                             SchemeConfig scheme) {
    ch.validate();
    ProblemSpec prob;
    prob.channels = std::move(ch);
    prob.u = std::move(u);
    prob.r_threshold = std::move(r_th);
    prob.power = P;
    prob.mu = 0.0;
    prob.p_circuit = 1.0;
    prob.objective = ObjectiveKind::WSR;
    if (prob.u.size() != prob.channels.K || prob.r_threshold.size() != prob.channels.K)
        throw std::invalid_argument("ProblemSpec: weight/QoS length != K");
    if (prob.u.maxCoeff() <= 0.0 || prob.u.minCoeff() < 0.0)
        throw std::invalid_argument("ProblemSpec: weights must be >= 0 and not all zero");
    if (!(P > 0.0)) throw std::invalid_argument("ProblemSpec: P > 0 required");
    if (prob.r_threshold.minCoeff() < 0.0)
        throw std::invalid_argument("ProblemSpec: QoS thresholds must be >= 0");
    return apply_scheme(scheme, std::move(prob));
}

ProblemSpec ProblemSpec::ee(ChannelSet ch, Eigen::VectorXd r_th, double P,
                            double mu, double p_circuit, SchemeConfig scheme) {
    const int K = ch.K;
    ProblemSpec prob =
        wsr(std::move(ch), Eigen::VectorXd::Ones(K), std::move(r_th), P, scheme);
    if (mu < 0.0) throw std::invalid_argument("ProblemSpec: mu >= 0 required");
    if (!(p_circuit > 0.0)) throw std::invalid_argument("ProblemSpec: P_c > 0 required");
    prob.mu = mu;
    prob.p_circuit = p_circuit;
    prob.objective = ObjectiveKind::EE;
    return prob;
}

SchemePlan SchemePlan::of(const ProblemSpec& prob) {
    const int K = prob.K();
    SchemePlan plan;
    plan.private_active.assign(K, true);
    plan.common_rate_pinned.assign(K, false);
    switch (prob.scheme.kind) {
        case SchemeKind::RSMA:
            break;
        case SchemeKind::MULP:
            plan.has_common = false;
            plan.common_rate_pinned.assign(K, true);
            break;
        case SchemeKind::NOMA2: {
            if (!prob.scheme.noma_order)
                throw std::logic_error("SchemePlan: NOMA2 order not resolved");
            const auto [strong, weak] = *prob.scheme.noma_order;
            plan.private_active[weak] = false;
            plan.common_rate_pinned[strong] = true;
            break;
        }
    }
    return plan;
}

Sinrs compute_sinrs(const ChannelSet& ch, const PrecoderSet& p) {
    if (static_cast<int>(p.priv.size()) != ch.K ||
        (p.common.size() && p.common.size() != ch.M))
        throw std::invalid_argument("compute_sinrs: dimension mismatch");
    for (const auto& pk : p.priv)
        if (pk.size() != ch.M)
            throw std::invalid_argument("compute_sinrs: dimension mismatch");

    Sinrs out;
    out.common.resize(ch.K);
    out.priv.resize(ch.K);
    for (int k = 0; k < ch.K; ++k) {
        const cvec& hk = ch.h[k];
        double interference_all = 1.0;  // unit noise
        for (int j = 0; j < ch.K; ++j)
            interference_all += std::norm(hk.dot(p.priv[j]));
        const double own = std::norm(hk.dot(p.priv[k]));
        const double pc = p.common.size() ? std::norm(hk.dot(p.common)) : 0.0;
        out.common(k) = pc / interference_all;
        out.priv(k) = own / (interference_all - own);
    }
    return out;
}

double objective_value(const ProblemSpec& prob, const PrecoderSet& p,
                       const Eigen::VectorXd& C,
                       const Eigen::VectorXd& gamma_p) {
    double num = 0.0;
    for (int k = 0; k < prob.K(); ++k)
        num += prob.u(k) * (C(k) + rate_of(gamma_p(k)));
    const double den = prob.mu * p.total_power() + prob.p_circuit;
    return num / den;
}

SolutionReport check_feasibility(const ProblemSpec& prob, const PrecoderSet& p,
                                 const Eigen::VectorXd& C, double feas_tol) {
    const int K = prob.K();
    SolutionReport rep;
    rep.precoders = p;
    rep.common_rate = C;
    const Sinrs s = compute_sinrs(prob.channels, p);
    rep.gamma_common = s.common;
    rep.gamma_private = s.priv;
    rep.rates.resize(K);
    for (int k = 0; k < K; ++k) rep.rates(k) = C(k) + rate_of(s.priv(k));
    rep.objective = objective_value(prob, p, C, s.priv);

    auto flag = [&](const std::string& id, double violation) {
        if (violation > feas_tol) rep.violations.push_back({id, violation});
    };

    const double common_capacity = rate_of(s.common.minCoeff());
    flag("common-rate-split", C.sum() - common_capacity);
    for (int k = 0; k < K; ++k) {
        flag("common-rate-nonneg[" + std::to_string(k) + "]", -C(k));
        flag("qos[" + std::to_string(k) + "]", prob.r_threshold(k) - rep.rates(k));
    }
    flag("power-budget", p.total_power() - prob.power);

    if (prob.scheme.kind != SchemeKind::RSMA) {
        SchemeConfig sc = prob.scheme;
        if (sc.kind == SchemeKind::NOMA2 && !sc.noma_order) {
            ProblemSpec resolved = prob;
            resolved.scheme.noma_order.reset();
            sc.noma_order = scheme_variants(resolved)[0].scheme.noma_order;
        }
        ProblemSpec tmp = prob;
        tmp.scheme = sc;
        const SchemePlan plan = SchemePlan::of(tmp);
        if (!plan.has_common)
            flag("scheme-common-off", p.common.size() ? p.common.norm() : 0.0);
        for (int k = 0; k < K; ++k) {
            if (!plan.private_active[k])
                flag("scheme-private-off[" + std::to_string(k) + "]", p.priv[k].norm());
            if (plan.common_rate_pinned[k])
                flag("scheme-common-rate-off[" + std::to_string(k) + "]", std::abs(C(k)));
        }
    }
    rep.feasible = rep.violations.empty();
    return rep;
}

ProblemSpec apply_scheme(const SchemeConfig& scheme, ProblemSpec prob) {
    if (scheme.kind == SchemeKind::NOMA2) {
        if (prob.K() != 2)
            throw std::invalid_argument("apply_scheme: NOMA2 requires K = 2");
        if (scheme.noma_order) {
            const auto [a, b] = *scheme.noma_order;
            if (a == b || a < 0 || b < 0 || a > 1 || b > 1)
                throw std::invalid_argument("apply_scheme: bad NOMA2 order");
        }
    }
    prob.scheme = scheme;
    return prob;
}

std::vector<ProblemSpec> scheme_variants(const ProblemSpec& prob) {
    if (prob.scheme.kind != SchemeKind::NOMA2 || prob.scheme.noma_order)
        return {prob};
    // Unset decode order: try both, descending channel norm first.
    const int strong = prob.channels.norm_sq(0) >= prob.channels.norm_sq(1) ? 0 : 1;
    ProblemSpec first = prob, second = prob;
    first.scheme.noma_order = {strong, 1 - strong};
    second.scheme.noma_order = {1 - strong, strong};
    return {first, second};
}

}  // namespace rsma
