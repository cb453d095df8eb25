#include "rsma/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rsma {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

AuditReport audit_trace(const SolverOutcome& outcome, const ProblemSpec& prob,
                        const SolverConfig& config, double feas_tol,
                        double bound_slack) {
    AuditReport rep;

    double last_delta = -std::numeric_limits<double>::infinity();
    std::map<std::uint64_t, double> live;
    bool saw_root = false;
    for (const auto& ev : outcome.trace) {
        if (ev.delta < last_delta - 1e-12)
            rep.fail("delta decreased at iter " + std::to_string(ev.iter) + ": " +
                     fmt(ev.delta) + " < " + fmt(last_delta));
        last_delta = std::max(last_delta, ev.delta);

        switch (ev.kind) {
            case TraceKind::Expand: {
                double min_live = std::numeric_limits<double>::infinity();
                for (const auto& [id, b] : live) min_live = std::min(min_live, b);
                const auto it = live.find(ev.node);
                if (it == live.end()) {
                    if (saw_root)
                        rep.fail("expanded unknown node " + std::to_string(ev.node));
                    saw_root = true;
                } else {
                    if (it->second > min_live + 1e-12)
                        rep.fail("selection not best-first at iter " +
                                 std::to_string(ev.iter) + ": expanded beta " +
                                 fmt(it->second) + " > min " + fmt(min_live));
                    live.erase(it);
                }
                break;
            }
            case TraceKind::Bound: {
                if (std::isfinite(ev.parent_beta) && ev.beta < ev.parent_beta - bound_slack)
                    rep.fail("child bound below parent at iter " +
                             std::to_string(ev.iter) + ": " + fmt(ev.beta) + " < " +
                             fmt(ev.parent_beta));
                live[ev.node] = ev.beta;
                break;
            }
            case TraceKind::Prune: {
                if (!(ev.beta > -config.epsilon))
                    rep.fail("pruned node " + std::to_string(ev.node) +
                             " with beta " + fmt(ev.beta) + " <= -epsilon");
                live.erase(ev.node);
                break;
            }
            default:
                break;
        }
    }

    for (size_t i = 0; i < outcome.incumbent_history.size(); ++i) {
        const auto& inc = outcome.incumbent_history[i];
        const SolutionReport check =
            check_feasibility(prob, inc.precoders, inc.common_rate, feas_tol);
        if (!check.feasible)
            rep.fail("incumbent " + std::to_string(i) + " fails feasibility check");
        if (i && inc.objective < outcome.incumbent_history[i - 1].objective - 1e-12)
            rep.fail("incumbent objective decreased at update " + std::to_string(i));
    }
    if (outcome.status == SolveStatus::OptimalCertified) {
        if (!outcome.incumbent)
            rep.fail("certified outcome without incumbent");
        else if (std::abs(outcome.delta_final -
                          (outcome.incumbent->objective + config.eta)) >
                 1e-9 * (1.0 + std::abs(outcome.delta_final)))
            rep.fail("delta_final != incumbent objective + eta");
    }
    return rep;
}

bool dual_set_prefilter(const XPoint& x, double delta, const ProblemSpec& prob) {
    const int K = prob.K();
    const double budget = rate_of(x.s);
    double need = 0.0;
    for (int k = 0; k < K; ++k)
        need += std::max(0.0, prob.r_threshold(k) - rate_of(x.gamma_p(k)));
    const SchemePlan plan = SchemePlan::of(prob);
    if (!plan.has_common) {
        if (need > 1e-12) return false;
    } else {
        for (int k = 0; k < K; ++k)
            if (plan.common_rate_pinned[k] &&
                prob.r_threshold(k) - rate_of(x.gamma_p(k)) > 1e-12)
                return false;
        if (need > budget + 1e-12) return false;
    }
    if (delta > 0.0) {
        // zero precoders minimize the power term; greedy C maximizes the sum
        double best = 0.0;
        for (int k = 0; k < K; ++k) best += prob.u(k) * rate_of(x.gamma_p(k));
        if (plan.has_common) {
            double left = budget;
            std::vector<int> order;
            for (int k = 0; k < K; ++k)
                if (!plan.common_rate_pinned[k]) order.push_back(k);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return prob.u(a) > prob.u(b); });
            // forced floors first
            for (int k : order) {
                const double f =
                    std::max(0.0, prob.r_threshold(k) - rate_of(x.gamma_p(k)));
                best += prob.u(k) * f;
                left -= f;
            }
            if (left < -1e-12) return false;
            if (!order.empty()) best += prob.u(order.front()) * std::max(0.0, left);
        }
        if (best < delta * prob.p_circuit - 1e-9) return false;
    }
    return true;
}

bool is_dual_candidate(const XPoint& x, double delta, const ProblemSpec& prob,
                       double solver_tol, double tol) {
    if (!dual_set_prefilter(x, delta, prob)) return false;
    const BuiltProgram built = build_gtilde_program(x, delta, prob);
    const ConicSolution sol = solve(built.program, solver_tol);
    return sol.status == ConicStatus::Optimal && sol.objective <= tol;
}

XPoint sample_box_point(const Box& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    XPoint x;
    const int K = box.users();
    x.gamma_p.resize(K);
    for (int k = 0; k < K; ++k)
        x.gamma_p(k) =
            box.gamma_lo(k) + uni(rng) * (box.gamma_hi(k) - box.gamma_lo(k));
    x.s = box.has_common ? box.s_lo + uni(rng) * (box.s_hi - box.s_lo) : 0.0;
    x.alpha.resize(box.alpha_lo.size());
    for (int i = 0; i < x.alpha.size(); ++i)
        x.alpha(i) = box.alpha_lo(i) + uni(rng) * (box.alpha_hi(i) - box.alpha_lo(i));
    return x;
}

namespace {

Box random_subbox(const Box& parent, std::mt19937_64& rng, double min_frac) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Box b = parent;
    auto shrink = [&](double lo, double hi, double& nlo, double& nhi) {
        const double w = hi - lo;
        const double frac = min_frac + (1.0 - min_frac) * uni(rng);
        const double start = lo + uni(rng) * (w * (1.0 - frac));
        nlo = start;
        nhi = start + frac * w;
    };
    for (int k = 0; k < parent.users(); ++k) {
        if (parent.gamma_hi(k) <= parent.gamma_lo(k)) continue;
        shrink(parent.gamma_lo(k), parent.gamma_hi(k), b.gamma_lo(k), b.gamma_hi(k));
    }
    if (parent.has_common && parent.s_hi > parent.s_lo)
        shrink(parent.s_lo, parent.s_hi, b.s_lo, b.s_hi);
    for (int i = 0; i < parent.alpha_lo.size(); ++i)
        shrink(parent.alpha_lo(i), parent.alpha_hi(i), b.alpha_lo(i), b.alpha_hi(i));
    return b;
}

bool point_in_box(const XPoint& x, const Box& box, double tol) {
    for (int k = 0; k < box.users(); ++k)
        if (x.gamma_p(k) < box.gamma_lo(k) - tol || x.gamma_p(k) > box.gamma_hi(k) + tol)
            return false;
    if (box.has_common && (x.s < box.s_lo - tol || x.s > box.s_hi + tol))
        return false;
    for (int i = 0; i < box.alpha_lo.size(); ++i)
        if (x.alpha(i) < box.alpha_lo(i) - tol || x.alpha(i) > box.alpha_hi(i) + tol)
            return false;
    return true;
}

}  // namespace

AuditReport audit_reduction_no_loss(const ProblemSpec& prob, int pairs,
                                    int samples_per_pair, std::uint64_t seed,
                                    double delta_hint) {
    AuditReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Box root = initial_box(prob);
    for (int p = 0; p < pairs; ++p) {
        const Box box = random_subbox(root, rng, 0.3);
        const double delta = delta_hint * uni(rng);
        const auto reduced = reduce_box(box, delta, prob);
        for (int s = 0; s < samples_per_pair; ++s) {
            const XPoint x = sample_box_point(box, rng);
            if (!is_dual_candidate(x, delta, prob)) continue;
            if (!reduced) {
                rep.fail("pair " + std::to_string(p) +
                         ": reduce_box pruned a box holding a candidate");
                break;
            }
            if (!point_in_box(x, *reduced, 1e-9)) {
                rep.fail("pair " + std::to_string(p) + " sample " +
                         std::to_string(s) + ": candidate lost by reduction");
            }
        }
    }
    return rep;
}

AuditReport audit_bound_monotonicity(const ProblemSpec& prob, int trials,
                                     std::uint64_t seed, double delta,
                                     double tol) {
    AuditReport rep;
    std::mt19937_64 rng(seed);
    const Box root = initial_box(prob);
    SolverConfig cfg;
    for (int t = 0; t < trials; ++t) {
        const Box outer = random_subbox(root, rng, 0.4);
        const Box inner = random_subbox(outer, rng, 0.4);
        const NodeRecord outer_node = bound(outer, delta, prob, cfg, -1e300);
        const NodeRecord inner_node = bound(inner, delta, prob, cfg, -1e300);
        if (inner_node.beta < outer_node.beta - tol)
            rep.fail("trial " + std::to_string(t) + ": beta(inner) " +
                     fmt(inner_node.beta) + " < beta(outer) " + fmt(outer_node.beta));
    }
    return rep;
}

AuditReport audit_bound_validity(const ProblemSpec& prob, int samples,
                                 std::uint64_t seed, double delta, double tol) {
    AuditReport rep;
    std::mt19937_64 rng(seed);
    const Box root = initial_box(prob);
    SolverConfig cfg;
    const Box box = random_subbox(root, rng, 0.5);
    const NodeRecord node = bound(box, delta, prob, cfg, -1e300);
    if (node.beta == std::numeric_limits<double>::infinity()) return rep;
    int found = 0;
    for (int s = 0; s < samples; ++s) {
        const XPoint x = sample_box_point(box, rng);
        if (!dual_set_prefilter(x, delta, prob)) continue;
        const BuiltProgram built = build_gtilde_program(x, delta, prob);
        const ConicSolution sol = solve(built.program, cfg.solver_tol);
        if (sol.status != ConicStatus::Optimal) continue;
        ++found;
        if (sol.objective < node.beta - tol)
            rep.fail("sample " + std::to_string(s) + ": g(x) " + fmt(sol.objective) +
                     " below bound " + fmt(node.beta));
    }
    if (found == 0) rep.fail("no dual-feasible samples found; audit vacuous");
    return rep;
}

AuditReport audit_envelope_soundness(int trials, std::uint64_t seed, double tol) {
    AuditReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const double lo = uni(rng) * 2.0 * M_PI;
        const double hi = std::min(lo + uni(rng) * M_PI, 2.0 * M_PI);
        const auto cut = envelope_cuts(lo, hi, 1);
        if (!cut) {
            rep.fail("arc <= pi returned trivial relaxation");
            continue;
        }
        // random point of the restricted set: |e| >= d - t, angle in [lo, hi]
        const double ang = lo + uni(rng) * (hi - lo);
        const double r = uni(rng) * 10.0;
        const double re = r * std::cos(ang), im = r * std::sin(ang);
        const double dt = r - uni(rng) * 5.0;  // d - t <= |e|
        if (cut->sin_lo * re - cut->cos_lo * im > tol)
            rep.fail("lower arc cut violated at trial " + std::to_string(t));
        if (cut->sin_hi * re - cut->cos_hi * im < -tol)
            rep.fail("upper arc cut violated at trial " + std::to_string(t));
        const double ab2 = cut->a * cut->a + cut->b * cut->b;
        if (cut->a * re + cut->b * im < dt * ab2 - tol)
            rep.fail("chord cut violated at trial " + std::to_string(t));
    }
    return rep;
}

}  // namespace rsma
