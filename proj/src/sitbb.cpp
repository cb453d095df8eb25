#include "rsma/sitbb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <queue>

namespace rsma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UVW {
    double U = 0.0, V = 0.0, W = 0.0;
    std::vector<bool> in_I;
};

// Lemma-style corner quantities of a box. W aggregates the least transmit
// power any candidate in the box must spend.
UVW corner_quantities(const Box& box, const ProblemSpec& prob) {
    const int K = prob.K();
    UVW q;
    q.in_I.assign(K, false);
    const double rate_s_hi = rate_of(box.s_hi);
    double u_max = prob.u.maxCoeff();
    q.U = u_max * rate_s_hi;
    q.V = -rate_s_hi;
    for (int k = 0; k < K; ++k) {
        const double rate_hi = rate_of(box.gamma_hi(k));
        q.U += prob.u(k) * rate_hi;
        if (prob.r_threshold(k) - rate_hi > 0.0) {
            q.in_I[k] = true;
            q.V += prob.r_threshold(k) - rate_hi;
        }
    }
    if (prob.mu > 0.0) {
        double power_floor = 0.0;
        const double min_norm = prob.channels.min_norm_sq();
        if (box.s_lo > 0.0)
            power_floor += (min_norm > 0.0) ? box.s_lo / min_norm : kInf;
        for (int k = 0; k < K; ++k) {
            if (box.gamma_lo(k) <= 0.0) continue;
            const double n2 = prob.channels.norm_sq(k);
            power_floor += (n2 > 0.0) ? box.gamma_lo(k) / n2 : kInf;
        }
        q.W = prob.mu * power_floor + prob.p_circuit;
    } else {
        q.W = prob.p_circuit;
    }
    return q;
}

double w_delta(double W, double delta) { return delta > 0.0 ? W * delta : 0.0; }

int alpha_dims(const Box& box) { return static_cast<int>(box.alpha_lo.size()); }

}  // namespace

Box initial_box(const ProblemSpec& prob) {
    const SchemePlan plan = SchemePlan::of(prob);
    const int K = prob.K();
    Box box;
    box.has_common = plan.has_common;
    box.gamma_lo = Eigen::VectorXd::Zero(K);
    box.gamma_hi = Eigen::VectorXd::Zero(K);
    box.s_lo = box.s_hi = 0.0;
    if (plan.has_common) {
        box.s_hi = kInf;
        for (int k = 0; k < K; ++k)
            box.s_hi = std::min(box.s_hi, prob.power * prob.channels.norm_sq(k));
    }
    for (int k = 0; k < K; ++k) {
        if (!plan.private_active[k]) continue;
        box.gamma_hi(k) = prob.power * prob.channels.norm_sq(k);
        const double common_cover =
            (plan.has_common && !plan.common_rate_pinned[k]) ? 1.0 + box.s_hi : 1.0;
        box.gamma_lo(k) = std::max(
            0.0, std::exp2(prob.r_threshold(k)) / common_cover - 1.0);
    }
    const int na = (plan.has_common && K >= 2) ? K - 1 : 0;
    box.alpha_lo = Eigen::VectorXd::Zero(na);
    box.alpha_hi = Eigen::VectorXd::Constant(na, 2.0 * M_PI);
    return box;
}

bool quick_infeasibility(const Box& box, double delta, const ProblemSpec& prob) {
    const UVW q = corner_quantities(box, prob);
    return q.V > 0.0 || q.U < w_delta(q.W, delta);
}

std::optional<Box> reduce_box(const Box& box, double delta,
                              const ProblemSpec& prob) {
    if (quick_infeasibility(box, delta, prob)) return std::nullopt;
    const int K = prob.K();
    const UVW q = corner_quantities(box, prob);
    const double u_max = prob.u.maxCoeff();

    Box out = box;
    // lower-bound updates
    for (int k = 0; k < K; ++k) {
        const double uk = prob.u(k);
        const double level_exp =
            uk > 0.0 ? (w_delta(q.W, delta) - q.U) / uk : -kInf;
        double lo2;
        if (q.in_I[k]) {
            lo2 = std::exp2(std::max(level_exp, q.V)) * (1.0 + box.gamma_hi(k)) - 1.0;
        } else {
            lo2 = std::max(std::exp2(level_exp) * (1.0 + box.gamma_hi(k)),
                           std::exp2(q.V + prob.r_threshold(k))) -
                  1.0;
        }
        out.gamma_lo(k) = std::max(box.gamma_lo(k), lo2);
    }
    if (box.has_common) {
        const double exp_s =
            std::max((w_delta(q.W, delta) - q.U) / u_max, q.V);
        out.s_lo = std::max(box.s_lo, std::exp2(exp_s) * (1.0 + box.s_hi) - 1.0);
    }

    // upper-bound updates only bind through the objective-level constraint
    if (delta * prob.mu > 0.0) {
        double power_floor2 = 0.0;
        const double min_norm = prob.channels.min_norm_sq();
        if (out.s_lo > 0.0)
            power_floor2 += (min_norm > 0.0) ? out.s_lo / min_norm : kInf;
        for (int k = 0; k < K; ++k) {
            if (out.gamma_lo(k) <= 0.0) continue;
            const double n2 = prob.channels.norm_sq(k);
            power_floor2 += (n2 > 0.0) ? out.gamma_lo(k) / n2 : kInf;
        }
        const double Wp = prob.mu * power_floor2 + prob.p_circuit;
        const double slack = q.U - delta * Wp;
        if (slack < 0.0) return std::nullopt;
        for (int k = 0; k < K; ++k) {
            const double cap = out.gamma_lo(k) +
                               prob.channels.norm_sq(k) / (delta * prob.mu) * slack;
            out.gamma_hi(k) = std::min(box.gamma_hi(k), cap);
        }
        if (box.has_common) {
            const double cap =
                out.s_lo + min_norm / (delta * prob.mu) * slack;
            out.s_hi = std::min(box.s_hi, cap);
        }
    }

    const double tol = 1e-12;
    for (int k = 0; k < K; ++k) {
        if (out.gamma_lo(k) > out.gamma_hi(k) + tol * (1.0 + out.gamma_hi(k)))
            return std::nullopt;
        out.gamma_lo(k) = std::min(out.gamma_lo(k), out.gamma_hi(k));
    }
    if (box.has_common) {
        if (out.s_lo > out.s_hi + tol * (1.0 + out.s_hi)) return std::nullopt;
        out.s_lo = std::min(out.s_lo, out.s_hi);
    }
    return out;
}

std::vector<double> box_widths(const Box& box) {
    std::vector<double> w;
    const int K = box.users();
    w.reserve(K + 1 + alpha_dims(box));
    for (int k = 0; k < K; ++k) w.push_back(box.gamma_hi(k) - box.gamma_lo(k));
    if (box.has_common) w.push_back(box.s_hi - box.s_lo);
    for (int i = 0; i < alpha_dims(box); ++i)
        w.push_back(box.alpha_hi(i) - box.alpha_lo(i));
    return w;
}

std::pair<Box, Box> branch(const Box& box,
                           const std::vector<double>& init_widths) {
    const std::vector<double> w = box_widths(box);
    if (w.size() != init_widths.size())
        throw std::invalid_argument("branch: width vector mismatch");
    int j = -1;
    double best = -1.0;
    for (size_t i = 0; i < w.size(); ++i) {
        const double norm = init_widths[i] > 0.0 ? w[i] / init_widths[i] : 0.0;
        if (norm > best + 1e-15) {
            best = norm;
            j = static_cast<int>(i);
        }
    }
    if (j < 0 || best <= 0.0)
        throw std::invalid_argument("branch: degenerate box");

    Box lo = box, hi = box;
    const int K = box.users();
    if (j < K) {
        const double mid = 0.5 * (box.gamma_lo(j) + box.gamma_hi(j));
        lo.gamma_hi(j) = mid;
        hi.gamma_lo(j) = mid;
    } else if (box.has_common && j == K) {
        const double mid = 0.5 * (box.s_lo + box.s_hi);
        lo.s_hi = mid;
        hi.s_lo = mid;
    } else {
        const int i = j - K - (box.has_common ? 1 : 0);
        const double mid = 0.5 * (box.alpha_lo(i) + box.alpha_hi(i));
        lo.alpha_hi(i) = mid;
        hi.alpha_lo(i) = mid;
    }
    return {lo, hi};
}

XPoint extract_dual_point(const ConicSolution& sol, const SubproblemRefs& refs,
                          const Box& box, const ProblemSpec& prob) {
    const int K = prob.K();
    XPoint x;
    x.gamma_p = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k) {
        if (!refs.gamma_log[k].valid()) continue;
        const double g = std::exp2(sol.value(refs.gamma_log[k])) - 1.0;
        x.gamma_p(k) = std::clamp(g, box.gamma_lo(k), box.gamma_hi(k));
    }
    if (refs.s_log.valid()) {
        const double s = std::exp2(sol.value(refs.s_log)) - 1.0;
        x.s = std::clamp(s, box.s_lo, box.s_hi);
    }
    x.alpha = Eigen::VectorXd::Zero(alpha_dims(box));
    for (int k = 1; k < K && box.has_common; ++k) {
        const std::complex<double> e = sol.cvalue(refs.e[k]);
        double ang = std::atan2(e.imag(), e.real());
        if (ang < 0.0) ang += 2.0 * M_PI;
        const double lo = box.alpha_lo(k - 1), hi = box.alpha_hi(k - 1);
        // nearer corner, ties to the lower one
        x.alpha(k - 1) = (std::abs(ang - lo) <= std::abs(hi - ang)) ? lo : hi;
    }
    return x;
}

NodeRecord bound(const Box& reduced_box, double delta, const ProblemSpec& prob,
                 const SolverConfig& config, double parent_beta) {
    NodeRecord node;
    node.box = reduced_box;
    if (quick_infeasibility(reduced_box, delta, prob)) {
        node.beta = kInf;
        return node;
    }
    const BuiltProgram built = build_bounding_socp(reduced_box, delta, prob);
    ConicSolution sol = solve(built.program, config.solver_tol);
    if (sol.status == ConicStatus::NumericalFailure) {
        // one retry on the raw (unequilibrated) data with looser targets
        SocpSettings retry;
        retry.feastol = retry.abstol = retry.reltol = config.solver_tol * 10.0;
        retry.equilibrate = false;
        const SocpSolution raw = solve_socp(built.program.compile(), retry);
        if (raw.status == SocpStatus::Optimal) {
            sol.status = ConicStatus::Optimal;
            sol.x = raw.x;
            sol.objective = raw.objective;
            sol.dual_objective = raw.objective - std::abs(raw.gap);
        } else if (raw.status == SocpStatus::Infeasible) {
            sol.status = ConicStatus::Infeasible;
        }
    }
    switch (sol.status) {
        case ConicStatus::Optimal:
            node.beta = sol.dual_objective;
            node.dual_point = extract_dual_point(sol, built.refs, reduced_box, prob);
            break;
        case ConicStatus::Infeasible:
            node.beta = kInf;
            break;
        case ConicStatus::Unbounded:
            // cannot happen for a compact feasible set; treat as failure
        case ConicStatus::NumericalFailure:
            node.beta = parent_beta;
            node.force_branch = true;
            break;
    }
    return node;
}

std::optional<SolutionReport> probe_feasible(const XPoint& x, double delta,
                                             const ProblemSpec& prob,
                                             const SolverConfig& config) {
    const BuiltProgram built = build_gtilde_program(x, delta, prob);
    const ConicSolution sol = solve(built.program, config.solver_tol);
    if (sol.status != ConicStatus::Optimal || sol.objective > 1e-9)
        return std::nullopt;

    const int K = prob.K(), M = prob.M();
    PrecoderSet p = PrecoderSet::zeros(K, M);
    if (built.refs.p_common.valid())
        for (int m = 0; m < M; ++m) p.common(m) = sol.cvalue(built.refs.p_common, m);
    for (int k = 0; k < K; ++k)
        if (built.refs.p_private[k].valid())
            for (int m = 0; m < M; ++m)
                p.priv[k](m) = sol.cvalue(built.refs.p_private[k], m);

    const Sinrs achieved = compute_sinrs(prob.channels, p);
    const double s_star = std::max(0.0, achieved.common.minCoeff());

    Eigen::VectorXd C = Eigen::VectorXd::Zero(K);
    bool any_c = false;
    for (int k = 0; k < K; ++k) any_c |= built.refs.common_rate[k].valid();
    if (any_c) {
        const BuiltProgram lp =
            build_common_rate_lp(achieved.priv, s_star, p, delta, prob);
        const ConicSolution lp_sol = solve(lp.program, config.solver_tol);
        if (lp_sol.status == ConicStatus::Optimal) {
            for (int k = 0; k < K; ++k)
                if (lp.refs.common_rate[k].valid())
                    C(k) = std::max(0.0, lp_sol.value(lp.refs.common_rate[k]));
        } else if (lp_sol.status == ConicStatus::Infeasible) {
            return std::nullopt;  // the candidate cannot cover the QoS floors
        } else {
            // fall back to the split from the dual evaluation
            for (int k = 0; k < K; ++k)
                if (built.refs.common_rate[k].valid())
                    C(k) = std::max(0.0, sol.value(built.refs.common_rate[k]));
        }
    }

    SolutionReport rep = check_feasibility(prob, p, C, config.feas_tol);
    if (!rep.feasible) return std::nullopt;
    return rep;
}

PrecoderSet rotate_precoders(const ChannelSet& ch, PrecoderSet p) {
    auto phase = [](std::complex<double> v) {
        return std::abs(v) > 0.0 ? std::polar(1.0, -std::arg(v)) : std::complex<double>(1.0, 0.0);
    };
    for (int k = 0; k < ch.K; ++k)
        if (p.priv[k].size()) p.priv[k] *= phase(ch.h[k].dot(p.priv[k]));
    if (p.common.size()) p.common *= phase(ch.h[0].dot(p.common));
    return p;
}

namespace {

struct ScaledProblem {
    ProblemSpec prob;     // rescaled so channel norms cluster near 1
    double precoder_scale = 1.0;  // original p = scale * scaled p
};

ScaledProblem rescale(const ProblemSpec& orig) {
    double log_sum = 0.0;
    int count = 0;
    for (int k = 0; k < orig.K(); ++k) {
        const double n2 = orig.channels.norm_sq(k);
        if (n2 > 0.0) {
            log_sum += 0.5 * std::log(n2);
            ++count;
        }
    }
    ScaledProblem sp{orig, 1.0};
    if (count == 0) return sp;
    const double gm = std::exp(log_sum / count);
    if (gm >= 1e-3 && gm <= 1e3) return sp;  // already well-ranged
    const double c = 1.0 / gm;
    for (auto& hk : sp.prob.channels.h) hk *= c;
    sp.prob.power = orig.power / (c * c);
    sp.prob.mu = orig.mu * c * c;
    sp.precoder_scale = c;
    return sp;
}

PrecoderSet unscale(const PrecoderSet& p, double scale) {
    PrecoderSet out = p;
    out.common *= scale;
    for (auto& pk : out.priv) pk *= scale;
    return out;
}

struct QueueItem {
    double beta;
    std::uint64_t id;
    std::uint32_t slot;
    bool operator>(const QueueItem& o) const {
        if (beta != o.beta) return beta > o.beta;
        return id > o.id;  // FIFO among ties
    }
};

struct ChildResult {
    bool kept = false;
    bool solver_failed = false;
    NodeRecord node;
    std::optional<Box> reduced;
};

ChildResult process_child(const Box& child_box, double delta,
                          const ProblemSpec& prob, const SolverConfig& config,
                          double parent_beta) {
    ChildResult r;
    r.reduced = reduce_box(child_box, delta, prob);
    if (!r.reduced) return r;
    r.node = bound(*r.reduced, delta, prob, config, parent_beta);
    r.solver_failed = r.node.force_branch;
    r.kept = true;
    return r;
}

}  // namespace

SolverOutcome solve(const ProblemSpec& prob_in, const SolverConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    const ScaledProblem sp = rescale(prob_in);
    const ProblemSpec& prob = sp.prob;

    SolverOutcome out;
    double delta = 0.0;
    std::optional<SolutionReport> incumbent;  // reported against prob_in

    auto accept_incumbent = [&](const PrecoderSet& scaled_p,
                                const Eigen::VectorXd& C, std::uint64_t iter,
                                std::uint64_t node_id, double beta) -> bool {
        const PrecoderSet orig_p =
            rotate_precoders(prob_in.channels, unscale(scaled_p, sp.precoder_scale));
        SolutionReport rep = check_feasibility(prob_in, orig_p, C, config.feas_tol);
        if (!rep.feasible) return false;
        if (incumbent && rep.objective <= delta - config.eta) return false;
        incumbent = rep;
        delta = rep.objective + config.eta;
        out.incumbent_history.push_back(rep);
        out.trace.push_back({iter, node_id, TraceKind::Incumbent, beta, delta, 0, 0.0});
        return true;
    };

    // Step 0: warm start from a user point or one SCA run
    if (config.warm_start) {
        PrecoderSet p = *config.warm_start;
        for (auto& pk : p.priv) pk /= sp.precoder_scale;
        p.common /= sp.precoder_scale;
        const Sinrs s = compute_sinrs(prob.channels, p);
        Eigen::VectorXd C = Eigen::VectorXd::Zero(prob.K());
        const SchemePlan plan = SchemePlan::of(prob);
        bool any_c = false;
        for (int k = 0; k < prob.K(); ++k)
            any_c |= plan.has_common && !plan.common_rate_pinned[k];
        if (any_c) {
            const BuiltProgram lp = build_common_rate_lp(
                s.priv, std::max(0.0, s.common.minCoeff()), p, 0.0, prob);
            const ConicSolution lp_sol = solve(lp.program, config.solver_tol);
            if (lp_sol.status == ConicStatus::Optimal)
                for (int k = 0; k < prob.K(); ++k)
                    if (lp.refs.common_rate[k].valid())
                        C(k) = std::max(0.0, lp_sol.value(lp.refs.common_rate[k]));
        }
        accept_incumbent(p, C, 0, 0, -kInf);
    } else if (config.use_sca_warm_start) {
        ScaConfig sca_cfg = config.sca;
        sca_cfg.solver_tol = config.solver_tol;
        ScaResult sca = sca_solve(prob, sca_cfg);
        out.warm_start_result = sca;
        if (sca.report.feasible)
            accept_incumbent(sca.report.precoders, sca.report.common_rate, 0, 0, -kInf);
    }

    const Box root_box = initial_box(prob);
    const std::vector<double> init_widths = box_widths(root_box);

    std::vector<NodeRecord> arena;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
    std::uint64_t next_id = 0;

    auto push_node = [&](NodeRecord&& node) {
        const auto slot = static_cast<std::uint32_t>(arena.size());
        queue.push({node.beta, node.id, slot});
        arena.push_back(std::move(node));
    };

    if (root_box.valid()) {
        NodeRecord root;
        root.box = root_box;
        root.beta = -kInf;
        root.id = next_id++;
        push_node(std::move(root));
    }

    auto finish = [&](SolveStatus status) {
        out.status = status;
        out.incumbent = incumbent;
        out.delta_final = delta;
        out.wall_time_s = elapsed();
        return out;
    };

    std::uint64_t iter = 0;
    while (true) {
        if (queue.empty())
            return finish(incumbent ? SolveStatus::OptimalCertified
                                    : SolveStatus::EpsilonEssentialInfeasible);
        if (iter >= config.max_iter || elapsed() > config.max_wall_time_s)
            return finish(SolveStatus::BudgetExhausted);
        ++iter;

        const QueueItem top = queue.top();
        queue.pop();
        const NodeRecord current = arena[top.slot];
        out.trace.push_back(
            {iter, current.id, TraceKind::Expand, current.beta, delta, 0, 0.0});

        const auto [left, right] = branch(current.box, init_widths);
        const std::uint64_t left_id = next_id++;
        const std::uint64_t right_id = next_id++;

        ChildResult results[2];
        if (config.concurrent_children) {
            auto fut = std::async(std::launch::async, process_child, left, delta,
                                  std::cref(prob), std::cref(config), current.beta);
            results[1] = process_child(right, delta, prob, config, current.beta);
            results[0] = fut.get();
        } else {
            results[0] = process_child(left, delta, prob, config, current.beta);
            results[1] = process_child(right, delta, prob, config, current.beta);
        }

        // merge in fixed order: trace, probes, pruning
        struct Candidate {
            SolutionReport report;
            std::uint64_t node_id;
            double beta;
        };
        std::vector<Candidate> candidates;
        NodeRecord* kept[2] = {nullptr, nullptr};
        for (int i = 0; i < 2; ++i) {
            const std::uint64_t child_id = i == 0 ? left_id : right_id;
            ChildResult& r = results[i];
            out.nodes_explored++;
            if (!r.reduced) {
                out.trace.push_back({iter, child_id, TraceKind::Reduce, kInf, delta,
                                     current.id, current.beta});
                out.trace.push_back({iter, child_id, TraceKind::Bound, kInf, delta,
                                     current.id, current.beta});
                out.trace.push_back(
                    {iter, child_id, TraceKind::Prune, kInf, delta, current.id, 0.0});
                continue;
            }
            out.trace.push_back({iter, child_id, TraceKind::Reduce, 0.0, delta,
                                 current.id, current.beta});
            if (r.solver_failed)
                out.trace.push_back({iter, child_id, TraceKind::Fail, r.node.beta,
                                     delta, current.id, current.beta});
            out.trace.push_back({iter, child_id, TraceKind::Bound, r.node.beta, delta,
                                 current.id, current.beta});
            r.node.id = child_id;
            r.node.depth = current.depth + 1;

            if (r.node.beta <= 0.0 && r.node.dual_point) {
                auto rep = probe_feasible(*r.node.dual_point, delta, prob, config);
                if (rep) candidates.push_back({std::move(*rep), child_id, r.node.beta});
            }
            kept[i] = &r.node;
        }

        if (!candidates.empty()) {
            const auto best = std::max_element(
                candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) {
                    return a.report.objective < b.report.objective;
                });
            if (best->report.objective > delta - config.eta)
                accept_incumbent(best->report.precoders, best->report.common_rate,
                                 iter, best->node_id, best->beta);
        }

        for (int i = 0; i < 2; ++i) {
            if (!kept[i]) continue;
            NodeRecord& node = *kept[i];
            if (node.beta > -config.epsilon) {
                out.trace.push_back(
                    {iter, node.id, TraceKind::Prune, node.beta, delta, current.id, 0.0});
                continue;
            }
            push_node(std::move(node));
        }
        out.iterations = iter;
    }
}

SolverOutcome solve_scheme(const ProblemSpec& prob, const SolverConfig& config) {
    const std::vector<ProblemSpec> variants = scheme_variants(prob);
    std::optional<SolverOutcome> best;
    double total_time = 0.0;
    for (const auto& variant : variants) {
        SolverOutcome o = solve(variant, config);
        total_time += o.wall_time_s;
        const bool better =
            !best ||
            (o.incumbent && !best->incumbent) ||
            (o.incumbent && best->incumbent &&
             o.incumbent->objective > best->incumbent->objective);
        if (better) best = std::move(o);
    }
    best->wall_time_s = total_time;
    return *best;
}

}  // namespace rsma
