#pragma once

#include <random>
#include <string>
#include <vector>

#include "rsma/sitbb.hpp"

namespace rsma {

struct AuditReport {
    bool ok = true;
    std::vector<std::string> failures;

    void fail(std::string msg) {
        ok = false;
        failures.push_back(std::move(msg));
    }
    void merge(const AuditReport& o) {
        ok = ok && o.ok;
        failures.insert(failures.end(), o.failures.begin(), o.failures.end());
    }
};

/// Structural audit of one solver run: delta nondecreasing, best-first
/// selection, child bounds above parent bounds, pruned nodes above -epsilon,
/// every incumbent feasible at feas_tol.
AuditReport audit_trace(const SolverOutcome& outcome, const ProblemSpec& prob,
                        const SolverConfig& config, double feas_tol = 1e-6,
                        double bound_slack = 1e-6);

/// Is x a solution candidate for level delta: the dual objective evaluation
/// at x attains a value <= tol (Lemma-style primal recovery succeeds).
bool is_dual_candidate(const XPoint& x, double delta, const ProblemSpec& prob,
                       double solver_tol = 1e-8, double tol = 1e-9);

/// Cheap necessary conditions for membership in the projected dual set
/// (used as a prefilter before the conic evaluation).
bool dual_set_prefilter(const XPoint& x, double delta, const ProblemSpec& prob);

/// Samples points in random sub-boxes and checks reduce_box loses none of
/// the candidates; samples_per_pair draws per (box, delta) pair.
AuditReport audit_reduction_no_loss(const ProblemSpec& prob, int pairs,
                                    int samples_per_pair, std::uint64_t seed,
                                    double delta_hint);

/// beta is monotone under box shrinking: beta(M') >= beta(M) - tol.
AuditReport audit_bound_monotonicity(const ProblemSpec& prob, int trials,
                                     std::uint64_t seed, double delta,
                                     double tol = 1e-6);

/// Sampled dual-feasible x in the box satisfy g(x) >= beta(box) - tol.
AuditReport audit_bound_validity(const ProblemSpec& prob, int samples,
                                 std::uint64_t seed, double delta,
                                 double tol = 1e-6);

/// Random (e, d, t) triples on arcs of width <= pi satisfy all three cuts.
AuditReport audit_envelope_soundness(int trials, std::uint64_t seed,
                                     double tol = 1e-9);

/// Uniform draw from a box (gamma and s log-uniform-free, plain uniform).
XPoint sample_box_point(const Box& box, std::mt19937_64& rng);

}  // namespace rsma
