#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rsma/baseline.hpp"
#include "rsma/box.hpp"
#include "rsma/conic.hpp"
#include "rsma/model.hpp"

namespace rsma {

struct NodeRecord {
    Box box;
    double beta = -std::numeric_limits<double>::infinity();
    std::optional<XPoint> dual_point;  // present when beta < +inf and bounded
    int depth = 0;
    std::uint64_t id = 0;
    bool force_branch = false;  // bound inherited after a solver failure
};

enum class TraceKind { Expand, Reduce, Bound, Incumbent, Prune, Fail };

struct TraceEvent {
    std::uint64_t iter = 0;
    std::uint64_t node = 0;
    TraceKind kind = TraceKind::Expand;
    double beta = 0.0;
    double delta = 0.0;
    std::uint64_t parent = 0;
    double parent_beta = 0.0;
};

struct SolverConfig {
    double eta = 0.05;            // incumbent tolerance
    double epsilon = 1e-7;        // essential-feasibility tightening
    double feas_tol = kDefaultFeasTol;
    double solver_tol = kDefaultSolverTol;
    std::uint64_t max_iter = 1'000'000;
    double max_wall_time_s = 600.0;
    std::optional<PrecoderSet> warm_start;  // user-provided feasible point
    bool use_sca_warm_start = true;
    ScaConfig sca;
    bool concurrent_children = false;  // bound the two children in parallel
    int trace_verbosity = 0;
};

enum class SolveStatus {
    OptimalCertified,
    EpsilonEssentialInfeasible,
    BudgetExhausted,
};

struct SolverOutcome {
    SolveStatus status = SolveStatus::BudgetExhausted;
    std::optional<SolutionReport> incumbent;
    double delta_final = 0.0;
    std::uint64_t iterations = 0;
    std::uint64_t nodes_explored = 0;
    double wall_time_s = 0.0;
    std::vector<TraceEvent> trace;
    // every accepted incumbent, in order, for the feasibility audits
    std::vector<SolutionReport> incumbent_history;
    std::optional<ScaResult> warm_start_result;
};

/// gamma_hi = P ||h_k||^2, s_hi = min_k P ||h_k||^2, QoS-driven gamma_lo.
Box initial_box(const ProblemSpec& prob);

/// Corollary-style reject: V > 0 or U < W*delta.
bool quick_infeasibility(const Box& box, double delta, const ProblemSpec& prob);

/// Bound tightening that loses no solution candidate achieving >= delta;
/// nullopt when the box is proven empty.
std::optional<Box> reduce_box(const Box& box, double delta,
                              const ProblemSpec& prob);

/// Widths in the fixed dimension order (gamma_1..gamma_K, s, alpha_2..alpha_K).
std::vector<double> box_widths(const Box& box);

/// Bisects the dimension with the largest width normalized by the initial
/// box widths; ties break toward the smallest dimension index.
std::pair<Box, Box> branch(const Box& box, const std::vector<double>& init_widths);

/// Un-substitutes the bounding solution (2^x - 1) and snaps each phase to the
/// nearer box corner (ties to the lower corner).
XPoint extract_dual_point(const ConicSolution& sol, const SubproblemRefs& refs,
                          const Box& box, const ProblemSpec& prob);

/// Preliminary reject, then the bounding SOCP; on a solver failure the node
/// keeps the parent bound and is flagged for re-branching.
NodeRecord bound(const Box& reduced_box, double delta, const ProblemSpec& prob,
                 const SolverConfig& config, double parent_beta);

/// Evaluates the dual objective at x; on success recovers precoders, exact
/// SINRs, and the best common-rate split, all re-validated.
std::optional<SolutionReport> probe_feasible(const XPoint& x, double delta,
                                             const ProblemSpec& prob,
                                             const SolverConfig& config);

/// Rotate precoders so every h_k^H p_k (and h_1^H p_c) is real nonnegative;
/// leaves all SINRs unchanged.
PrecoderSet rotate_precoders(const ChannelSet& ch, PrecoderSet p);

/// The full successive-incumbent-transcending search for one resolved scheme.
SolverOutcome solve(const ProblemSpec& prob, const SolverConfig& config = {});

/// Resolves unspecified NOMA decode orders by solving each variant and
/// keeping the better certified objective.
SolverOutcome solve_scheme(const ProblemSpec& prob, const SolverConfig& config = {});

}  // namespace rsma
