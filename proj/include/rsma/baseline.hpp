#pragma once

#include <cstdint>
#include <vector>

#include "rsma/model.hpp"

namespace rsma {

enum class ScaInit { SvdMrt, Random };

struct ScaConfig {
    int max_iters = 150;
    double conv_tol = 1e-8;      // relative objective change
    ScaInit init_strategy = ScaInit::SvdMrt;
    double damping = 1.0;        // 1 = full update of the expansion point
    double common_power_fraction = 0.5;  // RSMA/NOMA initial split
    std::uint64_t random_seed = 0;       // for ScaInit::Random
    double solver_tol = 1e-8;
};

enum class ScaStatus { Converged, MaxIter, InfeasibleStart };

struct ScaResult {
    SolutionReport report;
    ScaStatus status = ScaStatus::MaxIter;
    std::vector<double> objective_history;  // exact objective per iteration
    int iterations = 0;
};

/// SVD direction for the common stream, MRT for the private streams, total
/// power met with equality.
PrecoderSet init_precoders(const ProblemSpec& prob, const ScaConfig& cfg = {});

/// Inner convex approximation loop over SOCP subproblems; EE objectives run
/// the parametric ratio update alongside. Monotone in the exact objective.
ScaResult sca_solve(const ProblemSpec& prob, const ScaConfig& cfg = {});

}  // namespace rsma
