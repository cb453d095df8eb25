#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsma/sitbb.hpp"

namespace rsma {

enum class ExperimentKind { RateRegion, SumRateSweep, EeSweep };

struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::SumRateSweep;
    int K = 2, M = 2;
    std::vector<double> variances;        // per-user channel variance
    std::uint64_t seed_base = 1;
    int seed_count = 20;
    std::vector<double> snr_db;           // sum-rate grid (or single rate-region SNR)
    std::vector<double> qos;              // ladder paired with snr_db
    std::vector<double> weight_exponents; // rate region: u2 = 10^x
    std::vector<double> power_dbm;        // EE grid
    std::vector<SchemeKind> schemes;
    bool run_bb = true;
    bool run_sca = true;
    double eta = 0.05;
    double epsilon = 1e-7;
    double feas_tol = 1e-6;
    double solver_tol = 1e-8;
    double max_time_s = 600.0;
    std::uint64_t max_iter = 1'000'000;
    bool warm_start = true;
    int jobs = 1;
    std::string out_dir = "out";
    bool svg = false;
    // EE constants
    double noise_variance = 1e-4;  // same linear unit as the power grid
    double mu = 0.35;
    double p_dyn_dbm = 27.0;
    double p_sta_mw = 1.0;
    double ee_qos = 1.0;
};

struct ResultRow {
    std::uint64_t seed = 0;
    SchemeKind scheme = SchemeKind::RSMA;
    double grid_x = 0.0;
    std::string solver;  // "BB" | "SCA"
    double objective = 0.0;
    Eigen::VectorXd rates;
    Eigen::VectorXd common_rates;
    std::string status;
    double wall_ms = 0.0;
    bool certified() const { return status == "OptimalCertified"; }
};

/// Circularly symmetric complex Gaussian channels, deterministic in the
/// seed. Draw order: user-major, antenna-minor, real before imaginary.
ChannelSet gen_channels(std::uint64_t seed, int K, int M,
                        const std::vector<double>& variances);

std::string scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);

/// One row per line: seed,scheme,grid_x,solver,objective,R1..RK,C1..CK,status,wall_ms.
std::string rows_to_csv(const std::vector<ResultRow>& rows, int K);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows, int K);

struct RateRegionResult {
    std::vector<ResultRow> rows;  // grid_x = weight exponent
    struct Hull {
        SchemeKind scheme;
        std::vector<std::pair<double, double>> vertices;
    };
    std::vector<Hull> hulls;  // per scheme, from mean BB points
};

std::vector<ResultRow> sweep_sum_rate(const ExperimentPlan& plan);
std::vector<ResultRow> sweep_ee(const ExperimentPlan& plan);
RateRegionResult rate_region(const ExperimentPlan& plan);

/// Upper-right Pareto hull with axis endpoint projections, vertices ordered
/// by increasing first coordinate, collinear points removed.
std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> points);

/// Runs a loaded plan end to end: rows, CSV, optional SVG. Returns the CSV path.
std::string run_plan(const ExperimentPlan& plan);

ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::string& path);
std::string serialize_plan(const ExperimentPlan& plan);

/// ProblemSpec for one grid instance (shared by the CLI single-solve path).
ProblemSpec plan_problem(const ExperimentPlan& plan, const ChannelSet& ch,
                         SchemeKind scheme, double grid_value);

}  // namespace rsma
