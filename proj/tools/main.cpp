#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rsma/audit.hpp"
#include "rsma/channel_io.hpp"
#include "rsma/experiments.hpp"

using namespace rsma;

namespace {

int trace_verbosity_from_env() {
    const char* v = std::getenv("RSMA_GLOBOPT_LOG");
    return v ? std::atoi(v) : 0;
}

void print_report(const SolutionReport& rep, int K) {
    std::printf("  objective      %.6f\n", rep.objective);
    for (int k = 0; k < K; ++k)
        std::printf("  user %d         R=%.4f (C=%.4f, private=%.4f)  sinr_c=%.4g sinr_p=%.4g\n",
                    k + 1, rep.rates(k), rep.common_rate(k),
                    rep.rates(k) - rep.common_rate(k), rep.gamma_common(k),
                    rep.gamma_private(k));
    std::printf("  power          %.6f\n", rep.precoders.total_power());
    if (!rep.violations.empty()) {
        std::printf("  violations:\n");
        for (const auto& v : rep.violations)
            std::printf("    %s by %.3g\n", v.constraint.c_str(), v.magnitude);
    }
}

void print_trace(const SolverOutcome& outcome, int verbosity) {
    if (verbosity < 2) return;
    for (const auto& ev : outcome.trace) {
        const char* kind = "?";
        switch (ev.kind) {
            case TraceKind::Expand: kind = "expand"; break;
            case TraceKind::Reduce: kind = "reduce"; break;
            case TraceKind::Bound: kind = "bound"; break;
            case TraceKind::Incumbent: kind = "incumbent"; break;
            case TraceKind::Prune: kind = "prune"; break;
            case TraceKind::Fail: kind = "fail"; break;
        }
        std::fprintf(stderr, "trace iter=%llu node=%llu event=%s beta=%.9g delta=%.9g\n",
                     static_cast<unsigned long long>(ev.iter),
                     static_cast<unsigned long long>(ev.node), kind, ev.beta, ev.delta);
    }
}

struct CommonOpts {
    std::uint64_t seed = 1;
    int K = 2, M = 2;
    std::vector<double> var;
    double snr_db = 20.0;
    double power_dbm = -1e9;
    std::string scheme = "rsma";
    std::string objective = "wsr";
    std::vector<double> qos;
    std::vector<double> weights;
    double eta = 0.05;
    double epsilon = 1e-7;
    double max_time = 600.0;
    bool no_warm_start = false;
};

ProblemSpec build_problem(const CommonOpts& o, const ChannelSet& ch) {
    SchemeConfig sc;
    sc.kind = scheme_from_name(o.scheme);
    Eigen::VectorXd qos = Eigen::VectorXd::Zero(ch.K);
    for (int k = 0; k < ch.K && k < static_cast<int>(o.qos.size()); ++k)
        qos(k) = o.qos[k];
    if (o.qos.size() == 1) qos.setConstant(o.qos[0]);

    if (o.objective == "ee") {
        const double noise_var = 1e-4;
        ChannelSet scaled = ch;
        for (auto& hk : scaled.h) hk /= std::sqrt(noise_var);
        const double p_dbm = o.power_dbm > -1e8 ? o.power_dbm : 20.0;
        const double P = std::pow(10.0, p_dbm / 10.0);
        const double p_circ = ch.M * std::pow(10.0, 27.0 / 10.0) + 1.0;
        return ProblemSpec::ee(scaled, qos, P, 0.35, p_circ, sc);
    }
    Eigen::VectorXd u = Eigen::VectorXd::Ones(ch.K);
    for (int k = 0; k < ch.K && k < static_cast<int>(o.weights.size()); ++k)
        u(k) = o.weights[k];
    return ProblemSpec::wsr(ch, u, qos, std::pow(10.0, o.snr_db / 10.0), sc);
}

int run_audit_suites(std::uint64_t seed, bool quick) {
    int failures = 0;
    auto report = [&](const char* name, const AuditReport& r) {
        std::printf("[%s] %s\n", r.ok ? "PASS" : "FAIL", name);
        for (const auto& f : r.failures) std::printf("        %s\n", f.c_str());
        if (!r.ok) ++failures;
    };

    report("envelope cut soundness", audit_envelope_soundness(quick ? 2000 : 20000, seed));

    const ChannelSet ch = gen_channels(seed, 2, 2, {1.0, 1.0});
    const ProblemSpec wsr = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                             Eigen::VectorXd::Zero(2), 10.0);
    const ScaResult sca = sca_solve(wsr);
    const double hint = std::max(0.5, sca.report.objective);
    report("reduction no-loss (sampled)",
           audit_reduction_no_loss(wsr, quick ? 10 : 50, quick ? 200 : 2000, seed, hint));
    report("bound monotonicity",
           audit_bound_monotonicity(wsr, quick ? 8 : 30, seed, 0.5 * hint));
    report("bound validity (sampled)",
           audit_bound_validity(wsr, quick ? 100 : 1000, seed, 0.25 * hint));

    SolverConfig cfg;
    cfg.eta = 0.05;
    SolverOutcome out = solve_scheme(wsr, cfg);
    report("trace audit (WSR RSMA run)", audit_trace(out, wsr, cfg));

    // single-user closed form
    AuditReport closed;
    const ChannelSet ch1 = gen_channels(seed + 7, 1, 2, {1.0});
    const ProblemSpec one = ProblemSpec::wsr(ch1, Eigen::VectorXd::Ones(1),
                                             Eigen::VectorXd::Zero(1), 10.0);
    SolverConfig cfg1;
    cfg1.eta = 0.01;
    const SolverOutcome o1 = solve(one, cfg1);
    const double cap = rate_of(10.0 * ch1.norm_sq(0));
    if (!o1.incumbent || std::abs(o1.incumbent->objective - cap) > cfg1.eta)
        closed.fail("single-user objective deviates from the closed form");
    report("single-user closed form", closed);

    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"globally optimal rate-splitting beamforming (SIT branch-and-bound)"};
    app.require_subcommand(1);
    const int verbosity = trace_verbosity_from_env();

    CommonOpts o;
    std::string channels_path, plan_path, out_dir, seeds_file, dump_path;
    bool strict = false, svg = false, no_sca = false, pc_nonzero = false;
    int jobs = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "channel seed");
        cmd->add_option("--K", o.K, "number of users");
        cmd->add_option("--M", o.M, "number of transmit antennas");
        cmd->add_option("--var", o.var, "per-user channel variances")->delimiter(',');
        cmd->add_option("--snr-db", o.snr_db, "SNR [dB] (WSR mode)");
        cmd->add_option("--power-dbm", o.power_dbm, "transmit power [dBm] (EE mode)");
        cmd->add_option("--scheme", o.scheme, "rsma | mulp | noma");
        cmd->add_option("--objective", o.objective, "wsr | ee");
        cmd->add_option("--qos", o.qos, "per-user rate floors [bpcu]")->delimiter(',');
        cmd->add_option("--weights", o.weights, "per-user weights")->delimiter(',');
        cmd->add_option("--eta", o.eta, "incumbent tolerance");
        cmd->add_option("--epsilon", o.epsilon, "essential-feasibility tolerance");
        cmd->add_option("--max-time", o.max_time, "wall-clock budget [s]");
        cmd->add_flag("--no-warm-start", o.no_warm_start, "skip the SCA warm start");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve one instance");
    add_common(solve_cmd);
    solve_cmd->add_option("--channels", channels_path, "channel file (overrides --seed)");
    solve_cmd->add_flag("--strict", strict, "nonzero exit unless certified");
    solve_cmd->add_flag("--no-sca", no_sca, "skip the SCA comparison run");
    solve_cmd->add_flag("--pc-nonzero", pc_nonzero,
                        "require a common stream (incompatible with --scheme mulp)");
    solve_cmd->add_option("--dump-bounding", dump_path,
                          "write the root bounding program to this file");

    auto add_plan_cmd = [&](const char* name, const char* help) {
        CLI::App* cmd = app.add_subcommand(name, help);
        cmd->add_option("--plan", plan_path, "plan file")->required();
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--jobs", jobs, "worker count (1 = deterministic)");
        cmd->add_flag("--svg", svg, "also write an SVG chart");
        cmd->add_flag("--strict", strict, "nonzero exit if any BB row is uncertified");
        return cmd;
    };
    CLI::App* rr_cmd = add_plan_cmd("rate-region", "two-user rate region sweep");
    CLI::App* snr_cmd = add_plan_cmd("sweep-snr", "sum rate vs SNR sweep");
    CLI::App* ee_cmd = add_plan_cmd("sweep-ee", "energy efficiency vs power sweep");

    CLI::App* bench_cmd = app.add_subcommand("bench", "timing of repeated solves");
    add_common(bench_cmd);
    int bench_seeds = 10;
    bench_cmd->add_option("--count", bench_seeds, "number of seeded instances");

    CLI::App* audit_cmd = app.add_subcommand("audit", "run the property suites");
    std::uint64_t audit_seed = 1;
    bool audit_quick = false;
    audit_cmd->add_option("--seed", audit_seed, "base seed");
    audit_cmd->add_flag("--quick", audit_quick, "reduced sample counts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed() || bench_cmd->parsed()) {
            if (pc_nonzero && o.scheme == "mulp") {
                std::fprintf(stderr,
                             "error: --pc-nonzero contradicts --scheme mulp (no common stream)\n");
                return 2;
            }
            if (o.var.empty()) o.var.assign(o.K, 1.0);
            if (static_cast<int>(o.var.size()) != o.K) {
                std::fprintf(stderr, "error: --var needs %d entries\n", o.K);
                return 2;
            }

            std::vector<ChannelSet> sets;
            if (!channels_path.empty()) {
                sets = read_channel_file(channels_path);
            } else {
                const int count = bench_cmd->parsed() ? bench_seeds : 1;
                for (int i = 0; i < count; ++i)
                    sets.push_back(gen_channels(o.seed + i, o.K, o.M, o.var));
            }

            SolverConfig cfg;
            cfg.eta = o.eta;
            cfg.epsilon = o.epsilon;
            cfg.max_wall_time_s = o.max_time;
            cfg.use_sca_warm_start = !o.no_warm_start;
            cfg.trace_verbosity = verbosity;

            std::vector<double> times;
            bool all_certified = true;
            for (const auto& ch : sets) {
                const ProblemSpec prob = build_problem(o, ch);
                if (!dump_path.empty()) {
                    const BuiltProgram built =
                        build_bounding_socp(initial_box(scheme_variants(prob)[0]), 0.0,
                                            scheme_variants(prob)[0]);
                    std::ofstream dump(dump_path);
                    dump << built.program.dump();
                }
                const SolverOutcome out = solve_scheme(prob, cfg);
                times.push_back(out.wall_time_s);
                print_trace(out, verbosity);
                const char* status = out.status == SolveStatus::OptimalCertified
                                         ? "OptimalCertified"
                                         : out.status == SolveStatus::EpsilonEssentialInfeasible
                                               ? "EpsilonEssentialInfeasible"
                                               : "BudgetExhausted";
                all_certified &= out.status == SolveStatus::OptimalCertified;
                if (solve_cmd->parsed()) {
                    std::printf("seed %llu  scheme %s  status %s\n",
                                static_cast<unsigned long long>(ch.seed),
                                o.scheme.c_str(), status);
                    if (out.incumbent) {
                        print_report(*out.incumbent, ch.K);
                        std::printf(
                            "  certificate    no eps-essential point above %.6f (= objective + eta)\n",
                            out.delta_final);
                    }
                    std::printf("  nodes %llu  iterations %llu  wall %.3f s\n",
                                static_cast<unsigned long long>(out.nodes_explored),
                                static_cast<unsigned long long>(out.iterations),
                                out.wall_time_s);
                    if (!no_sca) {
                        const ScaResult sca = sca_solve(scheme_variants(prob)[0]);
                        std::printf("  SCA objective  %.6f (%s)\n", sca.report.objective,
                                    sca.status == ScaStatus::Converged ? "converged"
                                                                       : "not converged");
                    }
                }
            }
            if (bench_cmd->parsed()) {
                std::sort(times.begin(), times.end());
                double mean = 0;
                for (double t : times) mean += t;
                mean /= times.size();
                std::printf("instances %zu  mean %.3f s  median %.3f s\n", times.size(),
                            mean, times[times.size() / 2]);
            }
            return (strict && !all_certified) ? 1 : 0;
        }

        if (rr_cmd->parsed() || snr_cmd->parsed() || ee_cmd->parsed()) {
            ExperimentPlan plan = load_plan(plan_path);
            if (rr_cmd->parsed() && plan.kind != ExperimentKind::RateRegion)
                throw std::runtime_error("plan kind does not match rate-region");
            if (snr_cmd->parsed() && plan.kind != ExperimentKind::SumRateSweep)
                throw std::runtime_error("plan kind does not match sweep-snr");
            if (ee_cmd->parsed() && plan.kind != ExperimentKind::EeSweep)
                throw std::runtime_error("plan kind does not match sweep-ee");
            if (!out_dir.empty()) plan.out_dir = out_dir;
            if (jobs > 0) plan.jobs = jobs;
            plan.svg = plan.svg || svg;
            const std::string csv = run_plan(plan);
            std::printf("wrote %s\n", csv.c_str());
            if (strict) {
                std::ifstream in(csv);
                std::string line;
                std::getline(in, line);
                while (std::getline(in, line))
                    if (line.find(",BB,") != std::string::npos &&
                        line.find("OptimalCertified") == std::string::npos)
                        return 1;
            }
            return 0;
        }

        if (audit_cmd->parsed()) return run_audit_suites(audit_seed, audit_quick);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
