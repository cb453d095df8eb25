#include "rsma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "rsma/svg.hpp"

namespace rsma {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// uniform in [0,1) from the top 53 bits, never exactly 0
double canonical_u(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

}  // namespace

ChannelSet gen_channels(std::uint64_t seed, int K, int M,
                        const std::vector<double>& variances) {
    if (static_cast<int>(variances.size()) != K)
        throw std::invalid_argument("gen_channels: variance list length != K");
    ChannelSet ch;
    ch.K = K;
    ch.M = M;
    ch.seed = seed;
    ch.h.resize(K);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < K; ++k) {
        if (variances[k] <= 0.0)
            throw std::invalid_argument("gen_channels: variance must be > 0");
        ch.h[k].resize(M);
        const double comp_std = std::sqrt(variances[k] / 2.0);
        for (int m = 0; m < M; ++m) {
            // Box-Muller; one uniform pair yields (re, im) in that order
            const double u = canonical_u(rng);
            const double v = canonical_u(rng);
            const double r = comp_std * std::sqrt(-2.0 * std::log(u));
            ch.h[k](m) = {r * std::cos(2.0 * M_PI * v), r * std::sin(2.0 * M_PI * v)};
        }
    }
    ch.validate();
    return ch;
}

std::string scheme_name(SchemeKind k) {
    switch (k) {
        case SchemeKind::RSMA: return "rsma";
        case SchemeKind::MULP: return "mulp";
        case SchemeKind::NOMA2: return "noma";
    }
    return "?";
}

SchemeKind scheme_from_name(const std::string& name) {
    if (name == "rsma") return SchemeKind::RSMA;
    if (name == "mulp") return SchemeKind::MULP;
    if (name == "noma") return SchemeKind::NOMA2;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string rows_to_csv(const std::vector<ResultRow>& rows, int K) {
    std::ostringstream os;
    os << "seed,scheme,grid_x,solver,objective";
    for (int k = 1; k <= K; ++k) os << ",R" << k;
    for (int k = 1; k <= K; ++k) os << ",C" << k;
    os << ",status,wall_ms\n";
    for (const auto& r : rows) {
        os << r.seed << "," << scheme_name(r.scheme) << "," << fmt_num(r.grid_x)
           << "," << r.solver << "," << fmt_num(r.objective);
        for (int k = 0; k < K; ++k)
            os << "," << (k < r.rates.size() ? fmt_num(r.rates(k)) : "0");
        for (int k = 0; k < K; ++k)
            os << "," << (k < r.common_rates.size() ? fmt_num(r.common_rates(k)) : "0");
        os << "," << r.status << "," << fmt_num(r.wall_ms) << "\n";
    }
    return os.str();
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows,
                    int K) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << rows_to_csv(rows, K);
}

namespace {

SolverConfig bb_config(const ExperimentPlan& plan) {
    SolverConfig cfg;
    cfg.eta = plan.eta;
    cfg.epsilon = plan.epsilon;
    cfg.feas_tol = plan.feas_tol;
    cfg.solver_tol = plan.solver_tol;
    cfg.max_iter = plan.max_iter;
    cfg.max_wall_time_s = plan.max_time_s;
    cfg.use_sca_warm_start = plan.warm_start;
    return cfg;
}

const char* sca_status_name(ScaStatus s) {
    switch (s) {
        case ScaStatus::Converged: return "SCA-converged";
        case ScaStatus::MaxIter: return "SCA-maxiter";
        case ScaStatus::InfeasibleStart: return "SCA-infeasible-start";
    }
    return "?";
}

const char* bb_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::OptimalCertified: return "OptimalCertified";
        case SolveStatus::EpsilonEssentialInfeasible: return "EpsilonEssentialInfeasible";
        case SolveStatus::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

ScaResult sca_solve_scheme(const ProblemSpec& prob, const ScaConfig& cfg) {
    const std::vector<ProblemSpec> variants = scheme_variants(prob);
    ScaResult best;
    bool first = true;
    for (const auto& v : variants) {
        ScaResult r = sca_solve(v, cfg);
        const bool better =
            first || (r.report.feasible && !best.report.feasible) ||
            (r.report.feasible == best.report.feasible &&
             r.report.objective > best.report.objective);
        if (better) best = std::move(r);
        first = false;
    }
    return best;
}

struct Task {
    std::uint64_t seed;
    SchemeKind scheme;
    double grid_x;
    ProblemSpec prob;
};

std::vector<ResultRow> run_tasks(const ExperimentPlan& plan,
                                 const std::vector<Task>& tasks) {
    std::vector<std::vector<ResultRow>> partial(tasks.size());
    const SolverConfig cfg = bb_config(plan);
    ScaConfig sca_cfg;
    sca_cfg.solver_tol = plan.solver_tol;

    auto run_one = [&](size_t i) {
        const Task& t = tasks[i];
        using clock = std::chrono::steady_clock;
        if (plan.run_bb) {
            const auto t0 = clock::now();
            const SolverOutcome o = solve_scheme(t.prob, cfg);
            const double ms =
                std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            ResultRow row;
            row.seed = t.seed;
            row.scheme = t.scheme;
            row.grid_x = t.grid_x;
            row.solver = "BB";
            row.status = bb_status_name(o.status);
            row.wall_ms = plan.jobs == 1 ? 0.0 : ms;
            if (o.incumbent) {
                row.objective = o.incumbent->objective;
                row.rates = o.incumbent->rates;
                row.common_rates = o.incumbent->common_rate;
            } else {
                row.rates = Eigen::VectorXd::Zero(plan.K);
                row.common_rates = Eigen::VectorXd::Zero(plan.K);
            }
            partial[i].push_back(std::move(row));
        }
        if (plan.run_sca) {
            const auto t0 = clock::now();
            const ScaResult r = sca_solve_scheme(t.prob, sca_cfg);
            const double ms =
                std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            ResultRow row;
            row.seed = t.seed;
            row.scheme = t.scheme;
            row.grid_x = t.grid_x;
            row.solver = "SCA";
            row.status = r.report.feasible ? sca_status_name(r.status)
                                           : "SCA-infeasible-start";
            row.wall_ms = plan.jobs == 1 ? 0.0 : ms;
            row.objective = r.report.objective;
            row.rates = r.report.rates;
            row.common_rates = r.report.common_rate;
            partial[i].push_back(std::move(row));
        }
    };

    if (plan.jobs <= 1) {
        for (size_t i = 0; i < tasks.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        const int n = std::min<int>(plan.jobs, static_cast<int>(tasks.size()));
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < tasks.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<ResultRow> rows;  // merged in plan order
    for (auto& p : partial)
        for (auto& r : p) rows.push_back(std::move(r));
    return rows;
}

}  // namespace

ProblemSpec plan_problem(const ExperimentPlan& plan, const ChannelSet& ch,
                         SchemeKind scheme, double grid_value) {
    SchemeConfig sc;
    sc.kind = scheme;
    switch (plan.kind) {
        case ExperimentKind::SumRateSweep: {
            const auto it = std::find(plan.snr_db.begin(), plan.snr_db.end(), grid_value);
            const size_t idx = it == plan.snr_db.end()
                                   ? 0
                                   : static_cast<size_t>(it - plan.snr_db.begin());
            const double qos = idx < plan.qos.size() ? plan.qos[idx] : 0.0;
            return ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(ch.K),
                                    Eigen::VectorXd::Constant(ch.K, qos),
                                    db_to_linear(grid_value), sc);
        }
        case ExperimentKind::RateRegion: {
            Eigen::VectorXd u(ch.K);
            u(0) = 1.0;
            for (int k = 1; k < ch.K; ++k) u(k) = std::pow(10.0, grid_value);
            return ProblemSpec::wsr(ch, u, Eigen::VectorXd::Zero(ch.K),
                                    db_to_linear(plan.snr_db.empty() ? 20.0
                                                                     : plan.snr_db[0]),
                                    sc);
        }
        case ExperimentKind::EeSweep: {
            ChannelSet scaled = ch;
            const double noise_std = std::sqrt(plan.noise_variance);
            for (auto& hk : scaled.h) hk /= noise_std;
            const double p_circ =
                ch.M * db_to_linear(plan.p_dyn_dbm) + plan.p_sta_mw;
            return ProblemSpec::ee(scaled,
                                   Eigen::VectorXd::Constant(ch.K, plan.ee_qos),
                                   db_to_linear(grid_value), plan.mu, p_circ, sc);
        }
    }
    throw std::logic_error("plan_problem: bad kind");
}

namespace {

std::vector<Task> make_tasks(const ExperimentPlan& plan,
                             const std::vector<double>& grid) {
    std::vector<Task> tasks;
    for (int i = 0; i < plan.seed_count; ++i) {
        const std::uint64_t seed = plan.seed_base + static_cast<std::uint64_t>(i);
        const ChannelSet ch = gen_channels(seed, plan.K, plan.M, plan.variances);
        for (double g : grid)
            for (SchemeKind s : plan.schemes)
                tasks.push_back({seed, s, g, plan_problem(plan, ch, s, g)});
    }
    return tasks;
}

}  // namespace

std::vector<ResultRow> sweep_sum_rate(const ExperimentPlan& plan) {
    if (plan.qos.size() != plan.snr_db.size())
        throw std::invalid_argument("sweep_sum_rate: SNR grid and QoS ladder lengths differ");
    return run_tasks(plan, make_tasks(plan, plan.snr_db));
}

std::vector<ResultRow> sweep_ee(const ExperimentPlan& plan) {
    if (plan.power_dbm.empty())
        throw std::invalid_argument("sweep_ee: empty power grid");
    return run_tasks(plan, make_tasks(plan, plan.power_dbm));
}

RateRegionResult rate_region(const ExperimentPlan& plan) {
    if (plan.K != 2)
        throw std::invalid_argument("rate_region: protocol is defined for K = 2");
    RateRegionResult out;
    out.rows = run_tasks(plan, make_tasks(plan, plan.weight_exponents));

    // mean BB rate pairs per (scheme, weight), certified rows only
    for (SchemeKind s : plan.schemes) {
        std::vector<std::pair<double, double>> pts;
        for (double x : plan.weight_exponents) {
            double r1 = 0, r2 = 0;
            int n = 0;
            for (const auto& row : out.rows) {
                if (row.scheme != s || row.solver != "BB" || !row.certified())
                    continue;
                if (row.grid_x != x) continue;
                r1 += row.rates(0);
                r2 += row.rates(1);
                ++n;
            }
            if (n) pts.emplace_back(r1 / n, r2 / n);
        }
        out.hulls.push_back({s, convex_hull(std::move(pts))});
    }
    return out;
}

std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> pts) {
    std::vector<std::pair<double, double>> hull;
    if (pts.empty()) return hull;
    double xmax = 0, ymax = 0;
    for (auto [x, y] : pts) {
        xmax = std::max(xmax, x);
        ymax = std::max(ymax, y);
    }
    pts.emplace_back(0.0, ymax);
    pts.emplace_back(xmax, 0.0);
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    auto cross = [](const std::pair<double, double>& o,
                    const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    for (const auto& p : pts) {
        if (!hull.empty() && hull.back() == p) continue;
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], hull.back(), p) >= -1e-12)
            hull.pop_back();
        hull.push_back(p);
    }
    return hull;
}

std::string run_plan(const ExperimentPlan& plan) {
    namespace fs = std::filesystem;
    fs::create_directories(plan.out_dir);
    std::vector<ResultRow> rows;
    std::string stem;
    RateRegionResult region;
    switch (plan.kind) {
        case ExperimentKind::SumRateSweep:
            rows = sweep_sum_rate(plan);
            stem = "sweep_snr";
            break;
        case ExperimentKind::EeSweep:
            rows = sweep_ee(plan);
            stem = "sweep_ee";
            break;
        case ExperimentKind::RateRegion:
            region = rate_region(plan);
            rows = region.rows;
            stem = "rate_region";
            break;
    }
    const std::string csv_path = plan.out_dir + "/" + stem + ".csv";
    write_csv_file(csv_path, rows, plan.K);

    if (plan.kind == ExperimentKind::RateRegion) {
        std::ofstream out(plan.out_dir + "/" + stem + "_hull.csv");
        out << "scheme,R1,R2\n";
        for (const auto& h : region.hulls)
            for (auto [x, y] : h.vertices)
                out << scheme_name(h.scheme) << "," << fmt_num(x) << "," << fmt_num(y)
                    << "\n";
        if (plan.svg) {
            std::vector<SvgSeries> series;
            for (const auto& h : region.hulls)
                series.push_back({scheme_name(h.scheme), h.vertices});
            write_svg_chart(plan.out_dir + "/" + stem + ".svg", series, "R1 [bpcu]",
                            "R2 [bpcu]", "rate region");
        }
        return csv_path;
    }
    if (plan.svg) {
        // mean certified objective per scheme over the grid
        std::vector<SvgSeries> series;
        const auto& grid = plan.kind == ExperimentKind::EeSweep ? plan.power_dbm
                                                                : plan.snr_db;
        for (SchemeKind s : plan.schemes) {
            for (const char* solver : {"BB", "SCA"}) {
                SvgSeries sr;
                sr.label = scheme_name(s) + std::string("-") + solver;
                for (double g : grid) {
                    double sum = 0;
                    int n = 0;
                    for (const auto& row : rows) {
                        if (row.scheme != s || row.solver != solver) continue;
                        if (row.grid_x != g) continue;
                        if (row.solver == std::string("BB") && !row.certified()) continue;
                        sum += row.objective;
                        ++n;
                    }
                    if (n) sr.points.emplace_back(g, sum / n);
                }
                if (!sr.points.empty()) series.push_back(std::move(sr));
            }
        }
        const bool ee = plan.kind == ExperimentKind::EeSweep;
        write_svg_chart(plan.out_dir + "/" + stem + ".svg", series,
                        ee ? "P [dBm]" : "SNR [dB]",
                        ee ? "EE [bits/cu/mW]" : "sum rate [bpcu]",
                        ee ? "energy efficiency" : "sum rate");
    }
    return csv_path;
}

// ---- plan file parsing ------------------------------------------------

namespace {

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_num(v[i]);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text) {
    ExperimentPlan plan;
    plan.schemes.clear();
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("plan: bad line: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (section != "experiment")
        throw std::runtime_error("plan: missing [experiment] section");

    auto get = [&](const char* key) -> std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto get_num = [&](const char* key, double& dst) {
        if (auto* v = get(key)) dst = std::stod(*v);
    };
    auto get_bool = [&](const char* key, bool& dst) {
        if (auto* v = get(key)) dst = (*v == "on" || *v == "true" || *v == "1");
    };

    if (auto* v = get("kind")) {
        if (*v == "rate-region") plan.kind = ExperimentKind::RateRegion;
        else if (*v == "sweep-snr") plan.kind = ExperimentKind::SumRateSweep;
        else if (*v == "sweep-ee") plan.kind = ExperimentKind::EeSweep;
        else throw std::runtime_error("plan: unknown kind " + *v);
    }
    double tmp;
    if (auto* v = get("K")) plan.K = std::stoi(*v);
    if (auto* v = get("M")) plan.M = std::stoi(*v);
    if (auto* v = get("var")) plan.variances = parse_list(*v);
    if (auto* v = get("seed_base")) plan.seed_base = std::stoull(*v);
    if (auto* v = get("seeds")) plan.seed_count = std::stoi(*v);
    if (auto* v = get("snr_db")) plan.snr_db = parse_list(*v);
    if (auto* v = get("qos")) plan.qos = parse_list(*v);
    if (auto* v = get("weights_exp")) plan.weight_exponents = parse_list(*v);
    if (auto* v = get("power_dbm")) plan.power_dbm = parse_list(*v);
    if (auto* v = get("schemes")) {
        std::stringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) plan.schemes.push_back(scheme_from_name(trim(tok)));
    }
    if (auto* v = get("solvers")) {
        plan.run_bb = v->find("bb") != std::string::npos;
        plan.run_sca = v->find("sca") != std::string::npos;
    }
    get_num("eta", plan.eta);
    get_num("epsilon", plan.epsilon);
    get_num("feas_tol", plan.feas_tol);
    get_num("solver_tol", plan.solver_tol);
    get_num("max_time_s", plan.max_time_s);
    tmp = static_cast<double>(plan.max_iter);
    get_num("max_iter", tmp);
    plan.max_iter = static_cast<std::uint64_t>(tmp);
    get_bool("warm_start", plan.warm_start);
    if (auto* v = get("jobs")) plan.jobs = std::stoi(*v);
    if (auto* v = get("out")) plan.out_dir = *v;
    get_bool("svg", plan.svg);
    get_num("noise_var", plan.noise_variance);
    get_num("mu", plan.mu);
    get_num("p_dyn_dbm", plan.p_dyn_dbm);
    get_num("p_sta_mw", plan.p_sta_mw);
    get_num("ee_qos", plan.ee_qos);

    if (plan.variances.empty()) plan.variances.assign(plan.K, 1.0);
    if (plan.schemes.empty())
        plan.schemes = {SchemeKind::RSMA, SchemeKind::MULP, SchemeKind::NOMA2};
    return plan;
}

ExperimentPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plan(ss.str());
}

std::string serialize_plan(const ExperimentPlan& plan) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "kind = "
       << (plan.kind == ExperimentKind::RateRegion
               ? "rate-region"
               : plan.kind == ExperimentKind::SumRateSweep ? "sweep-snr" : "sweep-ee")
       << "\n";
    os << "K = " << plan.K << "\n";
    os << "M = " << plan.M << "\n";
    os << "var = " << join_list(plan.variances) << "\n";
    os << "seed_base = " << plan.seed_base << "\n";
    os << "seeds = " << plan.seed_count << "\n";
    if (!plan.snr_db.empty()) os << "snr_db = " << join_list(plan.snr_db) << "\n";
    if (!plan.qos.empty()) os << "qos = " << join_list(plan.qos) << "\n";
    if (!plan.weight_exponents.empty())
        os << "weights_exp = " << join_list(plan.weight_exponents) << "\n";
    if (!plan.power_dbm.empty())
        os << "power_dbm = " << join_list(plan.power_dbm) << "\n";
    os << "schemes = ";
    for (size_t i = 0; i < plan.schemes.size(); ++i)
        os << (i ? "," : "") << scheme_name(plan.schemes[i]);
    os << "\n";
    os << "solvers = ";
    if (plan.run_bb) os << "bb";
    if (plan.run_bb && plan.run_sca) os << ",";
    if (plan.run_sca) os << "sca";
    os << "\n";
    os << "eta = " << fmt_num(plan.eta) << "\n";
    os << "epsilon = " << fmt_num(plan.epsilon) << "\n";
    os << "feas_tol = " << fmt_num(plan.feas_tol) << "\n";
    os << "solver_tol = " << fmt_num(plan.solver_tol) << "\n";
    os << "max_iter = " << fmt_num(static_cast<double>(plan.max_iter)) << "\n";
    os << "max_time_s = " << fmt_num(plan.max_time_s) << "\n";
    os << "warm_start = " << (plan.warm_start ? "on" : "off") << "\n";
    if (plan.kind == ExperimentKind::EeSweep) {
        os << "noise_var = " << fmt_num(plan.noise_variance) << "\n";
        os << "mu = " << fmt_num(plan.mu) << "\n";
        os << "p_dyn_dbm = " << fmt_num(plan.p_dyn_dbm) << "\n";
        os << "p_sta_mw = " << fmt_num(plan.p_sta_mw) << "\n";
        os << "ee_qos = " << fmt_num(plan.ee_qos) << "\n";
    }
    os << "jobs = " << plan.jobs << "\n";
    os << "out = " << plan.out_dir << "\n";
    os << "svg = " << (plan.svg ? "on" : "off") << "\n";
    return os.str();
}

}  // namespace rsma
