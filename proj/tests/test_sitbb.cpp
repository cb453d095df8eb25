#include <doctest.h>

#include "rsma/audit.hpp"
#include "rsma/experiments.hpp"
#include "rsma/sitbb.hpp"

using namespace rsma;

namespace {

ChannelSet fixed_channels(std::initializer_list<std::complex<double>> h1,
                          std::initializer_list<std::complex<double>> h2) {
    ChannelSet ch;
    ch.K = 2;
    ch.M = static_cast<int>(h1.size());
    ch.h.resize(2);
    ch.h[0].resize(ch.M);
    ch.h[1].resize(ch.M);
    int i = 0;
    for (auto v : h1) ch.h[0](i++) = v;
    i = 0;
    for (auto v : h2) ch.h[1](i++) = v;
    return ch;
}

}  // namespace

TEST_CASE("initial box formulas") {
    const ChannelSet ch = fixed_channels({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}});
    {
        const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                                  Eigen::VectorXd::Zero(2), 10.0);
        const Box box = initial_box(prob);
        CHECK(box.gamma_hi(0) == doctest::Approx(10.0));
        CHECK(box.gamma_hi(1) == doctest::Approx(10.0));
        CHECK(box.s_hi == doctest::Approx(10.0));
        CHECK(box.gamma_lo.maxCoeff() == 0.0);
        CHECK(box.alpha_lo.size() == 1);
        CHECK(box.alpha_hi(0) == doctest::Approx(2.0 * M_PI));
    }
    {
        Eigen::VectorXd r_th(2);
        r_th << 4.0, 0.0;
        const ProblemSpec prob =
            ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2), r_th, 10.0);
        const Box box = initial_box(prob);
        CHECK(box.gamma_lo(0) == doctest::Approx(16.0 / 11.0 - 1.0));
        CHECK(box.gamma_lo(1) == 0.0);
    }
    {
        ChannelSet one;
        one.K = 1;
        one.M = 2;
        one.h = {ch.h[0]};
        const ProblemSpec prob = ProblemSpec::wsr(one, Eigen::VectorXd::Ones(1),
                                                  Eigen::VectorXd::Zero(1), 10.0);
        const Box box = initial_box(prob);
        CHECK(box.s_hi == doctest::Approx(10.0 * one.h[0].squaredNorm()));
        CHECK(box.alpha_lo.size() == 0);
    }
}

TEST_CASE("quick infeasibility corner checks") {
    const ChannelSet ch = fixed_channels({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}});
    Eigen::VectorXd r_th(2);
    r_th << 5.0, 5.0;
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2), r_th, 10.0);
    Box box = initial_box(prob);
    box.gamma_hi.setConstant(1.0);
    box.s_hi = 1.0;
    // V = (5-1) + (5-1) - 1 = 7 > 0
    CHECK(quick_infeasibility(box, 0.0, prob));

    const ProblemSpec easy = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    CHECK(!quick_infeasibility(initial_box(easy), 0.0, easy));
}

TEST_CASE("reduce_box is idempotent when nothing binds") {
    const ChannelSet ch = fixed_channels({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    const Box box = initial_box(prob);
    const auto reduced = reduce_box(box, 0.0, prob);
    REQUIRE(reduced.has_value());
    CHECK(reduced->gamma_lo.isApprox(box.gamma_lo));
    CHECK(reduced->gamma_hi.isApprox(box.gamma_hi));
    CHECK(reduced->s_lo == box.s_lo);
    CHECK(reduced->s_hi == box.s_hi);
}

TEST_CASE("reduction never widens and ee upper bounds shrink") {
    const ChannelSet ch = gen_channels(5, 2, 2, {1.0, 1.0});
    const ProblemSpec prob =
        ProblemSpec::ee(ch, Eigen::VectorXd::Zero(2), 10.0, 0.35, 1.0);
    std::mt19937_64 rng(17);
    const Box root = initial_box(prob);
    const ScaResult sca = sca_solve(prob);
    REQUIRE(sca.report.feasible);
    const double delta = 0.8 * sca.report.objective;
    int shrunk = 0;
    for (int t = 0; t < 30; ++t) {
        const XPoint a = sample_box_point(root, rng);
        const XPoint b = sample_box_point(root, rng);
        Box box = root;
        for (int k = 0; k < 2; ++k) {
            box.gamma_lo(k) = std::min(a.gamma_p(k), b.gamma_p(k));
            box.gamma_hi(k) = std::max(a.gamma_p(k), b.gamma_p(k));
        }
        box.s_lo = std::min(a.s, b.s);
        box.s_hi = std::max(a.s, b.s);
        const auto red = reduce_box(box, delta, prob);
        if (!red) continue;
        for (int k = 0; k < 2; ++k) {
            CHECK(red->gamma_lo(k) >= box.gamma_lo(k) - 1e-12);
            CHECK(red->gamma_hi(k) <= box.gamma_hi(k) + 1e-12);
        }
        CHECK(red->s_lo >= box.s_lo - 1e-12);
        CHECK(red->s_hi <= box.s_hi + 1e-12);
        if (red->gamma_hi(0) < box.gamma_hi(0) - 1e-9 || red->s_hi < box.s_hi - 1e-9)
            ++shrunk;
    }
    CHECK(shrunk > 0);  // the level constraint actually binds somewhere
}

TEST_CASE("reduction no-loss on sampled candidates") {
    const ChannelSet ch = gen_channels(9, 2, 2, {1.0, 1.0});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    const ScaResult sca = sca_solve(prob);
    const AuditReport rep =
        audit_reduction_no_loss(prob, 8, 150, 23, std::max(0.5, sca.report.objective));
    for (const auto& f : rep.failures) MESSAGE(f);
    CHECK(rep.ok);
}

TEST_CASE("branch splits the widest normalized dimension") {
    const ChannelSet ch = fixed_channels({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    const Box root = initial_box(prob);
    const auto widths = box_widths(root);

    SUBCASE("fresh box ties break to the first dimension") {
        const auto [lo, hi] = branch(root, widths);
        CHECK(lo.gamma_hi(0) == doctest::Approx(5.0));
        CHECK(hi.gamma_lo(0) == doctest::Approx(5.0));
        CHECK(lo.gamma_hi(1) == root.gamma_hi(1));
    }
    SUBCASE("largest normalized width wins") {
        Box b = root;
        b.gamma_lo(0) = 8.0;               // width 2, normalized 0.2
        b.s_lo = 1.0;                      // normalized 0.9
        b.gamma_lo(1) = 5.0;               // normalized 0.5
        const auto [lo, hi] = branch(b, widths);
        CHECK(lo.s_hi == doctest::Approx(0.5 * (1.0 + 10.0)));
        CHECK(hi.s_lo == doctest::Approx(0.5 * (1.0 + 10.0)));
    }
    SUBCASE("children partition the parent") {
        const auto [lo, hi] = branch(root, widths);
        CHECK(lo.gamma_hi(0) == hi.gamma_lo(0));
        CHECK(lo.gamma_lo(0) == root.gamma_lo(0));
        CHECK(hi.gamma_hi(0) == root.gamma_hi(0));
    }
}

TEST_CASE("dual point extraction snaps phases to the nearer corner") {
    const ChannelSet ch = gen_channels(33, 2, 2, {1.0, 1.0});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 4.0);
    Box box = initial_box(prob);
    box.alpha_lo(0) = 0.0;
    box.alpha_hi(0) = 1.0;
    const BuiltProgram built = build_bounding_socp(box, 0.0, prob);
    ConicSolution sol = solve(built.program);
    REQUIRE(sol.status == ConicStatus::Optimal);

    // overwrite the solution fields we want to test against
    sol.x(built.refs.gamma_log[0].offset) = 1.0;  // gamma' = 1 bit -> gamma = 1
    sol.x(built.refs.e[1].offset) = std::cos(0.3);
    sol.x(built.refs.e[1].offset + 1) = std::sin(0.3);
    XPoint x = extract_dual_point(sol, built.refs, box, prob);
    CHECK(x.gamma_p(0) == doctest::Approx(1.0));
    CHECK(x.alpha(0) == 0.0);  // |0.3 - 0| < |1 - 0.3|

    sol.x(built.refs.e[1].offset) = std::cos(0.5);
    sol.x(built.refs.e[1].offset + 1) = std::sin(0.5);
    x = extract_dual_point(sol, built.refs, box, prob);
    CHECK(x.alpha(0) == 0.0);  // exact midpoint ties to the lower corner

    sol.x(built.refs.e[1].offset) = std::cos(0.8);
    sol.x(built.refs.e[1].offset + 1) = std::sin(0.8);
    x = extract_dual_point(sol, built.refs, box, prob);
    CHECK(x.alpha(0) == 1.0);
}

TEST_CASE("bound: corner reject, witness at delta zero") {
    const ChannelSet ch = fixed_channels({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}});
    Eigen::VectorXd r_th(2);
    r_th << 5.0, 5.0;
    const ProblemSpec hard = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2), r_th, 10.0);
    SolverConfig cfg;
    Box box = initial_box(hard);
    box.gamma_hi.setConstant(1.0);
    box.s_hi = 1.0;
    const NodeRecord rejected = bound(box, 0.0, hard, cfg, -1e300);
    CHECK(rejected.beta == std::numeric_limits<double>::infinity());

    const ProblemSpec easy = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    const NodeRecord root = bound(initial_box(easy), 0.0, easy, cfg, -1e300);
    CHECK(root.beta <= 1e-9);
    CHECK(root.dual_point.has_value());
}

TEST_CASE("probe returns a feasible report or nothing") {
    const ChannelSet ch = gen_channels(44, 2, 2, {1.0, 1.0});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    SolverConfig cfg;
    const NodeRecord root = bound(initial_box(prob), 0.0, prob, cfg, -1e300);
    REQUIRE(root.dual_point.has_value());
    const auto rep = probe_feasible(*root.dual_point, 0.0, prob, cfg);
    REQUIRE(rep.has_value());
    CHECK(rep->feasible);
    CHECK(rep->objective >= 0.0);
}

TEST_CASE("rotation leaves the sinrs unchanged") {
    const ChannelSet ch = gen_channels(55, 2, 2, {1.0, 1.0});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    PrecoderSet p = PrecoderSet::zeros(2, 2);
    for (int m = 0; m < 2; ++m) {
        p.common(m) = {gauss(rng), gauss(rng)};
        p.priv[0](m) = {gauss(rng), gauss(rng)};
        p.priv[1](m) = {gauss(rng), gauss(rng)};
    }
    const Sinrs before = compute_sinrs(ch, p);
    const PrecoderSet rotated = rotate_precoders(ch, p);
    const Sinrs after = compute_sinrs(ch, rotated);
    for (int k = 0; k < 2; ++k) {
        CHECK(after.priv(k) == doctest::Approx(before.priv(k)).epsilon(1e-12));
        CHECK(after.common(k) == doctest::Approx(before.common(k)).epsilon(1e-12));
    }
    CHECK(std::abs(std::imag(ch.h[0].dot(rotated.priv[0]))) < 1e-12);
    CHECK(std::real(ch.h[0].dot(rotated.common)) >= 0.0);
}

TEST_CASE("single user solve hits the closed-form capacity") {
    ChannelSet ch;
    ch.K = 1;
    ch.M = 2;
    ch.h.resize(1);
    ch.h[0].resize(2);
    ch.h[0] << std::complex<double>(1, 0), std::complex<double>(0, 1);
    const double P = 10.0;
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(1),
                                              Eigen::VectorXd::Zero(1), P);
    SolverConfig cfg;
    cfg.eta = 0.01;
    const SolverOutcome out = solve(prob, cfg);
    REQUIRE(out.status == SolveStatus::OptimalCertified);
    REQUIRE(out.incumbent.has_value());
    CHECK(out.incumbent->objective ==
          doctest::Approx(rate_of(P * 2.0)).epsilon(0.01 / rate_of(P * 2.0)));
    const AuditReport audit = audit_trace(out, prob, cfg);
    for (const auto& f : audit.failures) MESSAGE(f);
    CHECK(audit.ok);
}

TEST_CASE("impossible qos certifies essential infeasibility") {
    const ChannelSet ch = gen_channels(66, 2, 2, {1.0, 1.0});
    const double P = 10.0;
    Eigen::VectorXd r_th(2);
    for (int k = 0; k < 2; ++k) r_th(k) = rate_of(P * ch.norm_sq(k)) * 1.05;
    const ProblemSpec prob =
        ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2), r_th, P);
    SolverConfig cfg;
    cfg.eta = 0.05;
    const SolverOutcome out = solve_scheme(prob, cfg);
    CHECK(out.status == SolveStatus::EpsilonEssentialInfeasible);
    CHECK(!out.incumbent.has_value());
}

TEST_CASE("noma with unset order equals the best fixed order") {
    const ChannelSet ch = gen_channels(77, 2, 2, {1.0, 0.09});
    SchemeConfig unset{SchemeKind::NOMA2, std::nullopt};
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0, unset);
    SolverConfig cfg;
    cfg.eta = 0.02;
    const SolverOutcome joint = solve_scheme(prob, cfg);
    REQUIRE(joint.incumbent.has_value());

    double best_fixed = -1.0;
    for (auto order : {std::array<int, 2>{0, 1}, std::array<int, 2>{1, 0}}) {
        SchemeConfig sc{SchemeKind::NOMA2, order};
        const SolverOutcome o = solve(apply_scheme(sc, prob), cfg);
        if (o.incumbent) best_fixed = std::max(best_fixed, o.incumbent->objective);
    }
    CHECK(joint.incumbent->objective == doctest::Approx(best_fixed).epsilon(1e-9));
}

TEST_CASE("two-way concurrent child bounding is bit-identical to serial") {
    const ChannelSet ch = gen_channels(88, 2, 2, {1.0, 1.0});
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 10.0);
    SolverConfig serial;
    serial.eta = 0.05;
    SolverConfig conc = serial;
    conc.concurrent_children = true;
    const SolverOutcome a = solve(prob, serial);
    const SolverOutcome b = solve(prob, conc);
    REQUIRE(a.incumbent.has_value());
    REQUIRE(b.incumbent.has_value());
    CHECK(a.incumbent->objective == b.incumbent->objective);  // bit identical
    CHECK(a.delta_final == b.delta_final);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].node == b.trace[i].node);
        CHECK(a.trace[i].beta == b.trace[i].beta);
    }
}
