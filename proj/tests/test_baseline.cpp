#include <doctest.h>

#include "rsma/baseline.hpp"
#include "rsma/experiments.hpp"
#include "rsma/sitbb.hpp"

using namespace rsma;

TEST_CASE("init precoders meet the power budget with equality") {
    const ChannelSet ch = gen_channels(2, 2, 2, {1.0, 1.0});
    for (SchemeKind kind : {SchemeKind::RSMA, SchemeKind::MULP, SchemeKind::NOMA2}) {
        SchemeConfig sc;
        sc.kind = kind;
        if (kind == SchemeKind::NOMA2) sc.noma_order = {0, 1};
        const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                                  Eigen::VectorXd::Zero(2), 7.0, sc);
        const PrecoderSet p = init_precoders(prob);
        CHECK(p.total_power() == doctest::Approx(7.0).epsilon(1e-12));
        if (kind == SchemeKind::MULP) CHECK(p.common.norm() == 0.0);
        if (kind == SchemeKind::NOMA2) CHECK(p.priv[1].norm() == 0.0);
    }
}

TEST_CASE("mrt directions on orthonormal channels") {
    ChannelSet ch;
    ch.K = 2;
    ch.M = 2;
    ch.h.resize(2);
    ch.h[0].resize(2);
    ch.h[0] << std::complex<double>(1, 0), std::complex<double>(0, 0);
    ch.h[1].resize(2);
    ch.h[1] << std::complex<double>(0, 0), std::complex<double>(1, 0);
    SchemeConfig mulp{SchemeKind::MULP, std::nullopt};
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 2.0, mulp);
    const PrecoderSet p = init_precoders(prob);
    CHECK(std::abs(p.priv[0](0)) == doctest::Approx(1.0));
    CHECK(std::abs(p.priv[0](1)) == doctest::Approx(0.0));
    CHECK(std::abs(p.priv[1](1)) == doctest::Approx(1.0));
}

TEST_CASE("single-user sca reaches the mrt capacity") {
    ChannelSet ch;
    ch.K = 1;
    ch.M = 2;
    ch.h.resize(1);
    ch.h[0].resize(2);
    ch.h[0] << std::complex<double>(0.8, -0.3), std::complex<double>(0.2, 1.1);
    const double P = 10.0;
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(1),
                                              Eigen::VectorXd::Zero(1), P);
    const ScaResult res = sca_solve(prob);
    CHECK(res.report.feasible);
    CHECK(res.report.objective ==
          doctest::Approx(rate_of(P * ch.norm_sq(0))).epsilon(1e-4));
}

TEST_CASE("sca objective history is nondecreasing") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ChannelSet ch = gen_channels(seed, 2, 2, {1.0, 1.0});
        const ProblemSpec prob = ProblemSpec::wsr(
            ch, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Constant(2, 0.2), 10.0);
        const ScaResult res = sca_solve(prob);
        for (size_t i = 1; i < res.objective_history.size(); ++i)
            CHECK(res.objective_history[i] >=
                  res.objective_history[i - 1] - 1e-7);
        CHECK(res.report.feasible);
    }
}

TEST_CASE("sca stays below the certified global value") {
    for (std::uint64_t seed : {3u, 8u, 15u}) {
        const ChannelSet ch = gen_channels(seed, 2, 2, {1.0, 1.0});
        const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                                  Eigen::VectorXd::Zero(2), 10.0);
        const ScaResult sca = sca_solve(prob);
        SolverConfig cfg;
        cfg.eta = 0.02;
        const SolverOutcome bb = solve_scheme(prob, cfg);
        REQUIRE(bb.status == SolveStatus::OptimalCertified);
        CHECK(sca.report.objective <= bb.incumbent->objective + cfg.eta + 1e-6);
        CHECK(bb.incumbent->objective >= sca.report.objective - cfg.eta - 1e-6);
    }
}

TEST_CASE("ee sca runs the ratio update and stays feasible") {
    const ChannelSet raw = gen_channels(4, 2, 2, {1.0, 1.0});
    ChannelSet ch = raw;
    for (auto& hk : ch.h) hk /= 1e-2;  // noise normalization
    const ProblemSpec prob =
        ProblemSpec::ee(ch, Eigen::VectorXd::Constant(2, 0.5), 100.0, 0.35, 1003.0);
    const ScaResult res = sca_solve(prob);
    CHECK(res.report.feasible);
    CHECK(res.report.objective > 0.0);
    for (size_t i = 1; i < res.objective_history.size(); ++i)
        CHECK(res.objective_history[i] >= res.objective_history[i - 1] - 1e-7);
}
