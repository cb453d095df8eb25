#include <doctest.h>

#include <random>

#include "rsma/experiments.hpp"
#include "rsma/model.hpp"

using namespace rsma;

namespace {

ChannelSet two_user_orthogonal() {
    ChannelSet ch;
    ch.K = 2;
    ch.M = 2;
    ch.h.resize(2);
    ch.h[0].resize(2);
    ch.h[0] << std::complex<double>(1, 0), std::complex<double>(0, 0);
    ch.h[1].resize(2);
    ch.h[1] << std::complex<double>(0, 0), std::complex<double>(1, 0);
    return ch;
}

// straightforward independent reimplementation of the SINR formulas
Sinrs sinr_oracle(const ChannelSet& ch, const PrecoderSet& p) {
    Sinrs out;
    out.common.resize(ch.K);
    out.priv.resize(ch.K);
    for (int k = 0; k < ch.K; ++k) {
        std::complex<double> num_c = 0, num_p = 0;
        double den_all = 1.0, den_others = 1.0;
        for (int m = 0; m < ch.M; ++m) num_c += std::conj(ch.h[k](m)) * p.common(m);
        for (int j = 0; j < ch.K; ++j) {
            std::complex<double> dot = 0;
            for (int m = 0; m < ch.M; ++m) dot += std::conj(ch.h[k](m)) * p.priv[j](m);
            den_all += std::norm(dot);
            if (j != k) den_others += std::norm(dot);
            if (j == k) num_p = dot;
        }
        out.common(k) = std::norm(num_c) / den_all;
        out.priv(k) = std::norm(num_p) / den_others;
    }
    return out;
}

}  // namespace

TEST_CASE("sinr on orthogonal channels") {
    const ChannelSet ch = two_user_orthogonal();
    PrecoderSet p = PrecoderSet::zeros(2, 2);
    p.priv[0] << std::complex<double>(2, 0), std::complex<double>(0, 0);
    p.priv[1] << std::complex<double>(0, 0), std::complex<double>(1, 0);
    const Sinrs s = compute_sinrs(ch, p);
    CHECK(s.priv(0) == doctest::Approx(4.0));
    CHECK(s.priv(1) == doctest::Approx(1.0));
    CHECK(s.common(0) == doctest::Approx(0.0));
    CHECK(s.common(1) == doctest::Approx(0.0));
}

TEST_CASE("sinr of the zero precoder is zero") {
    const ChannelSet ch = two_user_orthogonal();
    const Sinrs s = compute_sinrs(ch, PrecoderSet::zeros(2, 2));
    CHECK(s.priv.maxCoeff() == 0.0);
    CHECK(s.common.maxCoeff() == 0.0);
}

TEST_CASE("sinr matches an independent reimplementation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const ChannelSet ch = gen_channels(100 + trial, 2, 2, {1.0, 0.5});
        PrecoderSet p = PrecoderSet::zeros(2, 2);
        for (int m = 0; m < 2; ++m) {
            p.common(m) = {gauss(rng), gauss(rng)};
            p.priv[0](m) = {gauss(rng), gauss(rng)};
            p.priv[1](m) = {gauss(rng), gauss(rng)};
        }
        const Sinrs a = compute_sinrs(ch, p);
        const Sinrs b = sinr_oracle(ch, p);
        for (int k = 0; k < 2; ++k) {
            CHECK(a.common(k) == doctest::Approx(b.common(k)).epsilon(1e-12));
            CHECK(a.priv(k) == doctest::Approx(b.priv(k)).epsilon(1e-12));
            CHECK(a.common(k) >= 0.0);
            CHECK(a.priv(k) >= 0.0);
        }
    }
}

TEST_CASE("sinr dimension mismatch throws") {
    const ChannelSet ch = two_user_orthogonal();
    PrecoderSet p = PrecoderSet::zeros(2, 3);
    CHECK_THROWS_AS(compute_sinrs(ch, p), std::invalid_argument);
}

TEST_CASE("objective value examples") {
    const ChannelSet ch = two_user_orthogonal();
    const PrecoderSet zeros = PrecoderSet::zeros(2, 2);
    {
        const ProblemSpec prob = ProblemSpec::wsr(
            ch, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2), 1.0);
        Eigen::VectorXd C = Eigen::VectorXd::Zero(2), g(2);
        g << 1.0, 3.0;
        CHECK(objective_value(prob, zeros, C, g) == doctest::Approx(3.0));
    }
    {
        Eigen::VectorXd u(2);
        u << 1.0, 0.0;
        const ProblemSpec prob =
            ProblemSpec::wsr(ch, u, Eigen::VectorXd::Zero(2), 1.0);
        Eigen::VectorXd C(2), g(2);
        C << 2.0, 5.0;
        g << 0.0, 7.0;
        CHECK(objective_value(prob, zeros, C, g) == doctest::Approx(2.0));
    }
    {
        const ProblemSpec prob = ProblemSpec::ee(ch, Eigen::VectorXd::Zero(2),
                                                 4.0, 0.35, 1.0);
        PrecoderSet p = PrecoderSet::zeros(2, 2);
        p.priv[0](0) = 1.0;  // total power 2
        p.priv[1](1) = 1.0;
        Eigen::VectorXd C(2), g(2);
        C << 1.0, 0.0;
        g << 1.0, 1.0;
        CHECK(objective_value(prob, p, C, g) ==
              doctest::Approx(3.0 / 1.7).epsilon(1e-12));
    }
}

TEST_CASE("feasibility checks") {
    const ChannelSet ch = two_user_orthogonal();
    const PrecoderSet zeros = PrecoderSet::zeros(2, 2);
    {
        const ProblemSpec prob = ProblemSpec::wsr(
            ch, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2), 1.0);
        const SolutionReport rep =
            check_feasibility(prob, zeros, Eigen::VectorXd::Zero(2));
        CHECK(rep.feasible);
        CHECK(rep.objective == doctest::Approx(0.0));
    }
    {
        const ProblemSpec prob = ProblemSpec::wsr(
            ch, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2), 1.0);
        const SolutionReport rep =
            check_feasibility(prob, zeros, Eigen::VectorXd::Zero(2));
        CHECK(!rep.feasible);
        bool qos_flagged = false;
        for (const auto& v : rep.violations)
            qos_flagged |= v.constraint.rfind("qos", 0) == 0;
        CHECK(qos_flagged);
    }
}

TEST_CASE("problem construction enforces mode constants") {
    const ChannelSet ch = two_user_orthogonal();
    const ProblemSpec wsr = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                             Eigen::VectorXd::Zero(2), 5.0);
    CHECK(wsr.mu == 0.0);
    CHECK(wsr.p_circuit == 1.0);
    const ProblemSpec ee =
        ProblemSpec::ee(ch, Eigen::VectorXd::Zero(2), 5.0, 0.35, 2.0);
    CHECK(ee.u.isApprox(Eigen::VectorXd::Ones(2)));
}

TEST_CASE("scheme application and variants") {
    const ChannelSet ch = two_user_orthogonal();
    SchemeConfig mulp{SchemeKind::MULP, std::nullopt};
    const ProblemSpec prob = ProblemSpec::wsr(ch, Eigen::VectorXd::Ones(2),
                                              Eigen::VectorXd::Zero(2), 1.0, mulp);
    const SchemePlan plan = SchemePlan::of(prob);
    CHECK(!plan.has_common);
    CHECK(plan.private_active[0]);
    CHECK(plan.common_rate_pinned[1]);

    SchemeConfig noma{SchemeKind::NOMA2, std::array<int, 2>{0, 1}};
    const ProblemSpec np = apply_scheme(noma, prob);
    const SchemePlan nplan = SchemePlan::of(np);
    CHECK(nplan.has_common);
    CHECK(nplan.private_active[0]);
    CHECK(!nplan.private_active[1]);  // weak private pinned
    CHECK(nplan.common_rate_pinned[0]);

    SchemeConfig unset{SchemeKind::NOMA2, std::nullopt};
    const auto variants = scheme_variants(apply_scheme(unset, prob));
    REQUIRE(variants.size() == 2);
    CHECK(variants[0].scheme.noma_order != variants[1].scheme.noma_order);

    ChannelSet one = ch;
    one.K = 1;
    one.h.resize(1);
    CHECK_THROWS_AS(
        ProblemSpec::wsr(one, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1),
                         1.0, unset),
        std::invalid_argument);
}

TEST_CASE("channel scaling invariance of the sinrs") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    const ChannelSet ch = gen_channels(5, 2, 2, {1.0, 1.0});
    PrecoderSet p = PrecoderSet::zeros(2, 2);
    for (int m = 0; m < 2; ++m) {
        p.common(m) = {gauss(rng), gauss(rng)};
        p.priv[0](m) = {gauss(rng), gauss(rng)};
        p.priv[1](m) = {gauss(rng), gauss(rng)};
    }
    const double c = 37.5;
    ChannelSet scaled = ch;
    for (auto& hk : scaled.h) hk *= c;
    PrecoderSet ps = p;
    ps.common /= c;
    for (auto& pk : ps.priv) pk /= c;
    const Sinrs a = compute_sinrs(ch, p);
    const Sinrs b = compute_sinrs(scaled, ps);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.priv(k) == doctest::Approx(b.priv(k)).epsilon(1e-9));
        CHECK(a.common(k) == doctest::Approx(b.common(k)).epsilon(1e-9));
    }
}
