#include <doctest.h>

#include <sstream>

#include "rsma/channel_io.hpp"
#include "rsma/experiments.hpp"

using namespace rsma;

TEST_CASE("channel generation is deterministic and documented-order") {
    const ChannelSet a = gen_channels(7, 2, 3, {1.0, 0.09});
    const ChannelSet b = gen_channels(7, 2, 3, {1.0, 0.09});
    for (int k = 0; k < 2; ++k) CHECK(a.h[k] == b.h[k]);
    const ChannelSet c = gen_channels(8, 2, 3, {1.0, 0.09});
    CHECK(a.h[0] != c.h[0]);
}

TEST_CASE("empirical channel variance matches the request") {
    const int draws = 2500;  // 10^4 complex entries across 4 antennas
    double acc1 = 0.0, acc2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const ChannelSet ch = gen_channels(1000 + i, 2, 4, {1.0, 0.09});
        acc1 += ch.h[0].squaredNorm() / 4.0;
        acc2 += ch.h[1].squaredNorm() / 4.0;
    }
    CHECK(acc1 / draws == doctest::Approx(1.0).epsilon(0.05));
    CHECK(acc2 / draws == doctest::Approx(0.09).epsilon(0.05));
}

TEST_CASE("convex hull examples") {
    {
        const auto hull = convex_hull({{0, 2}, {2, 0}, {1, 1}});
        REQUIRE(hull.size() == 2);
        CHECK(hull[0] == std::pair<double, double>{0, 2});
        CHECK(hull[1] == std::pair<double, double>{2, 0});
    }
    {
        const auto hull = convex_hull({{1, 1}});
        REQUIRE(hull.size() == 3);
        CHECK(hull[0] == std::pair<double, double>{0, 1});
        CHECK(hull[1] == std::pair<double, double>{1, 1});
        CHECK(hull[2] == std::pair<double, double>{1, 0});
    }
    {
        // collinear chain is deduplicated
        const auto hull = convex_hull({{0, 3}, {1, 2}, {2, 1}, {3, 0}});
        REQUIRE(hull.size() == 2);
    }
    {
        // hull dominates every input point
        const std::vector<std::pair<double, double>> pts = {
            {0.2, 1.9}, {1.0, 1.4}, {1.7, 0.4}, {0.9, 0.9}};
        const auto hull = convex_hull(pts);
        for (const auto& p : pts) {
            bool dominated = false;
            for (size_t i = 0; i + 1 < hull.size(); ++i) {
                const auto [x1, y1] = hull[i];
                const auto [x2, y2] = hull[i + 1];
                if (p.first < std::min(x1, x2) - 1e-12 ||
                    p.first > std::max(x1, x2) + 1e-12)
                    continue;
                const double t = (p.first - x1) / (x2 - x1 + 1e-300);
                if (y1 + t * (y2 - y1) >= p.second - 1e-9) dominated = true;
            }
            CHECK(dominated);
        }
    }
}

TEST_CASE("plan files round-trip through the parser") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::SumRateSweep;
    plan.snr_db = {5, 10, 15, 20, 25, 30};
    plan.qos = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    plan.seed_count = 4;
    plan.variances = {1.0, 1.0};
    const std::string text = serialize_plan(plan);
    const ExperimentPlan parsed = parse_plan(text);
    CHECK(serialize_plan(parsed) == text);
    CHECK(parsed.snr_db == plan.snr_db);
    CHECK(parsed.qos == plan.qos);
    CHECK(parsed.seed_count == plan.seed_count);
    CHECK(parsed.kind == plan.kind);
}

TEST_CASE("csv output is deterministic in serial mode") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::SumRateSweep;
    plan.K = plan.M = 2;
    plan.variances = {1.0, 1.0};
    plan.seed_base = 3;
    plan.seed_count = 2;
    plan.snr_db = {10.0};
    plan.qos = {0.1};
    plan.schemes = {SchemeKind::MULP};
    plan.eta = 0.05;
    plan.jobs = 1;
    const auto rows1 = sweep_sum_rate(plan);
    const auto rows2 = sweep_sum_rate(plan);
    CHECK(rows_to_csv(rows1, plan.K) == rows_to_csv(rows2, plan.K));
    CHECK(rows1.size() == 4);  // 2 seeds x 1 grid x 1 scheme x {BB, SCA}
    for (const auto& r : rows1)
        if (r.solver == "BB") CHECK(r.certified());
}

TEST_CASE("channel files round-trip") {
    const ChannelSet a = gen_channels(11, 2, 2, {1.0, 0.5});
    std::ostringstream os;
    write_channels(os, {a});
    std::istringstream is(os.str());
    const auto sets = read_channels(is);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].K == a.K);
    CHECK(sets[0].M == a.M);
    CHECK(sets[0].seed == a.seed);
    for (int k = 0; k < a.K; ++k)
        CHECK((sets[0].h[k] - a.h[k]).norm() == doctest::Approx(0.0));
}

TEST_CASE("bad channel file reports a parse error") {
    std::istringstream is("2 2\n1.0,0.0 broken\n");
    CHECK_THROWS(read_channels(is));
}
